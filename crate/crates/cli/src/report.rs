use serde::Serialize;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Violation,
    Degenerate,
    Error,
}

impl Status {
    pub fn token(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Violation => "violation",
            Status::Degenerate => "degenerate",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub check: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub command: String,
    /// sha256 over the argument list, with file arguments replaced by the
    /// digest of their contents.
    pub inputs_digest: String,
    /// Sign convention pinned by the command, if any.
    pub convention: Option<String>,
    /// Computed quantities, in output order.
    pub values: Vec<(String, String)>,
    pub findings: Vec<Finding>,
    pub timing_ms: u128,
}

impl RunReport {
    /// 1 if any finding is an error or degenerate, else 2 if any is a
    /// violation, else 0.
    pub fn exit_code(&self) -> i32 {
        let has = |s: Status| self.findings.iter().any(|f| f.status == s);
        if has(Status::Error) || has(Status::Degenerate) {
            crate::EXIT_INPUT
        } else if has(Status::Violation) {
            crate::EXIT_VIOLATION
        } else {
            crate::EXIT_OK
        }
    }

    /// Line-delimited JSON: a header, one record per value and finding, and a
    /// trailer holding the exit code and timing.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        #[serde(tag = "record", rename_all = "lowercase")]
        enum Record<'a> {
            Run {
                command: &'a str,
                inputs_digest: &'a str,
                #[serde(skip_serializing_if = "Option::is_none")]
                convention: Option<&'a str>,
            },
            Value {
                key: &'a str,
                value: &'a str,
            },
            Finding(&'a Finding),
            End {
                exit_code: i32,
                timing_ms: u128,
            },
        }
        let mut records = vec![Record::Run {
            command: &self.command,
            inputs_digest: &self.inputs_digest,
            convention: self.convention.as_deref(),
        }];
        records.extend(self.values.iter().map(|(key, value)| Record::Value { key, value }));
        records.extend(self.findings.iter().map(Record::Finding));
        records.push(Record::End { exit_code: self.exit_code(), timing_ms: self.timing_ms });
        let mut out = String::new();
        for r in records {
            out.push_str(&serde_json::to_string(&r).expect("report records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self, body: &[String], verbosity: Verbosity) -> String {
        let mut out = String::new();
        if verbosity == Verbosity::Verbose {
            let _ = writeln!(out, "command  {}", self.command);
            let _ = writeln!(out, "inputs   sha256:{}", self.inputs_digest);
            if let Some(c) = &self.convention {
                let _ = writeln!(out, "convention  {c}");
            }
        }
        if verbosity != Verbosity::Quiet {
            for line in body {
                out.push_str(line);
                out.push('\n');
            }
        }
        for f in &self.findings {
            if verbosity == Verbosity::Quiet && f.status == Status::Ok {
                continue;
            }
            let _ = writeln!(out, "{:<10} {}: {}", f.status.token(), f.check, f.detail);
        }
        let ok = self.findings.iter().filter(|f| f.status == Status::Ok).count();
        let _ = writeln!(out, "{ok}/{} checks ok", self.findings.len());
        if verbosity == Verbosity::Verbose {
            let _ = writeln!(out, "time     {} ms", self.timing_ms);
        }
        out
    }
}

/// Read from `CYLHOM_VERBOSITY`: `quiet` prints only failing checks,
/// `verbose` adds the input digest and timing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Verbosity {
    Quiet,
    #[default]
    Normal,
    Verbose,
}

pub const VERBOSITY_VAR: &str = "CYLHOM_VERBOSITY";

impl Verbosity {
    pub fn from_env() -> Result<Self, String> {
        match std::env::var(VERBOSITY_VAR) {
            Err(_) => Ok(Verbosity::Normal),
            Ok(v) => match v.as_str() {
                "quiet" => Ok(Verbosity::Quiet),
                "" | "normal" => Ok(Verbosity::Normal),
                "verbose" => Ok(Verbosity::Verbose),
                other => Err(format!("{VERBOSITY_VAR} must be quiet, normal or verbose, got '{other}'")),
            },
        }
    }
}
