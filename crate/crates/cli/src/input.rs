//! Input loading and the inline list syntax.
//!
//! Inline lists: numbers separated by commas, rows or vectors separated by
//! semicolons (`1,0;0,1/2`). An argument starting with `@` names a file with
//! the same content, one row per line allowed. Mode lists are `index:value`
//! pairs (`1:1.0,-2:0.5`).

use cylhom::dataset::{load_dataset, parse_records, Diagnostic, Diagnostics, ModuliDataset};
use cylhom::rational::{parse_rational, Q};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Reads and validates dataset files together: orbit and curve records may
/// appear in any of them. Syntax errors are reported with their line and
/// semantic checks are delegated to [`load_dataset`].
pub fn validate_files<P: AsRef<Path>>(paths: &[P]) -> std::io::Result<Result<ModuliDataset, Diagnostics>> {
    let mut orbits = Vec::new();
    let mut curves = Vec::new();
    let mut diags: Vec<Diagnostic> = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let text = std::fs::read_to_string(p)?;
        let (recs, d) = parse_records(&text, &p.display().to_string());
        orbits.extend(recs.orbits);
        curves.extend(recs.curves);
        diags.extend(d);
    }
    if !diags.is_empty() {
        return Ok(Err(Diagnostics(diags)));
    }
    Ok(load_dataset(orbits, curves))
}

/// Files read during a run, with content digests.
#[derive(Default)]
pub struct Inputs {
    pub files: Vec<(PathBuf, String)>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.note(path, text.as_bytes());
        Ok(text)
    }

    fn note(&mut self, path: &Path, bytes: &[u8]) {
        self.files.push((path.to_path_buf(), hex(&Sha256::digest(bytes))));
    }

    pub fn dataset(&mut self, paths: &[&Path]) -> Result<Result<ModuliDataset, Diagnostics>, String> {
        for p in paths {
            self.read(p)?;
        }
        validate_files(paths).map_err(|e| e.to_string())
    }

    /// Digest of the argument list with file arguments replaced by the digest
    /// of their contents, so that moving a file does not change it.
    pub fn digest(&self, args: &[String]) -> String {
        let mut h = Sha256::new();
        for a in args {
            let token = match self.files.iter().find(|(p, _)| Path::new(a.trim_start_matches('@')) == p.as_path()) {
                Some((_, d)) => format!("file:{d}"),
                None => a.clone(),
            };
            h.update(token.as_bytes());
            h.update([0]);
        }
        hex(&h.finalize())
    }

    /// Inline list text, or the contents of the file after `@`.
    pub fn inline(&mut self, arg: &str) -> Result<String, String> {
        match arg.strip_prefix('@') {
            Some(path) => self.read(Path::new(path)),
            None => Ok(arg.to_string()),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn split_rows(text: &str) -> Vec<&str> {
    text.split([';', '\n']).map(str::trim).filter(|r| !r.is_empty() && !r.starts_with('#')).collect()
}

pub fn rational_rows(text: &str) -> Result<Vec<Vec<Q>>, String> {
    split_rows(text)
        .into_iter()
        .map(|row| row.split([',', ' ']).filter(|x| !x.is_empty()).map(parse_rational).collect())
        .collect()
}

pub fn float_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<f64>().map_err(|_| format!("'{x}' is not a number")))
        .collect()
}

pub fn float_rows(text: &str) -> Result<Vec<Vec<f64>>, String> {
    split_rows(text).into_iter().map(float_list).collect()
}

pub fn mode_list(text: &str) -> Result<Vec<(i64, f64)>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|pair| {
            let (i, v) = pair.split_once(':').ok_or_else(|| format!("expected index:value, got '{pair}'"))?;
            let i: i64 = i.trim().parse().map_err(|_| format!("'{i}' is not a mode index"))?;
            let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
            Ok((i, v))
        })
        .collect()
}

pub fn sign_pair(text: &str) -> Result<(i8, i8), String> {
    let v: Vec<i8> = text
        .split(',')
        .map(|x| match x.trim() {
            "1" | "+1" | "+" => Ok(1),
            "-1" | "-" => Ok(-1),
            other => Err(format!("'{other}' is not a sign")),
        })
        .collect::<Result<_, _>>()?;
    match v[..] {
        [a, b] => Ok((a, b)),
        _ => Err(format!("expected two signs, got '{text}'")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cylhom::rational::{q, qr};

    #[test]
    fn inline_syntax() {
        assert_eq!(rational_rows("1,0;-1/2,3").unwrap(), vec![vec![q(1), q(0)], vec![qr(-1, 2), q(3)]]);
        assert_eq!(rational_rows("").unwrap(), Vec::<Vec<Q>>::new());
        assert!(rational_rows("1/0").is_err());
        assert_eq!(mode_list("1:1.5, -2:0.5").unwrap(), vec![(1, 1.5), (-2, 0.5)]);
        assert_eq!(sign_pair("-1,+1").unwrap(), (-1, 1));
        assert!(sign_pair("1").is_err());
        assert_eq!(float_rows("1,0.5\n0,1").unwrap(), vec![vec![1.0, 0.5], vec![0.0, 1.0]]);
    }
}
