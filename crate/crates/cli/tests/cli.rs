use cylhom_cli::{run, validate_files, Outcome, Status, EXIT_INPUT, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use std::path::PathBuf;
use std::process::Command;

fn ex(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../ex").join(name).display().to_string()
}

fn cli(args: &[&str]) -> Outcome {
    run(args)
}

fn check_status(out: &Outcome, check: &str) -> Status {
    out.report.as_ref().unwrap().findings.iter().find(|f| f.check == check).unwrap_or_else(|| panic!("no finding {check}")).status
}

fn value(out: &Outcome, key: &str) -> String {
    out.report.as_ref().unwrap().values.iter().find(|(k, _)| k == key).unwrap().1.clone()
}

#[test]
fn spectrum_lists_epsilon() {
    let out = cli(&["spectrum", "--type", "pos_hyp", "--eps", "0.5", "--max", "1"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert_eq!(value(&out, "lambda[1]"), "0.5");
    assert_eq!(value(&out, "lambda[-1]"), "-0.5");
    assert!(out.stdout.contains("    1  0.5  0"));
}

#[test]
fn spectrum_numeric_oracle() {
    let out = cli(&["spectrum", "--type", "neg_hyp", "--eps", "0.3", "--numeric"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert_eq!(check_status(&out, "numeric-oracle"), Status::Ok);
}

#[test]
fn corrupted_dataset_names_the_pair() {
    let out = cli(&["d-squared", "--orbits", &ex("orbits.txt"), "--curves", &ex("bad.txt")]);
    assert_eq!(out.code, EXIT_VIOLATION);
    assert_eq!(value(&out, "offending_pair[0]"), "a,c");
    assert!(out.stdout.contains("offending pair (a, c)"));
}

#[test]
fn consistent_dataset_passes_everything() {
    let (o, c) = (ex("orbits.txt"), ex("curves.txt"));
    for args in [
        vec!["d-squared", "--orbits", &o, "--curves", &c],
        vec!["homology", "--orbits", &o, "--curves", &c],
        vec!["chainmap-check", "--orbits", &o, "--curves", &c, "--map", "1"],
        vec!["homotopy-check", "--orbits", &o, "--curves", &c],
    ] {
        let out = cli(&args);
        assert_eq!(out.code, EXIT_OK, "{args:?}\n{}", out.stdout);
    }
}

#[test]
fn nondivisible_counts_are_flagged() {
    let out = cli(&["d-squared", "--orbits", &ex("orbits.txt"), "--curves", &ex("nondivisible.txt")]);
    assert_eq!(check_status(&out, "integer-coefficients"), Status::Violation);
    assert_eq!(out.code, EXIT_VIOLATION);
}

#[test]
fn cover_index_example() {
    let out = cli(&["cover-index", "--base", "-1", "--degree", "3", "--branch", "0"]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!(out.stdout.lines().next(), Some("-3"));
    let rh = cli(&["cover-index", "--base", "1", "--degree", "2", "--branch", "2", "--base-chi", "0", "--cover-chi", "-3"]);
    assert_eq!(check_status(&rh, "riemann-hurwitz"), Status::Violation);
    let rh = cli(&["cover-index", "--base", "1", "--degree", "2", "--branch", "2", "--base-chi", "0", "--cover-chi", "-2"]);
    assert_eq!(rh.code, EXIT_OK);
    assert_eq!(value(&rh, "ind"), "4");
}

#[test]
fn index_of_a_bundled_cylinder() {
    let out = cli(&["index", "--orbits", &ex("orbits.txt"), "--plus", "a", "--minus", "b1", "--expect", "1"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    let out = cli(&["index", "--orbits", &ex("orbits.txt"), "--plus", "a", "--minus", "nowhere"]);
    assert_eq!(out.code, EXIT_INPUT);
}

#[test]
fn transversality_criterion() {
    assert_eq!(cli(&["transversality", "--ind", "1"]).code, EXIT_OK);
    assert_eq!(cli(&["transversality", "--ind", "0", "--gamma0", "2"]).code, EXIT_VIOLATION);
    let out = cli(&["transversality", "--ind", "2", "--type", "pos_hyp", "--eps", "0.3", "--cz", "0"]);
    assert_eq!(check_status(&out, "winding-bounds"), Status::Ok);
}

#[test]
fn direct_limit_of_the_bundled_sequence() {
    let out = cli(&["direct-limit", "--orbits", &ex("limit_orbits.txt"), "--curves", &ex("limit_curves.txt")]);
    assert_eq!(out.code, EXIT_OK);
    assert_eq!((value(&out, "dim[0]"), value(&out, "dim[1]")), ("1".into(), "1".into()));
}

#[test]
fn evaluation_maps() {
    for spec in ["ev2.txt", "ev3.txt"] {
        let out = cli(&["ev", "--spec", &ex(spec)]);
        assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
        assert_eq!(check_status(&out, "zero-locus"), Status::Ok);
    }
    let out = cli(&["ev", "--spec", &ex("ev2.txt"), "--paths", "--t-grid", ""]);
    assert_eq!(check_status(&out, "paths"), Status::Ok);
}

#[test]
fn glue_subcommands() {
    for args in [
        vec!["glue", "momo-check", "--t", "45"],
        vec!["glue", "pairing", "--neck", &ex("neck.txt")],
        vec!["glue", "case-b", "--k", "3", "--t-minus", "50"],
        vec!["glue", "sweep", "--t-grid", "90,100", "--r-grid", "4"],
    ] {
        let out = cli(&args);
        assert_eq!(out.code, EXIT_OK, "{args:?}\n{}", out.stdout);
    }
    let out = cli(&["glue", "momo-check", "--t", "30"]);
    assert_eq!(out.code, EXIT_INPUT, "T = 30 violates T > 2 T0");
}

#[test]
fn sign_subcommands() {
    let out = cli(&["sign", "comparison", "--matrix", "1,0;0,0", "--e", "0,1", "--ker", "0,1", "--coker", "0,1"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    assert_eq!(out.report.as_ref().unwrap().convention.as_deref(), Some(cylhom::orientation::CONTRACTION_CONVENTION));
    let n = cli(&["sign", "ds0", "--k", "3", "--pole", "north", "--jacobian", "1,0;0,1", "--lambda", "0.5,6.3"]);
    let s = cli(&["sign", "ds0", "--k", "3", "--pole", "south", "--jacobian", "1,0;0,1", "--lambda", "0.5,6.3"]);
    assert_eq!((value(&n, "sign"), value(&s, "sign")), ("1".into(), "-1".into()));
    assert_eq!(value(&cli(&["sign", "glued", "--s1", "1", "--s2", "-1", "--direction", "away"]), "sign"), "1");
    assert_eq!(cli(&["sign", "arc", "--ends", "1,1", "--flat", "-1,1"]).code, EXIT_OK);
    assert_eq!(cli(&["sign", "arc", "--ends", "1,1", "--flat", "1,1"]).code, EXIT_VIOLATION);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(cli(&["spectrum", "--type", "pos_hyp", "--eps", "0.5", "--bogus"]).code, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(cli(&["spectrum", "--type", "parabolic", "--eps", "0.5"]).code, EXIT_USAGE);
    let help = cli(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("d-squared") && help.stdout.contains("homotopy-check"));
}

#[test]
fn input_errors_exit_1() {
    let out = cli(&["d-squared", "--orbits", "/nonexistent/orbits.txt", "--curves", &ex("curves.txt")]);
    assert_eq!(out.code, EXIT_INPUT);
    assert_eq!(out.report.unwrap().findings.last().unwrap().status, Status::Error);
}

#[test]
fn exit_code_follows_statuses() {
    let runs = [
        cli(&["d-squared", "--orbits", &ex("orbits.txt"), "--curves", &ex("bad.txt")]),
        cli(&["sign", "arc", "--ends", "1,1", "--flat", "1,1"]),
        cli(&["cover-index", "--base", "2", "--degree", "2"]),
        cli(&["glue", "momo-check", "--t", "30"]),
    ];
    for out in runs {
        let r = out.report.as_ref().unwrap();
        let worst = r.findings.iter().map(|f| f.status).collect::<Vec<_>>();
        let expected = if worst.iter().any(|s| matches!(s, Status::Error | Status::Degenerate)) {
            EXIT_INPUT
        } else if worst.contains(&Status::Violation) {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        };
        assert_eq!(out.code, expected);
    }
}

fn strip_timing(jsonl: &str) -> Vec<serde_json::Value> {
    jsonl
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            v.as_object_mut().unwrap().remove("timing_ms");
            v
        })
        .collect()
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("r{i}.jsonl"));
        let p = path.display().to_string();
        let out = cli(&["d-squared", "--orbits", &ex("orbits.txt"), "--curves", &ex("bad.txt"), "--report", &p]);
        assert_eq!(out.code, EXIT_VIOLATION);
        texts.push(std::fs::read_to_string(&path).unwrap());
    }
    assert_eq!(strip_timing(&texts[0]), strip_timing(&texts[1]));
    let records = strip_timing(&texts[0]);
    assert_eq!(records[0]["record"], "run");
    assert_eq!(records[0]["command"], "d-squared");
    assert!(records.iter().any(|r| r["record"] == "finding" && r["status"] == "violation"));
    assert_eq!(records.last().unwrap()["exit_code"], 2);
}

#[test]
fn digest_depends_on_content_not_location() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o.txt");
    let c = dir.path().join("c.txt");
    std::fs::copy(ex("orbits.txt"), &o).unwrap();
    std::fs::copy(ex("curves.txt"), &c).unwrap();
    let digest = |o: &str, c: &str| cli(&["homology", "--orbits", o, "--curves", c]).report.unwrap().inputs_digest;
    let here = digest(&ex("orbits.txt"), &ex("curves.txt"));
    assert_eq!(here, digest(&o.display().to_string(), &c.display().to_string()));
    std::fs::write(&c, std::fs::read_to_string(&c).unwrap() + "\n# edited\n").unwrap();
    assert_ne!(here, digest(&o.display().to_string(), &c.display().to_string()));
}

#[test]
fn report_to_stdout() {
    let out = cli(&["cover-index", "--base", "1", "--degree", "2", "--report", "-"]);
    let records = strip_timing(&out.stdout);
    assert_eq!(records[1], serde_json::json!({"record": "value", "key": "ind", "value": "2"}));
}

#[test]
fn validate_files_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    let ds = validate_files(&[&empty]).unwrap().unwrap();
    assert!(ds.orbits.is_empty() && ds.curves.is_empty());

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "orbit a simple=a mult=1 type=pos_hyp action=4 cz=2\n\norbit b simple=b mult=1 type=pos_hyp action=1/0 cz=2\n").unwrap();
    let d = validate_files(&[&bad]).unwrap().unwrap_err();
    assert_eq!(d.0.len(), 1);
    assert_eq!(d.0[0].at.line, 3);

    let dup = dir.path().join("dup.txt");
    std::fs::write(&dup, "orbit a simple=a mult=1 type=pos_hyp action=4 cz=2\norbit a simple=a mult=1 type=pos_hyp action=4 cz=2\n").unwrap();
    let d = validate_files(&[&dup]).unwrap().unwrap_err();
    assert_eq!(d.0[0].at.line, 2);
    assert!(d.0[0].message.contains("line 1"), "{}", d.0[0].message);
}

#[test]
fn binary_honours_verbosity() {
    let bin = env!("CARGO_BIN_EXE_cylhom");
    let args = ["d-squared", "--orbits", &ex("orbits.txt"), "--curves", &ex("bad.txt")];
    let quiet = Command::new(bin).args(args).env("CYLHOM_VERBOSITY", "quiet").output().unwrap();
    assert_eq!(quiet.status.code(), Some(EXIT_VIOLATION));
    let text = String::from_utf8(quiet.stdout).unwrap();
    assert!(text.contains("violation") && !text.contains("ok         d-squared[stage 1]"));
    let verbose = Command::new(bin).args(args).env("CYLHOM_VERBOSITY", "verbose").output().unwrap();
    let text = String::from_utf8(verbose.stdout).unwrap();
    assert!(text.contains("inputs   sha256:") && text.contains("time "));
    let wrong = Command::new(bin).args(args).env("CYLHOM_VERBOSITY", "loud").output().unwrap();
    assert_eq!(wrong.status.code(), Some(EXIT_USAGE));
}
