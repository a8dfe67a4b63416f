use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn pclass() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pclass"));
    c.env_remove("PCLASS_PRECISION");
    c
}

fn scratch(name: &str) -> PathBuf {
    static N: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("pclass-cli-{}-{}-{name}", std::process::id(), N.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write_corpus(dir: &Path, lines: &[&str]) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    std::fs::write(&path, lines.join("\n")).unwrap();
    path
}

#[test]
fn analyze_prints_a_schema_one_report() {
    let o = pclass().args(["analyze", "--p", "3", "--ell", "7", "--a", "7"]).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["case"]["ell"], 7);
    assert!(r["checks"].as_object().unwrap().values().all(|v| v != "fail"));
    assert_eq!(r["spec_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn negative_and_symbolic_arguments_parse() {
    for a in ["-1", "pi*u", "u*zeta^2"] {
        let ell = if a == "-1" { "2" } else { "3" };
        let p = if a == "-1" { "2" } else { "3" };
        let o = pclass().args(["analyze", "--p", p, "--ell", ell, "--a", a]).output().unwrap();
        assert_eq!(code(&o), 0, "{a}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = pclass().args(["analyze", "--p", "2", "--backend", "quadratic", "--a", "-3"]).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["case"]["backend"], "quadratic");
}

#[test]
fn configuration_errors_exit_with_two() {
    let bad: &[&[&str]] = &[
        &["analyze", "--p", "3", "--ell", "7", "--a", "x"],
        &["analyze", "--p", "3", "--ell", "7", "--a", "8"],
        &["analyze", "--p", "3", "--ell", "5", "--a", "5"],
        &["analyze", "--p", "3", "--ell", "7", "--a", "7", "--precision", "4"],
        &["analyze", "--p", "2", "--backend", "quadratic", "--a", "pi"],
        &["analyze", "--p", "2", "--backend", "quadratic", "--ell", "3", "--a", "5"],
        &["analyze", "--a", "7"],
        &["frobnicate"],
    ];
    for args in bad {
        let o = pclass().args(*args).output().unwrap();
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn precision_comes_from_the_environment() {
    let o = pclass().env("PCLASS_PRECISION", "16").args(["analyze", "--p", "3", "--ell", "7", "--a", "7"]).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["precision"], 16);
    let o = pclass().env("PCLASS_PRECISION", "16").args(["analyze", "--p", "3", "--ell", "7", "--a", "7", "--precision", "24"]).output().unwrap();
    assert_eq!(json(&o)["precision"], 24);
    let o = pclass().env("PCLASS_PRECISION", "lots").args(["analyze", "--p", "3", "--ell", "7", "--a", "7"]).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn report_file_and_log_are_written() {
    let dir = scratch("out");
    let out = dir.join("report.json");
    let log = dir.join("run.jsonl");
    let args = ["analyze", "--p", "2", "--ell", "5", "--a", "5"];
    let o = pclass().args(args).arg("--out").arg(&out).arg("--log").arg(&log).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let first = std::fs::read_to_string(&out).unwrap();
    pclass().args(args).arg("--out").arg(&out).arg("--log").arg(&log).output().unwrap();
    assert_eq!(first, std::fs::read_to_string(&out).unwrap(), "reports are deterministic");
    let lines: Vec<serde_json::Value> =
        std::fs::read_to_string(&log).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        assert_eq!(l["spec_hash"], report["spec_hash"]);
        assert_eq!(l["exit_code"], 0);
    }
}

#[test]
fn verify_runs_the_shipped_corpus() {
    let dir = scratch("corpus");
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus/local.jsonl");
    let log = dir.join("run.jsonl");
    let o = pclass().arg("verify").arg("--corpus").arg(&corpus).arg("--log").arg(&log).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&o);
    assert!(s["cases"].as_u64().unwrap() >= 50);
    assert_eq!(s["passed"], s["cases"]);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count() as u64, s["cases"].as_u64().unwrap());
}

#[test]
fn verify_exit_codes_follow_the_worst_case() {
    let dir = scratch("verify");
    let log = dir.join("run.jsonl");
    let ok = r#"{"p":3,"backend":"local","ell":7,"a":"7"}"#;
    let faulted = r#"{"p":3,"backend":"local","ell":7,"a":"7","fault":"sigma"}"#;
    let unsupported = r#"{"p":3,"backend":"local","ell":5,"a":"5"}"#;
    let exhausted = r#"{"p":3,"backend":"local","ell":7,"a":"7","fault":"precision"}"#;
    let run = |lines: &[&str]| {
        let corpus = write_corpus(&dir, lines);
        let o = pclass().arg("verify").arg("--corpus").arg(&corpus).arg("--log").arg(&log).output().unwrap();
        (code(&o), json(&o))
    };
    assert_eq!(run(&[]).0, 0);
    assert_eq!(run(&["# comment", "", ok]).0, 0);
    let (c, s) = run(&[ok, faulted]);
    assert_eq!(c, 1);
    assert_eq!(s["failed"], 1);
    assert!(s["outcomes"][1]["failed_checks"].as_array().unwrap().iter().any(|v| v == "construction"));
    assert_eq!(run(&[ok, faulted, unsupported]).0, 2);
    let (c, s) = run(&[ok, exhausted]);
    assert_eq!(c, 3);
    assert_eq!(s["backend_errors"], 1);
    let corpus = write_corpus(&dir, &[r#"{"p":3,"backend":"local","ell":7,"a":"7","colour":"red"}"#]);
    let o = pclass().arg("verify").arg("--corpus").arg(&corpus).arg("--log").arg(&log).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = pclass().arg("verify").arg("--corpus").arg(dir.join("missing.jsonl")).arg("--log").arg(&log).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn analyze_reports_backend_failure_with_three() {
    // precision loss at every retry is the only route to this code; the fault forces it
    let dir = scratch("backend");
    let corpus = write_corpus(&dir, &[r#"{"p":2,"backend":"local","ell":5,"a":"5","fault":"precision","precision":8}"#]);
    let log = dir.join("run.jsonl");
    let o = pclass().arg("verify").arg("--corpus").arg(&corpus).arg("--log").arg(&log).output().unwrap();
    assert_eq!(code(&o), 3);
    let entry: serde_json::Value = serde_json::from_str(std::fs::read_to_string(&log).unwrap().lines().next().unwrap()).unwrap();
    assert!(entry["error"].as_str().unwrap().contains("640"), "{entry}");
}

#[test]
fn random_is_deterministic_and_accepts_zero_trials() {
    let run = |args: &[&str]| pclass().arg("random").args(args).output().unwrap();
    let a = run(&["--p", "3", "--dim", "6", "--trials", "20", "--seed", "9"]);
    let b = run(&["--p", "3", "--dim", "6", "--trials", "20", "--seed", "9"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["failures"], 0);
    let z = run(&["--p", "5", "--trials", "0"]);
    assert_eq!(code(&z), 0);
    assert_eq!(json(&z)["trials"], 0);
    assert_eq!(code(&run(&["--p", "4"])), 2);
    assert_eq!(code(&run(&["--p", "2", "--dim", "1000"])), 2);
}
