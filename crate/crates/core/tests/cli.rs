use std::path::Path;
use std::process::Command;

use qdtransfer::cli::{columns, run, Experiment, RunConfig};

const EXPERIMENTS: [Experiment; 6] = [
    Experiment::Entangle,
    Experiment::Transfer,
    Experiment::Echo,
    Experiment::Fringe,
    Experiment::Lossbudget,
    Experiment::Eq5check,
];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qdtransfer"))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn header_row(csv: &str) -> &str {
    csv.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn column_sets_match_golden() {
    let expected: Vec<String> = golden("columns.txt").lines().map(str::to_owned).collect();
    let got: Vec<String> = EXPERIMENTS.iter().map(|&e| columns(e).join(",")).collect();
    assert_eq!(got, expected);
}

#[test]
fn emitted_headers_match_golden() {
    let expected: Vec<String> = golden("columns.txt").lines().map(str::to_owned).collect();
    for (e, want) in EXPERIMENTS.iter().zip(&expected) {
        let mut c = RunConfig::new(*e);
        c.engine = qdtransfer::protocol::Engine::Exact;
        c.sweep.spans_ns = vec![38.0, 1000.0, 3000.0];
        c.eq5.samples = 2;
        let out = run(&c).unwrap();
        assert_eq!(header_row(&out.csv), want);
    }
}

#[test]
fn lossbudget_output_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("loss.csv");
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/lossbudget.toml");
    let status = bin().arg("lossbudget").arg("--config").arg(&config).arg("--out").arg(&out).output().unwrap().status;
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), golden("lossbudget.csv"));
}

#[test]
fn noise_free_transfer_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ideal.toml");
    std::fs::write(&config, "experiment = \"transfer\"\nprofile = \"ideal\"\n").unwrap();
    let out = bin()
        .args(["transfer", "--trials", "10000", "--engine", "mc", "--out"])
        .arg(dir.path().join("t.csv"))
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for target in ["h ", "d_plus ", "sigma_plus "] {
        let line = stdout.lines().find(|l| l.starts_with(target)).unwrap();
        assert!(line.contains("1.0000 ± 0.0000"), "{line}");
    }
    assert!(stdout.contains("classical bound"));
}

#[test]
fn runs_are_byte_identical_and_echo_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    for p in [&a, &b] {
        let s = bin().args(["entangle", "--trials", "3000", "--seed", "77", "--out"]).arg(p).output().unwrap().status;
        assert!(s.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    assert!(!first.contains(&b'\r'));

    let echo: String = String::from_utf8(first.clone())
        .unwrap()
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect();
    let config = dir.path().join("echo.toml");
    std::fs::write(&config, echo).unwrap();
    let s = bin().arg("entangle").arg("--config").arg(&config).arg("--out").arg(&c).output().unwrap().status;
    assert!(s.success());
    assert_eq!(std::fs::read(&c).unwrap(), first);
}

#[test]
fn exit_codes_follow_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "experiment = \"echo\"\ntrials = \"many\"\n").unwrap();
    let code = |args: &[&str], config: Option<&Path>| {
        let mut cmd = bin();
        cmd.args(args);
        if let Some(c) = config {
            cmd.arg("--config").arg(c);
        }
        cmd.output().unwrap().status.code()
    };
    assert_eq!(code(&["echo"], Some(&bad)), Some(2));
    std::fs::write(&bad, "experiment = \"echo\"\n[noise.spin]\nt2_star = 1.0\n").unwrap();
    assert_eq!(code(&["echo"], Some(&bad)), Some(2));
    std::fs::write(&bad, "experiment = \"echo\"\n[noise.spin]\nreadout_fidelity = 1.5\n").unwrap();
    assert_eq!(code(&["echo"], Some(&bad)), Some(3));
    assert_eq!(code(&["transfer", "--trials", "0"], None), Some(3));
    assert_eq!(code(&["lossbudget", "--out", "/nonexistent-dir/x.csv"], None), Some(4));
    assert_eq!(code(&["lossbudget"], Some(&dir.path().join("missing.toml"))), Some(4));
}
