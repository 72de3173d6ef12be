use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spiked-spectra"));
    for (k, _) in std::env::vars() {
        if k.starts_with("SPIKED_") {
            cmd.env_remove(k);
        }
    }
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn default_sumrule_suite_passes() {
    let o = run(&["sumrule"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("discrepancy") && header.contains("tol"));
    assert!(lines.all(|l| l.ends_with(",true")));
}

#[test]
fn failing_tolerance_exits_one_and_names_case() {
    let o = run(&[
        "--tol",
        "1e-30",
        "sumrule",
        "--case",
        "hermite",
        "theta=0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("hermite theta=0.5"), "{err}");
    assert!(stdout(&o).contains(",false"));
}

#[test]
fn invalid_input_exits_two() {
    assert_eq!(run(&["sumrule", "--case", "bogus"]).status.code(), Some(2));
    assert_eq!(
        run(&["sumrule", "--case", "gw", "g=3"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["--n", "1", "mc-spike"]).status.code(), Some(2));
    assert_eq!(
        run(&["qv", "--coeffs", "0,0,0,0,0,0,0,0,0,0,0,0,0,1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn same_seed_same_bytes() {
    let args = [
        "--seed",
        "7",
        "--n",
        "40",
        "--replicas",
        "6",
        "mc-spike",
        "--model",
        "laguerre",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.code().is_some());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "--seed",
        "8",
        "--n",
        "40",
        "--replicas",
        "6",
        "mc-spike",
        "--model",
        "laguerre",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn out_file_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let o = bin()
        .env("SPIKED_FORMAT", "json")
        .env("SPIKED_OUT", &path)
        .args(["laws", "--law", "sc", "--points", "5"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(rows.as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn verblunsky_table_carries_tolerance() {
    let o = run(&["--n", "10", "verblunsky"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    // Header plus alpha_0..=alpha_n.
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().next().unwrap().ends_with(",tol"));
}
