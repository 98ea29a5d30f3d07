use std::process::{Command, Output};

fn prmzi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prmzi")).args(args).output().unwrap()
}

fn values(out: &Output) -> Vec<f64> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn sweep_row_count() {
    let out = prmzi(&["sweep", "--metric", "lambda1", "--loss", "0.10", "--n", "400"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 160_001);
    assert_eq!(text.lines().next(), Some("phi,theta0,value"));
}

#[test]
fn sweep_value_ranges() {
    let out = prmzi(&["sweep", "--metric", "lambda3", "--loss", "0.20", "--n", "100"]);
    assert!(values(&out).iter().all(|&v| v >= 1.0));
    let out = prmzi(&["sweep", "--metric", "lambda2", "--loss", "0.05", "--n", "100"]);
    assert!(values(&out).iter().cloned().fold(f64::MIN, f64::max) > 1.0);
}

#[test]
fn optimize_columns() {
    let out = prmzi(&["optimize", "--metric", "lambda1", "--losses", "0.05,0.10,0.15,0.20"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let maxima: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(maxima.len(), 4);
    assert!(maxima.windows(2).all(|w| w[1] < w[0]));
    assert!((maxima[1] - 9.32).abs() < 0.05);

    let out = prmzi(&["optimize", "--metric", "lambda2", "--losses", "1.0"]);
    let row = String::from_utf8(out.stdout).unwrap();
    let lambda_max: f64 = row.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((lambda_max - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let out = prmzi(&["point", "--loss", "0", "--phi", "3.14159265", "--theta0", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("resonant_pole"));

    assert_eq!(prmzi(&["verify"]).status.code(), Some(0));
    assert_eq!(prmzi(&["verify", "--stages", "1"]).status.code(), Some(1));
    let out = prmzi(&["verify", "--losses", "1.0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("oracle_equivalence,0,"));

    assert_eq!(prmzi(&["sweep", "--metric", "lambda1", "--loss", "0.1", "--n", "20000"]).status.code(), Some(2));
    assert_eq!(prmzi(&["--help"]).status.code(), Some(0));
}

#[test]
fn failed_run_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = prmzi(&["sweep", "--metric", "lambda1", "--loss", "-1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
