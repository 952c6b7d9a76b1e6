use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const CHAIN_NN: &str = "dz1,J,J3\n1,1,1\n";
const CHAIN_ANTI: &str = "dz1,J,J3\n1,-1,-1\n";

fn magnon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magnon"))
        .args(args)
        .env_remove("MAGNON_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_case(dir: &Path, couplings: &str, body: &str) -> PathBuf {
    fs::write(dir.join("couplings.csv"), couplings).unwrap();
    let cfg = dir.join("run.toml");
    fs::write(&cfg, format!("couplings = \"couplings.csv\"\n{body}")).unwrap();
    cfg
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    magnon(&args)
}

const CHAIN8: &str = "lattice.dim = 1\nlattice.size = 8\nbeta = 2.0\nh = 0.5\n";

#[test]
fn validate_accepts_ferromagnet() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, CHAIN8);
    let out = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("validate.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["lattice"]["size"], 8);
}

#[test]
fn validate_rejects_antiferromagnet() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_ANTI, CHAIN8);
    let out = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_coupling_file_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, format!("couplings = \"absent.csv\"\n{CHAIN8}")).unwrap();
    let out = run("validate", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_key_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, &format!("{CHAIN8}solve.tolerance = 1e-9\n"));
    let out = run("solve", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_flag_is_usage_error() {
    assert_eq!(magnon(&["solve"]).status.code(), Some(2));
}

#[test]
fn solve_writes_csv_with_config_preamble() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, CHAIN8);
    let out = run("solve", &cfg, dir.path(), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("solve.csv")).unwrap();
    assert!(text.contains("# lattice.size = 8"));
    assert!(text.contains("# m_star = "));
    assert!(text.lines().any(|l| l == "q1,D,n,eps"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 9);
}

#[test]
fn solve_is_idempotent() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, CHAIN8);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run("solve", &cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(run("solve", &cfg, &b, &["--threads", "2"]).status.code(), Some(0));
    assert_eq!(fs::read(a.join("solve.json")).unwrap(), fs::read(b.join("solve.json")).unwrap());
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, CHAIN8);
    let env_dir = dir.path().join("env");
    let out = Command::new(env!("CARGO_BIN_EXE_magnon"))
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .env("MAGNON_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env_dir.join("solve.json").is_file());
}

#[test]
fn oracle_reports_decreasing_discrepancy() {
    let dir = TempDir::new().unwrap();
    let body = "lattice.dim = 1\nlattice.size = 2\nbeta = 1.0\nh = 2.5\noracle.copies = [1, 3, 5]\noracle.q = [1]\n";
    let cfg = write_case(dir.path(), CHAIN_NN, body);
    let out = run("oracle", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 3);
    assert_eq!(table["strictly_decreasing"], true);
}

#[test]
fn oracle_rejects_even_copies() {
    let dir = TempDir::new().unwrap();
    let body = "lattice.dim = 1\nlattice.size = 2\nbeta = 1.0\nh = 2.5\noracle.copies = [2]\n";
    let cfg = write_case(dir.path(), CHAIN_NN, body);
    assert_eq!(run("oracle", &cfg, dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn dynamics_with_empty_times_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, &format!("{CHAIN8}dynamics.times = []\n"));
    let out = run("dynamics", &cfg, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("dynamics.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data, vec!["t,x1,density"]);
    assert!(dir.path().join("dynamics_gamma.json").is_file());
}

#[test]
fn dynamics_packet_conserves_number() {
    let dir = TempDir::new().unwrap();
    let body = format!("{CHAIN8}dynamics.initial = \"packet\"\ndynamics.times = [0.0, 1.0, 3.0]\ndynamics.packet.number = 2.0\n");
    let cfg = write_case(dir.path(), CHAIN_NN, &body);
    let out = run("dynamics", &cfg, dir.path(), &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("dynamics.csv")).unwrap();
    let mut totals = [0.0f64; 3];
    let mut times = Vec::new();
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        if !times.contains(&cols[0].to_string()) {
            times.push(cols[0].to_string());
        }
        totals[times.len() - 1] += cols[2].parse::<f64>().unwrap();
    }
    for t in totals {
        assert!((t - 2.0).abs() < 1e-10, "total {t}");
    }
}

#[test]
fn dynamics_at_vanishing_magnetization_fails() {
    let dir = TempDir::new().unwrap();
    let cfg = write_case(dir.path(), CHAIN_NN, &format!("{CHAIN8}dynamics.m = 0.0\n"));
    assert_eq!(run("dynamics", &cfg, dir.path(), &[]).status.code(), Some(1));
}

#[test]
fn sectors_table() {
    let dir = TempDir::new().unwrap();
    let out = magnon(&["sectors", "--copies", "5", "--out", dir.path().to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("sectors.csv")).unwrap();
    let mults: Vec<&str> = text
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(mults, vec!["1", "4", "5"]);
    assert_eq!(magnon(&["sectors", "--copies", "4"]).status.code(), Some(2));
}
