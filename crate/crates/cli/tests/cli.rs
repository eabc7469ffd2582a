use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coorbit::cover::ElementExport;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn coorbit(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_coorbit"));
    cmd.args(args);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n.to_string());
    }
    cmd.output().expect("spawn coorbit")
}

fn run_in(dir: &Path, cmd: &str, input: &str, extra: &[&str]) -> Output {
    let input = fixture(input);
    let mut args = vec![cmd, input.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    coorbit(&args, None)
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_dyadic_group() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "analyze", "dyadic.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = read_json(dir.path().join("analysis.json"));
    assert_eq!(r["version"], "v0.1.0");
    assert_eq!(r["config"]["tolerances"]["linearBand"][0], 0.8);
    let r = &r["result"];
    assert_eq!(r["properness"]["status"], "bounded");
    assert_eq!(r["selfStable"], true);
    assert_eq!(r["growth"]["linear"]["status"], "linear");
    let csv = fs::read_to_string(dir.path().join("self_stats.csv")).unwrap();
    assert!(csv.starts_with("window,maxCount,maxTransitionNorm,interiorElements\n8,3,2,"));
}

#[test]
fn analyze_reports_inadmissible_flow() {
    let out = coorbit(&["analyze", fixture("saddle_flow.json").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["result"]["admissibility"]["status"], "notAdmissible");
    assert_eq!(r["result"]["admissibility"]["witnessRe"], -1.0);
}

#[test]
fn schema_errors_exit_one_with_pointer() {
    let out = coorbit(&["analyze", fixture("malformed.json").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
    let out = coorbit(&["analyze", fixture("bad_matrix.json").to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/matrix/1/1"));
    let out = coorbit(&["analyze"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "compare", "permuted_diagonal_pair.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(dir.path().join("verdict.json"));
    assert_eq!(v["result"]["outcome"], "NotEquivalent");
    let counts = fs::read_to_string(dir.path().join("counts.csv")).unwrap();
    assert_eq!(counts.lines().count(), 4);
    assert!(dir.path().join("epsilon.csv").exists());

    let out = run_in(dir.path(), "compare", "dyadic_vs_scalar.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(dir.path().join("verdict.json"))["result"]["outcome"], "Equivalent");

    let out = run_in(dir.path(), "compare", "marginal_pair.json", &["--window", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(read_json(dir.path().join("verdict.json"))["result"]["outcome"], "Inconclusive");
}

#[test]
fn compare_with_corroboration() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "compare", "dyadic_vs_scalar.json", &["--with-qi", "--with-norms"]);
    assert_eq!(out.status.code(), Some(0));
    let v = read_json(dir.path().join("verdict.json"));
    assert_eq!(v["result"]["evidence"]["qi"]["verdict"], "Certified");
    assert!(v["result"]["evidence"]["normRatios"]["rows"].as_array().unwrap().len() >= 5);
    assert!(dir.path().join("qi.csv").exists());
    assert!(dir.path().join("norm_ratios.csv").exists());
}

#[test]
fn besov_compare_identical_pair() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "besov-compare", "identical_pair.json", &["--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("ratios.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("j,normA,normB,ratio"));
    for l in lines {
        assert_eq!(l.rsplit(',').next(), Some("1"), "{l}");
    }
}

#[test]
fn besov_compare_spread_trends() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "besov-compare", "permuted_diagonal_pair.json", &["--grid", "64"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(dir.path().join("besov_summary.json"))["result"]["trend"], "increasing");
    let out = run_in(dir.path(), "besov-compare", "permuted_diagonal_pair.json", &["--grid", "64", "--p", "2", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let s = read_json(dir.path().join("besov_summary.json"));
    assert_eq!(s["result"]["trend"], "bounded");
    assert!(s["result"]["spread"].as_f64().unwrap() <= 1.5);
}

#[test]
fn export_cover_dyadic() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "export-cover", "dyadic.json", &["--window", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let c = read_json(dir.path().join("cover.json"));
    assert_eq!(c["result"]["elements"].as_array().unwrap().len(), 9);
    let csv = fs::read_to_string(dir.path().join("adjacency.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.iter().filter(|r| r[0] == r[1]).count(), 9);
    assert_eq!(rows.iter().filter(|r| r[0] != r[1]).count(), 8);

    let out = run_in(dir.path(), "export-cover", "dyadic.json", &["--window", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
}

#[test]
fn similitude_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "export-cover", "similitude.json", &["--window", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = read_json(dir.path().join("cover.json"));
    let elements = doc["result"]["elements"].clone();
    let typed: Vec<ElementExport> = serde_json::from_value(elements.clone()).unwrap();
    assert!(!typed.is_empty());
    assert_eq!(serde_json::to_value(&typed).unwrap(), elements);
}

#[test]
fn growth_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "growth", "rotation_flow.json", &[]);
    assert_eq!(out.status.code(), Some(0));
    let g = read_json(dir.path().join("growth.json"));
    assert_eq!(g["result"]["linear"]["status"], "linear");
    let csv = fs::read_to_string(dir.path().join("growth.csv")).unwrap();
    assert!(csv.starts_with("r,volume\n"));
    assert!(!csv.contains('\r'));

    let out = run_in(dir.path(), "growth", "dyadic.json", &["--radii", "1,2,3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_identical_across_thread_counts() {
    let pair = fixture("permuted_diagonal_pair.json");
    let mut seen: Vec<Vec<u8>> = Vec::new();
    for threads in [1, 4, 1] {
        let out = coorbit(&["compare", pair.to_str().unwrap(), "--with-norms", "--grid", "32"], Some(threads));
        assert_eq!(out.status.code(), Some(0));
        seen.push(out.stdout);
    }
    assert_eq!(seen[0], seen[1]);
    assert_eq!(seen[0], seen[2]);
}
