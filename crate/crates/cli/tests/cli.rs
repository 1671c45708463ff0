use std::path::Path;
use std::process::Command;

use ndarray::array;
use phimv_cli::{run_chebyshev, BenchConfig, Experiment, ResultRow};
use phimv_core::dense_operator;
use phimv_core::mtx::write_matrix_market;

fn phimv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phimv"))
}

fn write_sample(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("a.mtx");
    let a = dense_operator(array![[-1.0, 0.5, 0.0], [0.2, -2.0, 0.1], [0.0, 0.3, -0.5]]).unwrap();
    write_matrix_market(&path, &a).unwrap();
    path
}

fn read_csv(path: &Path) -> Vec<ResultRow> {
    csv::Reader::from_path(path).unwrap().deserialize().map(|r| r.unwrap()).collect()
}

#[test]
fn params_inspect_prints_fields() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = write_sample(dir.path());
    let out = phimv().args(["params", "inspect"]).arg(&mtx).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for key in ["s = ", "xi = ", "s0 = ", "f_min = ", "m = 61", "r = "] {
        assert!(text.contains(key), "missing {key} in {text}");
    }
}

#[test]
fn eval_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let mtx = write_sample(dir.path());
    let out_path = dir.path().join("eval.json");
    let status = phimv()
        .arg("eval")
        .arg(&mtx)
        .args(["--t", "0.5", "--alpha", "0.5", "--p", "2", "--format", "json", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(status.success());
    let rows: Vec<ResultRow> = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].error < 1e-13);
    assert_eq!(rows[0].t, 0.5);
}

#[test]
fn gallery_bench_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut tables = Vec::new();
    for (i, parallel) in [false, true].into_iter().enumerate() {
        let path = dir.path().join(format!("g{i}.csv"));
        let mut cmd = phimv();
        cmd.args(["bench", "gallery", "--out"]).arg(&path);
        if parallel {
            cmd.arg("--parallel");
        }
        assert!(cmd.status().unwrap().success());
        let mut rows = read_csv(&path);
        for r in &mut rows {
            r.seconds = 0.0;
        }
        tables.push(rows);
    }
    assert_eq!(tables[0].len(), 20);
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn exceeded_bound_sets_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loose.csv");
    let status = phimv().args(["bench", "gallery", "--tol", "1e-3", "--out"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(read_csv(&path).iter().any(|r| !r.passed));
}

#[test]
fn bad_input_is_an_error() {
    let out = phimv().args(["params", "inspect", "/nonexistent/a.mtx"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn small_chebyshev_table() {
    let mut cfg = BenchConfig::new(Experiment::Chebyshev);
    cfg.size = Some(24);
    cfg.p = Some(3);
    let rows = run_chebyshev(&cfg).unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].t, 0.0);
    assert_eq!(rows[0].error, 0.0);
    assert!(rows.iter().all(|r| r.error < 1e-10));
    assert!(rows.windows(2).all(|w| w[0].s_effective <= w[1].s_effective));
}
