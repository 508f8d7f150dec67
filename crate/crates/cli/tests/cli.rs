//! End-to-end tests of the `pathprox` binary and its file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pathprox::{DenseMatrix, ShallowParams};
use pathprox_cli::dataset::{load_csv, write_csv, Split};
use pathprox_cli::weights;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pathprox"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn gen_data(dir: &Path, samples: usize, features: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("data_{samples}_{features}_{seed}.csv"));
    run_ok(&[
        "gen-data",
        "--out",
        path.to_str().unwrap(),
        "--samples",
        &samples.to_string(),
        "--features",
        &features.to_string(),
        "--seed",
        &seed.to_string(),
    ]);
    path
}

#[test]
fn gen_data_load_roundtrip_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_data(dir.path(), 100, 5, 3);
    let d1 = load_csv(&path, Split::Train).unwrap();
    assert_eq!(d1.labels.len(), 100);
    assert_eq!(d1.features.cols(), 5);
    assert!(path.with_file_name("data_100_5_3.csv.scale.json").exists());

    // scaled data re-scales to itself: write, reload, compare bitwise
    let second = dir.path().join("roundtrip.csv");
    write_csv(&second, &d1.features, &d1.labels).unwrap();
    let d2 = load_csv(&second, Split::Train).unwrap();
    assert_eq!(d1.labels, d2.labels);
    assert_eq!(d1.features.as_slice(), d2.features.as_slice());
}

#[test]
fn load_csv_parses_hand_written_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hand.csv");
    std::fs::write(&path, "1,0.0,4.0\n0,2.0,8.0\n").unwrap();
    let d = load_csv(&path, Split::Train).unwrap();
    assert_eq!(d.labels, vec![1, 0]);
    // min-max scaling maps each column onto {0, 1}
    assert_eq!(d.features.row(0), &[0.0, 0.0]);
    assert_eq!(d.features.row(1), &[1.0, 1.0]);
}

#[test]
fn bad_csv_reports_line_number_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "0,1.0,2.0\n0,oops,2.0\n").unwrap();
    let out = bin()
        .args(["train", "--data", path.to_str().unwrap(), "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2"), "stderr should name line 2: {stderr}");
}

#[test]
fn empty_csv_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let out = bin()
        .args(["train", "--data", path.to_str().unwrap(), "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_emits_one_json_row_per_epoch_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path(), 120, 6, 7);
    let out1 = dir.path().join("m1.jsonl");
    let out2 = dir.path().join("m2.jsonl");
    for out in [&out1, &out2] {
        run_ok(&[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--reg",
            "path",
            "--lambda",
            "1e-2",
            "--lr",
            "5e-2",
            "--epochs",
            "4",
            "--batch",
            "30",
            "--seed",
            "9",
            "--hidden",
            "16",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let b1 = std::fs::read(&out1).unwrap();
    let b2 = std::fs::read(&out2).unwrap();
    assert_eq!(b1, b2, "same config and seed must give identical bytes");
    let text = String::from_utf8(b1).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    for key in ["epoch", "objective", "reg_value", "nnz_fraction", "clean_error", "config", "seed"] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["config"]["reg"], "pathnorm");
}

#[test]
fn reg_none_matches_path_with_zero_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path(), 80, 5, 11);
    let none_out = dir.path().join("none.jsonl");
    let path_out = dir.path().join("path.jsonl");
    for (reg, out) in [("none", &none_out), ("path", &path_out)] {
        run_ok(&[
            "train",
            "--data",
            data.to_str().unwrap(),
            "--reg",
            reg,
            "--lambda",
            "0",
            "--epochs",
            "3",
            "--batch",
            "20",
            "--seed",
            "2",
            "--hidden",
            "8",
            "--out",
            out.to_str().unwrap(),
        ]);
    }
    let parse = |p: &PathBuf| -> Vec<(f64, f64)> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .map(|l| {
                let v: serde_json::Value = serde_json::from_str(l).unwrap();
                (v["objective"].as_f64().unwrap(), v["clean_error"].as_f64().unwrap())
            })
            .collect()
    };
    assert_eq!(parse(&none_out), parse(&path_out));
}

#[test]
fn attack_eval_zero_eps_matches_clean_and_grows() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path(), 150, 6, 5);
    let weights_path = dir.path().join("w.pprx");
    run_ok(&[
        "train",
        "--data",
        data.to_str().unwrap(),
        "--reg",
        "path",
        "--lambda",
        "1e-3",
        "--epochs",
        "6",
        "--batch",
        "30",
        "--seed",
        "4",
        "--hidden",
        "24",
        "--out",
        dir.path().join("m.jsonl").to_str().unwrap(),
        "--save-weights",
        weights_path.to_str().unwrap(),
    ]);
    let csv_path = dir.path().join("rob.csv");
    run_ok(&[
        "attack-eval",
        "--data",
        data.to_str().unwrap(),
        "--weights",
        weights_path.to_str().unwrap(),
        "--eps-list",
        "0,0.1,0.3",
        "--lambda",
        "1e-3",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next().unwrap(), "lambda,epsilon,clean_error,robust_error");
    let parsed: Vec<Vec<f64>> = rows
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(parsed.len(), 3);
    // eps = 0 row: robust equals clean
    assert_eq!(parsed[0][1], 0.0);
    assert_eq!(parsed[0][2], parsed[0][3]);
    // robust error nondecreasing across the widening grid
    assert!(parsed[1][3] >= parsed[0][3]);
    assert!(parsed[2][3] >= parsed[1][3]);
}

#[test]
fn missing_weight_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen_data(dir.path(), 20, 4, 1);
    let out = bin()
        .args([
            "attack-eval",
            "--data",
            data.to_str().unwrap(),
            "--weights",
            dir.path().join("nope.pprx").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn prox_check_exit_codes() {
    let ok = bin()
        .args(["prox-check", "--trials", "50", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() >= 9);

    let fault = bin()
        .args(["prox-check", "--trials", "50", "--inject-fault", "tie-rule"])
        .output()
        .unwrap();
    assert_eq!(fault.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&fault.stdout).contains("FAIL"));
}

#[test]
fn bench_prox_emits_csv_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bench.csv");
    run_ok(&["bench-prox", "--max-m", "1000", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "op,p,m,seconds");
    let rest: Vec<&str> = lines.collect();
    assert!(rest.iter().any(|l| l.starts_with("prox_single,1,1000,")));
    assert!(rest.iter().any(|l| l.starts_with("prox_multi,16,1000,")));
    // the empty instance is effectively free
    let zero_row = rest.iter().find(|l| l.starts_with("prox_single,1,0,")).unwrap();
    let secs: f64 = zero_row.rsplit(',').next().unwrap().parse().unwrap();
    assert!(secs < 1e-3);
}

#[test]
fn weight_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.pprx");
    let v = DenseMatrix::from_rows(&[vec![1.5, -2.0], vec![0.0, 3.25]]).unwrap();
    let w = DenseMatrix::from_rows(&[vec![0.5, -0.25, 8.0], vec![1.0, 0.0, -1.0]]).unwrap();
    let params = ShallowParams::new(v, w).unwrap();
    weights::save(&path, &params).unwrap();
    let loaded = weights::load(&path).unwrap();
    assert_eq!(loaded.v, params.v);
    assert_eq!(loaded.w, params.w);

    // corrupt magic is rejected
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    assert!(weights::load(&path).is_err());
}
