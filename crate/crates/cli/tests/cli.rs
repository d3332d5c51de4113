use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn icu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icu"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth(dir: &Path, n: &str, seed: &str) -> Output {
    icu(&[
        "synth",
        "--n",
        n,
        "--seed",
        seed,
        "--out",
        dir.to_str().unwrap(),
    ])
}

const SMALL_RUN: &str = "\
frame_hours = 6, 12
hidden_units = 8
epochs = 4
batch_size = 32
seed = 5
";

fn small_run(dir: &Path) -> Output {
    let data = dir.join("data");
    assert_eq!(code(&synth(&data, "150", "3")), 0);
    let cfg = format!(
        "cohort_path = {}\nobservations_path = {}\nout_dir = {}\n{SMALL_RUN}",
        data.join("cohort.csv").display(),
        data.join("observations.csv").display(),
        dir.join("out").display(),
    );
    fs::write(dir.join("exp.cfg"), cfg).unwrap();
    icu(&["run", "--config", dir.join("exp.cfg").to_str().unwrap()])
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["run", "--bogus"][..],
        &["frobnicate"][..],
        &["run", "--frame", "7"][..],
        &[][..],
    ] {
        let out = icu(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = icu(&["run", "--frame", "7"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("6, 12, 24"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\nnot_a_key = 3\n").unwrap();
    let out = icu(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));
    fs::write(&cfg, "test_fraction = 0.9\n").unwrap();
    assert_eq!(code(&icu(&["run", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(
        &cfg,
        "cohort_path = /nonexistent/c.csv\nobservations_path = /nonexistent/o.csv\n",
    )
    .unwrap();
    let out = icu(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/c.csv"));
}

#[test]
fn synth_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&synth(&a, "100", "7")), 0);
    assert_eq!(code(&synth(&b, "100", "7")), 0);
    for f in ["cohort.csv", "observations.csv", "provenance.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let cohort = fs::read_to_string(a.join("cohort.csv")).unwrap();
    assert_eq!(cohort.lines().count(), 101);
    let prov: Value =
        serde_json::from_str(&fs::read_to_string(a.join("provenance.json")).unwrap()).unwrap();
    assert_eq!(prov["config"]["seed"], 7);
    assert_eq!(prov["stays"], 100);
    assert!(prov["prng"].as_str().unwrap().contains("ChaCha8"));
    assert_eq!(
        code(&icu(&[
            "synth",
            "--n",
            "10",
            "--mortality-rate",
            "2",
            "--out",
            "x"
        ])),
        2
    );
}

#[test]
fn run_score_and_predict() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let res = dir.path().join("out");

    let report: Value =
        serde_json::from_str(&fs::read_to_string(res.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 5);
    assert_eq!(report["config"]["model"]["hidden_units"], 8);
    assert_eq!(report["config"]["frames"], serde_json::json!([6, 12]));
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    for model in ["lstm", "nb", "lr", "saps2", "sofa"] {
        for frame in [6, 12] {
            let n = rows
                .iter()
                .filter(|r| r["model"] == model && r["frame_hours"] == frame)
                .count();
            assert_eq!(n, 1, "{model} {frame}");
            let roc = fs::read_to_string(res.join(format!("roc_{model}_{frame}.csv"))).unwrap();
            let mut lines = roc.lines();
            assert_eq!(lines.next(), Some("fpr,tpr"));
            let pts: Vec<(f64, f64)> = lines
                .map(|l| {
                    let (a, b) = l.split_once(',').unwrap();
                    (a.parse().unwrap(), b.parse().unwrap())
                })
                .collect();
            assert!(pts.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        }
    }
    for frame in [6, 12] {
        let svg = fs::read_to_string(res.join(format!("roc_multiclass_{frame}.svg"))).unwrap();
        assert_eq!(svg.matches("<path").count(), 6);
        let preds = fs::read_to_string(res.join(format!("predictions_{frame}.csv"))).unwrap();
        for line in preds.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f[2] == "1", !f[3].is_empty(), "{line}");
        }
    }

    let data = dir.path().join("data");
    let (cohort, obs) = (data.join("cohort.csv"), data.join("observations.csv"));
    let first_stay = fs::read_to_string(&cohort)
        .unwrap()
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();
    let out = icu(&[
        "score",
        "--cohort",
        cohort.to_str().unwrap(),
        "--observations",
        obs.to_str().unwrap(),
        "--stay",
        &first_stay,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let score: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(score["frame_hours"], 24);
    assert!(score["saps2"]["total"].as_u64().is_some());
    assert!(score["sofa"]["total"].as_u64().unwrap() <= 12);

    let out = icu(&[
        "predict",
        "--model-dir",
        res.to_str().unwrap(),
        "--frame",
        "6",
        "--cohort",
        cohort.to_str().unwrap(),
        "--observations",
        obs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let preds: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(preds.len(), 150);
    for p in &preds {
        assert_eq!(p["mortality_decision"] == 1, !p["los_class"].is_null());
    }

    let out = icu(&[
        "predict",
        "--model-dir",
        res.to_str().unwrap(),
        "--frame",
        "24",
        "--cohort",
        cohort.to_str().unwrap(),
        "--observations",
        obs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1, "no 24 h model was trained");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path())), 0);
    let first = snapshot(&dir.path().join("out"));
    fs::remove_dir_all(dir.path().join("out")).unwrap();
    assert_eq!(code(&small_run(dir.path())), 0);
    let second = snapshot(&dir.path().join("out"));
    assert_eq!(first.len(), second.len());
    for ((na, a), (nb, b)) in first.iter().zip(&second) {
        assert_eq!(na, nb);
        assert!(a == b, "{na} differs between runs");
    }
}

#[test]
fn manifest_partitions_every_stay() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&small_run(dir.path())), 0);
    let manifest = fs::read_to_string(dir.path().join("out/folds_manifest.csv")).unwrap();
    let mut lines = manifest.lines();
    assert_eq!(lines.next(), Some("stay_id,partition,fold"));
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    let cohort = &report["cohort"];
    assert_eq!(
        rows.len() as u64,
        cohort["n_after_exclusions"].as_u64().unwrap()
    );
    let n_test = rows.iter().filter(|r| r[1] == "test").count();
    assert_eq!(n_test as u64, cohort["n_test"].as_u64().unwrap());
    for r in &rows {
        match r[1].as_str() {
            "test" => assert!(r[2].is_empty()),
            "cv" => assert!(r[2].parse::<usize>().unwrap() < 3),
            other => panic!("partition {other}"),
        }
    }
    let preds = fs::read_to_string(dir.path().join("out/predictions_6.csv")).unwrap();
    let test_ids: std::collections::BTreeSet<&str> = rows
        .iter()
        .filter(|r| r[1] == "test")
        .map(|r| r[0].as_str())
        .collect();
    let pred_ids: std::collections::BTreeSet<&str> = preds
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(test_ids, pred_ids);
}
