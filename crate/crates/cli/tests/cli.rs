use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rto_core::data::{save_model, write_scores, Dataset};
use rto_core::{compile_constraint, Criterion, Multipliers, RtoModel, ScoredExample, TrainingMetadata};
use tempfile::TempDir;

fn rto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rto")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn example1_file(dir: &TempDir, n: usize, seed: u64) -> PathBuf {
    let path = p(dir, &format!("ex1-{seed}.csv"));
    let out = rto(&["generate-example1", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

/// Uniform scores on a fixed grid, alternating groups, labels `f > 0`.
fn uniform_file(dir: &TempDir, name: &str, n: usize, groups: usize) -> PathBuf {
    let examples = (0..n)
        .map(|i| {
            let f = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
            let g = 1 + (i * 7) % groups;
            ScoredExample::new(format!("{name}{i}"), f, g, Some(g == 1), Some(f > 0.1)).unwrap()
        })
        .collect();
    let path = p(dir, &format!("{name}.csv"));
    write_scores(&path, &Dataset::new(examples, groups, "test")).unwrap();
    path
}

#[test]
fn train_reproduces_the_example1_rule() {
    let dir = TempDir::new().unwrap();
    let input = example1_file(&dir, 60_000, 1);
    let model = p(&dir, "m.txt");
    let out = rto(&[
        "train", "--input", s(&input), "--rho", "0.4", "--epsilon", "0", "--gamma", "0.05",
        "--out-model", s(&model), "--seed", "1",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("dual objective:") && text.contains("group 2: nu ="), "{text}");
    let m = rto_core::data::load_model(&model).unwrap();
    let e = ScoredExample::new("q", 0.0, 1, None, None).unwrap();
    let h = m.predict_probability(&e).unwrap();
    assert!((h - 0.7).abs() <= 0.05, "h(0) = {h}");
}

#[test]
fn train_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let model = p(&dir, "m.txt");
    let missing = rto(&["train", "--input", "/nonexistent/scores.csv", "--rho", "0.4", "--out-model", s(&model)]);
    assert_eq!(code(&missing), 25);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let input = uniform_file(&dir, "u", 200, 2);
    let zero = rto(&["train", "--input", s(&input), "--gamma", "0", "--out-model", s(&model)]);
    assert_eq!(code(&zero), 10);
    let usage = rto(&["train", "--input", s(&input)]);
    assert_eq!(code(&usage), 2);
    assert!(!model.exists());
}

#[test]
fn trace_and_config_precedence() {
    let dir = TempDir::new().unwrap();
    let input = uniform_file(&dir, "u", 300, 2);
    let (model, trace, cfg) = (p(&dir, "m.txt"), p(&dir, "trace.csv"), p(&dir, "run.cfg"));
    fs::write(&cfg, format!("input={}\nout_model={}\ngamma=0.2\nepochs=7\n", s(&input), s(&model))).unwrap();
    let out = rto(&["train", "--config", s(&cfg), "--gamma", "0.1", "--trace", s(&trace)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = fs::read_to_string(&model).unwrap();
    assert!(m.contains("gamma=1.0000000000000001e-1"), "flag should beat the file:\n{m}");
    assert!(m.contains("epochs=7"));
    let t = fs::read_to_string(&trace).unwrap();
    assert!(t.starts_with("epoch,dual_objective,nu_1,nu_2\n"));
    assert!(t.lines().count() >= 2);
}

#[test]
fn evaluate_identity_model_matches_direct_computation() {
    let dir = TempDir::new().unwrap();
    let input = uniform_file(&dir, "u", 400, 2);
    let data = rto_core::data::ingest_scores(&input, Default::default()).unwrap();
    let gamma = 0.05;
    let spec = compile_constraint(Criterion::StatisticalParity { rho: 0.5, epsilon: 0.0 }, &data.examples, 2).unwrap();
    let meta = TrainingMetadata { seed: 0, schedule: "none".into(), epochs: 0, dual_objective: 0.0 };
    let model = RtoModel::new(gamma, spec, Multipliers::zeros(2), meta).unwrap();
    let model_path = p(&dir, "zero.txt");
    save_model(&model_path, &model).unwrap();
    let report = p(&dir, "r.jsonl");
    let out = rto(&["evaluate", "--model", s(&model_path), "--input", s(&input), "--out-report", s(&report)]);
    assert_eq!(code(&out), 0);

    let mut sums = [0.0; 2];
    let mut counts = [0.0; 2];
    for e in &data.examples {
        sums[e.group - 1] += (e.score / gamma).clamp(0.0, 1.0);
        counts[e.group - 1] += 1.0;
    }
    let direct = (sums[0] / counts[0] - sums[1] / counts[1]).abs();
    let line = fs::read_to_string(&report).unwrap();
    assert_eq!(line.lines().count(), 1);
    let json: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    let gap = json["parity_gap"].as_f64().unwrap();
    assert!((gap - direct).abs() < 1e-12, "{gap} vs {direct}");
}

#[test]
fn evaluate_trained_model_on_its_training_file() {
    let dir = TempDir::new().unwrap();
    let input = uniform_file(&dir, "u", 3000, 3);
    let model = p(&dir, "m.txt");
    assert_eq!(code(&rto(&["train", "--input", s(&input), "--rho", "0.3", "--out-model", s(&model)])), 0);
    let report = p(&dir, "r.jsonl");
    let out = rto(&["evaluate", "--model", s(&model), "--input", s(&input), "--out-report", s(&report)]);
    assert_eq!(code(&out), 0);
    let json: serde_json::Value = serde_json::from_str(fs::read_to_string(&report).unwrap().trim()).unwrap();
    assert!(json["parity_gap"].as_f64().unwrap() <= 0.01, "{json}");
    assert!(json["expected_accuracy"].as_f64().is_some());

    let other = uniform_file(&dir, "k2", 100, 2);
    let mismatch = rto(&["evaluate", "--model", s(&model), "--input", s(&other)]);
    assert_eq!(code(&mismatch), 23);
}

#[test]
fn predict_is_deterministic_under_seed() {
    let dir = TempDir::new().unwrap();
    let input = uniform_file(&dir, "u", 500, 2);
    let model = p(&dir, "m.txt");
    assert_eq!(code(&rto(&["train", "--input", s(&input), "--out-model", s(&model)])), 0);
    let run = |name: &str| {
        let dest = p(&dir, name);
        assert_eq!(code(&rto(&["predict", "--model", s(&model), "--input", s(&input), "--out", s(&dest), "--seed", "3"])), 0);
        fs::read_to_string(dest).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    assert!(a.starts_with("id,probability,prediction\n"));
    assert_eq!(a.lines().count(), 501);
}

#[test]
fn sweep_table_selection_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let train = uniform_file(&dir, "t", 1500, 2);
    let val = uniform_file(&dir, "v", 1500, 2);
    let sweep = |name: &str, extra: &[&str]| {
        let dest = p(&dir, name);
        let mut args = vec!["sweep", "--input-train", s(&train), "--input-val", s(&val), "--out", s(&dest)];
        args.extend_from_slice(extra);
        let out = rto(&args);
        (out, fs::read_to_string(&dest).unwrap_or_default())
    };
    let (out, table) = sweep("a.csv", &["--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    assert_eq!(rows.iter().filter(|r| r.ends_with(",1")).count(), 1);
    let keys: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let f: Vec<f64> = r.split(',').take(2).map(|v| v.parse().unwrap()).collect();
            (f[0], f[1])
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    let (_, again) = sweep("b.csv", &["--seed", "4"]);
    assert_eq!(table, again);

    let (out, _) = sweep("c.csv", &["--target-epsilon", "0", "--gamma-grid", "0.05", "--rho-grid", "0.3,0.5"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("no feasible point"));

    let dest = p(&dir, "d.csv");
    let overlap = rto(&["sweep", "--input-train", s(&train), "--input-val", s(&train), "--out", s(&dest)]);
    assert_eq!(code(&overlap), 24);
}

#[test]
fn tradeoff_emits_curves() {
    let dir = TempDir::new().unwrap();
    let train = uniform_file(&dir, "t", 1000, 2);
    let test = uniform_file(&dir, "e", 1000, 2);
    let dest = p(&dir, "curve.csv");
    let out = rto(&["tradeoff", "--input-train", s(&train), "--input-test", s(&test), "--out", s(&dest)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dest).unwrap();
    assert!(text.starts_with("method,parameter,parity_gap,accuracy\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("rto,")).count(), 6);
    assert_eq!(text.lines().filter(|l| l.starts_with("roc,")).count(), 8);
}

#[test]
fn oracle_check_cases() {
    let dir = TempDir::new().unwrap();
    let ex1 = example1_file(&dir, 3000, 2);
    let out = rto(&["oracle-check", "--input", s(&ex1), "--rho", "0.4", "--seeds", "2"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let small = uniform_file(&dir, "small", 40, 3);
    let out = rto(&["oracle-check", "--input", s(&small), "--rho", "0.4", "--gamma", "0.1", "--seeds", "5"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("PASS"));

    let same: Vec<ScoredExample> = (0..60)
        .map(|i| ScoredExample::new(format!("s{i}"), 0.2, 1 + i % 2, None, Some(i % 3 == 0)).unwrap())
        .collect();
    let flat = p(&dir, "same.csv");
    write_scores(&flat, &Dataset::new(same, 2, "test")).unwrap();
    for eps in ["0", "0.05"] {
        let out = rto(&["oracle-check", "--input", s(&flat), "--rho", "0.4", "--epsilon", eps, "--seeds", "2"]);
        assert_eq!(code(&out), 0, "{}", stdout(&out));
    }

    let sensitive_constant: Vec<ScoredExample> = (0..20)
        .map(|i| ScoredExample::new(format!("c{i}"), 0.1, 1, Some(true), None).unwrap())
        .collect();
    let degenerate = p(&dir, "degenerate.csv");
    write_scores(&degenerate, &Dataset::new(sensitive_constant, 1, "test")).unwrap();
    let out = rto(&["oracle-check", "--input", s(&degenerate), "--criterion", "covariance"]);
    assert_eq!(code(&out), 18);
}

#[test]
fn theory_check_counts() {
    let out = rto(&["theory-check", "--trials", "200", "--audit-trials", "5", "--audit-n", "1000", "--seed", "1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("200/200"));

    let vacuous = rto(&["theory-check", "--trials", "0", "--audit-trials", "0"]);
    assert_eq!(code(&vacuous), 0);
    assert!(String::from_utf8_lossy(&vacuous.stderr).contains("warning"));
}

#[test]
fn adult_scores_writes_disjoint_splits() {
    let dir = TempDir::new().unwrap();
    let data = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/adult");
    let out = rto(&["adult-scores", "--data-dir", data, "--seed", "3", "--out-dir", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let load = |n: &str| rto_core::data::ingest_scores(p(&dir, n), Default::default()).unwrap();
    let (train, val, test) = (load("train.csv"), load("val.csv"), load("test.csv"));
    assert_eq!(train.len() + val.len() + test.len(), 48_842 - 48_842 / 3);
    rto_core::data::check_disjoint(&train, &test).unwrap();
    rto_core::data::check_disjoint(&val, &test).unwrap();
    assert_eq!(train.groups, 2);
}
