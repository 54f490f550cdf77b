use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TINY: &str = r#"
[teacher]
kind = "synth-cqt"
sample_rate = 8000.0
fir_length = 256
f_min = 250.0
octaves = 4
bins_per_octave = 2

[student]
model = "murenn"
levels = 4
half_length = 16

[train]
epochs = 2
epoch_size = 32
excerpt_length = 1024
batch_size = 8
learning_rate = 0.01

[data]
source = "sine"
count = 20
duration_s = 0.2

[run]
trials = 1
output = "out"
"#;

fn wkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wkd"))
        .args(args)
        .env("RUST_LOG", "warn")
        .env_remove("WKD_CACHE_DIR")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn tiny_config(dir: &Path) -> PathBuf {
    let p = dir.join("tiny.toml");
    std::fs::write(&p, TINY).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn synth_writes_reproducible_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = wkd(&["synth", "--config", s(&cfg), "--count", "10", "--corpus", s(d)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    let wavs = |d: &Path| {
        let mut v: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "wav"))
            .collect();
        v.sort();
        v
    };
    assert_eq!(wavs(&a).len(), 10);
    assert!(a.join("manifest.csv").exists() && a.join("config.toml").exists());
    for (x, y) in wavs(&a).iter().zip(wavs(&b)) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }

    let o = wkd(&["synth", "--config", s(&cfg), "--count", "10", "--corpus", s(&a)]);
    assert_eq!(code(&o), 1);
    let o = wkd(&["synth", "--config", s(&cfg), "--count", "10", "--corpus", s(&a), "--force"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn default_synth_writes_64_items() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("corpus");
    let o = wkd(&["synth", "--corpus", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let n = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|e| e == "wav"))
        .count();
    assert_eq!(n, 64);
}

#[test]
fn distill_then_eval_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("out");
    let o = wkd(&["distill", "--config", s(&cfg), "--trials", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&out.join("summary.json"));
    assert_eq!(summary["trials"], 2);
    assert_eq!(summary["per_trial"].as_array().unwrap().len(), 2);
    assert_eq!(summary["learning_rate"], 0.01);
    assert!(summary["test_loss_std"].as_f64().unwrap() >= 0.0);
    let history = std::fs::read_to_string(out.join("history_1.csv")).unwrap();
    assert_eq!(history.lines().count(), 3);
    assert!(history.starts_with("epoch,mean_train_loss,mean_val_loss,wall_time_s"));

    let ev = dir.path().join("ev");
    let ir = dir.path().join("ir.csv");
    let hz = dir.path().join("hz.csv");
    let o = wkd(&[
        "eval", "--config", s(&cfg), "--checkpoint", s(&out.join("model_0.wkdm")), "--output", s(&ev),
        "--export-ir", s(&ir), "--heisenberg", s(&hz),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&ev.join("eval.json"));
    assert_eq!(report["test_loss_mean"], summary["per_trial"][0]);
    assert_eq!(std::fs::read_to_string(&ir).unwrap().lines().count(), 8);
    assert_eq!(std::fs::read_to_string(&hz).unwrap().lines().count(), 9);

    let o = wkd(&["eval", "--config", s(&cfg), "--model", "conv1d", "--checkpoint", s(&out.join("model_0.wkdm"))]);
    assert_eq!(code(&o), 1);
}

#[test]
fn resolved_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(code(&wkd(&["distill", "--config", s(&cfg), "--model", "conv1d"])), 0);
    let resolved = out.join("config.toml");
    let again = dir.path().join("again");
    let o = wkd(&["distill", "--config", s(&resolved), "--output", s(&again)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("summary.json"))["per_trial"], json(&again.join("summary.json"))["per_trial"]);
    assert_eq!(json(&again.join("summary.json"))["model"], "conv1d");
}

#[test]
fn zero_epochs_reports_initial_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let o = wkd(&["distill", "--config", s(&cfg), "--epochs", "0", "--model", "gabor1d"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&dir.path().join("out/summary.json"));
    assert_eq!(summary["initial_val_loss"], summary["final_val_loss"]);
}

#[test]
fn distill_from_wav_corpus_and_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let corpus = dir.path().join("corpus");
    assert_eq!(code(&wkd(&["synth", "--config", s(&cfg), "--corpus", s(&corpus)])), 0);
    let cache = dir.path().join("cache");
    let o = Command::new(env!("CARGO_BIN_EXE_wkd"))
        .args(["teacher", "--config", s(&cfg), "--corpus", s(&corpus)])
        .env("WKD_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 20);
    let report = json(&dir.path().join("out/teacher.json"));
    assert_eq!(report["n_filters"], 8);
    assert_eq!(report["excerpts"], serde_json::json!([16, 2, 2]));
}

#[test]
fn export_teacher_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let ir = dir.path().join("teacher_ir.csv");
    assert_eq!(code(&wkd(&["export", "--config", s(&cfg), "--export-ir", s(&ir)])), 0);
    assert_eq!(std::fs::read_to_string(&ir).unwrap().lines().count(), 8);

    assert_eq!(code(&wkd(&["export", "--config", s(&cfg)])), 1);
    assert_eq!(code(&wkd(&["distill", "--no-such-flag"])), 1);
    assert_eq!(code(&wkd(&["distill", "--config", s(&dir.path().join("missing.toml"))])), 1);
    let missing = dir.path().join("nowhere");
    assert_eq!(code(&wkd(&["distill", "--config", s(&cfg), "--corpus", s(&missing)])), 2);
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[train]\nepochz = 3\n").unwrap();
    assert_eq!(code(&wkd(&["distill", "--config", s(&bad)])), 1);
    assert_eq!(code(&wkd(&["--help"])), 0);
}
