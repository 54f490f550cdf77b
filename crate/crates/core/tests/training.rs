mod common;

use common::*;
use wkd_core::distill::{split_dataset, teacher_targets, train, SpectrogramCache, TrainConfig};
use wkd_core::experiment::{prepare_splits, run_trial, StudentConfig};
use wkd_core::io::synth_sine_dataset;
use wkd_core::signal::Signal;
use wkd_core::students::ModelKind;
use wkd_core::teachers::{teacher_spectrogram, TeacherSpec};

fn small_spec() -> TeacherSpec {
    TeacherSpec {
        fir_length: 256,
        f_min: 250.0,
        octaves: 4,
        bins_per_octave: 2,
        ..TeacherSpec::synth_cqt(8000.0)
    }
}

fn small_config() -> TrainConfig {
    TrainConfig {
        epochs: 3,
        epoch_size: 40,
        excerpt_length: 1024,
        batch_size: 8,
        learning_rate: 1e-2,
        ..Default::default()
    }
}

fn sine_corpus(spec: &TeacherSpec, count: usize) -> Vec<Signal> {
    synth_sine_dataset(spec, count, 0.2, 7)
        .unwrap()
        .into_iter()
        .map(|c| c.signal)
        .collect()
}

#[test]
fn training_is_deterministic() {
    let spec = small_spec();
    let fb = spec.build().unwrap();
    let cfg = small_config();
    let splits = prepare_splits(&fb, &sine_corpus(&spec, 20), 4, &cfg, &SpectrogramCache::disabled()).unwrap();
    let student = StudentConfig { levels: 4, half_length: 32 };
    for kind in ModelKind::ALL {
        let a = run_trial(kind, &fb, &splits, &student, &cfg, 3).unwrap();
        let b = run_trial(kind, &fb, &splits, &student, &cfg, 3).unwrap();
        assert_eq!(a.outcome.model, b.outcome.model, "{kind}");
        let strip = |h: &[wkd_core::io::EpochRecord]| {
            h.iter().map(|r| (r.epoch, r.mean_train_loss, r.mean_val_loss)).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a.outcome.history), strip(&b.outcome.history));
        assert_eq!(a.test, b.test);
        assert_eq!(a.outcome.history.len(), cfg.epochs);
        assert!(a.outcome.divergence.is_none());
    }
}

#[test]
fn training_reduces_loss() {
    let spec = small_spec();
    let fb = spec.build().unwrap();
    let cfg = TrainConfig { epochs: 6, ..small_config() };
    let splits = prepare_splits(&fb, &sine_corpus(&spec, 20), 4, &cfg, &SpectrogramCache::disabled()).unwrap();
    let student = StudentConfig { levels: 4, half_length: 32 };
    let t = run_trial(ModelKind::Murenn, &fb, &splits, &student, &cfg, 0).unwrap();
    let last = t.outcome.history.last().unwrap();
    assert!(last.mean_train_loss < t.outcome.history[0].mean_train_loss);
}

#[test]
fn zero_epochs_keeps_initial_model() {
    let spec = small_spec();
    let fb = spec.build().unwrap();
    let cfg = TrainConfig { epochs: 0, ..small_config() };
    let splits = prepare_splits(&fb, &sine_corpus(&spec, 20), 4, &cfg, &SpectrogramCache::disabled()).unwrap();
    let student = StudentConfig { levels: 4, half_length: 32 };
    let t = run_trial(ModelKind::Conv1d, &fb, &splits, &student, &cfg, 0).unwrap();
    assert!(t.outcome.history.is_empty());
    let init = wkd_core::students::default_student(ModelKind::Conv1d, &fb, 4, 0, 32).unwrap();
    assert_eq!(t.outcome.model, init);
}

#[test]
fn train_rejects_empty_training_split() {
    let spec = small_spec();
    let fb = spec.build().unwrap();
    let empty = teacher_targets(&fb, Vec::new(), 4, &SpectrogramCache::disabled()).unwrap();
    let model = wkd_core::students::default_student(ModelKind::Conv1d, &fb, 4, 0, 8).unwrap();
    assert!(train(model, &empty, &empty, &small_config()).is_err());
}

#[test]
fn split_sizes_follow_ratios() {
    let items: Vec<usize> = (0..64).collect();
    let (tr, va, te) = split_dataset(&items, [0.8, 0.1, 0.1], 1).unwrap();
    assert_eq!((tr.len(), va.len(), te.len()), (52, 6, 6));
    let mut all: Vec<usize> = tr.into_iter().chain(va).chain(te).collect();
    all.sort();
    assert_eq!(all, items);
    assert!(split_dataset(&items[..5], [0.8, 0.1, 0.1], 1).is_err());
}

#[test]
fn sine_argmax_rises_with_item_index() {
    let mut spec = TeacherSpec::synth_cqt(16000.0);
    spec.fir_length = 2048;
    let fb = spec.build().unwrap();
    let items = synth_sine_dataset(&spec, 64, 0.3, 1).unwrap();
    let mut last = 0;
    for item in &items {
        let s = teacher_spectrogram(&fb, &item.signal, 9).unwrap();
        let means = s.row_means();
        let arg = (0..means.len()).max_by(|&a, &b| means[a].total_cmp(&means[b])).unwrap();
        assert!(arg >= last, "{}: {arg} < {last}", item.id);
        last = arg;
    }
    assert!(last >= 60);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let fb = spec.build().unwrap();
    let signals: Vec<Signal> = (0..3)
        .map(|i| Signal::new(noise(&mut rng(i), 512), 8000.0).unwrap())
        .collect();
    let cache = SpectrogramCache::at(dir.path());
    let first = teacher_targets(&fb, signals.clone(), 3, &cache).unwrap();
    let files = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 3);
    let second = teacher_targets(&fb, signals.clone(), 3, &cache).unwrap();
    let plain = teacher_targets(&fb, signals, 3, &SpectrogramCache::disabled()).unwrap();
    for ((a, b), c) in first.teacher.iter().zip(&second.teacher).zip(&plain.teacher) {
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}
