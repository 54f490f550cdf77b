use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use num_complex::Complex64;
use serde::Serialize;
use wkd_core::distill::SpectrogramCache;
use wkd_core::dtcwt::Atom;
use wkd_core::experiment::{prepare_splits, run_trial, summarize, Splits, Summary};
use wkd_core::io::{
    load_model, load_wav_dir, save_model, synth_sine_dataset, synth_vowel_dataset, write_corpus, write_history,
    write_impulse_responses_csv, CorpusItem,
};
use wkd_core::metrics::{evaluate, impulse_responses, localization_report, model_localization, Quantiles};
use wkd_core::students::{ModelKind, StudentModel};
use wkd_core::{Filterbank, Signal, TeacherKind};

use crate::config::{RunConfig, Source};
use crate::{Command, Exports, UsageError};

pub fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Synth(c) => {
            let force = c.force;
            synth(&c.config()?, force).map(|_| ())
        }
        Command::Teacher(c) => teacher(&c.config()?).map(|_| ()),
        Command::Distill(c) => {
            let force = c.force;
            distill(&c.config()?, force).map(|_| ())
        }
        Command::Eval {
            common,
            checkpoint,
            exports,
        } => eval(&common.config()?, &checkpoint, &exports).map(|_| ()),
        Command::Export {
            common,
            checkpoint,
            exports,
        } => export(&common.config()?, checkpoint.as_deref(), &exports),
    }
}

fn check_output_dir(dir: &Path, force: bool) -> anyhow::Result<()> {
    let busy = dir.is_dir() && std::fs::read_dir(dir)?.next().is_some();
    if busy && !force {
        return Err(UsageError(format!(
            "output directory {} is not empty (use --force to overwrite)",
            dir.display()
        ))
        .into());
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn write_config(dir: &Path, cfg: &RunConfig) -> anyhow::Result<()> {
    std::fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn synthesize(cfg: &RunConfig) -> anyhow::Result<Vec<CorpusItem>> {
    let d = &cfg.data;
    Ok(match d.source {
        Source::Sine => synth_sine_dataset(&cfg.teacher.spec(), d.count, d.duration_s, d.seed)?,
        Source::Vowel => synth_vowel_dataset(cfg.teacher.sample_rate, d.count, d.duration_s, d.seed)?,
        Source::Wav => return Err(UsageError("a wav source needs data.corpus".into()).into()),
    })
}

/// Signals of the configured corpus: WAV files when `data.corpus` is set,
/// otherwise generated in memory.
pub fn load_corpus(cfg: &RunConfig) -> anyhow::Result<Vec<Signal>> {
    let items = match &cfg.data.corpus {
        Some(dir) => load_wav_dir(dir, cfg.teacher.sample_rate)?,
        None => synthesize(cfg)?,
    };
    Ok(items.into_iter().map(|c| c.signal).collect())
}

pub fn cache(cfg: &RunConfig) -> SpectrogramCache {
    let env = SpectrogramCache::from_env();
    match (&env.dir(), &cfg.run.cache_dir) {
        (None, Some(dir)) => SpectrogramCache::at(dir),
        _ => env,
    }
}

fn splits(cfg: &RunConfig, fb: &Filterbank) -> anyhow::Result<Splits> {
    let corpus = load_corpus(cfg)?;
    Ok(prepare_splits(fb, &corpus, cfg.student.levels, &cfg.train, &cache(cfg))?)
}

/// `wkd synth`: returns the corpus directory.
pub fn synth(cfg: &RunConfig, force: bool) -> anyhow::Result<PathBuf> {
    let dir = cfg.data.corpus.clone().unwrap_or_else(|| cfg.run.output.clone());
    check_output_dir(&dir, force)?;
    let items = synthesize(cfg)?;
    write_corpus(&dir, &items)?;
    let mut resolved = cfg.clone();
    resolved.data.corpus = Some(dir.clone());
    write_config(&dir, &resolved)?;
    log::info!("wrote {} items to {}", items.len(), dir.display());
    Ok(dir)
}

#[derive(Debug, Serialize)]
pub struct TeacherReport {
    pub kind: TeacherKind,
    pub fingerprint: String,
    pub n_filters: usize,
    pub center_freqs_hz: Vec<f64>,
    pub localization: Quantiles,
    pub excerpts: [usize; 3],
    pub cache_dir: Option<PathBuf>,
}

/// `wkd teacher`.
pub fn teacher(cfg: &RunConfig) -> anyhow::Result<TeacherReport> {
    let fb = cfg.teacher.spec().build()?;
    let cache = cache(cfg);
    if cache.dir().is_none() {
        log::warn!("no cache directory configured; spectrograms are computed but not stored");
    }
    let s = splits(cfg, &fb)?;
    let report = TeacherReport {
        kind: cfg.teacher.kind,
        fingerprint: fb.fingerprint(),
        n_filters: fb.len(),
        center_freqs_hz: fb.center_freqs.clone(),
        localization: localization_report(&fb.filters, fb.sample_rate)?.quantiles(),
        excerpts: [s.train.len(), s.val.len(), s.test.len()],
        cache_dir: cache.dir().map(Path::to_path_buf),
    };
    std::fs::create_dir_all(&cfg.run.output)?;
    write_json(&cfg.run.output.join("teacher.json"), &report)?;
    write_config(&cfg.run.output, cfg)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct DistillSummary {
    #[serde(flatten)]
    pub summary: Summary,
    pub teacher: TeacherKind,
    pub epochs: usize,
    pub epoch_size: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub n_params: usize,
    pub initial_val_loss: Vec<f64>,
    pub final_val_loss: Vec<f64>,
    pub wall_time_s: f64,
}

/// `wkd distill`: trains `run.trials` students and writes checkpoints,
/// histories and `summary.json`. Fails with a numerical error after writing
/// everything if any trial diverged.
pub fn distill(cfg: &RunConfig, force: bool) -> anyhow::Result<DistillSummary> {
    let start = Instant::now();
    let out = &cfg.run.output;
    check_output_dir(out, force)?;
    write_config(out, cfg)?;
    let fb = cfg.teacher.spec().build()?;
    let s = splits(cfg, &fb)?;
    let kind = cfg.student.model;
    let mut trials = Vec::with_capacity(cfg.run.trials);
    for i in 0..cfg.run.trials {
        let seed = cfg.run.seed + i as u64;
        let t = run_trial(kind, &fb, &s, &cfg.student.student_config(), &cfg.train, seed)?;
        log::info!("{kind} trial {i} (seed {seed}): test loss {:.4}", t.test.mean);
        save_model(&out.join(format!("model_{i}.wkdm")), &t.outcome.model)?;
        write_history(&out.join(format!("history_{i}.csv")), &t.outcome.history)?;
        trials.push(t);
    }
    let summary = DistillSummary {
        summary: summarize(kind, &trials),
        teacher: cfg.teacher.kind,
        epochs: cfg.train.epochs,
        epoch_size: cfg.train.epoch_size,
        batch_size: cfg.train.batch_size,
        learning_rate: cfg.train.learning_rate,
        n_params: trials[0].outcome.model.n_params(),
        initial_val_loss: trials.iter().map(|t| t.outcome.initial_val_loss).collect(),
        final_val_loss: trials
            .iter()
            .map(|t| t.outcome.history.last().map_or(t.outcome.initial_val_loss, |r| r.mean_val_loss))
            .collect(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    write_json(&out.join("summary.json"), &summary)?;
    if let Some(e) = trials.into_iter().find_map(|t| t.outcome.divergence) {
        return Err(e.into());
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub model: ModelKind,
    pub checkpoint: PathBuf,
    pub test_loss_mean: f64,
    pub test_loss_std: f64,
    pub per_item: Vec<f64>,
    pub localization: Quantiles,
}

fn load_checkpoint(cfg: &RunConfig, path: &Path) -> anyhow::Result<StudentModel> {
    let model = load_model(path)?;
    if model.kind() != cfg.student.model {
        return Err(UsageError(format!(
            "checkpoint {} holds a {} model but the config asks for {}",
            path.display(),
            model.kind(),
            cfg.student.model
        ))
        .into());
    }
    Ok(model)
}

fn export_model(model: &StudentModel, exports: &Exports, sample_rate: f64) -> anyhow::Result<()> {
    if let Some(p) = &exports.export_ir {
        write_impulse_responses_csv(p, &impulse_responses(model))?;
    }
    if let Some(p) = &exports.heisenberg {
        model_localization(model, sample_rate)?.write_csv(p)?;
    }
    Ok(())
}

/// `wkd eval`: test-split loss of a checkpoint, written to `eval.json`.
pub fn eval(cfg: &RunConfig, checkpoint: &Path, exports: &Exports) -> anyhow::Result<EvalReport> {
    let model = load_checkpoint(cfg, checkpoint)?;
    let fb = cfg.teacher.spec().build()?;
    let s = splits(cfg, &fb)?;
    let summary = evaluate(&model, &s.test)?;
    let sr = fb.sample_rate;
    let report = EvalReport {
        model: model.kind(),
        checkpoint: checkpoint.to_path_buf(),
        test_loss_mean: summary.mean,
        test_loss_std: summary.std,
        per_item: summary.per_item,
        localization: model_localization(&model, sr)?.quantiles(),
    };
    std::fs::create_dir_all(&cfg.run.output)?;
    write_json(&cfg.run.output.join("eval.json"), &report)?;
    write_config(&cfg.run.output, cfg)?;
    export_model(&model, exports, sr)?;
    Ok(report)
}

/// `wkd export`: impulse responses and localisation of a checkpoint, or of
/// the configured teacher when no checkpoint is given.
pub fn export(cfg: &RunConfig, checkpoint: Option<&Path>, exports: &Exports) -> anyhow::Result<()> {
    if exports.export_ir.is_none() && exports.heisenberg.is_none() {
        return Err(UsageError("nothing to export: pass --export-ir and/or --heisenberg".into()).into());
    }
    let sr = cfg.teacher.sample_rate;
    match checkpoint {
        Some(p) => export_model(&load_checkpoint(cfg, p)?, exports, sr),
        None => {
            let fb = cfg.teacher.spec().build()?;
            let rows: Vec<Atom<Complex64>> = fb
                .filters
                .iter()
                .map(|h| Atom {
                    start: -((h.len() / 2) as isize),
                    taps: h.clone(),
                })
                .collect();
            if let Some(p) = &exports.export_ir {
                write_impulse_responses_csv(p, &rows)?;
            }
            if let Some(p) = &exports.heisenberg {
                localization_report(&fb.filters, sr)?.write_csv(p)?;
            }
            Ok(())
        }
    }
}
