//! Split, distil and evaluate: one benchmark cell.

use serde::{Deserialize, Serialize};

use crate::distill::{excerpts, split_dataset, teacher_targets, train, SpectrogramCache, Targets, TrainConfig, TrainOutcome};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, mean_std, EvalSummary};
use crate::signal::Signal;
use crate::students::{default_student, Conv1D, ModelKind, StudentModel};
use crate::teachers::Filterbank;

/// Targets for the three splits of a corpus.
#[derive(Clone, Debug)]
pub struct Splits {
    pub train: Targets,
    pub val: Targets,
    pub test: Targets,
}

/// Shuffle `corpus` with `config.seed`, cut middle excerpts and compute the
/// teacher spectrograms of every split.
pub fn prepare_splits(
    fb: &Filterbank,
    corpus: &[Signal],
    levels: usize,
    config: &TrainConfig,
    cache: &SpectrogramCache,
) -> Result<Splits> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("no signals to split".into()));
    }
    if let Some(s) = corpus.iter().find(|s| s.sample_rate() != fb.sample_rate) {
        return Err(Error::param(format!(
            "corpus is sampled at {} Hz but the teacher at {} Hz",
            s.sample_rate(),
            fb.sample_rate
        )));
    }
    let (train, val, test) = split_dataset(corpus, config.split, config.seed)?;
    let cut = |set: &[Signal]| teacher_targets(fb, excerpts(set, config.excerpt_length), levels, cache);
    let splits = Splits {
        train: cut(&train)?,
        val: cut(&val)?,
        test: cut(&test)?,
    };
    if splits.train.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no training signal has {} samples",
            config.excerpt_length
        )));
    }
    Ok(splits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentConfig {
    pub levels: usize,
    /// Half length `L` of Conv1D and Gabor1D kernels.
    pub half_length: usize,
}

impl Default for StudentConfig {
    fn default() -> Self {
        Self {
            levels: 9,
            half_length: Conv1D::DEFAULT_HALF_LENGTH,
        }
    }
}

#[derive(Debug)]
pub struct Trial {
    pub seed: u64,
    pub outcome: TrainOutcome,
    pub test: EvalSummary,
}

/// Initialise a student with `seed`, train it and evaluate on the test split.
/// The split itself does not depend on `seed`.
pub fn run_trial(
    kind: ModelKind,
    fb: &Filterbank,
    splits: &Splits,
    student: &StudentConfig,
    config: &TrainConfig,
    seed: u64,
) -> Result<Trial> {
    let model = default_student(kind, fb, student.levels, seed, student.half_length)?;
    run_trial_with(model, splits, config, seed)
}

pub fn run_trial_with(model: StudentModel, splits: &Splits, config: &TrainConfig, seed: u64) -> Result<Trial> {
    let cfg = TrainConfig {
        seed,
        ..config.clone()
    };
    let outcome = train(model, &splits.train, &splits.val, &cfg)?;
    let test = evaluate(&outcome.model, &splits.test)?;
    Ok(Trial { seed, outcome, test })
}

/// Mean ± std over trials of the final test loss, as reported per table cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: ModelKind,
    pub trials: usize,
    pub test_loss_mean: f64,
    pub test_loss_std: f64,
    pub per_trial: Vec<f64>,
    pub seeds: Vec<u64>,
    pub diverged: Vec<bool>,
}

pub fn summarize(kind: ModelKind, trials: &[Trial]) -> Summary {
    let per_trial: Vec<f64> = trials.iter().map(|t| t.test.mean).collect();
    let (test_loss_mean, test_loss_std) = mean_std(&per_trial);
    Summary {
        model: kind,
        trials: trials.len(),
        test_loss_mean,
        test_loss_std,
        per_trial,
        seeds: trials.iter().map(|t| t.seed).collect(),
        diverged: trials.iter().map(|t| t.outcome.divergence.is_some()).collect(),
    }
}
