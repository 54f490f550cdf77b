//! The `wkd` command line: corpus synthesis, teacher caching, distillation,
//! evaluation and export.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use wkd_core::students::ModelKind;
use wkd_core::TeacherKind;

pub use config::RunConfig;

/// Bad flags, configuration or arguments (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Exit status for an error: 1 usage, 2 data, 3 numerical failure.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use wkd_core::Error as E;
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                _ if e.is_numerical() => EXIT_NUMERICAL,
                E::InvalidParameter(_) | E::InvalidKernel(_) | E::ShapeMismatch { .. } | E::AboveNyquist { .. } => {
                    EXIT_USAGE
                }
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

#[derive(Debug, Parser)]
#[command(name = "wkd", version, about = "Distil auditory filterbanks into learnable front ends")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic corpus (WAV files and manifest.csv).
    Synth(Common),
    /// Precompute the teacher spectrograms of every split into the cache.
    Teacher(Common),
    /// Train one or more students and report test losses.
    Distill(Common),
    /// Evaluate a checkpoint on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[command(flatten)]
        exports: Exports,
    },
    /// Export impulse responses and localisation of a checkpoint, or of the teacher.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        exports: Exports,
    },
}

#[derive(Debug, Args, Default)]
pub struct Exports {
    /// Write impulse responses as CSV.
    #[arg(long, value_name = "PATH")]
    pub export_ir: Option<PathBuf>,
    /// Write per-filter time–frequency localisation as CSV.
    #[arg(long, value_name = "PATH")]
    pub heisenberg: Option<PathBuf>,
}

/// Config file and the overrides shared by every subcommand.
#[derive(Debug, Args, Default, Clone)]
pub struct Common {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub teacher: Option<TeacherKind>,
    #[arg(long)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub epoch_size: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub levels: Option<usize>,
    /// Base seed for student initialisation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of synthetic corpus items.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub corpus: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

impl Common {
    /// The config file (or defaults) with flags applied.
    pub fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(k) = self.teacher {
            if k != cfg.teacher.kind {
                cfg.teacher = config::TeacherSection {
                    kind: k,
                    sample_rate: cfg.teacher.sample_rate,
                    ..Default::default()
                };
            }
        }
        macro_rules! set {
            ($flag:ident => $($field:tt)+) => {
                if let Some(v) = self.$flag.clone() {
                    cfg.$($field)+ = v;
                }
            };
        }
        set!(model => student.model);
        set!(levels => student.levels);
        set!(trials => run.trials);
        set!(seed => run.seed);
        set!(epochs => train.epochs);
        set!(epoch_size => train.epoch_size);
        set!(batch_size => train.batch_size);
        set!(learning_rate => train.learning_rate);
        set!(count => data.count);
        set!(output => run.output);
        if let Some(c) = &self.corpus {
            cfg.data.corpus = Some(c.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
