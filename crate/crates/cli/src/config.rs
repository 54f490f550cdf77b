//! Run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use wkd_core::distill::TrainConfig;
use wkd_core::experiment::StudentConfig;
use wkd_core::students::ModelKind;
use wkd_core::{TeacherKind, TeacherSpec};

use crate::UsageError;

/// Teacher choice. Unset fields take the defaults of `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TeacherSection {
    pub kind: TeacherKind,
    pub sample_rate: f64,
    pub fir_length: Option<usize>,
    pub f_min: Option<f64>,
    pub f_max: Option<f64>,
    pub bins_per_octave: Option<usize>,
    pub octaves: Option<usize>,
    pub n_filters: Option<usize>,
}

impl Default for TeacherSection {
    fn default() -> Self {
        Self {
            kind: TeacherKind::SynthCqt,
            sample_rate: 16000.0,
            fir_length: None,
            f_min: None,
            f_max: None,
            bins_per_octave: None,
            octaves: None,
            n_filters: None,
        }
    }
}

impl TeacherSection {
    pub fn spec(&self) -> TeacherSpec {
        let base = TeacherSpec::for_kind(self.kind, self.sample_rate);
        TeacherSpec {
            fir_length: self.fir_length.unwrap_or(base.fir_length),
            f_min: self.f_min.unwrap_or(base.f_min),
            f_max: self.f_max.unwrap_or(base.f_max),
            bins_per_octave: self.bins_per_octave.unwrap_or(base.bins_per_octave),
            octaves: self.octaves.unwrap_or(base.octaves),
            n_filters: self.n_filters.unwrap_or(base.n_filters),
            ..base
        }
    }

    fn resolve(&mut self) {
        let s = self.spec();
        self.fir_length = Some(s.fir_length);
        self.f_min = Some(s.f_min);
        self.f_max = Some(s.f_max);
        self.bins_per_octave = Some(s.bins_per_octave);
        self.octaves = Some(s.octaves);
        self.n_filters = Some(s.n_filters);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudentSection {
    pub model: ModelKind,
    pub levels: usize,
    /// Half kernel length of Conv1D and Gabor1D.
    pub half_length: usize,
}

impl Default for StudentSection {
    fn default() -> Self {
        let s = StudentConfig::default();
        Self {
            model: ModelKind::Murenn,
            levels: s.levels,
            half_length: s.half_length,
        }
    }
}

impl StudentSection {
    pub fn student_config(&self) -> StudentConfig {
        StudentConfig {
            levels: self.levels,
            half_length: self.half_length,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Sine,
    Vowel,
    Wav,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub source: Source,
    /// Directory of WAV files. Synthetic sources are generated in memory when unset.
    pub corpus: Option<PathBuf>,
    pub count: usize,
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            source: Source::Sine,
            corpus: None,
            count: 64,
            duration_s: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub trials: usize,
    /// Trial `i` initialises its student with `seed + i`.
    pub seed: u64,
    pub output: PathBuf,
    /// Teacher spectrogram cache; `WKD_CACHE_DIR` wins when set.
    pub cache_dir: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            trials: 1,
            seed: 0,
            output: PathBuf::from("runs/default"),
            cache_dir: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub teacher: TeacherSection,
    pub student: StudentSection,
    pub train: TrainConfig,
    pub data: DataSection,
    pub run: RunSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| UsageError(format!("bad config: {e}")).into())
    }

    /// Parse `path`. Relative paths inside the file are taken relative to its directory.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(c) = cfg.data.corpus.as_mut() {
            rebase(c);
        }
        rebase(&mut cfg.run.output);
        if let Some(c) = cfg.run.cache_dir.as_mut() {
            rebase(c);
        }
        Ok(cfg)
    }

    /// Copy with every teacher default spelled out and absolute paths, so
    /// that it reproduces the run from any location.
    pub fn resolved(&self) -> Self {
        let mut out = self.clone();
        out.teacher.resolve();
        let abs = |p: &mut PathBuf| {
            if let Ok(a) = std::path::absolute(&*p) {
                *p = a;
            }
        };
        if let Some(c) = out.data.corpus.as_mut() {
            abs(c);
        }
        abs(&mut out.run.output);
        if let Some(c) = out.run.cache_dir.as_mut() {
            abs(c);
        }
        out
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(&self.resolved())?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let usage = |e: wkd_core::Error| UsageError(e.to_string());
        self.teacher.spec().validate().map_err(usage)?;
        self.train.validate().map_err(usage)?;
        if self.student.levels == 0 || self.student.half_length == 0 {
            return Err(UsageError("student levels and half_length must be positive".into()).into());
        }
        if self.run.trials == 0 {
            return Err(UsageError("trials must be at least 1".into()).into());
        }
        Ok(())
    }
}
