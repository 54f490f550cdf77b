//! Distillation loss, its gradient, Adam and the training loop.
//!
//! The loss of one excerpt compares per-frame L2-normalised power
//! spectrograms:
//!
//! ```text
//! ℓ = ½ Σ_t Σ_f (P̃[f,t] − Ỹ[f,t])²,   P = |Φx|²
//! ```
//!
//! Frames flagged as silent on either side contribute nothing.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{load_spectrogram, save_spectrogram, EpochRecord};
use crate::signal::Signal;
use crate::students::{StudentModel, StudentOutput};
use crate::teachers::{
    column_norms, frame_threshold, hex, normalize_frames, Filterbank, NormalizedSpectrogram,
    Spectrogram,
};

/// Environment variable naming the on-disk teacher spectrogram cache.
pub const CACHE_ENV: &str = "WKD_CACHE_DIR";

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub per_frame: Vec<f64>,
}

fn check_shape(p: (usize, usize), y: (usize, usize)) -> Result<()> {
    if p != y {
        return Err(Error::ShapeMismatch {
            expected: format!("{}×{} teacher", p.0, p.1),
            got: format!("{}×{}", y.0, y.1),
        });
    }
    Ok(())
}

/// Loss between two power spectrograms of equal shape.
pub fn spectrogram_loss(student: &Spectrogram, teacher: &Spectrogram) -> Result<LossValue> {
    check_shape(teacher.shape(), student.shape())?;
    let p = normalize_frames(student);
    let y = normalize_frames(teacher);
    Ok(loss_normalized(&p, &y))
}

/// Loss of a student response against a teacher power spectrogram.
pub fn cosine_loss(student: &StudentOutput, teacher: &Spectrogram) -> Result<LossValue> {
    spectrogram_loss(&student.power(), teacher)
}

fn loss_normalized(p: &NormalizedSpectrogram, y: &NormalizedSpectrogram) -> LossValue {
    let (nf, nt) = p.spec.shape();
    let per_frame: Vec<f64> = (0..nt)
        .map(|t| {
            if p.zero_frames[t] || y.zero_frames[t] {
                return 0.0;
            }
            0.5 * (0..nf)
                .map(|f| (p.spec.get(f, t) - y.spec.get(f, t)).powi(2))
                .sum::<f64>()
        })
        .collect();
    LossValue {
        total: per_frame.iter().sum(),
        per_frame,
    }
}

/// Loss and `∂ℓ/∂P` for a power spectrogram `P` against a normalised teacher.
fn loss_and_power_grad(power: &Spectrogram, y: &NormalizedSpectrogram) -> (LossValue, Vec<f64>) {
    let (nf, nt) = power.shape();
    let norms = column_norms(&power.values, nf, nt);
    let eps = frame_threshold(&norms);
    let mut grad = vec![0.0; nf * nt];
    let mut per_frame = vec![0.0; nt];
    for t in 0..nt {
        let n = norms[t];
        if n <= eps || y.zero_frames[t] {
            continue;
        }
        let mut loss = 0.0;
        let mut dot = 0.0;
        for f in 0..nf {
            let pn = power.get(f, t) / n;
            let d = pn - y.spec.get(f, t);
            loss += d * d;
            dot += d * pn;
        }
        per_frame[t] = 0.5 * loss;
        // ∂ℓ/∂P_g = (D_g − P̃_g Σ_f D_f P̃_f) / ‖P_t‖
        for f in 0..nf {
            let pn = power.get(f, t) / n;
            let d = pn - y.spec.get(f, t);
            grad[f * nt + t] = (d - pn * dot) / n;
        }
    }
    let total = per_frame.iter().sum();
    (LossValue { total, per_frame }, grad)
}

/// Loss and its exact gradient with respect to the model weights.
pub fn loss_gradient(
    model: &StudentModel,
    x: &[f64],
    teacher: &NormalizedSpectrogram,
) -> Result<(LossValue, Vec<f64>)> {
    let (out, tape) = model.forward_tape(x)?;
    check_shape(teacher.spec.shape(), (out.n_filters, out.n_frames))?;
    let power = out.power();
    let (loss, dp) = loss_and_power_grad(&power, teacher);
    // ∂ℓ/∂Re y + i ∂ℓ/∂Im y = 2 y ∂ℓ/∂P
    let dy = StudentOutput {
        values: out.values.iter().zip(&dp).map(|(z, g)| z * (2.0 * g)).collect(),
        ..out
    };
    let grad = model.backward(x, &tape, &dy);
    if let Some(index) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index });
    }
    Ok((loss, grad))
}

/// Loss of `model` on one excerpt.
pub fn model_loss(model: &StudentModel, x: &[f64], teacher: &NormalizedSpectrogram) -> Result<LossValue> {
    let out = model.forward_samples(x)?;
    check_shape(teacher.spec.shape(), (out.n_filters, out.n_frames))?;
    Ok(loss_normalized(&normalize_frames(&out.power()), teacher))
}

/// Adam with bias correction.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, w: &mut [f64], grad: &[f64]) -> Result<()> {
        if w.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights and gradients", self.m.len()),
                got: format!("{} / {}", w.len(), grad.len()),
            });
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powf(self.t as f64);
        let c2 = 1.0 - self.beta2.powf(self.t as f64);
        for i in 0..w.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            w[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Shuffle and cut `items` into train/validation/test parts. Validation and
/// test sizes are rounded to the nearest integer; training takes the rest.
pub fn split_dataset<T: Clone>(items: &[T], ratios: [f64; 3], seed: u64) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    if items.len() < 10 {
        return Err(Error::param(format!(
            "splitting needs at least 10 items, got {}",
            items.len()
        )));
    }
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::param(format!("split ratios {ratios:?} must be nonnegative and sum to 1")));
    }
    let n = items.len();
    let n_val = (n as f64 * ratios[1]).round() as usize;
    let n_test = (n as f64 * ratios[2]).round() as usize;
    if n_val + n_test >= n {
        return Err(Error::param("split leaves no training items"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let pick = |r: &[usize]| r.iter().map(|&i| items[i].clone()).collect::<Vec<T>>();
    let n_train = n - n_val - n_test;
    Ok((
        pick(&idx[..n_train]),
        pick(&idx[n_train..n_train + n_val]),
        pick(&idx[n_train + n_val..]),
    ))
}

/// The `length` samples in the middle of `x` (offset `floor((T − length)/2)`).
pub fn sample_excerpt(x: &Signal, length: usize) -> Result<Signal> {
    if length == 0 || x.len() < length {
        return Err(Error::InvalidSignal(format!(
            "signal of {} samples is shorter than the {length}-sample excerpt",
            x.len()
        )));
    }
    let off = (x.len() - length) / 2;
    Signal::new(x.samples()[off..off + length].to_vec(), x.sample_rate())
}

/// Middle excerpts of every signal long enough; shorter ones are skipped with a warning.
pub fn excerpts<'a>(signals: impl IntoIterator<Item = &'a Signal>, length: usize) -> Vec<Signal> {
    signals
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| match sample_excerpt(s, length) {
            Ok(e) => Some(e),
            Err(e) => {
                log::warn!("skipping item {i}: {e}");
                None
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Excerpts drawn (with replacement) per epoch.
    pub epoch_size: usize,
    pub excerpt_length: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub seed: u64,
    /// Train / validation / test fractions.
    pub split: [f64; 3],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            epoch_size: 8000,
            excerpt_length: 1 << 12,
            batch_size: 16,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            seed: 0,
            split: [0.8, 0.1, 0.1],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.excerpt_length == 0 {
            return Err(Error::param("batch_size and excerpt_length must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::param(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || !(self.adam_eps > 0.0) {
            return Err(Error::param("Adam moments must lie in [0, 1) and eps must be positive"));
        }
        if (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 || self.split.iter().any(|r| *r < 0.0) {
            return Err(Error::param(format!("split ratios {:?} must sum to 1", self.split)));
        }
        Ok(())
    }

    fn adam(&self, n: usize) -> Adam {
        Adam {
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
            ..Adam::new(n, self.learning_rate)
        }
    }
}

/// Excerpts paired with their normalised teacher spectrograms.
#[derive(Clone, Debug)]
pub struct Targets {
    pub excerpts: Vec<Signal>,
    pub teacher: Vec<NormalizedSpectrogram>,
}

impl Targets {
    pub fn len(&self) -> usize {
        self.excerpts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.excerpts.is_empty()
    }
}

/// Content-addressed store of teacher spectrograms (`<sha256>.wkds`).
#[derive(Clone, Debug, Default)]
pub struct SpectrogramCache {
    dir: Option<PathBuf>,
}

impl SpectrogramCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    /// Location from `WKD_CACHE_DIR`, or disabled when unset.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(d),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&std::path::Path> {
        self.dir.as_deref()
    }

    pub fn key(teacher_fingerprint: &str, excerpt: &[f64], hop: usize) -> String {
        let mut h = Sha256::new();
        h.update(teacher_fingerprint.as_bytes());
        h.update((hop as u64).to_le_bytes());
        for v in excerpt {
            h.update(v.to_le_bytes());
        }
        hex(&h.finalize())
    }

    fn get_or_compute(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<Spectrogram>,
    ) -> Result<Spectrogram> {
        let Some(dir) = &self.dir else {
            return compute();
        };
        let path = dir.join(format!("{key}.wkds"));
        if path.exists() {
            match load_spectrogram(&path) {
                Ok(s) => return Ok(s),
                Err(e) => log::warn!("ignoring unreadable cache entry: {e}"),
            }
        }
        let s = compute()?;
        std::fs::create_dir_all(dir)?;
        save_spectrogram(&path, &s)?;
        Ok(s)
    }
}

/// Teacher spectrograms at hop `2^levels` for equal-length excerpts.
pub fn teacher_targets(
    fb: &Filterbank,
    excerpts: Vec<Signal>,
    levels: usize,
    cache: &SpectrogramCache,
) -> Result<Targets> {
    let hop = 1usize << levels;
    let Some(first) = excerpts.first() else {
        return Ok(Targets {
            excerpts,
            teacher: Vec::new(),
        });
    };
    if excerpts.iter().any(|e| e.len() != first.len()) {
        return Err(Error::param("excerpts must all have the same length"));
    }
    let plan = fb.plan(first.len());
    let fingerprint = if cache.dir.is_some() { fb.fingerprint() } else { String::new() };
    let teacher = excerpts
        .par_iter()
        .map(|e| {
            let key = SpectrogramCache::key(&fingerprint, e.samples(), hop);
            let s = cache.get_or_compute(&key, || plan.apply(e.samples(), hop))?;
            Ok(normalize_frames(&s))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Targets { excerpts, teacher })
}

/// Mean loss over a set of targets, summed in order.
pub fn mean_loss(model: &StudentModel, targets: &Targets) -> Result<f64> {
    let losses = per_item_losses(model, targets)?;
    if losses.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

pub fn per_item_losses(model: &StudentModel, targets: &Targets) -> Result<Vec<f64>> {
    targets
        .excerpts
        .par_iter()
        .zip(&targets.teacher)
        .map(|(x, y)| model_loss(model, x.samples(), y).map(|l| l.total))
        .collect()
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Final model, or the last one with finite validation loss if training diverged.
    pub model: StudentModel,
    pub history: Vec<EpochRecord>,
    /// Validation loss before the first update.
    pub initial_val_loss: f64,
    /// Set when training stopped early on a non-finite loss or gradient.
    pub divergence: Option<Error>,
}

/// Train `model` on `train`, logging the validation loss after every epoch.
pub fn train(
    mut model: StudentModel,
    train_set: &Targets,
    val_set: &Targets,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyCorpus("training split is empty".into()));
    }
    let start = Instant::now();
    let initial_val_loss = mean_loss(&model, val_set)?;
    let mut history = Vec::with_capacity(config.epochs);
    let mut adam = config.adam(model.n_params());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut last_good = model.clone();

    for epoch in 1..=config.epochs {
        let draws: Vec<usize> = (0..config.epoch_size)
            .map(|_| rng.random_range(0..train_set.len()))
            .collect();
        let mut train_sum = 0.0;
        for batch in draws.chunks(config.batch_size) {
            let results = batch
                .par_iter()
                .map(|&i| {
                    loss_gradient(&model, train_set.excerpts[i].samples(), &train_set.teacher[i])
                })
                .collect::<Vec<_>>();
            let mut grad = vec![0.0; model.n_params()];
            for r in results {
                let (loss, g) = match r {
                    Ok(v) => v,
                    Err(e) if e.is_numerical() => {
                        return Ok(diverged(last_good, history, initial_val_loss, epoch, e));
                    }
                    Err(e) => return Err(e),
                };
                train_sum += loss.total;
                for (a, b) in grad.iter_mut().zip(&g) {
                    *a += b;
                }
            }
            let scale = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= scale);
            let mut w = model.params();
            adam.step(&mut w, &grad)?;
            model.set_params(&w)?;
            model.project();
        }
        let val = mean_loss(&model, val_set)?;
        let mean_train = if config.epoch_size == 0 { f64::NAN } else { train_sum / config.epoch_size as f64 };
        if !val.is_finite() && !val_set.is_empty() {
            let e = Error::Diverged {
                epoch,
                reason: "validation loss is not finite".into(),
            };
            return Ok(diverged(last_good, history, initial_val_loss, epoch, e));
        }
        history.push(EpochRecord {
            epoch,
            mean_train_loss: mean_train,
            mean_val_loss: val,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
        log::info!("epoch {epoch}: train {mean_train:.5} val {val:.5}");
        last_good = model.clone();
    }
    Ok(TrainOutcome {
        model,
        history,
        initial_val_loss,
        divergence: None,
    })
}

fn diverged(
    model: StudentModel,
    history: Vec<EpochRecord>,
    initial_val_loss: f64,
    epoch: usize,
    cause: Error,
) -> TrainOutcome {
    log::error!("training stopped at epoch {epoch}: {cause}");
    let divergence = match cause {
        Error::Diverged { .. } => cause,
        other => Error::Diverged {
            epoch,
            reason: other.to_string(),
        },
    };
    TrainOutcome {
        model,
        history,
        initial_val_loss,
        divergence: Some(divergence),
    }
}

/// Copy of a complex filterbank with every filter rotated by a random
/// constant phase. Output magnitudes, and therefore the teacher
/// spectrogram, are unchanged up to rounding.
pub fn randomize_phases(fb: &Filterbank, seed: u64) -> Filterbank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let filters = fb
        .filters
        .iter()
        .map(|h| {
            let rot = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            h.iter().map(|z| z * rot).collect()
        })
        .collect();
    Filterbank {
        filters,
        ..fb.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::students::Conv1D;

    #[test]
    fn identical_and_orthogonal_frames() {
        let a = Spectrogram::from_rows(vec![vec![1.0, 0.0], vec![2.0, 3.0], vec![0.0, 0.0]], 1).unwrap();
        assert_eq!(spectrogram_loss(&a, &a).unwrap().total, 0.0);
        let b = Spectrogram::from_rows(vec![vec![0.0, 5.0], vec![0.0, 0.0], vec![7.0, 0.0]], 1).unwrap();
        let l = spectrogram_loss(&a, &b).unwrap();
        assert!((l.per_frame[0] - 1.0).abs() < 1e-15);
        assert!((l.per_frame[1] - 1.0).abs() < 1e-15);
        assert!((l.total - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hand_evaluated_loss() {
        let p = Spectrogram::from_rows(vec![vec![1.0, 0.5], vec![2.0, 0.1], vec![0.3, 4.0]], 1).unwrap();
        let y = Spectrogram::from_rows(vec![vec![0.2, 1.0], vec![0.9, 1.0], vec![1.5, 0.0]], 1).unwrap();
        let mut want = 0.0;
        for t in 0..2 {
            let pc = p.column(t);
            let yc = y.column(t);
            let pn = pc.iter().map(|v| v * v).sum::<f64>().sqrt();
            let yn = yc.iter().map(|v| v * v).sum::<f64>().sqrt();
            for f in 0..3 {
                want += 0.5 * (pc[f] / pn - yc[f] / yn).powi(2);
            }
        }
        let got = spectrogram_loss(&p, &y).unwrap().total;
        assert!((got - want).abs() <= 1e-14);
    }

    #[test]
    fn silent_frames_contribute_nothing() {
        let p = Spectrogram::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]], 1).unwrap();
        let y = Spectrogram::from_rows(vec![vec![1.0, 1.0], vec![0.0, 1.0]], 1).unwrap();
        let l = spectrogram_loss(&p, &y).unwrap();
        assert_eq!(l.per_frame[1], 0.0);
        assert!(spectrogram_loss(&p, &Spectrogram::zeros(3, 2, 1)).is_err());
    }

    #[test]
    fn adam_first_step_and_zero_gradient() {
        let mut adam = Adam::new(3, 0.01);
        let mut w = vec![1.0, 2.0, 3.0];
        adam.step(&mut w, &[0.0; 3]).unwrap();
        assert_eq!(w, vec![1.0, 2.0, 3.0]);
        assert_eq!(adam.t, 1);

        let mut adam = Adam::new(3, 0.01);
        let g = [0.5, -2.0, 1e-3];
        adam.step(&mut w, &g).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let want = [1.0, 2.0, 3.0][i] - 0.01 * g[i] / (g[i].abs() + 1e-8);
            assert!((wi - want).abs() < 1e-12);
        }
    }

    #[test]
    fn adam_descends_a_quadratic() {
        let f = |w: &[f64]| 3.0 * w[0] * w[0] + 0.5 * w[1] * w[1] + w[0] * w[1];
        let mut w = vec![2.0, -1.5];
        let mut adam = Adam::new(2, 0.01);
        let mut prev = f(&w);
        for step in 0..100 {
            let g = [6.0 * w[0] + w[1], w[1] + w[0]];
            adam.step(&mut w, &g).unwrap();
            let cur = f(&w);
            if step >= 5 {
                assert!(cur < prev, "step {step}: {cur} ≥ {prev}");
            }
            prev = cur;
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<usize> = (0..100).collect();
        let (a, b, c) = split_dataset(&items, [0.8, 0.1, 0.1], 4).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (80, 10, 10));
        let again = split_dataset(&items, [0.8, 0.1, 0.1], 4).unwrap();
        assert_eq!(again, (a.clone(), b.clone(), c.clone()));
        let mut all: Vec<usize> = a.into_iter().chain(b).chain(c).collect();
        all.sort();
        assert_eq!(all, items);
        assert!(split_dataset(&items[..9], [0.8, 0.1, 0.1], 0).is_err());
        let (a, b, c) = split_dataset(&items[..64], [0.8, 0.1, 0.1], 0).unwrap();
        assert_eq!((a.len(), b.len(), c.len()), (52, 6, 6));
    }

    #[test]
    fn excerpt_centering() {
        let s = Signal::new((0..4098).map(|i| i as f64).collect(), 1.0).unwrap();
        assert_eq!(sample_excerpt(&s, 4096).unwrap().samples()[0], 1.0);
        let s = Signal::new(vec![1.0; 4096], 1.0).unwrap();
        assert_eq!(sample_excerpt(&s, 4096).unwrap(), s);
        assert!(sample_excerpt(&s, 5000).is_err());
        let short = Signal::new(vec![1.0; 10], 1.0).unwrap();
        assert_eq!(excerpts([&s, &short, &s], 4096).len(), 2);
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let model = StudentModel::Conv1D(Conv1D::random(2, 4, 2, 0).unwrap());
        let x = Signal::new((0..32).map(|i| (i as f64).sin()).collect(), 1.0).unwrap();
        let y = normalize_frames(&Spectrogram::from_rows(vec![vec![1.0; 8], vec![0.5; 8]], 4).unwrap());
        let t = Targets {
            excerpts: vec![x],
            teacher: vec![y],
        };
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let out = train(model.clone(), &t, &t, &cfg).unwrap();
        assert_eq!(out.model, model);
        assert!(out.history.is_empty());
    }
}
