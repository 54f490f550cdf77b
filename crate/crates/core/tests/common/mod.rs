#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wkd_core::distill::loss_gradient;
use wkd_core::students::{Conv1D, Gabor1D, ModelKind, MuReNN, StudentModel};
use wkd_core::teachers::{normalize_frames, NormalizedSpectrogram, Spectrogram};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// A random model of `kind` with `f` filters at depth `levels`.
pub fn random_model(kind: ModelKind, rng: &mut ChaCha8Rng, f: usize, levels: usize) -> StudentModel {
    let seed = rng.random();
    match kind {
        ModelKind::Conv1d => {
            let half = rng.random_range(2..=8);
            StudentModel::Conv1D(Conv1D::random(f, half, levels, seed).unwrap())
        }
        ModelKind::Gabor1d => {
            let half = rng.random_range(8..=24);
            let a = (0..f).map(|_| rng.random_range(0.5..2.0)).collect();
            let s = (0..f).map(|_| rng.random_range(1.5..6.0)).collect();
            let e = (0..f).map(|_| rng.random_range(0.05..0.45)).collect();
            StudentModel::Gabor1D(Gabor1D::new(a, s, e, half, levels).unwrap())
        }
        ModelKind::Murenn => {
            let assignment = (0..f).map(|_| rng.random_range(0..levels)).collect();
            StudentModel::MuReNN(MuReNN::random(assignment, levels, seed, false).unwrap())
        }
    }
}

pub fn random_teacher(rng: &mut ChaCha8Rng, f: usize, n: usize, hop: usize) -> NormalizedSpectrogram {
    let rows = (0..f)
        .map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    normalize_frames(&Spectrogram::from_rows(rows, hop).unwrap())
}

/// Largest coordinate-wise relative error between the analytic gradient and
/// central differences with step `1e-5·max(|w_i|, 1)`. Each error is taken
/// relative to the larger of the two values, floored at `1e-4` of the
/// largest gradient entry so that coordinates that are zero up to rounding
/// do not dominate.
pub fn gradient_error(model: &StudentModel, x: &[f64], teacher: &NormalizedSpectrogram) -> f64 {
    let (_, grad) = loss_gradient(model, x, teacher).unwrap();
    let w = model.params();
    let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let loss_at = |w: &[f64]| {
        let mut m = model.clone();
        m.set_params(w).unwrap();
        loss_gradient(&m, x, teacher).unwrap().0.total
    };
    let mut worst = 0.0f64;
    for i in 0..w.len() {
        let h = 1e-5 * w[i].abs().max(1.0);
        let mut wp = w.clone();
        wp[i] += h;
        let mut wm = w.clone();
        wm[i] -= h;
        let fd = (loss_at(&wp) - loss_at(&wm)) / (2.0 * h);
        let denom = grad[i].abs().max(fd.abs()).max(1e-4 * scale).max(1e-300);
        worst = worst.max((grad[i] - fd).abs() / denom);
    }
    worst
}

/// Direct evaluation of `(x ⊛ h)[s·t]` with zero padding, centred kernel.
pub fn direct_strided<X, H>(x: &[X], h: &[H], stride: usize) -> Vec<num_complex::Complex64>
where
    X: Copy + Into<num_complex::Complex64>,
    H: Copy + Into<num_complex::Complex64>,
{
    let l = (h.len() / 2) as i64;
    let n = x.len().div_ceil(stride);
    (0..n)
        .map(|t| {
            let mut acc = num_complex::Complex64::default();
            for tau in -l..l {
                let i = (stride * t) as i64 - tau;
                if i >= 0 && (i as usize) < x.len() {
                    acc += x[i as usize].into() * h[(tau + l) as usize].into();
                }
            }
            acc
        })
        .collect()
}
