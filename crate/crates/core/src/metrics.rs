//! Time–frequency localisation and test-set evaluation.
//!
//! Spreads are measured on the analytic part of a filter: its DFT over a
//! zero-padded buffer of at least eight times its length, restricted to
//! nonnegative frequencies. Both `σ_t` (samples) and `σ_ω` (rad/sample) are
//! standard deviations of the corresponding energy densities, so that
//! `σ_t·σ_ω ≥ 1/2` with equality for Gaussians.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distill::{per_item_losses, Targets};
use crate::dtcwt::Atom;
use crate::error::{Error, Result};
use crate::signal::{fft_in_place, ifft_in_place};
use crate::students::StudentModel;
use crate::teachers::Filterbank;

/// Lower bound of `σ_t·σ_ω`.
pub const UNCERTAINTY_BOUND: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Heisenberg {
    pub sigma_t: f64,
    pub sigma_w: f64,
    pub ratio: f64,
    /// Mean angular frequency of the analytic spectrum (rad/sample).
    pub mean_w: f64,
}

fn spread(weights: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (x, w) in weights {
        m0 += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    let mean = m1 / m0;
    (mean, (m2 / m0 - mean * mean).max(0.0).sqrt())
}

/// `(σ_t, σ_ω, σ_t·σ_ω)` of a complex FIR.
pub fn heisenberg_ratio(h: &[Complex64]) -> Result<Heisenberg> {
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::InvalidKernel("filter has non-finite taps".into()));
    }
    let energy: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if !(energy > 0.0) {
        return Err(Error::InvalidKernel("filter has zero energy".into()));
    }
    let n = (8 * h.len()).next_power_of_two();
    let offset = (n - h.len()) / 2;
    let mut buf = vec![Complex64::default(); n];
    buf[offset..offset + h.len()].copy_from_slice(h);
    fft_in_place(&mut buf);
    let half = n / 2;
    for z in &mut buf[half + 1..] {
        *z = Complex64::default();
    }
    buf[half] *= 0.5;
    let (mean_w, sigma_w) = spread(
        buf[..=half]
            .iter()
            .enumerate()
            .map(|(k, z)| (2.0 * PI * k as f64 / n as f64, z.norm_sqr())),
    );
    ifft_in_place(&mut buf);
    let (_, sigma_t) = spread(buf.iter().enumerate().map(|(i, z)| (i as f64, z.norm_sqr())));
    if !(sigma_t > 0.0 && sigma_w > 0.0) {
        return Err(Error::InvalidKernel(
            "filter has no energy at nonnegative frequencies".into(),
        ));
    }
    Ok(Heisenberg {
        sigma_t,
        sigma_w,
        ratio: sigma_t * sigma_w,
        mean_w,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRow {
    pub filter_index: usize,
    pub center_hz: f64,
    pub sigma_t: f64,
    pub sigma_w: f64,
    pub ratio: f64,
}

/// Box-plot summary of a set of ratios (linear interpolation between order statistics).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub rows: Vec<LocalizationRow>,
}

impl LocalizationReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn quantiles(&self) -> Quantiles {
        let mut r = self.ratios();
        r.sort_by(f64::total_cmp);
        Quantiles {
            min: quantile(&r, 0.0),
            q1: quantile(&r, 0.25),
            median: quantile(&r, 0.5),
            q3: quantile(&r, 0.75),
            max: quantile(&r, 1.0),
        }
    }

    pub fn median(&self) -> f64 {
        self.quantiles().median
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Localisation of a list of FIRs at `sample_rate`.
pub fn localization_report(filters: &[Vec<Complex64>], sample_rate: f64) -> Result<LocalizationReport> {
    let rows = filters
        .par_iter()
        .enumerate()
        .map(|(i, h)| {
            let hz = heisenberg_ratio(h)?;
            Ok(LocalizationRow {
                filter_index: i,
                center_hz: hz.mean_w / (2.0 * PI) * sample_rate,
                sigma_t: hz.sigma_t,
                sigma_w: hz.sigma_w,
                ratio: hz.ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalizationReport { rows })
}

pub fn teacher_localization(fb: &Filterbank) -> Result<LocalizationReport> {
    localization_report(&fb.filters, fb.sample_rate)
}

/// Localisation of a student's full-rate filters (the whole wavelet cascade
/// for MuReNN).
pub fn model_localization(model: &StudentModel, sample_rate: f64) -> Result<LocalizationReport> {
    let taps: Vec<Vec<Complex64>> = model.full_rate_filters().into_iter().map(|a| a.taps).collect();
    localization_report(&taps, sample_rate)
}

/// Impulse responses for plotting. MuReNN rows are cropped to the
/// receptive field `2^(j+1)·L_j` centred on lag zero.
pub fn impulse_responses(model: &StudentModel) -> Vec<Atom<Complex64>> {
    let full = model.full_rate_filters();
    match model {
        StudentModel::MuReNN(m) => full
            .into_iter()
            .enumerate()
            .map(|(f, atom)| {
                let rf = m.receptive_field(f) as isize;
                let (lo, hi) = (-rf / 2, rf - rf / 2);
                let taps = (lo..hi)
                    .map(|tau| {
                        let i = tau - atom.start;
                        if i >= 0 && (i as usize) < atom.taps.len() {
                            atom.taps[i as usize]
                        } else {
                            Complex64::default()
                        }
                    })
                    .collect();
                Atom { start: lo, taps }
            })
            .collect(),
        _ => full,
    }
}

/// Mean and (population) standard deviation of per-excerpt test losses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub mean: f64,
    pub std: f64,
    pub per_item: Vec<f64>,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn evaluate(model: &StudentModel, test: &Targets) -> Result<EvalSummary> {
    if test.is_empty() {
        return Err(Error::EmptyCorpus("test split is empty".into()));
    }
    let per_item = per_item_losses(model, test)?;
    let (mean, std) = mean_std(&per_item);
    Ok(EvalSummary { mean, std, per_item })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::students::{gabor_kernel, Conv1D, Gabor1D, MuReNN};
    use crate::teachers::TeacherSpec;

    #[test]
    fn gaussian_attains_bound() {
        let k = gabor_kernel(1.0, 64.0, 0.1, 1024).unwrap();
        let h = heisenberg_ratio(&k).unwrap();
        assert!((h.ratio - 0.5).abs() <= 0.01, "{}", h.ratio);
        assert!((h.sigma_t - 64.0 / 2f64.sqrt()).abs() < 0.1);
    }

    #[test]
    fn rectangle_is_worse_than_gaussian() {
        let rect: Vec<Complex64> = (0..64)
            .map(|t| Complex64::from_polar(1.0, 2.0 * PI * 0.2 * t as f64))
            .collect();
        let g = gabor_kernel(1.0, 16.0, 0.2, 128).unwrap();
        let r = heisenberg_ratio(&rect).unwrap().ratio;
        let q = heisenberg_ratio(&g).unwrap().ratio;
        assert!(r >= 1.2 * q, "{r} vs {q}");
    }

    #[test]
    fn scale_and_shift_invariance() {
        let g = gabor_kernel(1.0, 20.0, 0.15, 256).unwrap();
        let base = heisenberg_ratio(&g).unwrap().ratio;
        let scaled: Vec<Complex64> = g.iter().map(|z| z * 3.5).collect();
        assert!((heisenberg_ratio(&scaled).unwrap().ratio - base).abs() <= 1e-10);
        let mut shifted = vec![Complex64::default(); 40];
        shifted.extend_from_slice(&g);
        shifted.truncate(g.len());
        let sh = heisenberg_ratio(&shifted).unwrap().ratio;
        assert!((sh - base).abs() <= 1e-10, "{sh} vs {base}");
        assert!(heisenberg_ratio(&[Complex64::default(); 8]).is_err());
    }

    #[test]
    fn teacher_cqt_ratios_are_similar() {
        let fb = TeacherSpec::synth_cqt(16000.0).build().unwrap();
        let rep = teacher_localization(&fb).unwrap();
        let q = rep.quantiles();
        assert!(q.min >= 0.5 * (1.0 - 1e-3));
        assert!(q.max / q.min <= 1.2, "{q:?}");
    }

    #[test]
    fn random_conv1d_is_poorly_localized() {
        let m = StudentModel::Conv1D(Conv1D::random(16, 512, 9, 1).unwrap());
        let rep = model_localization(&m, 16000.0).unwrap();
        assert!(rep.median() >= 5.0 * UNCERTAINTY_BOUND, "{}", rep.median());
    }

    #[test]
    fn impulse_response_shapes() {
        let g = Gabor1D::mel(4, 16000.0, 60.0, 8000.0, 32, 3).unwrap();
        let rows = impulse_responses(&StudentModel::Gabor1D(g.clone()));
        assert_eq!(rows[2].taps, g.kernels()[2]);
        let m = MuReNN::random(vec![0, 1, 1, 2], 3, 5, true).unwrap();
        let rows = impulse_responses(&StudentModel::MuReNN(m.clone()));
        for (f, r) in rows.iter().enumerate() {
            assert_eq!(r.taps.len(), m.receptive_field(f));
        }
        let zero = MuReNN::new(m.assignment.clone(), m.kernels.iter().map(|k| vec![0.0; k.len()]).collect(), 3).unwrap();
        let rows = impulse_responses(&StudentModel::MuReNN(zero));
        assert!(rows.iter().all(|r| r.taps.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn mean_std_arithmetic() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
    }
}
