mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use wkd_core::dtcwt::Dtcwt;
use wkd_core::signal::{negative_frequency_energy_ratio, strided_conv};
use wkd_core::students::{gabor_kernel, Conv1D, Gabor1D, MuReNN, StudentModel};

fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Band `j` by circular direct summation of the wavelet atom, decimated by `2^j`.
fn direct_band(x: &[f64], j: usize) -> Vec<Complex64> {
    let n = x.len();
    let psi = Dtcwt::shared().wavelet(j).wrap(n);
    (0..n >> j)
        .map(|m| {
            let t = m << j;
            (0..n).map(|k| psi[k] * x[(t + n - k) % n]).sum()
        })
        .collect()
}

#[test]
fn strided_conv_matches_direct_sum() {
    let mut r = rng(10);
    for _ in 0..20 {
        let n = r.random_range(1..120);
        let half = r.random_range(1..12);
        let stride = r.random_range(1..9);
        let x = noise(&mut r, n);
        let h = noise(&mut r, 2 * half);
        let fast: Vec<f64> = strided_conv(&x, &h, stride).unwrap();
        let slow = direct_strided(&x, &h, stride);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b.re).abs() <= 1e-12 * (1.0 + b.re.abs()));
        }
        assert_eq!(fast.len(), slow.len());
    }
}

#[test]
fn conv1d_matches_direct_sum() {
    let mut r = rng(11);
    for _ in 0..10 {
        let levels = r.random_range(1..=3);
        let f = r.random_range(1..=4);
        let t = r.random_range(16..=256);
        let m = Conv1D::random(f, r.random_range(1..=16), levels, r.random()).unwrap();
        let x = noise(&mut r, t);
        let out = m.forward(&x);
        for (i, k) in m.kernels.iter().enumerate() {
            let want = direct_strided(&x, k, 1 << levels);
            assert!(rel_err(out.row(i), &want) <= 1e-12);
        }
    }
}

#[test]
fn murenn_matches_wavelet_then_conv() {
    let mut r = rng(12);
    for _ in 0..10 {
        let levels = r.random_range(1..=3);
        let f = r.random_range(1..=4);
        let t = 256;
        let assignment: Vec<usize> = (0..f).map(|_| r.random_range(0..levels)).collect();
        let m = MuReNN::random(assignment, levels, r.random(), true).unwrap();
        let x = noise(&mut r, t);
        let out = m.forward(&x).unwrap();
        for i in 0..f {
            let j = m.assignment[i];
            let band = direct_band(&x, j);
            let want = direct_strided(&band, &m.kernels[i], 1 << (levels - j));
            assert!(rel_err(out.row(i), &want) <= 1e-12, "filter {i}");
        }
    }
}

#[test]
fn gabor_paths_agree() {
    // forward through cached kernels equals convolution with a freshly built kernel
    let g = Gabor1D::new(vec![1.3, 0.7], vec![3.0, 9.0], vec![0.3, 0.05], 32, 2).unwrap();
    let mut r = rng(13);
    let x = noise(&mut r, 300);
    let out = g.forward(&x);
    for f in 0..2 {
        let k = gabor_kernel(g.amplitude()[f], g.sigma()[f], g.eta()[f], 32).unwrap();
        let want = direct_strided(&x, &k, 4);
        assert!(rel_err(out.row(f), &want) <= 1e-12);
    }
}

#[test]
fn gabor_responds_to_matched_complex_exponential() {
    // an input tone at η gives constant-magnitude interior output equal to
    // the envelope's DC gain a·Σ exp(−τ²/2σ²)/(√(2π)σ)
    let (a, sigma, eta, half) = (1.7, 6.0, 0.125, 64usize);
    let g = Gabor1D::new(vec![a], vec![sigma], vec![eta], half, 1).unwrap();
    let gain: f64 = (-(half as i64)..half as i64)
        .map(|t| a * (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .sum::<f64>()
        / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let x: Vec<f64> = (0..1024)
        .map(|t| (2.0 * std::f64::consts::PI * eta * t as f64).cos())
        .collect();
    let out = g.forward(&x);
    let interior = &out.row(0)[half..(1024 - half) / 2];
    // the cosine is half e^{iωt} plus a far-off conjugate tone
    for z in interior {
        assert!((z.norm() - 0.5 * gain).abs() <= 1e-6 * gain, "{} vs {}", z.norm(), 0.5 * gain);
    }
}

#[test]
fn gabor_output_scales_with_amplitude() {
    let mut r = rng(14);
    let x = noise(&mut r, 200);
    let g1 = Gabor1D::new(vec![1.0], vec![4.0], vec![0.2], 16, 2).unwrap();
    let g3 = Gabor1D::new(vec![3.0], vec![4.0], vec![0.2], 16, 2).unwrap();
    let (y1, y3) = (g1.forward(&x), g3.forward(&x));
    for (a, b) in y1.values.iter().zip(&y3.values) {
        assert!((a * 3.0 - b).norm() <= 1e-12 * (1.0 + b.norm()));
    }
}

#[test]
fn murenn_filters_vanish_on_constants() {
    let m = MuReNN::random(vec![0, 1, 2, 3], 4, 3, true).unwrap();
    for f in 0..4 {
        let h = m.full_rate_filter(f);
        let dc: Complex64 = h.taps.iter().sum();
        let mass: f64 = h.taps.iter().map(|z| z.norm()).sum();
        assert!(dc.norm() <= 1e-8 * mass, "filter {f}: {dc}");
    }
}

#[test]
fn murenn_filters_are_quasi_analytic() {
    let m = MuReNN::random(vec![1, 2, 3], 4, 4, true).unwrap();
    for f in 0..3 {
        let h = m.full_rate_filter(f);
        let ratio = negative_frequency_energy_ratio(&h.wrap(4096));
        assert!(ratio <= 0.02, "filter {f}: {ratio}");
    }
}

#[test]
fn student_model_dispatch_matches_variants() {
    let mut r = rng(15);
    let x = noise(&mut r, 128);
    let c = Conv1D::random(2, 4, 2, 1).unwrap();
    let via_enum = StudentModel::Conv1D(c.clone()).forward_samples(&x).unwrap();
    assert_eq!(via_enum, c.forward(&x));
}
