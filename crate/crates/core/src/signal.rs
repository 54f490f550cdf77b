//! Sampled signals and the convolution primitives every other module builds on.
//!
//! Kernels follow a centred indexing convention: a kernel of length `2L` holds
//! taps for `τ = -L ..= L-1`, stored at `h[τ + L]`. [`strided_conv`] evaluates
//!
//! ```text
//! y[t] = Σ_{τ=-L}^{L-1} x[stride·t − τ] · h[τ]
//! ```
//!
//! with `x` zero outside `0..T`, which yields `ceil(T / stride)` outputs.

use std::cell::RefCell;
use std::ops::{AddAssign, Mul};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// A finite real waveform together with its sampling rate in Hz.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidSignal("signal is empty".into()));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sample rate must be positive, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

/// A complex sequence stored as interleaved real/imaginary pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexSignal {
    pub values: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn from_parts(real: &[f64], imag: &[f64]) -> Result<Self> {
        if real.len() != imag.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("imaginary part of length {}", real.len()),
                got: format!("{}", imag.len()),
            });
        }
        Ok(Self {
            values: real
                .iter()
                .zip(imag)
                .map(|(&re, &im)| Complex64::new(re, im))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Scalars whose finiteness can be checked (kernel validation).
pub trait Finite: Copy {
    fn is_finite_value(self) -> bool;
}

impl Finite for f64 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Finite for Complex64 {
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

pub(crate) fn validate_kernel<H: Finite>(h: &[H]) -> Result<()> {
    if h.is_empty() {
        return Err(Error::InvalidKernel("kernel is empty".into()));
    }
    if h.len() % 2 != 0 {
        return Err(Error::InvalidKernel(format!(
            "kernel length must be even (2L), got {}",
            h.len()
        )));
    }
    if let Some(i) = h.iter().position(|v| !v.is_finite_value()) {
        return Err(Error::InvalidKernel(format!("non-finite tap at index {i}")));
    }
    Ok(())
}

/// Number of outputs produced by a stride-`stride` convolution over `len` samples.
pub fn strided_len(len: usize, stride: usize) -> usize {
    len.div_ceil(stride)
}

/// Range of τ offsets (relative to `-L`) that touch valid input samples for output `t`.
#[inline]
fn tap_range(center: isize, half: isize, len: isize) -> (isize, isize) {
    // need 0 <= center - τ < len  and  -half <= τ < half
    let lo = (center - len + 1).max(-half);
    let hi = center.min(half - 1);
    (lo, hi)
}

/// Strided, zero-padded convolution with a centred kernel of length `2L`.
pub fn strided_conv<X, H, Y>(x: &[X], h: &[H], stride: usize) -> Result<Vec<Y>>
where
    X: Copy + Mul<H, Output = Y>,
    H: Finite,
    Y: Copy + Default + AddAssign,
{
    validate_kernel(h)?;
    if stride == 0 {
        return Err(Error::param("stride must be at least 1"));
    }
    Ok(strided_conv_unchecked(x, h, stride))
}

pub(crate) fn strided_conv_unchecked<X, H, Y>(x: &[X], h: &[H], stride: usize) -> Vec<Y>
where
    X: Copy + Mul<H, Output = Y>,
    H: Copy,
    Y: Copy + Default + AddAssign,
{
    let half = (h.len() / 2) as isize;
    let len = x.len() as isize;
    (0..strided_len(x.len(), stride))
        .map(|t| {
            let center = (t * stride) as isize;
            let (lo, hi) = tap_range(center, half, len);
            let mut acc = Y::default();
            for tau in lo..=hi {
                acc += x[(center - tau) as usize] * h[(tau + half) as usize];
            }
            acc
        })
        .collect()
}

/// Adjoint of [`strided_conv`] with respect to the kernel: given upstream
/// gradients `g[t]` on the outputs, returns `Σ_t g[t]·x[stride·t − τ]` for each tap.
pub(crate) fn strided_conv_kernel_grad<X, G, Y>(
    x: &[X],
    g: &[G],
    stride: usize,
    kernel_len: usize,
) -> Vec<Y>
where
    X: Copy + Mul<G, Output = Y>,
    G: Copy,
    Y: Copy + Default + AddAssign,
{
    let half = (kernel_len / 2) as isize;
    let len = x.len() as isize;
    let mut out = vec![Y::default(); kernel_len];
    for (t, &gt) in g.iter().enumerate() {
        let center = (t * stride) as isize;
        let (lo, hi) = tap_range(center, half, len);
        for tau in lo..=hi {
            out[(tau + half) as usize] += x[(center - tau) as usize] * gt;
        }
    }
    out
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// In-place forward DFT (unnormalised).
pub fn fft_in_place(buf: &mut [Complex64]) {
    fft_plan(buf.len(), false).process(buf);
}

/// In-place inverse DFT, normalised by `1/n`.
pub fn ifft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    fft_plan(n, true).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Analytic signal `x + i·H(x)` from one-sided spectrum doubling.
///
/// Odd-length inputs are zero-padded by one sample for the transform; the
/// output has the input's length and its real part is the input, bit for bit.
pub fn analytic_signal(x: &Signal) -> ComplexSignal {
    ComplexSignal::new(analytic_of(x.samples()))
}

pub(crate) fn analytic_of(x: &[f64]) -> Vec<Complex64> {
    let n = x.len() + x.len() % 2;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(n, Complex64::default());
    fft_in_place(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || k == half {
            continue;
        } else if k < half {
            *v *= 2.0;
        } else {
            *v = Complex64::default();
        }
    }
    ifft_in_place(&mut buf);
    x.iter()
        .zip(&buf)
        .map(|(&re, z)| Complex64::new(re, z.im))
        .collect()
}

/// Fraction of DFT energy at strictly negative frequencies (bins above `n/2`).
/// The Nyquist bin of an even-length sequence is split evenly between both halves.
pub fn negative_frequency_energy_ratio(z: &[Complex64]) -> f64 {
    let n = z.len();
    if n == 0 {
        return 0.0;
    }
    let mut buf = z.to_vec();
    fft_in_place(&mut buf);
    let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut neg: f64 = buf[n / 2 + 1..].iter().map(|v| v.norm_sqr()).sum();
    if n % 2 == 0 {
        neg += 0.5 * buf[n / 2].norm_sqr();
    }
    neg / total
}

/// Linear convolution of two real sequences through a power-of-two FFT.
pub fn fft_convolve(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let hc: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    Ok(fft_convolve_complex(&xc, &hc)?.into_iter().map(|z| z.re).collect())
}

/// Linear convolution of two complex sequences; output length `len(x)+len(h)-1`.
pub fn fft_convolve_complex(x: &[Complex64], h: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() || h.is_empty() {
        return Err(Error::param("fft_convolve needs two non-empty inputs"));
    }
    let out_len = x.len() + h.len() - 1;
    let n = out_len.next_power_of_two();
    let mut xf = x.to_vec();
    xf.resize(n, Complex64::default());
    let mut hf = h.to_vec();
    hf.resize(n, Complex64::default());
    fft_in_place(&mut xf);
    fft_in_place(&mut hf);
    for (a, b) in xf.iter_mut().zip(&hf) {
        *a *= *b;
    }
    ifft_in_place(&mut xf);
    xf.truncate(out_len);
    Ok(xf)
}
