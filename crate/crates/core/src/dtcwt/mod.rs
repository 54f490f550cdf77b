//! Dual-tree complex wavelet transform.
//!
//! Level 0 splits the (full-rate) input with a biorthogonal pair. Tree a
//! keeps the even lowpass samples, tree b the odd ones, which is the
//! one-sample offset the quarter-shift filters need. At each deeper level
//! tree a filters with `h0a/h1a` and tree b with their time reverses; the
//! highpass outputs of both trees form the real and imaginary parts of a
//! band. Band `j` is sampled at rate `sr / 2^j` and covers roughly
//! `(sr / 2^(j+2), sr / 2^(j+1)]`.
//!
//! All filtering is circular. The input of every level is zero-padded to an
//! even length first, so band `j` has `2·ceil(T / 2^(j+1))` samples (at most
//! one more than `ceil(T / 2^j)`) and the lowpass has `ceil(T / 2^J)`.
//! The inverse only needs tree a and reproduces the input to rounding error.

pub mod filters;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal::{fft_in_place, ifft_in_place, ComplexSignal, Signal};

pub use filters::{FilterPair, WaveletFilterSet};

/// Deepest supported decomposition.
pub const MAX_LEVELS: usize = 24;

/// Output of [`Dtcwt::forward`].
#[derive(Clone, Debug, PartialEq)]
pub struct MRAPyramid {
    /// `bands[j]` is decimated by `2^j`.
    pub bands: Vec<ComplexSignal>,
    /// Tree-a lowpass residual at decimation `2^J`.
    pub lowpass: Vec<f64>,
    /// Length of the analysed signal before padding.
    pub signal_len: usize,
    pub sample_rate: f64,
}

impl MRAPyramid {
    pub fn levels(&self) -> usize {
        self.bands.len()
    }

    /// Energy of all bands plus the lowpass.
    pub fn energy(&self) -> f64 {
        self.bands.iter().map(|b| b.energy()).sum::<f64>()
            + self.lowpass.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            bands: self
                .bands
                .iter()
                .map(|b| ComplexSignal::new(vec![Complex64::default(); b.len()]))
                .collect(),
            lowpass: vec![0.0; self.lowpass.len()],
            signal_len: self.signal_len,
            sample_rate: self.sample_rate,
        }
    }
}

/// Expected band and lowpass lengths for a signal of `len` samples.
pub fn band_lengths(len: usize, levels: usize) -> (Vec<usize>, usize) {
    let mut n = len;
    let mut out = Vec::with_capacity(levels);
    for _ in 0..levels {
        let e = n + n % 2;
        out.push(e);
        n = e / 2;
    }
    (out, n)
}

/// Frequency interval `(low, high]` in Hz covered by each band.
pub fn band_center_frequencies(levels: usize, sample_rate: f64) -> Vec<(f64, f64)> {
    (0..levels)
        .map(|j| {
            let high = sample_rate / 2f64.powi(j as i32 + 1);
            (high / 2.0, high)
        })
        .collect()
}

/// Filter with a finite support starting at `start` (sample index of `taps[0]`).
#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub start: isize,
    pub taps: Vec<T>,
}

impl<T> Atom<T>
where
    T: Copy + Default + std::ops::AddAssign,
{
    /// Periodise onto a circle of length `n`: `out[k] = Σ_m taps[m]` over
    /// `start + m ≡ k (mod n)`.
    pub fn wrap(&self, n: usize) -> Vec<T> {
        let mut out = vec![T::default(); n];
        for (m, &v) in self.taps.iter().enumerate() {
            let k = (self.start + m as isize).rem_euclid(n as isize) as usize;
            out[k] += v;
        }
        out
    }
}

fn conv_atoms(a: &Atom<f64>, b: &Atom<f64>) -> Atom<f64> {
    let mut taps = vec![0.0; a.taps.len() + b.taps.len() - 1];
    for (i, &x) in a.taps.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (k, &y) in b.taps.iter().enumerate() {
            taps[i + k] += x * y;
        }
    }
    Atom {
        start: a.start + b.start,
        taps,
    }
}

fn upsample(h: &[f64], center: usize, factor: usize) -> Atom<f64> {
    let mut taps = vec![0.0; (h.len() - 1) * factor + 1];
    for (k, &v) in h.iter().enumerate() {
        taps[k * factor] = v;
    }
    Atom {
        start: -((center * factor) as isize),
        taps,
    }
}

/// `y[n] = Σ_k h[k]·s[(n − k + c) mod len]`.
fn circ_filter(s: &[f64], h: &[f64], c: usize) -> Vec<f64> {
    let n = s.len();
    let mut y = vec![0.0; n];
    for (k, &hk) in h.iter().enumerate() {
        let shift = (c as isize - k as isize).rem_euclid(n as isize) as usize;
        let (head, tail) = s.split_at(shift);
        let (y1, y2) = y.split_at_mut(n - shift);
        for (a, b) in y1.iter_mut().zip(tail) {
            *a += hk * b;
        }
        for (a, b) in y2.iter_mut().zip(head) {
            *a += hk * b;
        }
    }
    y
}

/// Adjoint of [`circ_filter`]: `r[m] = Σ_k h[k]·y[(m + k − c) mod len]`.
fn circ_filter_adjoint(y: &[f64], h: &[f64], c: usize, out: &mut [f64]) {
    let n = y.len();
    for (k, &hk) in h.iter().enumerate() {
        let shift = (k as isize - c as isize).rem_euclid(n as isize) as usize;
        let (head, tail) = y.split_at(shift);
        let (o1, o2) = out.split_at_mut(n - shift);
        for (a, b) in o1.iter_mut().zip(tail) {
            *a += hk * b;
        }
        for (a, b) in o2.iter_mut().zip(head) {
            *a += hk * b;
        }
    }
}

fn pad_even(mut s: Vec<f64>) -> Vec<f64> {
    if s.len() % 2 == 1 {
        s.push(0.0);
    }
    s
}

fn decimate(s: &[f64], phase: usize) -> Vec<f64> {
    s.iter().skip(phase).step_by(2).copied().collect()
}

fn combine(re: &[f64], im: &[f64]) -> ComplexSignal {
    ComplexSignal::new(
        re.iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(0.5 * a, 0.5 * b))
            .collect(),
    )
}

/// Transform with a fixed filter set. Immutable after construction.
#[derive(Clone, Debug)]
pub struct Dtcwt {
    filters: WaveletFilterSet,
    // level-0 filters scaled by √2; tree-b quarter-shift filters
    h0o: Vec<f64>,
    h1o: Vec<f64>,
    g0o: Vec<f64>,
    g1o: Vec<f64>,
    h0b: Vec<f64>,
    h1b: Vec<f64>,
}

impl Default for Dtcwt {
    fn default() -> Self {
        Self::from_filters_unchecked(WaveletFilterSet::default())
    }
}

impl Dtcwt {
    pub fn new(filters: WaveletFilterSet) -> Result<Self> {
        filters.validate()?;
        Ok(Self::from_filters_unchecked(filters))
    }

    pub(crate) fn from_filters_unchecked(filters: WaveletFilterSet) -> Self {
        let s2 = std::f64::consts::SQRT_2;
        let scale = |v: &[f64]| v.iter().map(|x| x * s2).collect::<Vec<_>>();
        let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
        Self {
            h0o: scale(&filters.level0.h0),
            h1o: scale(&filters.level0.h1),
            g0o: scale(&filters.level0.g0),
            g1o: scale(&filters.level0.g1),
            h0b: rev(&filters.qshift.h0),
            h1b: rev(&filters.qshift.h1).iter().map(|v| -v).collect(),
            filters,
        }
    }

    /// Shared instance built from the default tables.
    pub fn shared() -> &'static Dtcwt {
        static INSTANCE: OnceLock<Dtcwt> = OnceLock::new();
        INSTANCE.get_or_init(Dtcwt::default)
    }

    pub fn filters(&self) -> &WaveletFilterSet {
        &self.filters
    }

    fn c0(&self) -> usize {
        self.h0o.len() / 2
    }
    fn c1(&self) -> usize {
        self.h1o.len() / 2
    }
    fn cq(&self) -> usize {
        self.filters.qshift.h0.len() / 2 - 1
    }

    fn check_levels(len: usize, levels: usize) -> Result<()> {
        if levels == 0 {
            return Err(Error::param("the transform needs at least one level"));
        }
        if levels > MAX_LEVELS {
            return Err(Error::param(format!(
                "at most {MAX_LEVELS} levels are supported, got {levels}"
            )));
        }
        if len == 0 {
            return Err(Error::InvalidSignal("signal is empty".into()));
        }
        if len < 1 << (levels - 1) {
            return Err(Error::param(format!(
                "{levels} levels need at least {} samples, got {len}",
                1usize << (levels - 1)
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Signal, levels: usize) -> Result<MRAPyramid> {
        self.forward_samples(x.samples(), x.sample_rate(), levels)
    }

    pub fn forward_samples(&self, x: &[f64], sample_rate: f64, levels: usize) -> Result<MRAPyramid> {
        Self::check_levels(x.len(), levels)?;
        let xp = pad_even(x.to_vec());
        let lo0 = circ_filter(&xp, &self.h0o, self.c0());
        let hi0 = circ_filter(&xp, &self.h1o, self.c1());
        let n0 = hi0.len();
        let hi0_delayed: Vec<f64> = (0..n0).map(|n| hi0[(n + n0 - 1) % n0]).collect();

        let mut bands = Vec::with_capacity(levels);
        bands.push(combine(&hi0, &hi0_delayed));

        let mut sa = decimate(&lo0, 0);
        let mut sb: Vec<f64> = (0..n0 / 2).map(|m| lo0[(2 * m + n0 - 1) % n0]).collect();
        let q = &self.filters.qshift;
        let c = self.cq();
        for _ in 1..levels {
            sa = pad_even(sa);
            sb = pad_even(sb);
            let ua = circ_filter(&sa, &q.h1, c);
            let ub = circ_filter(&sb, &self.h1b, c);
            bands.push(combine(&ua, &ub));
            sa = decimate(&circ_filter(&sa, &q.h0, c), 0);
            sb = decimate(&circ_filter(&sb, &self.h0b, c), 0);
        }
        Ok(MRAPyramid {
            bands,
            lowpass: sa,
            signal_len: x.len(),
            sample_rate,
        })
    }

    pub fn inverse(&self, p: &MRAPyramid) -> Result<Signal> {
        let y = self.inverse_samples(p)?;
        Signal::new(y, p.sample_rate)
    }

    pub fn inverse_samples(&self, p: &MRAPyramid) -> Result<Vec<f64>> {
        let levels = p.bands.len();
        Self::check_levels(p.signal_len, levels)?;
        let (want, low_len) = band_lengths(p.signal_len, levels);
        for (j, (b, &n)) in p.bands.iter().zip(&want).enumerate() {
            if b.len() != n {
                return Err(Error::ShapeMismatch {
                    expected: format!("band {j} of length {n}"),
                    got: format!("{}", b.len()),
                });
            }
        }
        if p.lowpass.len() != low_len {
            return Err(Error::ShapeMismatch {
                expected: format!("lowpass of length {low_len}"),
                got: format!("{}", p.lowpass.len()),
            });
        }

        let q = &self.filters.qshift;
        let c = self.cq();
        let mut s = p.lowpass.clone();
        for j in (1..levels).rev() {
            let n = want[j];
            let mut lo = vec![0.0; n];
            let mut hi = vec![0.0; n];
            for (m, v) in s.iter().enumerate() {
                lo[2 * m] = *v;
            }
            for (m, z) in p.bands[j].values.iter().step_by(2).enumerate() {
                hi[2 * m] = 2.0 * z.re;
            }
            let mut r = vec![0.0; n];
            circ_filter_adjoint(&lo, &q.h0, c, &mut r);
            circ_filter_adjoint(&hi, &q.h1, c, &mut r);
            r.truncate(want[j - 1] / 2);
            s = r;
        }

        let n = want[0];
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for (m, v) in s.iter().enumerate() {
            lo[2 * m] = *v;
        }
        for m in 0..n / 2 {
            hi[2 * m + 1] = 2.0 * p.bands[0].values[2 * m + 1].re;
        }
        let mut r = vec![0.0; n];
        circ_filter_adjoint(&lo, &self.g0o, self.g0o.len() / 2, &mut r);
        circ_filter_adjoint(&hi, &self.g1o, self.g1o.len() / 2, &mut r);
        r.truncate(p.signal_len);
        Ok(r)
    }

    fn tree_atoms(&self, j: usize) -> (Atom<f64>, Atom<f64>) {
        let h1 = Atom {
            start: -(self.c1() as isize),
            taps: self.h1o.clone(),
        };
        if j == 0 {
            let mut delayed = h1.clone();
            delayed.start += 1;
            return (h1, delayed);
        }
        let lo = Atom {
            start: -(self.c0() as isize),
            taps: self.h0o.clone(),
        };
        let mut a = lo.clone();
        let mut b = lo;
        b.start += 1;
        let q = &self.filters.qshift;
        let c = self.cq();
        for level in 1..j {
            let f = 1 << level;
            a = conv_atoms(&a, &upsample(&q.h0, c, f));
            b = conv_atoms(&b, &upsample(&self.h0b, c, f));
        }
        let f = 1 << j;
        (
            conv_atoms(&a, &upsample(&q.h1, c, f)),
            conv_atoms(&b, &upsample(&self.h1b, c, f)),
        )
    }

    /// Full-rate complex wavelet of band `j`: for a signal whose length is a
    /// multiple of `2^J`, `bands[j][m] = (x ⊛ ψ_j)[2^j m]` with circular
    /// convolution.
    pub fn wavelet(&self, j: usize) -> Atom<Complex64> {
        let (a, b) = self.tree_atoms(j);
        let start = a.start.min(b.start);
        let end = (a.start + a.taps.len() as isize).max(b.start + b.taps.len() as isize);
        let mut taps = vec![Complex64::default(); (end - start) as usize];
        for (m, v) in a.taps.iter().enumerate() {
            taps[(a.start - start) as usize + m].re += 0.5 * v;
        }
        for (m, v) in b.taps.iter().enumerate() {
            taps[(b.start - start) as usize + m].im += 0.5 * v;
        }
        Atom { start, taps }
    }

    /// Undecimated band `j`: circular `x ⊛ ψ_j` at the input rate.
    pub fn undecimated_band(&self, x: &[f64], j: usize) -> Vec<Complex64> {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        let mut psi = self.wavelet(j).wrap(n);
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_in_place(&mut buf);
        fft_in_place(&mut psi);
        for (a, b) in buf.iter_mut().zip(&psi) {
            *a *= *b;
        }
        ifft_in_place(&mut buf);
        buf
    }
}

/// Forward transform with the default filter tables.
pub fn dtcwt_forward(x: &Signal, levels: usize) -> Result<MRAPyramid> {
    Dtcwt::shared().forward(x, levels)
}

/// Inverse transform with the default filter tables.
pub fn dtcwt_inverse(p: &MRAPyramid) -> Result<Signal> {
    Dtcwt::shared().inverse(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::negative_frequency_energy_ratio;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let e: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
        let n: f64 = b.iter().map(|v| v * v).sum();
        (e / n).sqrt()
    }

    #[test]
    fn round_trip_on_noise() {
        let dt = Dtcwt::default();
        let x = noise(4096, 1);
        let p = dt.forward_samples(&x, 16000.0, 9).unwrap();
        let y = dt.inverse_samples(&p).unwrap();
        assert!(rel_err(&y, &x) <= 1e-10, "{}", rel_err(&y, &x));
    }

    #[test]
    fn round_trip_on_odd_lengths() {
        let dt = Dtcwt::default();
        for (n, levels) in [(1001, 5), (777, 9), (3, 2), (1, 1)] {
            let x = noise(n, n as u64);
            let p = dt.forward_samples(&x, 1.0, levels).unwrap();
            let (bands, low) = band_lengths(n, levels);
            assert_eq!(p.bands.iter().map(|b| b.len()).collect::<Vec<_>>(), bands);
            assert_eq!(p.lowpass.len(), low);
            for (j, b) in p.bands.iter().enumerate() {
                let c = n.div_ceil(1 << j);
                assert!(b.len() == c || b.len() == c + 1);
            }
            let y = dt.inverse_samples(&p).unwrap();
            assert_eq!(y.len(), n);
            assert!(rel_err(&y, &x) <= 1e-10, "n={n}: {}", rel_err(&y, &x));
        }
    }

    #[test]
    fn tree_b_is_time_reversed_tree_a() {
        let dt = Dtcwt::default();
        let q = &dt.filters().qshift;
        let rev: Vec<f64> = q.h0.iter().rev().copied().collect();
        assert_eq!(dt.h0b, rev);
        let rev: Vec<f64> = q.h1.iter().rev().copied().collect();
        // h1b is the alternating flip of h0b, which is -rev(h1a) for 14 taps
        assert!(dt.h1b.iter().zip(&rev).all(|(a, b)| *a == -*b));
    }

    #[test]
    fn bands_match_atom_convolution() {
        let dt = Dtcwt::default();
        let x = noise(1024, 9);
        let p = dt.forward_samples(&x, 1.0, 6).unwrap();
        for j in 0..6 {
            let full = dt.undecimated_band(&x, j);
            let step = 1 << j;
            for (m, z) in p.bands[j].values.iter().enumerate() {
                assert!((full[m * step] - z).norm() < 1e-10, "band {j} sample {m}");
            }
        }
    }

    #[test]
    fn undecimated_bands_are_quasi_analytic() {
        let dt = Dtcwt::default();
        let x = noise(4096, 4);
        for j in 1..9 {
            let r = negative_frequency_energy_ratio(&dt.undecimated_band(&x, j));
            assert!(r <= 0.02, "band {j}: {r}");
        }
    }

    #[test]
    fn constant_input_is_rejected_by_every_band() {
        let dt = Dtcwt::default();
        let x = vec![1.0; 4096];
        let norm = 64.0;
        let p = dt.forward_samples(&x, 1.0, 9).unwrap();
        for (j, b) in p.bands.iter().enumerate() {
            assert!(b.energy().sqrt() / norm <= 1e-8, "band {j}");
        }
    }

    #[test]
    fn near_tight_frame() {
        let x = noise(4096, 2);
        let p = Dtcwt::default().forward_samples(&x, 1.0, 9).unwrap();
        let ex: f64 = x.iter().map(|v| v * v).sum();
        assert!((p.energy() / ex - 1.0).abs() <= 0.01);
    }

    #[test]
    fn high_sinusoid_lands_in_band_zero() {
        let x: Vec<f64> = (0..4096)
            .map(|t| (0.75 * std::f64::consts::PI * t as f64).cos())
            .collect();
        let p = Dtcwt::default().forward_samples(&x, 1.0, 9).unwrap();
        let e: Vec<f64> = p.bands.iter().map(|b| b.energy()).collect();
        assert!(e[0] / e.iter().sum::<f64>() >= 0.8);
    }

    #[test]
    fn level_checks() {
        let dt = Dtcwt::default();
        assert!(dt.forward_samples(&[1.0; 64], 1.0, 0).is_err());
        assert!(dt.forward_samples(&[1.0; 64], 1.0, 7).is_ok());
        assert!(dt.forward_samples(&[1.0; 64], 1.0, 8).is_err());
        let mut p = dt.forward_samples(&[1.0; 64], 1.0, 3).unwrap();
        p.bands[1].values.pop();
        assert!(dt.inverse_samples(&p).is_err());
    }

    #[test]
    fn band_edges() {
        assert_eq!(band_center_frequencies(1, 16000.0), vec![(4000.0, 8000.0)]);
        let b = band_center_frequencies(9, 16000.0);
        assert_eq!(b[8], (15.625, 31.25));
        for w in b.windows(2) {
            assert_eq!(w[0].0, w[1].1);
        }
    }
}
