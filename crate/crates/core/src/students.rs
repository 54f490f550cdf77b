//! Trainable front ends. Each maps a signal of `T` samples to an `F × N`
//! complex response at hop `2^J`, with `N = ceil(T / 2^J)`.
//!
//! * [`Conv1D`]: free real kernels of `2L` taps applied at stride `2^J`.
//! * [`Gabor1D`]: kernels parametrised by amplitude, width and centre.
//! * [`MuReNN`]: free real kernels applied inside the DTCWT band each
//!   filter is assigned to, at stride `2^(J-j)`.
//!
//! Backward passes take the gradient of a real loss with respect to the
//! output packed as `∂ℓ/∂Re y + i·∂ℓ/∂Im y` and return the gradient with
//! respect to the flat weight vector.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dtcwt::{band_center_frequencies, Atom, Dtcwt, MRAPyramid};
use crate::error::{Error, Result};
use crate::signal::{strided_conv_kernel_grad, strided_conv_unchecked, strided_len, Signal};
use crate::teachers::{Spectrogram, Filterbank};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Conv1d,
    Gabor1d,
    Murenn,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Conv1d, ModelKind::Gabor1d, ModelKind::Murenn];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Conv1d => "conv1d",
            ModelKind::Gabor1d => "gabor1d",
            ModelKind::Murenn => "murenn",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            ModelKind::Conv1d => 1,
            ModelKind::Gabor1d => 2,
            ModelKind::Murenn => 3,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            1 => Some(ModelKind::Conv1d),
            2 => Some(ModelKind::Gabor1d),
            3 => Some(ModelKind::Murenn),
            _ => None,
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conv1d" => Ok(ModelKind::Conv1d),
            "gabor1d" | "gabor" => Ok(ModelKind::Gabor1d),
            "murenn" => Ok(ModelKind::Murenn),
            other => Err(Error::param(format!("unknown model kind {other:?}"))),
        }
    }
}

/// Complex `F × N` student response, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct StudentOutput {
    pub values: Vec<Complex64>,
    pub n_filters: usize,
    pub n_frames: usize,
    pub hop: usize,
}

impl StudentOutput {
    pub fn row(&self, f: usize) -> &[Complex64] {
        &self.values[f * self.n_frames..(f + 1) * self.n_frames]
    }

    /// `|Φx|²` as a spectrogram.
    pub fn power(&self) -> Spectrogram {
        Spectrogram {
            values: self.values.iter().map(|z| z.norm_sqr()).collect(),
            n_filters: self.n_filters,
            n_frames: self.n_frames,
            hop: self.hop,
        }
    }

    fn from_rows(rows: Vec<Vec<Complex64>>, hop: usize) -> Self {
        let n_filters = rows.len();
        let n_frames = rows.first().map_or(0, Vec::len);
        Self {
            values: rows.concat(),
            n_filters,
            n_frames,
            hop,
        }
    }
}

fn check_levels(levels: usize) -> Result<()> {
    if levels == 0 || levels > crate::dtcwt::MAX_LEVELS {
        return Err(Error::param(format!(
            "J must be between 1 and {}, got {levels}",
            crate::dtcwt::MAX_LEVELS
        )));
    }
    Ok(())
}

fn gaussian_kernels(rng: &mut ChaCha8Rng, count: usize, len: usize, std: f64) -> Vec<Vec<f64>> {
    let normal = Normal::new(0.0, std).expect("positive standard deviation");
    (0..count)
        .map(|_| (0..len).map(|_| normal.sample(rng)).collect())
        .collect()
}

/// Free real FIR kernels at stride `2^J`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv1D {
    pub kernels: Vec<Vec<f64>>,
    pub levels: usize,
}

impl Conv1D {
    /// Kernel half-length used when none is configured.
    pub const DEFAULT_HALF_LENGTH: usize = 512;

    pub fn new(kernels: Vec<Vec<f64>>, levels: usize) -> Result<Self> {
        check_levels(levels)?;
        let len = kernels.first().map_or(0, Vec::len);
        for (f, k) in kernels.iter().enumerate() {
            crate::signal::validate_kernel(k)?;
            if k.len() != len {
                return Err(Error::ShapeMismatch {
                    expected: format!("kernel {f} of length {len}"),
                    got: format!("{}", k.len()),
                });
            }
        }
        if kernels.is_empty() {
            return Err(Error::param("a model needs at least one filter"));
        }
        Ok(Self { kernels, levels })
    }

    /// i.i.d. Gaussian taps with zero mean and variance `1/√F`.
    pub fn random(n_filters: usize, half_length: usize, levels: usize, seed: u64) -> Result<Self> {
        if n_filters == 0 || half_length == 0 {
            return Err(Error::param("filter count and half-length must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let std = (n_filters as f64).powf(-0.25);
        Self::new(gaussian_kernels(&mut rng, n_filters, 2 * half_length, std), levels)
    }

    pub fn half_length(&self) -> usize {
        self.kernels[0].len() / 2
    }

    pub fn n_params(&self) -> usize {
        2 * self.half_length() * self.kernels.len()
    }

    pub fn forward(&self, x: &[f64]) -> StudentOutput {
        let hop = 1 << self.levels;
        let rows = self
            .kernels
            .iter()
            .map(|k| {
                let y: Vec<f64> = strided_conv_unchecked(x, k, hop);
                y.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
            })
            .collect();
        StudentOutput::from_rows(rows, hop)
    }

    fn backward(&self, x: &[f64], grad: &StudentOutput) -> Vec<f64> {
        let hop = 1 << self.levels;
        let len = self.kernels[0].len();
        let mut out = Vec::with_capacity(self.n_params());
        for f in 0..self.kernels.len() {
            let g: Vec<f64> = grad.row(f).iter().map(|z| z.re).collect();
            let gk: Vec<f64> = strided_conv_kernel_grad(x, &g, hop, len);
            out.extend(gk);
        }
        out
    }
}

/// Mel scale `2595·log10(1 + f/700)`.
pub fn mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_inverse(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Centres `η_f` (cycles/sample) equally spaced in mel between `f_min` and
/// `f_max`, and Gaussian widths `σ_f` (samples) whose half-power bandwidth
/// equals the full width at half maximum of the matching mel triangle.
pub fn mel_init(n_filters: usize, sample_rate: f64, f_min: f64, f_max: f64) -> Result<Vec<(f64, f64)>> {
    if n_filters < 2 {
        return Err(Error::param("mel initialisation needs at least 2 filters"));
    }
    if !(f_min > 0.0 && f_min < f_max && f_max <= sample_rate / 2.0) {
        return Err(Error::param(format!(
            "need 0 < f_min < f_max ≤ sr/2, got {f_min}, {f_max} at {sample_rate} Hz"
        )));
    }
    let m0 = mel(f_min);
    let step = (mel(f_max) - m0) / (n_filters - 1) as f64;
    let hz = |k: isize| mel_inverse(m0 + step * k as f64);
    Ok((0..n_filters as isize)
        .map(|k| {
            let center = hz(k);
            let fwhm = (hz(k + 1) - hz(k - 1)) / 2.0;
            let sigma = 2f64.ln().sqrt() / (PI * fwhm / sample_rate);
            (center / sample_rate, sigma)
        })
        .collect())
}

/// Values of the Gabor kernel for `τ = -L ..= L-1`.
pub fn gabor_kernel(a: f64, sigma: f64, eta: f64, half_length: usize) -> Result<Vec<Complex64>> {
    if !(a > 0.0 && sigma > 0.0 && eta > 0.0 && eta < 0.5) || half_length == 0 {
        return Err(Error::param(format!(
            "Gabor parameters out of range: a={a}, σ={sigma}, η={eta}, L={half_length}"
        )));
    }
    Ok(gabor_kernel_unchecked(a, sigma, eta, half_length))
}

fn gabor_kernel_unchecked(a: f64, sigma: f64, eta: f64, half_length: usize) -> Vec<Complex64> {
    let l = half_length as isize;
    let scale = a / ((2.0 * PI).sqrt() * sigma);
    (-l..l)
        .map(|tau| {
            let t = tau as f64;
            Complex64::from_polar(scale * (-t * t / (2.0 * sigma * sigma)).exp(), 2.0 * PI * eta * t)
        })
        .collect()
}

/// Gaussian-windowed complex exponentials, three parameters per filter.
#[derive(Clone, Debug, PartialEq)]
pub struct Gabor1D {
    amplitude: Vec<f64>,
    sigma: Vec<f64>,
    eta: Vec<f64>,
    half_length: usize,
    pub levels: usize,
    kernels: Vec<Vec<Complex64>>,
}

impl Gabor1D {
    /// Lower bound on amplitudes after each update.
    pub const MIN_AMPLITUDE: f64 = 1e-6;

    pub fn new(
        amplitude: Vec<f64>,
        sigma: Vec<f64>,
        eta: Vec<f64>,
        half_length: usize,
        levels: usize,
    ) -> Result<Self> {
        check_levels(levels)?;
        let n = amplitude.len();
        if n == 0 || sigma.len() != n || eta.len() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} values per parameter"),
                got: format!("{}/{}/{}", amplitude.len(), sigma.len(), eta.len()),
            });
        }
        if half_length == 0 {
            return Err(Error::param("half-length must be positive"));
        }
        for f in 0..n {
            gabor_kernel(amplitude[f], sigma[f], eta[f], 1)?;
        }
        let mut m = Self {
            amplitude,
            sigma,
            eta,
            half_length,
            levels,
            kernels: Vec::new(),
        };
        m.refresh();
        Ok(m)
    }

    pub fn amplitude(&self) -> &[f64] {
        &self.amplitude
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    fn refresh(&mut self) {
        self.kernels = (0..self.amplitude.len())
            .map(|f| gabor_kernel_unchecked(self.amplitude[f], self.sigma[f], self.eta[f], self.half_length))
            .collect();
    }

    fn set_filter(&mut self, f: usize, a: f64, sigma: f64, eta: f64) {
        self.amplitude[f] = a;
        self.sigma[f] = sigma;
        self.eta[f] = eta;
    }

    /// Mel-spaced initialisation with unit amplitudes, clamped to the valid box.
    pub fn mel(
        n_filters: usize,
        sample_rate: f64,
        f_min: f64,
        f_max: f64,
        half_length: usize,
        levels: usize,
    ) -> Result<Self> {
        let init = mel_init(n_filters, sample_rate, f_min, f_max)?;
        let mut m = Self {
            amplitude: vec![1.0; n_filters],
            sigma: init.iter().map(|p| p.1).collect(),
            eta: init.iter().map(|p| p.0).collect(),
            half_length,
            levels,
            kernels: Vec::new(),
        };
        m.clamp();
        Self::new(m.amplitude, m.sigma, m.eta, half_length, levels)
    }

    pub fn n_params(&self) -> usize {
        3 * self.amplitude.len()
    }

    /// Keep `σ ∈ [1, 4L]`, `η ∈ [1/(4L), 1/2 − 1/(4L)]` and `a ≥ 1e-6`.
    pub fn clamp(&mut self) {
        let l4 = 4.0 * self.half_length as f64;
        for a in &mut self.amplitude {
            *a = a.max(Self::MIN_AMPLITUDE);
        }
        for s in &mut self.sigma {
            *s = s.clamp(1.0, l4);
        }
        for e in &mut self.eta {
            *e = e.clamp(1.0 / l4, 0.5 - 1.0 / l4);
        }
        self.refresh();
    }

    /// Materialised kernels, one per filter.
    pub fn kernels(&self) -> &[Vec<Complex64>] {
        &self.kernels
    }

    pub fn forward(&self, x: &[f64]) -> StudentOutput {
        let hop = 1 << self.levels;
        let rows = self
            .kernels
            .iter()
            .map(|k| strided_conv_unchecked(x, k, hop))
            .collect();
        StudentOutput::from_rows(rows, hop)
    }

    fn backward(&self, x: &[f64], grad: &StudentOutput) -> Vec<f64> {
        let hop = 1 << self.levels;
        let l = self.half_length as isize;
        let mut out = Vec::with_capacity(self.n_params());
        for (f, k) in self.kernels.iter().enumerate() {
            // Γ[τ] = ∂ℓ/∂Re φ[τ] + i ∂ℓ/∂Im φ[τ]
            let gamma: Vec<Complex64> = strided_conv_kernel_grad(x, grad.row(f), hop, k.len());
            let (a, s) = (self.amplitude[f], self.sigma[f]);
            let (mut da, mut ds, mut de) = (0.0, 0.0, 0.0);
            for (i, (phi, g)) in k.iter().zip(&gamma).enumerate() {
                let tau = (i as isize - l) as f64;
                let w = (g.conj() * phi).re;
                da += w / a;
                ds += w * (tau * tau / (s * s * s) - 1.0 / s);
                de += (g.conj() * phi * Complex64::new(0.0, 2.0 * PI * tau)).re;
            }
            out.extend([da, ds, de]);
        }
        out
    }
}

/// Octave index of every centre frequency and the number of filters per band.
///
/// Band `j` collects centres in `[sr/2^(j+2), sr/2^(j+1))`; band 0 also takes
/// the Nyquist frequency and centres below the lowest band go to band `J-1`.
pub fn assign_octaves(centers: &[f64], sample_rate: f64, levels: usize) -> (Vec<usize>, Vec<usize>) {
    let mut counts = vec![0; levels];
    let assignment = centers
        .iter()
        .map(|&f| {
            let j = if f <= 0.0 {
                levels - 1
            } else {
                let octave = ((sample_rate / (2.0 * f)).log2() - 1e-9).ceil() as i64 - 1;
                octave.clamp(0, levels as i64 - 1) as usize
            };
            counts[j] += 1;
            j
        })
        .collect();
    (assignment, counts)
}

/// Learnable real filters inside the subbands of a fixed DTCWT.
#[derive(Clone, Debug, PartialEq)]
pub struct MuReNN {
    /// `assignment[f]` is the band filter `f` reads from.
    pub assignment: Vec<usize>,
    /// Kernel of filter `f`, of length `2·L_{j[f]}`.
    pub kernels: Vec<Vec<f64>>,
    pub levels: usize,
}

impl MuReNN {
    /// `L_j = LENGTH_FACTOR · M_j`.
    pub const LENGTH_FACTOR: usize = 8;

    pub fn filters_per_band(assignment: &[usize], levels: usize) -> Vec<usize> {
        let mut m = vec![0; levels];
        for &j in assignment {
            if j < levels {
                m[j] += 1;
            }
        }
        m
    }

    pub fn new(assignment: Vec<usize>, kernels: Vec<Vec<f64>>, levels: usize) -> Result<Self> {
        check_levels(levels)?;
        if assignment.is_empty() || assignment.len() != kernels.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} kernels", assignment.len()),
                got: format!("{}", kernels.len()),
            });
        }
        if let Some(&j) = assignment.iter().find(|&&j| j >= levels) {
            return Err(Error::param(format!("filter assigned to band {j} but J = {levels}")));
        }
        let m = Self::filters_per_band(&assignment, levels);
        for (f, (k, &j)) in kernels.iter().zip(&assignment).enumerate() {
            crate::signal::validate_kernel(k)?;
            let want = 2 * Self::LENGTH_FACTOR * m[j];
            if k.len() != want {
                return Err(Error::ShapeMismatch {
                    expected: format!("kernel {f} of length 2·L_{j} = {want}"),
                    got: format!("{}", k.len()),
                });
            }
        }
        Ok(Self {
            assignment,
            kernels,
            levels,
        })
    }

    /// Gaussian init with variance `1/√F`, divided per band by `√(2 L_j)` when
    /// `scale_per_level` is set.
    pub fn random(assignment: Vec<usize>, levels: usize, seed: u64, scale_per_level: bool) -> Result<Self> {
        check_levels(levels)?;
        let m = Self::filters_per_band(&assignment, levels);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = (assignment.len().max(1) as f64).powf(-0.25);
        let kernels = assignment
            .iter()
            .map(|&j| {
                let len = 2 * Self::LENGTH_FACTOR * m.get(j).copied().unwrap_or(0);
                let std = if scale_per_level { base / (len as f64).sqrt() } else { base };
                gaussian_kernels(&mut rng, 1, len, std).pop().unwrap_or_default()
            })
            .collect();
        Self::new(assignment, kernels, levels)
    }

    /// Assignment derived from a teacher's centre frequencies.
    pub fn for_teacher(fb: &Filterbank, levels: usize, seed: u64, scale_per_level: bool) -> Result<Self> {
        let (assignment, _) = assign_octaves(&fb.center_freqs, fb.sample_rate, levels);
        Self::random(assignment, levels, seed, scale_per_level)
    }

    pub fn n_params(&self) -> usize {
        self.kernels.iter().map(Vec::len).sum()
    }

    pub fn band_counts(&self) -> Vec<usize> {
        Self::filters_per_band(&self.assignment, self.levels)
    }

    /// `2^(j[f]+1) · L_{j[f]}`.
    pub fn receptive_field(&self, f: usize) -> usize {
        (1 << (self.assignment[f] + 1)) * self.kernels[f].len() / 2
    }

    pub fn forward(&self, x: &[f64]) -> Result<StudentOutput> {
        let pyr = Dtcwt::shared().forward_samples(x, 1.0, self.levels)?;
        Ok(self.forward_from_pyramid(&pyr))
    }

    pub fn forward_from_pyramid(&self, pyr: &MRAPyramid) -> StudentOutput {
        let hop = 1 << self.levels;
        let n = strided_len(pyr.signal_len, hop);
        let rows = self
            .kernels
            .iter()
            .zip(&self.assignment)
            .map(|(k, &j)| {
                let band = &pyr.bands[j].values;
                let mut y: Vec<Complex64> = strided_conv_unchecked(band, k, 1 << (self.levels - j));
                y.truncate(n);
                y
            })
            .collect();
        StudentOutput::from_rows(rows, hop)
    }

    fn backward(&self, pyr: &MRAPyramid, grad: &StudentOutput) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (f, (k, &j)) in self.kernels.iter().zip(&self.assignment).enumerate() {
            let g: Vec<Complex64> = grad.row(f).iter().map(|z| z.conj()).collect();
            let gk: Vec<Complex64> =
                strided_conv_kernel_grad(&pyr.bands[j].values, &g, 1 << (self.levels - j), k.len());
            out.extend(gk.into_iter().map(|z| z.re));
        }
        out
    }

    /// Full-rate impulse response of row `f`: `ψ_j ⊛ up_{2^j}(φ_f)`.
    pub fn full_rate_filter(&self, f: usize) -> Atom<Complex64> {
        let j = self.assignment[f];
        let psi = Dtcwt::shared().wavelet(j);
        let k = &self.kernels[f];
        let step = 1usize << j;
        let l = (k.len() / 2) as isize;
        let mut taps = vec![Complex64::default(); psi.taps.len() + (k.len() - 1) * step];
        for (m, &phi) in k.iter().enumerate() {
            if phi == 0.0 {
                continue;
            }
            let off = m * step;
            for (i, z) in psi.taps.iter().enumerate() {
                taps[off + i] += z * phi;
            }
        }
        Atom {
            start: psi.start - l * step as isize,
            taps,
        }
    }
}

/// Any of the three student front ends.
#[derive(Clone, Debug, PartialEq)]
pub enum StudentModel {
    Conv1D(Conv1D),
    Gabor1D(Gabor1D),
    MuReNN(MuReNN),
}

/// Intermediate values kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct Tape {
    pyramid: Option<MRAPyramid>,
}

impl StudentModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            StudentModel::Conv1D(_) => ModelKind::Conv1d,
            StudentModel::Gabor1D(_) => ModelKind::Gabor1d,
            StudentModel::MuReNN(_) => ModelKind::Murenn,
        }
    }

    pub fn levels(&self) -> usize {
        match self {
            StudentModel::Conv1D(m) => m.levels,
            StudentModel::Gabor1D(m) => m.levels,
            StudentModel::MuReNN(m) => m.levels,
        }
    }

    pub fn n_filters(&self) -> usize {
        match self {
            StudentModel::Conv1D(m) => m.kernels.len(),
            StudentModel::Gabor1D(m) => m.amplitude.len(),
            StudentModel::MuReNN(m) => m.kernels.len(),
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            StudentModel::Conv1D(m) => m.n_params(),
            StudentModel::Gabor1D(m) => m.n_params(),
            StudentModel::MuReNN(m) => m.n_params(),
        }
    }

    /// Flat weight vector. Gabor1D is laid out as `(a_f, σ_f, η_f)` per filter.
    pub fn params(&self) -> Vec<f64> {
        match self {
            StudentModel::Conv1D(m) => m.kernels.concat(),
            StudentModel::Gabor1D(m) => (0..m.amplitude.len())
                .flat_map(|f| [m.amplitude[f], m.sigma[f], m.eta[f]])
                .collect(),
            StudentModel::MuReNN(m) => m.kernels.concat(),
        }
    }

    /// Overwrite the weights from a flat vector (no clamping).
    pub fn set_params(&mut self, w: &[f64]) -> Result<()> {
        if w.len() != self.n_params() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} weights", self.n_params()),
                got: format!("{}", w.len()),
            });
        }
        match self {
            StudentModel::Conv1D(m) => fill_kernels(&mut m.kernels, w),
            StudentModel::MuReNN(m) => fill_kernels(&mut m.kernels, w),
            StudentModel::Gabor1D(m) => {
                for (f, p) in w.chunks_exact(3).enumerate() {
                    m.set_filter(f, p[0], p[1], p[2]);
                }
                m.refresh();
            }
        }
        Ok(())
    }

    /// Project back onto the valid parameter set after an optimiser step.
    pub fn project(&mut self) {
        if let StudentModel::Gabor1D(m) = self {
            m.clamp();
        }
    }

    pub fn forward(&self, x: &Signal) -> Result<StudentOutput> {
        Ok(self.forward_tape(x.samples())?.0)
    }

    pub fn forward_samples(&self, x: &[f64]) -> Result<StudentOutput> {
        Ok(self.forward_tape(x)?.0)
    }

    pub fn forward_tape(&self, x: &[f64]) -> Result<(StudentOutput, Tape)> {
        if x.is_empty() {
            return Err(Error::InvalidSignal("signal is empty".into()));
        }
        Ok(match self {
            StudentModel::Conv1D(m) => (m.forward(x), Tape { pyramid: None }),
            StudentModel::Gabor1D(m) => (m.forward(x), Tape { pyramid: None }),
            StudentModel::MuReNN(m) => {
                let pyr = Dtcwt::shared().forward_samples(x, 1.0, m.levels)?;
                (m.forward_from_pyramid(&pyr), Tape { pyramid: Some(pyr) })
            }
        })
    }

    /// Gradient of a loss with respect to the weights, given `grad` packed as
    /// `∂ℓ/∂Re y + i·∂ℓ/∂Im y` for every output entry.
    pub fn backward(&self, x: &[f64], tape: &Tape, grad: &StudentOutput) -> Vec<f64> {
        match self {
            StudentModel::Conv1D(m) => m.backward(x, grad),
            StudentModel::Gabor1D(m) => m.backward(x, grad),
            StudentModel::MuReNN(m) => {
                let pyr = tape.pyramid.as_ref().expect("MuReNN tape holds the pyramid");
                m.backward(pyr, grad)
            }
        }
    }

    /// Per-filter FIR rows at the input rate, in centred layout for Conv1D and
    /// Gabor1D, and as full cascade responses for MuReNN.
    pub fn full_rate_filters(&self) -> Vec<Atom<Complex64>> {
        match self {
            StudentModel::Conv1D(m) => m
                .kernels
                .iter()
                .map(|k| Atom {
                    start: -((k.len() / 2) as isize),
                    taps: k.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
                })
                .collect(),
            StudentModel::Gabor1D(m) => m
                .kernels
                .iter()
                .cloned()
                .map(|taps| Atom {
                    start: -(m.half_length as isize),
                    taps,
                })
                .collect(),
            StudentModel::MuReNN(m) => (0..m.kernels.len()).map(|f| m.full_rate_filter(f)).collect(),
        }
    }
}

fn fill_kernels(kernels: &mut [Vec<f64>], w: &[f64]) {
    let mut off = 0;
    for k in kernels {
        let n = k.len();
        k.copy_from_slice(&w[off..off + n]);
        off += n;
    }
}

/// Default student of `kind` for a teacher, as used by the benchmark.
pub fn default_student(
    kind: ModelKind,
    fb: &Filterbank,
    levels: usize,
    seed: u64,
    conv_half_length: usize,
) -> Result<StudentModel> {
    let f = fb.len();
    Ok(match kind {
        ModelKind::Conv1d => StudentModel::Conv1D(Conv1D::random(f, conv_half_length, levels, seed)?),
        ModelKind::Gabor1d => {
            let sr = fb.sample_rate;
            let f_min = 60f64.min(0.25 * sr);
            StudentModel::Gabor1D(Gabor1D::mel(f, sr, f_min, sr / 2.0, conv_half_length, levels)?)
        }
        ModelKind::Murenn => StudentModel::MuReNN(MuReNN::for_teacher(fb, levels, seed, true)?),
    })
}

/// Frequency interval covered by band `j`, for reporting.
pub fn band_interval(j: usize, sample_rate: f64) -> (f64, f64) {
    band_center_frequencies(j + 1, sample_rate)[j]
}
