//! Engineered auditory filterbanks and their spectrograms.
//!
//! Every filter is a complex FIR of `fir_length = 2L` taps in the centred
//! layout of [`crate::signal::strided_conv`] (tap `τ` at index `τ + L`),
//! scaled to unit L2 norm.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{fft_in_place, ifft_in_place, strided_len, Signal};

/// Equivalent rectangular bandwidth in Hz (Glasberg & Moore).
pub fn erb(f: f64) -> f64 {
    24.7 * (4.37 * f / 1000.0 + 1.0)
}

/// ERB-rate (number of ERBs below `f`).
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * f).log10()
}

pub fn erb_rate_inverse(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) / 0.00437
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TeacherKind {
    SynthCqt,
    Gammatone,
    Vqt,
    AnsiThirdOctave,
}

impl TeacherKind {
    pub fn name(self) -> &'static str {
        match self {
            TeacherKind::SynthCqt => "synth-cqt",
            TeacherKind::Gammatone => "gammatone",
            TeacherKind::Vqt => "vqt",
            TeacherKind::AnsiThirdOctave => "ansi-third-octave",
        }
    }
}

impl std::str::FromStr for TeacherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "synth-cqt" | "synth" | "cqt" => Ok(TeacherKind::SynthCqt),
            "gammatone" | "speech" => Ok(TeacherKind::Gammatone),
            "vqt" | "music" => Ok(TeacherKind::Vqt),
            "ansi-third-octave" | "ansi" | "urban" => Ok(TeacherKind::AnsiThirdOctave),
            other => Err(Error::param(format!("unknown teacher kind {other:?}"))),
        }
    }
}

/// Parameters of a teacher filterbank. Fields that a kind does not use are ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeacherSpec {
    pub kind: TeacherKind,
    pub sample_rate: f64,
    pub fir_length: usize,
    /// Lowest centre frequency in Hz.
    pub f_min: f64,
    /// Upper limit for Gammatone and ANSI centres, in Hz.
    pub f_max: f64,
    /// CQT/VQT resolution.
    pub bins_per_octave: usize,
    /// CQT/VQT span.
    pub octaves: usize,
    /// Number of Gammatone filters.
    pub n_filters: usize,
}

impl TeacherSpec {
    pub fn synth_cqt(sample_rate: f64) -> Self {
        Self {
            kind: TeacherKind::SynthCqt,
            sample_rate,
            fir_length: 1 << 12,
            f_min: sample_rate / 1024.0,
            f_max: sample_rate / 2.0,
            bins_per_octave: 8,
            octaves: 8,
            n_filters: 64,
        }
    }

    pub fn gammatone(sample_rate: f64) -> Self {
        Self {
            kind: TeacherKind::Gammatone,
            sample_rate,
            fir_length: 1 << 12,
            f_min: 50.0,
            f_max: 0.45 * sample_rate,
            bins_per_octave: 0,
            octaves: 0,
            n_filters: 42,
        }
    }

    pub fn vqt(sample_rate: f64) -> Self {
        Self {
            kind: TeacherKind::Vqt,
            bins_per_octave: 12,
            n_filters: 96,
            ..Self::synth_cqt(sample_rate)
        }
    }

    pub fn ansi_third_octave(sample_rate: f64) -> Self {
        Self {
            kind: TeacherKind::AnsiThirdOctave,
            sample_rate,
            fir_length: 1 << 12,
            f_min: 40.0,
            f_max: 0.45 * sample_rate,
            bins_per_octave: 3,
            octaves: 0,
            n_filters: 0,
        }
    }

    pub fn for_kind(kind: TeacherKind, sample_rate: f64) -> Self {
        match kind {
            TeacherKind::SynthCqt => Self::synth_cqt(sample_rate),
            TeacherKind::Gammatone => Self::gammatone(sample_rate),
            TeacherKind::Vqt => Self::vqt(sample_rate),
            TeacherKind::AnsiThirdOctave => Self::ansi_third_octave(sample_rate),
        }
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::param(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.fir_length < 2 || !self.fir_length.is_power_of_two() {
            return Err(Error::param(format!(
                "fir_length must be a power of two ≥ 2, got {}",
                self.fir_length
            )));
        }
        if !(self.f_min.is_finite() && self.f_min > 0.0) {
            return Err(Error::param(format!("f_min must be positive, got {}", self.f_min)));
        }
        if !(self.f_max.is_finite() && self.f_max > self.f_min) {
            return Err(Error::param(format!(
                "f_max ({}) must exceed f_min ({})",
                self.f_max, self.f_min
            )));
        }
        if self.f_max > self.nyquist() {
            return Err(Error::AboveNyquist {
                center_hz: self.f_max,
                nyquist_hz: self.nyquist(),
            });
        }
        match self.kind {
            TeacherKind::SynthCqt | TeacherKind::Vqt => {
                if self.bins_per_octave == 0 || self.octaves == 0 {
                    return Err(Error::param("bins_per_octave and octaves must be positive"));
                }
            }
            TeacherKind::Gammatone => {
                if self.n_filters < 2 {
                    return Err(Error::param("a Gammatone bank needs at least 2 filters"));
                }
            }
            TeacherKind::AnsiThirdOctave => {}
        }
        Ok(())
    }

    /// Centre frequencies in Hz, strictly increasing.
    pub fn center_frequencies(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let centers: Vec<f64> = match self.kind {
            TeacherKind::SynthCqt | TeacherKind::Vqt => {
                let b = self.bins_per_octave;
                (0..b * self.octaves)
                    .map(|k| self.f_min * 2f64.powf(k as f64 / b as f64))
                    .collect()
            }
            TeacherKind::Gammatone => {
                let lo = erb_rate(self.f_min);
                let hi = erb_rate(self.f_max);
                let n = self.n_filters;
                (0..n)
                    .map(|k| erb_rate_inverse(lo + (hi - lo) * k as f64 / (n - 1) as f64))
                    .collect()
            }
            TeacherKind::AnsiThirdOctave => {
                let mut out = Vec::new();
                let mut base = 40.0;
                'outer: loop {
                    for m in [1.0, 1.25, 1.5] {
                        let f = base * m;
                        if f > self.f_max {
                            break 'outer;
                        }
                        if f >= self.f_min {
                            out.push(f);
                        }
                    }
                    base *= 2.0;
                }
                if out.is_empty() {
                    return Err(Error::param(format!(
                        "no third-octave centre between {} and {} Hz",
                        self.f_min, self.f_max
                    )));
                }
                out
            }
        };
        if let Some(&f) = centers.iter().find(|&&f| f >= self.nyquist()) {
            return Err(Error::AboveNyquist {
                center_hz: f,
                nyquist_hz: self.nyquist(),
            });
        }
        Ok(centers)
    }

    /// VQT bandwidth offset γ (Hz); zero for every other kind.
    pub fn vqt_gamma(&self) -> f64 {
        if self.kind != TeacherKind::Vqt {
            return 0.0;
        }
        let alpha = 2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0;
        (2.0 * erb(self.f_min) - alpha * self.f_min).max(0.0)
    }

    pub fn build(&self) -> Result<Filterbank> {
        build_teacher(self)
    }
}

/// F complex FIRs with their centre frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct Filterbank {
    pub filters: Vec<Vec<Complex64>>,
    pub center_freqs: Vec<f64>,
    pub sample_rate: f64,
}

impl Filterbank {
    pub fn new(filters: Vec<Vec<Complex64>>, center_freqs: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if filters.is_empty() || filters.len() != center_freqs.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} filters", center_freqs.len()),
                got: format!("{}", filters.len()),
            });
        }
        let len = filters[0].len();
        for (i, h) in filters.iter().enumerate() {
            crate::signal::validate_kernel(h)?;
            if h.len() != len {
                return Err(Error::ShapeMismatch {
                    expected: format!("filter {i} of length {len}"),
                    got: format!("{}", h.len()),
                });
            }
            if h.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::InvalidKernel(format!("filter {i} has zero energy")));
            }
        }
        if center_freqs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("centre frequencies must be strictly increasing"));
        }
        Ok(Self {
            filters,
            center_freqs,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn fir_length(&self) -> usize {
        self.filters.first().map_or(0, Vec::len)
    }

    /// Precompute filter spectra for signals of `signal_len` samples.
    pub fn plan(&self, signal_len: usize) -> SpectrogramPlan {
        SpectrogramPlan::new(self, signal_len)
    }

    /// Stable content hash of the filter taps and centres.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.sample_rate.to_le_bytes());
        for (f, taps) in self.center_freqs.iter().zip(&self.filters) {
            h.update(f.to_le_bytes());
            for z in taps {
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn hann_modulated(len: usize, width: f64, freq: f64) -> Vec<Complex64> {
    let half = (len / 2) as isize;
    let w = width.min(len as f64);
    (0..len as isize)
        .map(|i| {
            let tau = (i - half) as f64;
            if tau.abs() >= w / 2.0 {
                return Complex64::default();
            }
            let env = 0.5 * (1.0 + (2.0 * PI * tau / w).cos());
            Complex64::from_polar(env, 2.0 * PI * freq * tau)
        })
        .collect()
}

fn normalized(mut h: Vec<Complex64>) -> Vec<Complex64> {
    let n: f64 = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for z in &mut h {
            *z /= n;
        }
    }
    h
}

/// Build the filters described by `spec`.
pub fn build_teacher(spec: &TeacherSpec) -> Result<Filterbank> {
    let centers = spec.center_frequencies()?;
    let sr = spec.sample_rate;
    let len = spec.fir_length;
    let filters: Vec<Vec<Complex64>> = match spec.kind {
        TeacherKind::SynthCqt | TeacherKind::Vqt => {
            let alpha = 2f64.powf(1.0 / spec.bins_per_octave as f64) - 1.0;
            let gamma = spec.vqt_gamma();
            centers
                .iter()
                .map(|&f| hann_modulated(len, sr / (alpha * f + gamma), f / sr))
                .collect()
        }
        TeacherKind::AnsiThirdOctave => {
            let rel_bw = 2f64.powf(1.0 / 6.0) - 2f64.powf(-1.0 / 6.0);
            centers
                .iter()
                .map(|&f| hann_modulated(len, sr / (rel_bw * f), f / sr))
                .collect()
        }
        TeacherKind::Gammatone => {
            let half = len / 2;
            centers
                .iter()
                .map(|&f| {
                    let b = 1.019 * erb(f);
                    (0..len)
                        .map(|i| {
                            if i < half {
                                return Complex64::default();
                            }
                            let t = (i - half) as f64 / sr;
                            Complex64::from_polar(
                                t.powi(3) * (-2.0 * PI * b * t).exp(),
                                2.0 * PI * f * t,
                            )
                        })
                        .collect()
                })
                .collect()
        }
    };
    let filters = filters.into_iter().map(normalized).collect();
    Filterbank::new(filters, centers, sr)
}

/// F×N nonnegative matrix, row-major, one row per filter.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    pub values: Vec<f64>,
    pub n_filters: usize,
    pub n_frames: usize,
    pub hop: usize,
}

impl Spectrogram {
    pub fn zeros(n_filters: usize, n_frames: usize, hop: usize) -> Self {
        Self {
            values: vec![0.0; n_filters * n_frames],
            n_filters,
            n_frames,
            hop,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, hop: usize) -> Result<Self> {
        let n_filters = rows.len();
        let n_frames = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_frames) {
            return Err(Error::ShapeMismatch {
                expected: format!("rows of length {n_frames}"),
                got: "ragged rows".into(),
            });
        }
        Ok(Self {
            values: rows.concat(),
            n_filters,
            n_frames,
            hop,
        })
    }

    #[inline]
    pub fn get(&self, f: usize, t: usize) -> f64 {
        self.values[f * self.n_frames + t]
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.values[f * self.n_frames..(f + 1) * self.n_frames]
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        (0..self.n_filters).map(|f| self.get(f, t)).collect()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_filters, self.n_frames)
    }

    pub fn is_valid(&self) -> bool {
        self.values.len() == self.n_filters * self.n_frames
            && self.values.iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Time-averaged energy per filter.
    pub fn row_means(&self) -> Vec<f64> {
        (0..self.n_filters)
            .map(|f| self.row(f).iter().sum::<f64>() / self.n_frames.max(1) as f64)
            .collect()
    }
}

/// A spectrogram whose columns have unit L2 norm, with the frames that were
/// too small to normalise flagged (and left at zero).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedSpectrogram {
    pub spec: Spectrogram,
    pub zero_frames: Vec<bool>,
    /// Column norms before scaling.
    pub norms: Vec<f64>,
}

/// Relative threshold under which a frame counts as silent.
pub const FRAME_EPS: f64 = 1e-12;

pub(crate) fn column_norms(values: &[f64], n_filters: usize, n_frames: usize) -> Vec<f64> {
    let mut norms = vec![0.0; n_frames];
    for f in 0..n_filters {
        for (t, n) in norms.iter_mut().enumerate() {
            let v = values[f * n_frames + t];
            *n += v * v;
        }
    }
    norms.iter_mut().for_each(|n| *n = n.sqrt());
    norms
}

/// Threshold for a set of column norms: `FRAME_EPS` times the largest one.
pub(crate) fn frame_threshold(norms: &[f64]) -> f64 {
    let max = norms.iter().copied().fold(0.0, f64::max);
    (FRAME_EPS * max).max(f64::MIN_POSITIVE)
}

/// Scale every column to unit L2 norm; columns with norm at most
/// `1e-12 × (largest column norm)` are zeroed and flagged.
pub fn normalize_frames(s: &Spectrogram) -> NormalizedSpectrogram {
    let norms = column_norms(&s.values, s.n_filters, s.n_frames);
    let eps = frame_threshold(&norms);
    let zero_frames: Vec<bool> = norms.iter().map(|&n| n <= eps).collect();
    let mut out = s.clone();
    for f in 0..s.n_filters {
        for t in 0..s.n_frames {
            let v = &mut out.values[f * s.n_frames + t];
            *v = if zero_frames[t] { 0.0 } else { *v / norms[t] };
        }
    }
    NormalizedSpectrogram {
        spec: out,
        zero_frames,
        norms,
    }
}

/// Filter spectra for one FFT size, reusable across signals of equal length.
#[derive(Clone, Debug)]
pub struct SpectrogramPlan {
    signal_len: usize,
    fft_len: usize,
    half: usize,
    spectra: Vec<Vec<Complex64>>,
}

impl SpectrogramPlan {
    fn new(fb: &Filterbank, signal_len: usize) -> Self {
        let taps = fb.fir_length();
        let fft_len = (signal_len + taps).saturating_sub(1).max(1).next_power_of_two();
        let spectra = fb
            .filters
            .iter()
            .map(|h| {
                let mut buf = h.clone();
                buf.resize(fft_len, Complex64::default());
                fft_in_place(&mut buf);
                buf
            })
            .collect();
        Self {
            signal_len,
            fft_len,
            half: taps / 2,
            spectra,
        }
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    /// `Y[f, t] = |(x ⊛ λ_f)[hop·t]|²` with the filter centred on each frame.
    pub fn apply(&self, x: &[f64], hop: usize) -> Result<Spectrogram> {
        if x.len() != self.signal_len {
            return Err(Error::ShapeMismatch {
                expected: format!("signal of length {}", self.signal_len),
                got: format!("{}", x.len()),
            });
        }
        if hop == 0 {
            return Err(Error::param("hop must be at least 1"));
        }
        let n_frames = strided_len(x.len(), hop);
        let mut xf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        xf.resize(self.fft_len, Complex64::default());
        fft_in_place(&mut xf);
        let mut values = Vec::with_capacity(self.spectra.len() * n_frames);
        let mut buf = vec![Complex64::default(); self.fft_len];
        for spectrum in &self.spectra {
            for ((b, a), h) in buf.iter_mut().zip(&xf).zip(spectrum) {
                *b = a * h;
            }
            ifft_in_place(&mut buf);
            values.extend((0..n_frames).map(|t| buf[t * hop + self.half].norm_sqr()));
        }
        Ok(Spectrogram {
            values,
            n_filters: self.spectra.len(),
            n_frames,
            hop,
        })
    }
}

/// Teacher spectrogram at hop `2^levels`.
pub fn teacher_spectrogram(fb: &Filterbank, x: &Signal, levels: usize) -> Result<Spectrogram> {
    if x.len() < fb.fir_length() {
        log::warn!(
            "signal of {} samples is shorter than the {}-tap teacher filters",
            x.len(),
            fb.fir_length()
        );
    }
    fb.plan(x.len()).apply(x.samples(), 1 << levels)
}
