//! Corpora and file formats.
//!
//! Binary containers are little-endian throughout.
//!
//! Spectrogram (`WKDS`, version 1):
//!
//! ```text
//! magic "WKDS" | version u16 | F u32 | N u32 | hop u32 | F·N f64, row-major
//! ```
//!
//! Model checkpoint (`WKDM`, version 1):
//!
//! ```text
//! magic "WKDM" | version u16 | kind u8 | J u32 | F u32 | shape | weights f64
//! shape: Conv1D and Gabor1D: half-length L u32
//!        MuReNN: F × band index u32
//! weights: the flat vector of StudentModel::params
//! ```

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtcwt::Atom;
use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::students::{Conv1D, Gabor1D, ModelKind, MuReNN, StudentModel};
use crate::teachers::{Spectrogram, TeacherSpec};

pub const SPECTROGRAM_MAGIC: &[u8; 4] = b"WKDS";
pub const MODEL_MAGIC: &[u8; 4] = b"WKDM";
pub const FORMAT_VERSION: u16 = 1;

/// Where a corpus item came from.
#[derive(Clone, Debug, PartialEq)]
pub enum ItemSource {
    File(PathBuf),
    Sine { frequency_hz: f64, phase: f64 },
    Vowel { f0_hz: f64, formants_hz: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub signal: Signal,
    pub source: ItemSource,
}

/// Pure sinusoids with frequencies in geometric progression from the
/// teacher's lowest to its highest centre frequency, unit amplitude and a
/// seeded random phase. Items last `duration_s` seconds but never fewer
/// than 4096 samples.
pub fn synth_sine_dataset(
    spec: &TeacherSpec,
    count: usize,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<CorpusItem>> {
    if count < 10 {
        return Err(Error::param(format!("a synthetic corpus needs at least 10 items, got {count}")));
    }
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::param(format!("duration must be positive, got {duration_s}")));
    }
    let centers = spec.center_frequencies()?;
    let sr = spec.sample_rate;
    let lo = centers[0];
    let hi = *centers.last().expect("non-empty centre list");
    if hi >= sr / 2.0 {
        return Err(Error::AboveNyquist {
            center_hz: hi,
            nyquist_hz: sr / 2.0,
        });
    }
    let len = ((duration_s * sr).round() as usize).max(1 << 12);
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = count.to_string().len();
    (0..count)
        .map(|i| {
            let f = if i + 1 == count { hi } else { lo * ratio.powi(i as i32) };
            let phase = rng.random_range(0.0..2.0 * PI);
            let w = 2.0 * PI * f / sr;
            let samples = (0..len).map(|t| (w * t as f64 + phase).sin()).collect();
            Ok(CorpusItem {
                id: format!("sine_{i:0width$}"),
                signal: Signal::new(samples, sr)?,
                source: ItemSource::Sine {
                    frequency_hz: f,
                    phase,
                },
            })
        })
        .collect()
}

const VOWEL_FORMANTS: [[f64; 3]; 5] = [
    [730.0, 1090.0, 2440.0],
    [530.0, 1840.0, 2480.0],
    [270.0, 2290.0, 3010.0],
    [570.0, 840.0, 2410.0],
    [300.0, 870.0, 2240.0],
];

/// Harmonic tones shaped by three formant resonances, a rough stand-in for
/// sustained vowels. Fundamentals are drawn from 90–260 Hz and formants
/// from a five-vowel table with ±10% jitter.
pub fn synth_vowel_dataset(
    sample_rate: f64,
    count: usize,
    duration_s: f64,
    seed: u64,
) -> Result<Vec<CorpusItem>> {
    if count == 0 {
        return Err(Error::param("vowel corpus needs at least one item"));
    }
    if !(sample_rate > 0.0 && duration_s > 0.0) {
        return Err(Error::param("sample rate and duration must be positive"));
    }
    let len = ((duration_s * sample_rate).round() as usize).max(1 << 12);
    let nyquist = sample_rate / 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = count.to_string().len();
    (0..count)
        .map(|i| {
            let f0 = rng.random_range(90.0..260.0);
            let base = VOWEL_FORMANTS[i % VOWEL_FORMANTS.len()];
            let formants = base.map(|f| f * rng.random_range(0.9..1.1));
            let harmonics = ((0.45 * sample_rate) / f0).floor() as usize;
            let mut samples = vec![0.0; len];
            for h in 1..=harmonics {
                let f = h as f64 * f0;
                if f >= nyquist {
                    break;
                }
                let gain: f64 = formants
                    .iter()
                    .map(|&fc| {
                        let bw = 60.0 + 0.06 * fc;
                        1.0 / (1.0 + ((f - fc) / bw).powi(2))
                    })
                    .sum::<f64>()
                    / (h as f64).sqrt();
                let phase = rng.random_range(0.0..2.0 * PI);
                let w = 2.0 * PI * f / sample_rate;
                for (t, s) in samples.iter_mut().enumerate() {
                    *s += gain * (w * t as f64 + phase).sin();
                }
            }
            let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if peak > 0.0 {
                samples.iter_mut().for_each(|s| *s *= 0.9 / peak);
            }
            Ok(CorpusItem {
                id: format!("vowel_{i:0width$}"),
                signal: Signal::new(samples, sample_rate)?,
                source: ItemSource::Vowel {
                    f0_hz: f0,
                    formants_hz: formants,
                },
            })
        })
        .collect()
}

/// Decode one WAV file to `[-1, 1]`, averaging channels.
pub fn read_wav(path: &Path) -> Result<Signal> {
    let reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::format(path, "zero channels"));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (hound::SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()?
        }
        (format, bits) => {
            return Err(Error::format(
                path,
                format!("unsupported sample format {format:?} with {bits} bits"),
            ))
        }
    };
    let samples: Vec<f64> = interleaved
        .chunks_exact(channels)
        .map(|frame| frame.iter().sum::<f64>() / channels as f64)
        .collect();
    Signal::new(samples, spec.sample_rate as f64).map_err(|e| Error::format(path, e.to_string()))
}

/// Write a mono 32-bit float WAV.
pub fn write_wav(path: &Path, signal: &Signal) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate().round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let mut w = hound::WavWriter::create(path, spec)?;
    for &s in signal.samples() {
        w.write_sample(s as f32)?;
    }
    w.finalize()?;
    Ok(())
}

/// Every `*.wav` file in `dir`, in lexicographic filename order. Files that
/// fail to decode or have another sample rate are skipped with a warning.
pub fn load_wav_dir(dir: &Path, expected_sr: f64) -> Result<Vec<CorpusItem>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
        })
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let decoded: Vec<(PathBuf, Result<Signal>)> =
        paths.into_par_iter().map(|p| {
            let s = read_wav(&p);
            (p, s)
        }).collect();

    let mut items = Vec::new();
    for (path, res) in decoded {
        match res {
            Ok(signal) if signal.sample_rate() != expected_sr => log::warn!(
                "skipping {}: sample rate {} Hz, expected {} Hz",
                path.display(),
                signal.sample_rate(),
                expected_sr
            ),
            Ok(signal) => items.push(CorpusItem {
                id: path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                signal,
                source: ItemSource::File(path),
            }),
            Err(e) => log::warn!("skipping {}: {e}", path.display()),
        }
    }
    if items.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no usable WAV files at {} Hz in {}",
            expected_sr,
            dir.display()
        )));
    }
    Ok(items)
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRow {
    id: String,
    file: String,
    samples: usize,
    sample_rate: f64,
    frequency_hz: Option<f64>,
    phase: Option<f64>,
}

/// Write every item as `<id>.wav` plus a `manifest.csv`.
pub fn write_corpus(dir: &Path, items: &[CorpusItem]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = csv::Writer::from_path(dir.join("manifest.csv"))?;
    for item in items {
        let file = format!("{}.wav", item.id);
        write_wav(&dir.join(&file), &item.signal)?;
        let (frequency_hz, phase) = match &item.source {
            ItemSource::Sine { frequency_hz, phase } => (Some(*frequency_hz), Some(*phase)),
            ItemSource::Vowel { f0_hz, .. } => (Some(*f0_hz), None),
            ItemSource::File(_) => (None, None),
        };
        manifest.serialize(ManifestRow {
            id: item.id.clone(),
            file,
            samples: item.signal.len(),
            sample_rate: item.signal.sample_rate(),
            frequency_hz,
            phase,
        })?;
    }
    manifest.flush()?;
    Ok(())
}

struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::format(self.path, "file is truncated"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| Error::format(self.path, "size overflow"))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let got = self.take(4)?;
        if got != magic {
            return Err(Error::format(
                self.path,
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(got),
                    String::from_utf8_lossy(magic)
                ),
            ));
        }
        let version = self.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::format(
                self.path,
                format!("unsupported format version {version} (this build reads version {FORMAT_VERSION})"),
            ));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::format(
                self.path,
                format!("{} trailing bytes", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

fn u32_of(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::param(format!("{what} {v} does not fit in 32 bits")))
}

pub fn spectrogram_to_bytes(s: &Spectrogram) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(18 + 8 * s.values.len());
    out.extend_from_slice(SPECTROGRAM_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&u32_of(s.n_filters, "filter count")?.to_le_bytes());
    out.extend_from_slice(&u32_of(s.n_frames, "frame count")?.to_le_bytes());
    out.extend_from_slice(&u32_of(s.hop, "hop")?.to_le_bytes());
    for v in &s.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn spectrogram_from_bytes(bytes: &[u8], path: &Path) -> Result<Spectrogram> {
    let mut r = ByteReader { buf: bytes, pos: 0, path };
    r.header(SPECTROGRAM_MAGIC)?;
    let n_filters = r.u32()? as usize;
    let n_frames = r.u32()? as usize;
    let hop = r.u32()? as usize;
    let values = r.f64s(n_filters * n_frames)?;
    r.finish()?;
    Ok(Spectrogram {
        values,
        n_filters,
        n_frames,
        hop,
    })
}

pub fn save_spectrogram(path: &Path, s: &Spectrogram) -> Result<()> {
    write_atomic(path, &spectrogram_to_bytes(s)?)
}

pub fn load_spectrogram(path: &Path) -> Result<Spectrogram> {
    let bytes = std::fs::read(path)?;
    spectrogram_from_bytes(&bytes, path)
}

/// Write to a sibling temporary file, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = BufWriter::new(File::create(&tmp)?);
        f.write_all(bytes)?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn model_to_bytes(m: &StudentModel) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(m.kind().code());
    out.extend_from_slice(&u32_of(m.levels(), "J")?.to_le_bytes());
    out.extend_from_slice(&u32_of(m.n_filters(), "filter count")?.to_le_bytes());
    match m {
        StudentModel::Conv1D(c) => {
            out.extend_from_slice(&u32_of(c.half_length(), "half-length")?.to_le_bytes())
        }
        StudentModel::Gabor1D(g) => {
            out.extend_from_slice(&u32_of(g.half_length(), "half-length")?.to_le_bytes())
        }
        StudentModel::MuReNN(r) => {
            for &j in &r.assignment {
                out.extend_from_slice(&u32_of(j, "band")?.to_le_bytes());
            }
        }
    }
    for w in m.params() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    Ok(out)
}

pub fn model_from_bytes(bytes: &[u8], path: &Path) -> Result<StudentModel> {
    let mut r = ByteReader { buf: bytes, pos: 0, path };
    r.header(MODEL_MAGIC)?;
    let code = r.u8()?;
    let kind = ModelKind::from_code(code)
        .ok_or_else(|| Error::format(path, format!("unknown model kind code {code}")))?;
    let levels = r.u32()? as usize;
    let n_filters = r.u32()? as usize;
    let bad = |e: Error| Error::format(path, e.to_string());
    let model = match kind {
        ModelKind::Conv1d => {
            let half = r.u32()? as usize;
            let w = r.f64s(n_filters * 2 * half)?;
            let kernels = w.chunks_exact(2 * half.max(1)).map(<[f64]>::to_vec).collect();
            StudentModel::Conv1D(Conv1D::new(kernels, levels).map_err(bad)?)
        }
        ModelKind::Gabor1d => {
            let half = r.u32()? as usize;
            let w = r.f64s(3 * n_filters)?;
            let col = |i: usize| w.iter().skip(i).step_by(3).copied().collect::<Vec<_>>();
            StudentModel::Gabor1D(Gabor1D::new(col(0), col(1), col(2), half, levels).map_err(bad)?)
        }
        ModelKind::Murenn => {
            let assignment: Vec<usize> = (0..n_filters)
                .map(|_| r.u32().map(|v| v as usize))
                .collect::<Result<_>>()?;
            let m = MuReNN::filters_per_band(&assignment, levels);
            let mut kernels = Vec::with_capacity(n_filters);
            for &j in &assignment {
                let len = 2 * MuReNN::LENGTH_FACTOR * m.get(j).copied().unwrap_or(0);
                kernels.push(r.f64s(len)?);
            }
            StudentModel::MuReNN(MuReNN::new(assignment, kernels, levels).map_err(bad)?)
        }
    };
    r.finish()?;
    Ok(model)
}

pub fn save_model(path: &Path, m: &StudentModel) -> Result<()> {
    write_atomic(path, &model_to_bytes(m)?)
}

pub fn load_model(path: &Path) -> Result<StudentModel> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    model_from_bytes(&bytes, path)
}

/// One line of a training history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_train_loss: f64,
    pub mean_val_loss: f64,
    pub wall_time_s: f64,
}

pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(["epoch", "mean_train_loss", "mean_val_loss", "wall_time_s"])?;
    for rec in history {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history(path: &Path) -> Result<Vec<EpochRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<EpochRecord>, _>>()?;
    Ok(rows)
}

/// One row per filter: index, then the values of each frame.
pub fn write_spectrogram_csv(path: &Path, s: &Spectrogram) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["filter".to_string()];
    header.extend((0..s.n_frames).map(|t| format!("t{t}")));
    w.write_record(&header)?;
    for f in 0..s.n_filters {
        let mut rec = vec![f.to_string()];
        rec.extend(s.row(f).iter().map(|v| format!("{v:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One row per filter: index, offset of the first tap, tap count, then
/// interleaved real and imaginary parts.
pub fn write_impulse_responses_csv(path: &Path, rows: &[Atom<Complex64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    for (f, row) in rows.iter().enumerate() {
        let mut rec = vec![f.to_string(), row.start.to_string(), row.taps.len().to_string()];
        for z in &row.taps {
            rec.push(format!("{:e}", z.re));
            rec.push(format!("{:e}", z.im));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_impulse_responses_csv(path: &Path) -> Result<Vec<Atom<Complex64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::format(path, format!("bad field {i}")))
        };
        let start = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "bad start offset"))?;
        let len: usize = rec
            .get(2)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "bad tap count"))?;
        let taps = (0..len)
            .map(|k| Ok(Complex64::new(num(3 + 2 * k)?, num(4 + 2 * k)?)))
            .collect::<Result<_>>()?;
        out.push(Atom { start, taps });
    }
    Ok(out)
}
