//! Seeded synthetic corpora with known stems.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::data::manifest::{DatasetManifest, ManifestItem, Split};
use crate::data::wav::{save_audio, SampleFormat};
use crate::dsp::AudioSignal;
use crate::{Error, Result};

/// Sample grid for stems. Sums of grid values stay exact in f32 files.
const QUANTUM: f64 = 1.0 / (1u64 << 20) as f64;

/// Raised-cosine attack and release of tonal notes, in seconds.
const NOTE_RAMP: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Sequence of sine notes drawn from `frequencies`.
    Tonal { frequencies: Vec<f64> },
    /// Exponentially decaying noise hits at about `rate_hz` per second.
    Percussive { rate_hz: f64 },
    /// Noise band-limited to `[low_hz, high_hz]`.
    NoiseBand { low_hz: f64, high_hz: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub name: String,
    pub generator: Generator,
    /// Target RMS of the stem.
    #[serde(default = "default_gain")]
    pub gain: f64,
}

fn default_gain() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub seed: u64,
    pub sources: Vec<SourceSpec>,
}

impl Default for SyntheticSpec {
    /// Two sources: low tonal notes and a high noise band.
    fn default() -> Self {
        let notes = (0..25).map(|k| 220.0 * 2f64.powf(k as f64 / 12.0)).collect();
        SyntheticSpec {
            sample_rate: 22050,
            duration_secs: 3.0,
            seed: 0,
            sources: vec![
                SourceSpec { name: "tonal".into(), generator: Generator::Tonal { frequencies: notes }, gain: 0.1 },
                SourceSpec {
                    name: "noise".into(),
                    generator: Generator::NoiseBand { low_hz: 2500.0, high_hz: 8000.0 },
                    gain: 0.1,
                },
            ],
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if self.sample_rate == 0 || !(self.duration_secs > 0.0) || self.sources.is_empty() {
            return Err(Error::Config("synthetic spec needs a sample rate, a duration and sources".into()));
        }
        for s in &self.sources {
            let ok = match &s.generator {
                Generator::Tonal { frequencies } => {
                    !frequencies.is_empty() && frequencies.iter().all(|&f| f > 0.0 && f < nyquist)
                }
                Generator::Percussive { rate_hz } => *rate_hz > 0.0,
                Generator::NoiseBand { low_hz, high_hz } => 0.0 <= *low_hz && low_hz < high_hz && *high_hz <= nyquist,
            };
            if !ok || !(s.gain > 0.0) {
                return Err(Error::Config(format!("synthetic source {} has invalid parameters", s.name)));
            }
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        (self.duration_secs * self.sample_rate as f64).round() as usize
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticItem {
    pub id: String,
    pub stems: Vec<AudioSignal>,
    pub mixture: AudioSignal,
}

fn tonal(rng: &mut ChaCha8Rng, n: usize, sr: f64, frequencies: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let ramp = (NOTE_RAMP * sr) as usize;
    let mut start = 0;
    while start < n {
        let len = ((rng.gen_range(0.15..0.5) * sr) as usize).min(n - start);
        let f = frequencies[rng.gen_range(0..frequencies.len())];
        let amp = rng.gen_range(0.5..1.0);
        let phase = rng.gen_range(0.0..2.0 * PI);
        for i in 0..len {
            let edge = i.min(len - 1 - i);
            let env = if edge < ramp { 0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos() } else { 1.0 };
            out[start + i] = amp * env * (2.0 * PI * f * i as f64 / sr + phase).sin();
        }
        // short rests between notes
        start += len + (rng.gen_range(0.0..0.1) * sr) as usize;
    }
    out
}

fn percussive(rng: &mut ChaCha8Rng, n: usize, sr: f64, rate: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut t = 0.0;
    loop {
        t += -rng.gen_range(f64::EPSILON..1.0f64).ln() / rate;
        let start = (t * sr) as usize;
        if start >= n {
            break;
        }
        let decay = rng.gen_range(0.02..0.1) * sr;
        let amp = rng.gen_range(0.5..1.0);
        let len = ((decay * 6.0) as usize).min(n - start);
        for i in 0..len {
            out[start + i] += amp * (-(i as f64) / decay).exp() * rng.gen_range(-1.0..1.0);
        }
    }
    out
}

fn noise_band(rng: &mut ChaCha8Rng, n: usize, sr: f64, low: f64, high: f64) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..n).map(|_| Complex::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * sr / n as f64;
        if f < low || f > high {
            *v = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

fn scale_and_quantize(x: &mut [f64], rms: f64) {
    let current = (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let g = if current > 0.0 { rms / current } else { 0.0 };
    x.iter_mut().for_each(|v| *v = (*v * g / QUANTUM).round() * QUANTUM);
}

fn generate_item(spec: &SyntheticSpec, index: usize) -> Result<SyntheticItem> {
    let n = spec.samples();
    let sr = spec.sample_rate as f64;
    let mut stems = Vec::with_capacity(spec.sources.len());
    for (s, source) in spec.sources.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream((index * spec.sources.len() + s) as u64);
        let mut x = match &source.generator {
            Generator::Tonal { frequencies } => tonal(&mut rng, n, sr, frequencies),
            Generator::Percussive { rate_hz } => percussive(&mut rng, n, sr, *rate_hz),
            Generator::NoiseBand { low_hz, high_hz } => noise_band(&mut rng, n, sr, *low_hz, *high_hz),
        };
        scale_and_quantize(&mut x, source.gain);
        stems.push(x);
    }
    let mixture: Vec<f64> = (0..n).map(|i| stems.iter().map(|s| s[i]).sum()).collect();
    Ok(SyntheticItem {
        id: format!("item{index:04}"),
        stems: stems.into_iter().map(|s| AudioSignal::new(s, spec.sample_rate)).collect::<Result<_>>()?,
        mixture: AudioSignal::new(mixture, spec.sample_rate)?,
    })
}

/// Generates `count` items. Item `i` depends only on the spec and `i`.
pub fn generate_synthetic(spec: &SyntheticSpec, count: usize) -> Result<Vec<SyntheticItem>> {
    spec.validate()?;
    if spec.samples() == 0 {
        return Err(Error::Config("synthetic duration rounds to zero samples".into()));
    }
    (0..count).map(|i| generate_item(spec, i)).collect()
}

/// Writes a corpus of float WAV files plus `manifest.toml` under `dir`.
/// The first `train` items are tagged train, the next `test` items test.
pub fn write_corpus(spec: &SyntheticSpec, train: usize, test: usize, dir: &Path) -> Result<PathBuf> {
    let items = generate_synthetic(spec, train + test)?;
    let mut manifest = DatasetManifest {
        sample_rate: spec.sample_rate,
        sources: spec.sources.iter().map(|s| s.name.clone()).collect(),
        items: Vec::with_capacity(items.len()),
        base_dir: dir.to_path_buf(),
    };
    for (i, item) in items.iter().enumerate() {
        let mut stems = std::collections::BTreeMap::new();
        for (source, audio) in spec.sources.iter().zip(&item.stems) {
            let rel = PathBuf::from(&item.id).join(format!("{}.wav", source.name));
            save_audio(audio, &dir.join(&rel), SampleFormat::Float32)?;
            stems.insert(source.name.clone(), rel);
        }
        let mix = PathBuf::from(&item.id).join("mixture.wav");
        save_audio(&item.mixture, &dir.join(&mix), SampleFormat::Float32)?;
        manifest.items.push(ManifestItem {
            id: item.id.clone(),
            split: if i < train { Split::Train } else { Split::Test },
            mixture: Some(mix),
            stems,
        });
    }
    let path = dir.join("manifest.toml");
    crate::data::write_atomic(&path, manifest.to_toml()?.as_bytes())?;
    Ok(path)
}
