//! Spectrogram front-end: STFT analysis, overlap-add synthesis and
//! non-overlapping 2D segmentation of magnitude spectrograms.
//!
//! Framing pads `window_length - hop` zeros in front of the signal and
//! enough zeros behind it that every original sample lies in the region
//! covered by the full set of overlapping windows. Inversion is then exact
//! for any COLA window/hop pair, including at the signal edges.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{s, Array2};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tensor};

/// Frames per CDAE input segment.
pub const SEGMENT_FRAMES: usize = 15;

const COLA_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct AudioSignal {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl AudioSignal {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Signal("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Signal(format!("non-finite sample at index {i}")));
        }
        Ok(AudioSignal { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub kept_bins: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        StftConfig { window_length: 2048, hop: 512, fft_size: 2048, kept_bins: 1025 }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        let StftConfig { window_length, hop, fft_size, kept_bins } = *self;
        if hop == 0 || hop > window_length || window_length > fft_size {
            return Err(Error::Config(format!(
                "need 0 < hop ({hop}) <= window_length ({window_length}) <= fft_size ({fft_size})"
            )));
        }
        if kept_bins != fft_size / 2 + 1 {
            return Err(Error::Config(format!(
                "kept_bins must be fft_size/2 + 1 = {}, got {kept_bins}",
                fft_size / 2 + 1
            )));
        }
        if self.cola_gain().is_none() {
            return Err(Error::Config(format!(
                "Hann window of length {window_length} is not constant-overlap-add at hop {hop}"
            )));
        }
        Ok(())
    }

    /// Periodic Hann window of `window_length` samples.
    pub fn window(&self) -> Vec<f64> {
        let n = self.window_length as f64;
        (0..self.window_length).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos()).collect()
    }

    /// The constant value of the overlapped window sum, if the window/hop
    /// pair is COLA.
    pub fn cola_gain(&self) -> Option<f64> {
        if self.hop == 0 || self.hop > self.window_length {
            return None;
        }
        let window = self.window();
        let sums: Vec<f64> = (0..self.hop)
            .map(|n| window.iter().skip(n).step_by(self.hop).sum())
            .collect();
        let mean = sums.iter().sum::<f64>() / sums.len() as f64;
        let cola = mean > 0.0 && sums.iter().all(|s| (s - mean).abs() <= COLA_TOLERANCE * mean);
        cola.then_some(mean)
    }

    /// Zeros inserted before the first sample.
    pub fn lead_padding(&self) -> usize {
        self.window_length - self.hop
    }

    /// Number of analysis frames produced for a signal of `len` samples.
    pub fn frame_count(&self, len: usize) -> usize {
        (self.lead_padding() + len).div_ceil(self.hop).max(1)
    }

    /// Length of the zero-padded signal that `frame_count(len)` frames span.
    pub fn padded_len(&self, len: usize) -> usize {
        (self.frame_count(len) - 1) * self.hop + self.window_length
    }
}

/// Magnitude and phase planes, `frames x kept_bins`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    magnitude: Array2<f64>,
    phase: Array2<f64>,
    config: StftConfig,
    sample_rate: u32,
    signal_len: Option<usize>,
}

impl Spectrogram {
    pub fn from_parts(
        magnitude: Array2<f64>,
        phase: Array2<f64>,
        config: StftConfig,
        sample_rate: u32,
        signal_len: Option<usize>,
    ) -> Result<Self> {
        config.validate()?;
        if magnitude.dim() != phase.dim() {
            return Err(Error::Shape(format!(
                "magnitude {:?} vs phase {:?}",
                magnitude.dim(),
                phase.dim()
            )));
        }
        if magnitude.ncols() != config.kept_bins {
            return Err(Error::Shape(format!(
                "expected {} bins, got {}",
                config.kept_bins,
                magnitude.ncols()
            )));
        }
        if magnitude.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::Signal("magnitude must be finite and non-negative".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Signal("sample rate must be positive".into()));
        }
        Ok(Spectrogram { magnitude, phase, config, sample_rate, signal_len })
    }

    pub fn magnitude(&self) -> &Array2<f64> {
        &self.magnitude
    }

    pub fn phase(&self) -> &Array2<f64> {
        &self.phase
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn signal_len(&self) -> Option<usize> {
        self.signal_len
    }

    pub fn frames(&self) -> usize {
        self.magnitude.nrows()
    }

    pub fn bins(&self) -> usize {
        self.magnitude.ncols()
    }

    /// Same phase, configuration and length; new magnitude plane.
    pub fn with_magnitude(&self, magnitude: Array2<f64>) -> Result<Spectrogram> {
        Spectrogram::from_parts(
            magnitude,
            self.phase.clone(),
            self.config,
            self.sample_rate,
            self.signal_len,
        )
    }
}

fn plan(config: &StftConfig, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(config.fft_size)
    } else {
        planner.plan_fft_forward(config.fft_size)
    }
}

pub fn stft(signal: &AudioSignal, config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    if signal.is_empty() {
        return Err(Error::Signal("cannot analyse an empty signal".into()));
    }
    let len = signal.len();
    let frames = config.frame_count(len);
    let lead = config.lead_padding();
    let mut padded = vec![0.0; config.padded_len(len)];
    padded[lead..lead + len].copy_from_slice(signal.samples());

    let window = config.window();
    let fft = plan(config, false);
    let mut buf = vec![Complex::new(0.0, 0.0); config.fft_size];
    let mut magnitude = Array2::zeros((frames, config.kept_bins));
    let mut phase = Array2::zeros((frames, config.kept_bins));
    for frame in 0..frames {
        let start = frame * config.hop;
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (i, (&x, &w)) in padded[start..start + config.window_length].iter().zip(&window).enumerate() {
            buf[i].re = x * w;
        }
        fft.process(&mut buf);
        for (k, c) in buf[..config.kept_bins].iter().enumerate() {
            magnitude[[frame, k]] = c.norm();
            phase[[frame, k]] = c.arg();
        }
    }
    Spectrogram::from_parts(magnitude, phase, *config, signal.sample_rate(), Some(len))
}

/// Inverse DFT of one half spectrum, completed by conjugate symmetry.
/// Returns `fft_size` real samples.
pub fn inverse_frame(
    half_spectrum: &[Complex<f64>],
    fft: &dyn Fft<f64>,
    scratch: &mut Vec<Complex<f64>>,
) -> Vec<f64> {
    let n = fft.len();
    scratch.clear();
    scratch.resize(n, Complex::new(0.0, 0.0));
    for (k, c) in half_spectrum.iter().enumerate().take(n / 2 + 1) {
        scratch[k] = *c;
        if k > 0 && k < n - k {
            scratch[n - k] = c.conj();
        }
    }
    fft.process(scratch);
    scratch.iter().map(|c| c.re / n as f64).collect()
}

pub fn istft(spec: &Spectrogram) -> Result<AudioSignal> {
    let config = spec.config();
    let gain = config.cola_gain().ok_or_else(|| {
        Error::Config(format!("window/hop {}/{} is not COLA", config.window_length, config.hop))
    })?;
    let frames = spec.frames();
    let fft = plan(config, true);
    let mut scratch = Vec::new();
    let mut half = vec![Complex::new(0.0, 0.0); config.kept_bins];
    let total = (frames.max(1) - 1) * config.hop + config.window_length;
    let mut out = vec![0.0; total];
    for frame in 0..frames {
        let mags = spec.magnitude.row(frame);
        let phases = spec.phase.row(frame);
        for (k, h) in half.iter_mut().enumerate() {
            *h = Complex::from_polar(mags[k], phases[k]);
        }
        let time = inverse_frame(&half, fft.as_ref(), &mut scratch);
        let start = frame * config.hop;
        for (o, t) in out[start..start + config.window_length].iter_mut().zip(&time) {
            *o += t;
        }
    }
    let lead = config.lead_padding();
    let full_len = (frames * config.hop).saturating_sub(lead);
    let len = spec.signal_len.unwrap_or(full_len).min(total.saturating_sub(lead));
    let samples = out[lead..lead + len].iter().map(|v| v / gain).collect();
    AudioSignal::new(samples, spec.sample_rate)
}

/// Non-overlapping fixed-length segments of a magnitude spectrogram.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentBatch {
    /// `[segments, frames_per_segment, bins]`
    pub segments: Tensor,
    /// First source frame of each segment.
    pub origin: Vec<usize>,
    /// Zero frames appended to complete the final segment.
    pub pad_frames: usize,
}

impl SegmentBatch {
    pub fn len(&self) -> usize {
        self.segments.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frames_per_segment(&self) -> usize {
        self.segments.shape()[1]
    }

    pub fn bins(&self) -> usize {
        self.segments.shape()[2]
    }

    /// Concatenates batches (e.g. across songs). The result is a training
    /// pool; its origin map is not meant to be unsegmented.
    pub fn concat(batches: &[SegmentBatch]) -> Result<SegmentBatch> {
        let first = batches.first().ok_or_else(|| Error::Data("no segment batches".into()))?;
        let (n, f) = (first.frames_per_segment(), first.bins());
        let mut data = Vec::new();
        let mut origin = Vec::new();
        for b in batches {
            if b.frames_per_segment() != n || b.bins() != f {
                return Err(Error::Shape("segment batches differ in segment shape".into()));
            }
            data.extend_from_slice(b.segments.data());
            origin.extend_from_slice(&b.origin);
        }
        let count = origin.len();
        Ok(SegmentBatch { segments: Tensor::from_vec(&[count, n, f], data)?, origin, pad_frames: 0 })
    }
}

pub fn segment(magnitude: &Array2<f64>, frames_per_segment: usize) -> Result<SegmentBatch> {
    let (frames, bins) = magnitude.dim();
    if frames == 0 || bins == 0 {
        return Err(Error::Shape("cannot segment an empty spectrogram".into()));
    }
    if frames_per_segment == 0 {
        return Err(Error::Config("frames_per_segment must be positive".into()));
    }
    let count = frames.div_ceil(frames_per_segment);
    let pad_frames = count * frames_per_segment - frames;
    let mut data = vec![0.0; count * frames_per_segment * bins];
    for (frame, row) in magnitude.rows().into_iter().enumerate() {
        let dst = &mut data[frame * bins..(frame + 1) * bins];
        for (d, v) in dst.iter_mut().zip(row.iter()) {
            *d = *v;
        }
    }
    let origin = (0..count).map(|i| i * frames_per_segment).collect();
    Ok(SegmentBatch {
        segments: Tensor::from_vec(&[count, frames_per_segment, bins], data)?,
        origin,
        pad_frames,
    })
}

pub fn unsegment(batch: &SegmentBatch) -> Result<Array2<f64>> {
    let shape = batch.segments.shape();
    if shape.len() != 3 {
        return Err(Error::Shape(format!("segments must be rank 3, got {shape:?}")));
    }
    let (count, n, bins) = (shape[0], shape[1], shape[2]);
    if batch.origin.len() != count || count == 0 {
        return Err(Error::Data("origin map does not match segment count".into()));
    }
    let mut order: Vec<usize> = (0..count).collect();
    order.sort_by_key(|&i| batch.origin[i]);
    for (slot, &i) in order.iter().enumerate() {
        if batch.origin[i] != slot * n {
            return Err(Error::Data(format!(
                "origin map is not a tiling: segment {i} starts at frame {}",
                batch.origin[i]
            )));
        }
    }
    if batch.pad_frames >= n {
        return Err(Error::Data(format!("pad_frames {} >= segment length {n}", batch.pad_frames)));
    }
    let frames = count * n - batch.pad_frames;
    let mut out = Array2::zeros((frames, bins));
    let data = batch.segments.data();
    for &i in &order {
        let start = batch.origin[i];
        let take = n.min(frames - start);
        let seg = &data[i * n * bins..(i * n + take) * bins];
        let block = ndarray::ArrayView2::from_shape((take, bins), seg)
            .map_err(|e| Error::Shape(e.to_string()))?;
        out.slice_mut(s![start..start + take, ..]).assign(&block);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn noise(len: usize, seed: u64) -> AudioSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioSignal::new((0..len).map(|_| rng.gen_range(-1.0..1.0)).collect(), 44100).unwrap()
    }

    fn snr_db(reference: &[f64], estimate: &[f64]) -> f64 {
        let sig: f64 = reference.iter().map(|v| v * v).sum();
        let err: f64 = reference.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
        10.0 * (sig / err).log10()
    }

    #[test]
    fn default_config_is_cola() {
        let cfg = StftConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.cola_gain().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_cola_hop() {
        let cfg = StftConfig { hop: 600, ..Default::default() };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = StftConfig { hop: 2048, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = StftConfig { kept_bins: 1024, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn dc_signal_lands_in_bin_zero() {
        let cfg = StftConfig::default();
        let x = AudioSignal::new(vec![1.0; 20_000], 44100).unwrap();
        let spec = stft(&x, &cfg).unwrap();
        // interior frames are fully inside the signal
        let lead = cfg.lead_padding();
        for frame in 0..spec.frames() {
            let start = frame * cfg.hop;
            if start < lead || start + cfg.window_length > lead + x.len() {
                continue;
            }
            let row = spec.magnitude().row(frame);
            let peak = row[0];
            assert!((peak - 1024.0).abs() < 1e-9);
            assert!(row.iter().skip(2).all(|&m| m < 1e-8 * peak));
        }
    }

    #[test]
    fn bin_centred_sinusoid_peaks_at_its_bin() {
        let cfg = StftConfig::default();
        let sr = 44100.0;
        for k in [5usize, 100, 511, 1000] {
            let f = k as f64 * sr / 2048.0;
            let x: Vec<f64> = (0..30_000).map(|n| (2.0 * PI * f * n as f64 / sr).sin()).collect();
            let spec = stft(&AudioSignal::new(x, 44100).unwrap(), &cfg).unwrap();
            for frame in 4..spec.frames() - 4 {
                let row = spec.magnitude().row(frame);
                let argmax = row.iter().enumerate().fold(0, |b, (i, &v)| if v > row[b] { i } else { b });
                assert_eq!(argmax, k);
            }
        }
    }

    #[test]
    fn frame_count_matches_enumeration() {
        let cfg = StftConfig::default();
        for len in [1usize, 511, 512, 513, 2048, 44100, 50_000] {
            // enumerate frame starts until every original sample sits under
            // window_length / hop overlapping frames
            let lead = cfg.lead_padding();
            let mut frames = 0;
            loop {
                frames += 1;
                let covered_to = frames * cfg.hop; // exclusive, padded coordinates
                if covered_to >= lead + len {
                    break;
                }
            }
            assert_eq!(cfg.frame_count(len), frames, "len {len}");
        }
        let spec = stft(&noise(44100, 1), &cfg).unwrap();
        assert_eq!(spec.magnitude().dim(), (90, 1025));
    }

    #[test]
    fn round_trip_is_transparent() {
        let cfg = StftConfig::default();
        for (i, len) in [2048usize, 3001, 44100].into_iter().enumerate() {
            let x = noise(len, i as u64);
            let y = istft(&stft(&x, &cfg).unwrap()).unwrap();
            assert_eq!(y.len(), len);
            assert!(snr_db(x.samples(), y.samples()) > 60.0);
        }
    }

    #[test]
    fn round_trip_other_cola_hops() {
        for hop in [256, 1024] {
            let cfg = StftConfig { hop, ..Default::default() };
            let x = noise(9000, 7);
            let y = istft(&stft(&x, &cfg).unwrap()).unwrap();
            assert!(snr_db(x.samples(), y.samples()) > 60.0);
        }
    }

    #[test]
    fn zero_spectrogram_gives_silence() {
        let cfg = StftConfig::default();
        let mag = Array2::zeros((12, 1025));
        let spec = Spectrogram::from_parts(mag.clone(), mag, cfg, 16000, None).unwrap();
        let y = istft(&spec).unwrap();
        assert_eq!(y.len(), 12 * 512 - 1536);
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn inverse_frame_matches_direct_dft() {
        // half spectrum of a Hann-windowed sinusoid, inverted, against a
        // direct O(N^2) inverse DFT.
        let cfg = StftConfig::default();
        let n = cfg.fft_size;
        let w = cfg.window();
        let frame: Vec<f64> = (0..n).map(|i| w[i] * (2.0 * PI * 37.3 * i as f64 / n as f64).sin()).collect();
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&v| Complex::new(v, 0.0)).collect();
        plan(&cfg, false).process(&mut buf);
        let half = &buf[..cfg.kept_bins];

        let direct: Vec<f64> = (0..n)
            .map(|t| {
                let mut acc = half[0].re + half[n / 2].re * if t % 2 == 0 { 1.0 } else { -1.0 };
                for (k, c) in half.iter().enumerate().take(n / 2).skip(1) {
                    let ang = 2.0 * PI * (k * t) as f64 / n as f64;
                    acc += 2.0 * (c.re * ang.cos() - c.im * ang.sin());
                }
                acc / n as f64
            })
            .collect();

        let fft = plan(&cfg, true);
        let got = inverse_frame(half, fft.as_ref(), &mut Vec::new());
        let rms = |a: &[f64], b: &[f64]| {
            (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
        };
        assert!(rms(&got, &direct) < 1e-6);
        assert!(rms(&got, &frame) < 1e-6);
    }

    #[test]
    fn parseval_holds_per_frame() {
        let cfg = StftConfig::default();
        let x = noise(10_000, 3);
        let spec = stft(&x, &cfg).unwrap();
        let w = cfg.window();
        let mut padded = vec![0.0; cfg.padded_len(x.len())];
        padded[cfg.lead_padding()..cfg.lead_padding() + x.len()].copy_from_slice(x.samples());
        let mut time_energy = 0.0;
        for f in 0..spec.frames() {
            let start = f * cfg.hop;
            time_energy += padded[start..start + cfg.window_length]
                .iter()
                .zip(&w)
                .map(|(a, b)| (a * b).powi(2))
                .sum::<f64>();
        }
        let n = cfg.fft_size;
        let mut spec_energy = 0.0;
        for row in spec.magnitude().rows() {
            for (k, m) in row.iter().enumerate() {
                let weight = if k == 0 || k == n / 2 { 1.0 } else { 2.0 };
                spec_energy += weight * m * m;
            }
        }
        spec_energy /= n as f64;
        assert!((spec_energy - time_energy).abs() < 0.01 * time_energy);
    }

    #[test]
    fn stft_rejects_bad_input() {
        let cfg = StftConfig::default();
        assert!(AudioSignal::new(vec![0.0, f64::NAN], 8000).is_err());
        assert!(AudioSignal::new(vec![0.0], 0).is_err());
        let empty = AudioSignal::new(vec![], 8000).unwrap();
        assert!(matches!(stft(&empty, &cfg), Err(Error::Signal(_))));
    }

    #[test]
    fn segment_counts_and_padding() {
        let m30 = Array2::from_elem((30, 8), 1.0);
        let b = segment(&m30, 15).unwrap();
        assert_eq!((b.len(), b.pad_frames), (2, 0));

        let m31 = Array2::from_elem((31, 8), 1.0);
        let b = segment(&m31, 15).unwrap();
        assert_eq!((b.len(), b.pad_frames), (3, 14));
        assert_eq!(b.origin, vec![0, 15, 30]);
    }

    #[test]
    fn segment_concatenation_reproduces_input() {
        let m = Array2::from_shape_fn((150, 1025), |(i, j)| (i * 1025 + j) as f64);
        let b = segment(&m, 15).unwrap();
        assert_eq!(b.len(), 10);
        // reassemble by direct concatenation, independent of unsegment
        let flat: Vec<f64> = b.segments.data().to_vec();
        let rebuilt = Array2::from_shape_vec((150, 1025), flat).unwrap();
        assert_eq!(rebuilt, m);
    }

    #[test]
    fn unsegment_single_padded_frame() {
        let m = Array2::from_elem((1, 4), 2.5);
        let b = segment(&m, 15).unwrap();
        assert_eq!(b.pad_frames, 14);
        assert_eq!(unsegment(&b).unwrap(), m);
    }

    #[test]
    fn unsegment_detects_bad_origin() {
        let m = Array2::from_elem((30, 4), 1.0);
        let mut b = segment(&m, 15).unwrap();
        b.origin[1] = 14;
        assert!(matches!(unsegment(&b), Err(Error::Data(_))));
        b.origin = vec![0];
        assert!(unsegment(&b).is_err());
    }

    #[test]
    fn unsegment_respects_origin_order() {
        let m = Array2::from_shape_fn((40, 3), |(i, j)| (i * 3 + j) as f64);
        let mut b = segment(&m, 15).unwrap();
        // swap the first two segments together with their origins
        let mut data = b.segments.data().to_vec();
        let stride = 15 * 3;
        let (a, rest) = data.split_at_mut(stride);
        a.swap_with_slice(&mut rest[..stride]);
        b.segments = Tensor::from_vec(&[3, 15, 3], data).unwrap();
        b.origin.swap(0, 1);
        assert_eq!(unsegment(&b).unwrap(), m);
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn segment_round_trip(frames in 1usize..80, bins in 1usize..12, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = Array2::from_shape_fn((frames, bins), |_| rng.gen_range(0.0..10.0));
                let b = segment(&m, 15).unwrap();
                prop_assert!(b.pad_frames < 15);
                prop_assert_eq!(unsegment(&b).unwrap(), m);
            }

            #[test]
            fn magnitudes_nonnegative_and_finite(len in 1usize..6000, seed in any::<u64>()) {
                let spec = stft(&noise(len, seed), &StftConfig::default()).unwrap();
                prop_assert!(spec.magnitude().iter().all(|&m| m >= 0.0 && m.is_finite()));
            }
        }
    }
}
