//! Inference and soft-mask reconstruction.
//!
//! Each source network turns the mixture magnitude into a raw estimate.
//! The estimates are normalized into masks that sum to one per bin, the
//! masks scale the mixture magnitude, and the mixture phase is reused for
//! resynthesis.

use ndarray::{Array2, Zip};
use rayon::prelude::*;

use crate::dsp::{istft, segment, unsegment, AudioSignal, SegmentBatch, Spectrogram};
use crate::models::ModelGraph;
use crate::{Error, Result};

/// Total estimate below which a bin is shared equally among all sources.
pub const MASK_FLOOR: f64 = 1e-12;

/// Power applied to estimates before normalising them into masks.
pub const MASK_EXPONENT: f64 = 1.0;

const INFERENCE_CHUNK: usize = 8;

#[derive(Clone, Debug)]
pub struct SourceEstimateSet {
    pub names: Vec<String>,
    /// Raw network outputs.
    pub estimates: Vec<Array2<f64>>,
    pub masks: Vec<Array2<f64>>,
    /// Masked mixture magnitudes.
    pub masked: Vec<Array2<f64>>,
    pub mixture: Spectrogram,
}

impl SourceEstimateSet {
    pub fn mask_exponent(&self) -> f64 {
        MASK_EXPONENT
    }

    /// Time-domain estimate of every source, trimmed to the mixture length.
    pub fn reconstruct_all(&self) -> Result<Vec<AudioSignal>> {
        let len = self.mixture.signal_len();
        self.masked.iter().map(|m| reconstruct(m, &self.mixture, len)).collect()
    }
}

/// Runs the mixture magnitude through one source network.
pub fn infer_source(model: &ModelGraph, mixture: &Spectrogram) -> Result<Array2<f64>> {
    let arch = model.architecture();
    if arch.bins() != mixture.bins() {
        return Err(Error::Shape(format!(
            "model {} expects {} bins, mixture has {}",
            model.name,
            arch.bins(),
            mixture.bins()
        )));
    }
    let batch = segment(mixture.magnitude(), arch.frames_per_example())?;
    let inputs = model.examples_from_segments(&batch.segments)?;
    let rows: Vec<usize> = (0..batch.len()).collect();
    let outputs = rows
        .par_chunks(INFERENCE_CHUNK)
        .map(|chunk| model.forward(&inputs.gather(chunk)?))
        .collect::<Result<Vec<_>>>()?;
    let data: Vec<f64> = outputs.into_iter().flat_map(|t| t.into_vec()).collect();
    let segments = crate::Tensor::from_vec(batch.segments.shape(), data)?;
    unsegment(&SegmentBatch { segments, ..batch })
}

pub fn build_masks(estimates: &[Array2<f64>]) -> Result<Vec<Array2<f64>>> {
    let first = estimates.first().ok_or_else(|| Error::Shape("no source estimates".into()))?;
    let dim = first.dim();
    for (i, e) in estimates.iter().enumerate() {
        if e.dim() != dim {
            return Err(Error::Shape(format!("estimate {i} is {:?}, expected {dim:?}", e.dim())));
        }
        if e.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Signal(format!("estimate {i} has negative or non-finite values")));
        }
    }
    let mut total = Array2::<f64>::zeros(dim);
    for e in estimates {
        total += e;
    }
    let uniform = 1.0 / estimates.len() as f64;
    Ok(estimates
        .iter()
        .map(|e| {
            Zip::from(e).and(&total).map_collect(|&s, &t| if t < MASK_FLOOR { uniform } else { s / t })
        })
        .collect())
}

pub fn apply_masks(masks: &[Array2<f64>], mixture: &Array2<f64>) -> Result<Vec<Array2<f64>>> {
    masks
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.dim() != mixture.dim() {
                return Err(Error::Shape(format!("mask {i} {:?} vs mixture {:?}", m.dim(), mixture.dim())));
            }
            Ok(m * mixture)
        })
        .collect()
}

/// Inverse STFT of `magnitude` paired with the mixture phase.
pub fn reconstruct(
    magnitude: &Array2<f64>,
    mixture: &Spectrogram,
    original_length: Option<usize>,
) -> Result<AudioSignal> {
    let spec = mixture.with_magnitude(magnitude.clone())?;
    let out = istft(&spec)?;
    match original_length {
        Some(n) if n < out.len() => {
            let sr = out.sample_rate();
            let mut samples = out.into_samples();
            samples.truncate(n);
            AudioSignal::new(samples, sr)
        }
        _ => Ok(out),
    }
}

/// Full inference for one mixture spectrogram.
pub fn separate(models: &[ModelGraph], mixture: &Spectrogram) -> Result<SourceEstimateSet> {
    let estimates = models.iter().map(|m| infer_source(m, mixture)).collect::<Result<Vec<_>>>()?;
    let masks = build_masks(&estimates)?;
    let masked = apply_masks(&masks, mixture.magnitude())?;
    Ok(SourceEstimateSet {
        names: models.iter().map(|m| m.name.clone()).collect(),
        estimates,
        masks,
        masked,
        mixture: mixture.clone(),
    })
}
