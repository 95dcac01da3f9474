//! Target-independent demo logic; `lib.rs` wraps it for JavaScript.

use cdaesep::bsseval::{evaluate_item, normalize, EvalReport};
use cdaesep::data::{generate_synthetic, SyntheticSpec};
use cdaesep::dsp::{stft, Spectrogram, StftConfig};
use cdaesep::models::{Architecture, CdaeConfig, FnnConfig, ModelGraph};
use cdaesep::separation::{apply_masks, build_masks, reconstruct};
use ndarray::Array2;
use serde::Serialize;

/// Floor of the displayed decibel range.
pub const DB_FLOOR: f32 = -100.0;

/// Column-major (frame by frame) decibel image of a magnitude plane.
pub fn to_db(magnitude: &Array2<f64>) -> Vec<f32> {
    let peak = magnitude.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    magnitude.iter().map(|&m| ((20.0 * (m / peak).log10()) as f32).max(DB_FLOOR)).collect()
}

pub struct Mixture {
    pub names: Vec<String>,
    pub mixture: Spectrogram,
    pub stems: Vec<Spectrogram>,
    pub references: Vec<Vec<f64>>,
}

impl Mixture {
    pub fn generate(seed: u64, seconds: f64) -> Result<Mixture, String> {
        let spec = SyntheticSpec { seed, duration_secs: seconds, ..Default::default() };
        let item = generate_synthetic(&spec, 1).map_err(|e| e.to_string())?.remove(0);
        let cfg = StftConfig::default();
        let mixture = stft(&item.mixture, &cfg).map_err(|e| e.to_string())?;
        let stems = item.stems.iter().map(|s| stft(s, &cfg)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        Ok(Mixture {
            names: spec.sources.iter().map(|s| s.name.clone()).collect(),
            mixture,
            stems,
            references: item.stems.into_iter().map(|s| s.into_samples()).collect(),
        })
    }

    /// Masks built from the true stem magnitudes.
    pub fn ideal_masks(&self) -> Result<Vec<Array2<f64>>, String> {
        let est: Vec<Array2<f64>> = self.stems.iter().map(|s| s.magnitude().clone()).collect();
        build_masks(&est).map_err(|e| e.to_string())
    }

    /// Separates with ideal masks and scores the result.
    pub fn ideal_scores(&self) -> Result<Vec<SourceScore>, String> {
        let err = |e: cdaesep::Error| e.to_string();
        let masked = apply_masks(&self.ideal_masks()?, self.mixture.magnitude()).map_err(err)?;
        let len = self.mixture.signal_len();
        let estimates = masked.iter().map(|m| reconstruct(m, &self.mixture, len)).collect::<Result<Vec<_>, _>>().map_err(err)?;
        let refs: Vec<&[f64]> = self.references.iter().map(Vec::as_slice).collect();
        let est: Vec<&[f64]> = estimates.iter().map(|s| s.samples()).collect();
        let mix_signal = reconstruct(self.mixture.magnitude(), &self.mixture, len).map_err(err)?;
        let mix = vec![mix_signal.samples(); refs.len()];
        let scores = EvalReport { rows: evaluate_item("demo", &self.names, &est, &refs).map_err(err)? };
        let baseline = EvalReport { rows: evaluate_item("demo", &self.names, &mix, &refs).map_err(err)? };
        Ok(normalize(&scores, &baseline)
            .map_err(err)?
            .rows
            .into_iter()
            .map(|r| SourceScore {
                source: r.source,
                sdr: r.metrics.sdr,
                sir: r.metrics.sir,
                sar: r.metrics.sar,
                nsdr: r.nsdr.unwrap_or(f64::NAN),
            })
            .collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SourceScore {
    pub source: String,
    pub sdr: f64,
    pub sir: f64,
    pub sar: f64,
    pub nsdr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerRow {
    pub kind: &'static str,
    pub channels: usize,
    pub frames: usize,
    pub bins: usize,
    pub parameters: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdaeSummary {
    pub layers: Vec<LayerRow>,
    pub parameters: usize,
    pub fnn_parameters: usize,
}

/// Layer table of a CDAE with the given channel widths on 15 x 1025 input.
pub fn cdae_summary(channels: &[usize]) -> Result<CdaeSummary, String> {
    let channels: [usize; 7] =
        channels.try_into().map_err(|_| format!("expected 7 channel counts, got {}", channels.len()))?;
    let model = ModelGraph::build(Architecture::Cdae(CdaeConfig { channels, ..Default::default() }), "demo")
        .map_err(|e| e.to_string())?;
    let counts: Vec<usize> = model.layers().iter().map(|l| l.parameter_count()).collect();
    let layers = model
        .shape_chain()
        .into_iter()
        .zip(counts)
        .filter(|((kind, _), _)| *kind != "relu")
        .map(|((kind, s), parameters)| LayerRow { kind, channels: s[0], frames: s[1], bins: s[2], parameters })
        .collect();
    let fnn = ModelGraph::build(Architecture::Fnn(FnnConfig::default()), "fnn").map_err(|e| e.to_string())?;
    Ok(CdaeSummary { layers, parameters: model.parameter_count(), fnn_parameters: fnn.parameter_count() })
}
