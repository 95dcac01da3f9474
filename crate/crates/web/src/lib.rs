//! WebAssembly bindings for the browser demo in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

use crate::demo::{cdae_summary, to_db, Mixture};

/// A synthetic two-source mixture with its spectrograms.
#[wasm_bindgen]
pub struct MixtureDemo {
    inner: Mixture,
}

#[wasm_bindgen]
impl MixtureDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, seconds: f64) -> Result<MixtureDemo, JsError> {
        Mixture::generate(seed as u64, seconds).map(|inner| MixtureDemo { inner }).map_err(|e| JsError::new(&e))
    }

    pub fn frames(&self) -> usize {
        self.inner.mixture.frames()
    }

    pub fn bins(&self) -> usize {
        self.inner.mixture.bins()
    }

    #[wasm_bindgen(js_name = sampleRate)]
    pub fn sample_rate(&self) -> u32 {
        self.inner.mixture.sample_rate()
    }

    #[wasm_bindgen(js_name = sourceNames)]
    pub fn source_names(&self) -> Vec<String> {
        self.inner.names.clone()
    }

    /// Mixture magnitude in dB relative to its peak, frame-major.
    #[wasm_bindgen(js_name = mixtureDb)]
    pub fn mixture_db(&self) -> Vec<f32> {
        to_db(self.inner.mixture.magnitude())
    }

    #[wasm_bindgen(js_name = stemDb)]
    pub fn stem_db(&self, index: usize) -> Result<Vec<f32>, JsError> {
        let stem = self.inner.stems.get(index).ok_or_else(|| JsError::new("no such source"))?;
        Ok(to_db(stem.magnitude()))
    }

    /// Ideal mask of one source, values in [0, 1], frame-major.
    #[wasm_bindgen(js_name = idealMask)]
    pub fn ideal_mask(&self, index: usize) -> Result<Vec<f32>, JsError> {
        let masks = self.inner.ideal_masks().map_err(|e| JsError::new(&e))?;
        let mask = masks.get(index).ok_or_else(|| JsError::new("no such source"))?;
        Ok(mask.iter().map(|&v| v as f32).collect())
    }

    /// JSON array of per-source SDR, SIR, SAR and normalized SDR after
    /// ideal-mask separation.
    #[wasm_bindgen(js_name = idealScores)]
    pub fn ideal_scores(&self) -> Result<String, JsError> {
        let scores = self.inner.ideal_scores().map_err(|e| JsError::new(&e))?;
        serde_json::to_string(&scores).map_err(|e| JsError::new(&e.to_string()))
    }
}

/// JSON layer table and parameter counts for seven CDAE channel widths.
#[wasm_bindgen(js_name = cdaeSummary)]
pub fn cdae_summary_json(channels: Vec<u32>) -> Result<String, JsError> {
    let channels: Vec<usize> = channels.into_iter().map(|c| c as usize).collect();
    let summary = cdae_summary(&channels).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&summary).map_err(|e| JsError::new(&e.to_string()))
}
