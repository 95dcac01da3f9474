//! Single-channel audio source separation with fully convolutional
//! denoising autoencoders (CDAEs).
//!
//! The pipeline is split into small, independently testable pieces:
//!
//! - [`dsp`]: STFT / inverse STFT and fixed-size spectrogram segmentation.
//! - [`nn`]: a minimal reverse-mode layer engine (conv, pooling, up-sampling,
//!   dense, ReLU, squared-error loss).
//! - [`models`]: the CDAE and feed-forward baseline builders, initialization
//!   and the weight snapshot format.
//! - [`optim`]: Nadam, plateau learning-rate schedule and the per-source
//!   training loop.
//! - [`separation`]: inference, soft masks and mixture-phase reconstruction.
//! - [`bsseval`]: SDR / SIR / SAR via orthogonal projections.
//! - [`data`]: WAV I/O, dataset manifests and a synthetic corpus generator.

pub mod bsseval;
pub mod data;
pub mod dsp;
mod error;
pub mod models;
pub mod nn;
pub mod optim;
pub mod separation;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
