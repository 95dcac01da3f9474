//! Network builders: the fully convolutional denoising autoencoder and the
//! frame-wise feed-forward baseline.

mod snapshot;

pub use snapshot::{load_weights, save_weights, NamedTensor, TrainingMeta, WeightSnapshot};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsp::SEGMENT_FRAMES;
use crate::nn::{mse_loss_scaled, Cache, Conv2d, Dense, Layer, KERNEL};
use crate::{Error, Result, Tensor};

/// Encoder/decoder filter counts of the seven hidden convolutions.
pub const CDAE_CHANNELS: [usize; 7] = [12, 20, 30, 40, 30, 20, 12];
pub const CDAE_PARAMETERS: usize = 37_101;
pub const FNN_PARAMETERS: usize = 4_206_600;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CdaeConfig {
    pub channels: [usize; 7],
    pub frames: usize,
    pub bins: usize,
}

impl Default for CdaeConfig {
    fn default() -> Self {
        CdaeConfig { channels: CDAE_CHANNELS, frames: SEGMENT_FRAMES, bins: 1025 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FnnConfig {
    pub bins: usize,
    pub hidden: usize,
    pub hidden_layers: usize,
}

impl Default for FnnConfig {
    fn default() -> Self {
        FnnConfig { bins: 1025, hidden: 1025, hidden_layers: 3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Architecture {
    Cdae(CdaeConfig),
    Fnn(FnnConfig),
}

impl Architecture {
    /// Canonical one-line description; also the fingerprint input.
    pub fn descriptor(&self) -> String {
        match self {
            Architecture::Cdae(c) => {
                let ch: Vec<String> = c.channels.iter().map(|v| v.to_string()).collect();
                format!("cdae frames={} bins={} channels={}", c.frames, c.bins, ch.join(","))
            }
            Architecture::Fnn(f) => {
                format!("fnn bins={} hidden={} layers={}", f.bins, f.hidden, f.hidden_layers)
            }
        }
    }

    pub fn parse_descriptor(text: &str) -> Result<Architecture> {
        let bad = || Error::Snapshot(format!("unrecognised architecture descriptor {text:?}"));
        let mut words = text.split_whitespace();
        let kind = words.next().ok_or_else(bad)?;
        let mut fields = std::collections::BTreeMap::new();
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(bad)?;
            fields.insert(k, v);
        }
        let num = |k: &str| -> Result<usize> { fields.get(k).ok_or_else(bad)?.parse().map_err(|_| bad()) };
        match kind {
            "cdae" => {
                let list: Vec<usize> = fields
                    .get("channels")
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|v| v.parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                let channels: [usize; 7] = list.try_into().map_err(|_| bad())?;
                Ok(Architecture::Cdae(CdaeConfig { channels, frames: num("frames")?, bins: num("bins")? }))
            }
            "fnn" => Ok(Architecture::Fnn(FnnConfig {
                bins: num("bins")?,
                hidden: num("hidden")?,
                hidden_layers: num("layers")?,
            })),
            _ => Err(bad()),
        }
    }

    /// 64-bit FNV-1a hash of the descriptor.
    pub fn fingerprint(&self) -> u64 {
        fnv1a(self.descriptor().as_bytes())
    }

    /// Spectrogram frames consumed per network example.
    pub fn frames_per_example(&self) -> usize {
        match self {
            Architecture::Cdae(c) => c.frames,
            Architecture::Fnn(_) => 1,
        }
    }

    pub fn bins(&self) -> usize {
        match self {
            Architecture::Cdae(c) => c.bins,
            Architecture::Fnn(f) => f.bins,
        }
    }

    fn input_shape(&self) -> Vec<usize> {
        match self {
            Architecture::Cdae(c) => vec![1, c.frames, c.bins],
            Architecture::Fnn(f) => vec![f.bins],
        }
    }

    fn layers(&self) -> Result<Vec<Layer>> {
        let conv = |i, o| Layer::Conv2d(Conv2d::zeros(i, o));
        match self {
            Architecture::Cdae(c) => {
                if c.channels.contains(&0) {
                    return Err(Error::Config("CDAE channel counts must be positive".into()));
                }
                let [c1, c2, c3, c4, c5, c6, c7] = c.channels;
                Ok(vec![
                    conv(1, c1),
                    Layer::Relu,
                    Layer::MaxPool2d((3, 5)),
                    conv(c1, c2),
                    Layer::Relu,
                    Layer::MaxPool2d((1, 5)),
                    conv(c2, c3),
                    Layer::Relu,
                    conv(c3, c4),
                    Layer::Relu,
                    conv(c4, c5),
                    Layer::Relu,
                    conv(c5, c6),
                    Layer::Relu,
                    Layer::Upsample2d((1, 5)),
                    conv(c6, c7),
                    Layer::Relu,
                    Layer::Upsample2d((3, 5)),
                    conv(c7, 1),
                    Layer::Relu,
                ])
            }
            Architecture::Fnn(f) => {
                if f.bins == 0 || f.hidden == 0 {
                    return Err(Error::Config("FNN widths must be positive".into()));
                }
                let mut layers = Vec::new();
                let mut width = f.bins;
                for _ in 0..f.hidden_layers {
                    layers.push(Layer::Dense(Dense::zeros(width, f.hidden)));
                    layers.push(Layer::Relu);
                    width = f.hidden;
                }
                layers.push(Layer::Dense(Dense::zeros(width, f.bins)));
                layers.push(Layer::Relu);
                Ok(layers)
            }
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Ordered layer stack for one source.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGraph {
    pub name: String,
    pub seed: u64,
    architecture: Architecture,
    layers: Vec<Layer>,
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
}

/// Forward activations kept for a backward pass.
pub struct Trace {
    caches: Vec<Cache>,
    pub output: Tensor,
}

pub fn build_cdae() -> ModelGraph {
    ModelGraph::build(Architecture::Cdae(CdaeConfig::default()), "cdae").expect("default CDAE is valid")
}

pub fn build_fnn() -> ModelGraph {
    ModelGraph::build(Architecture::Fnn(FnnConfig::default()), "fnn").expect("default FNN is valid")
}

impl ModelGraph {
    /// Builds a zero-initialized network and checks that the shape chain
    /// composes and ends where it started.
    pub fn build(architecture: Architecture, name: impl Into<String>) -> Result<ModelGraph> {
        let layers = architecture.layers()?;
        let input_shape = architecture.input_shape();
        let mut shape = input_shape.clone();
        for layer in &layers {
            shape = layer.output_shape(&shape)?;
        }
        if shape != input_shape {
            return Err(Error::Shape(format!("network maps {input_shape:?} to {shape:?}")));
        }
        Ok(ModelGraph { name: name.into(), seed: 0, architecture, layers, input_shape, output_shape: shape })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.architecture
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(Layer::parameter_count).sum()
    }

    /// `(layer kind, per-example output shape)` after every layer.
    pub fn shape_chain(&self) -> Vec<(&'static str, Vec<usize>)> {
        let mut shape = self.input_shape.clone();
        self.layers
            .iter()
            .map(|l| {
                shape = l.output_shape(&shape).expect("validated at build time");
                (l.kind(), shape.clone())
            })
            .collect()
    }

    pub fn params(&self) -> Vec<&Tensor> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    /// Parameter names in [`ModelGraph::params`] order, e.g. `conv3.weight`.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut counts = std::collections::HashMap::new();
        for layer in &self.layers {
            if layer.parameter_count() == 0 {
                continue;
            }
            let n = counts.entry(layer.kind()).or_insert(0usize);
            let prefix = match layer {
                Layer::Conv2d(_) => "conv",
                _ => "dense",
            };
            names.push(format!("{prefix}{n}.weight"));
            names.push(format!("{prefix}{n}.bias"));
            *n += 1;
        }
        names
    }

    /// Reshapes `[n, frames, bins]` segments into network examples.
    pub fn examples_from_segments(&self, segments: &Tensor) -> Result<Tensor> {
        let s = segments.shape();
        let per_example = self.architecture.frames_per_example();
        if s.len() != 3 || s[1] != per_example || s[2] != self.architecture.bins() {
            return Err(Error::Shape(format!(
                "model {} expects segments [n, {per_example}, {}], got {s:?}",
                self.name,
                self.architecture.bins()
            )));
        }
        let mut shape = vec![s[0]];
        shape.extend_from_slice(&self.input_shape);
        segments.clone().reshape(&shape)
    }

    fn check_batch(&self, batch: &Tensor) -> Result<()> {
        if batch.shape().get(1..) != Some(&self.input_shape[..]) {
            return Err(Error::Shape(format!(
                "model {} expects [batch, {:?}], got {:?}",
                self.name,
                self.input_shape,
                batch.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, batch: &Tensor) -> Result<Tensor> {
        self.check_batch(batch)?;
        let mut x = batch.clone();
        for layer in &self.layers {
            x = layer.forward_cached(x)?.0;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, batch: &Tensor) -> Result<Trace> {
        self.check_batch(batch)?;
        let mut x = batch.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (y, cache) = layer.forward_cached(x)?;
            caches.push(cache);
            x = y;
        }
        Ok(Trace { caches, output: x })
    }

    /// Parameter gradients in [`ModelGraph::params`] order.
    pub fn backward(&self, trace: &Trace, upstream: &Tensor) -> Result<Vec<Tensor>> {
        let mut grads: Vec<Vec<Tensor>> = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for (layer, cache) in self.layers.iter().zip(&trace.caches).rev() {
            let lg = layer.backward(cache, &g)?;
            grads.push(lg.params);
            g = lg.input;
        }
        Ok(grads.into_iter().rev().flatten().collect())
    }

    /// Summed squared-error loss over `inputs` divided by `examples`, and the
    /// matching parameter gradients.
    pub fn loss_and_grad(&self, inputs: &Tensor, targets: &Tensor, examples: f64) -> Result<(f64, Vec<Tensor>)> {
        let trace = self.forward_trace(inputs)?;
        let (loss, upstream) = mse_loss_scaled(&trace.output, targets, examples)?;
        let grads = self.backward(&trace, &upstream)?;
        Ok((loss, grads))
    }

    /// Copies parameters from another graph of the same architecture.
    pub fn load_snapshot(&mut self, snapshot: &WeightSnapshot) -> Result<()> {
        snapshot::load_into(self, snapshot)
    }
}

/// Glorot-uniform weights, zero biases, deterministic in `seed`. Values are
/// rounded to single precision so the on-disk snapshot is exact.
pub fn init_weights(mut model: ModelGraph, seed: u64) -> ModelGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in &mut model.layers {
        let (weight, bias, fan_in, fan_out) = match layer {
            Layer::Conv2d(c) => {
                let area = KERNEL * KERNEL;
                let (i, o) = (c.in_channels(), c.out_channels());
                (&mut c.weight, &mut c.bias, i * area, o * area)
            }
            Layer::Dense(d) => {
                let (i, o) = (d.inputs(), d.outputs());
                (&mut d.weight, &mut d.bias, i, o)
            }
            _ => continue,
        };
        let limit = glorot_limit(fan_in, fan_out);
        for w in weight.data_mut() {
            *w = rng.gen_range(-limit..limit) as f32 as f64;
        }
        bias.data_mut().fill(0.0);
    }
    model.seed = seed;
    model
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
