//! Minimal reverse-mode layer engine.
//!
//! Every layer exposes a forward pass that returns whatever it needs to
//! remember for the backward pass (its input, or the pooling argmax), and a
//! backward pass mapping an upstream gradient to parameter and input
//! gradients. Networks in [`crate::models`] chain these in order.

mod conv;
mod dense;
pub mod gradcheck;
mod pool;

pub use conv::{conv2d_backward, conv2d_forward, Conv2d, KERNEL};
pub use dense::{dense_backward, dense_forward, Dense};
pub use pool::{
    maxpool2d_backward, maxpool2d_forward, upsample2d_backward, upsample2d_forward, ArgMax, Factors,
};

use crate::{Error, Result, Tensor};

/// Parameter gradients (in the layer's parameter order) and the gradient
/// with respect to the layer input.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrad {
    pub params: Vec<Tensor>,
    pub input: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    MaxPool2d(Factors),
    Upsample2d(Factors),
    Relu,
    Dense(Dense),
}

/// What a layer keeps from its forward pass.
#[derive(Clone, Debug)]
pub enum Cache {
    Input(Tensor),
    ArgMax(ArgMax),
    None,
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv2d(_) => "conv2d",
            Layer::MaxPool2d(_) => "maxpool2d",
            Layer::Upsample2d(_) => "upsample2d",
            Layer::Relu => "relu",
            Layer::Dense(_) => "dense",
        }
    }

    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv2d(c) => vec![&c.weight, &c.bias],
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv2d(c) => vec![&mut c.weight, &mut c.bias],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => Vec::new(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.params().iter().map(|t| t.len()).sum()
    }

    /// Output shape for a per-example input shape (no batch axis).
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = || Error::Shape(format!("{} cannot accept input shape {input:?}", self.kind()));
        match (self, input) {
            (Layer::Conv2d(c), &[ch, h, w]) if ch == c.in_channels() => Ok(vec![c.out_channels(), h, w]),
            (Layer::MaxPool2d((t, f)), &[ch, h, w]) if *t > 0 && *f > 0 && h % t == 0 && w % f == 0 => {
                Ok(vec![ch, h / t, w / f])
            }
            (Layer::Upsample2d((t, f)), &[ch, h, w]) if *t > 0 && *f > 0 => Ok(vec![ch, h * t, w * f]),
            (Layer::Relu, s) => Ok(s.to_vec()),
            (Layer::Dense(d), &[n]) if n == d.inputs() => Ok(vec![d.outputs()]),
            _ => Err(bad()),
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(input.clone())?.0)
    }

    /// Forward pass that keeps what [`Layer::backward`] needs.
    pub fn forward_cached(&self, input: Tensor) -> Result<(Tensor, Cache)> {
        match self {
            Layer::Conv2d(c) => {
                let out = conv2d_forward(&input, c)?;
                Ok((out, Cache::Input(input)))
            }
            Layer::Dense(d) => {
                let out = dense_forward(&input, d)?;
                Ok((out, Cache::Input(input)))
            }
            Layer::MaxPool2d(f) => {
                let (out, arg) = maxpool2d_forward(&input, *f)?;
                Ok((out, Cache::ArgMax(arg)))
            }
            Layer::Upsample2d(f) => Ok((upsample2d_forward(&input, *f)?, Cache::None)),
            Layer::Relu => {
                let out = relu_forward(&input);
                Ok((out, Cache::Input(input)))
            }
        }
    }

    pub fn backward(&self, cache: &Cache, upstream: &Tensor) -> Result<LayerGrad> {
        let missing = || Error::Shape(format!("{} backward called with wrong cache", self.kind()));
        match (self, cache) {
            (Layer::Conv2d(c), Cache::Input(x)) => conv2d_backward(x, c, upstream),
            (Layer::Dense(d), Cache::Input(x)) => dense_backward(x, d, upstream),
            (Layer::MaxPool2d(_), Cache::ArgMax(a)) => {
                Ok(LayerGrad { params: Vec::new(), input: maxpool2d_backward(a, upstream)? })
            }
            (Layer::Upsample2d(f), _) => {
                Ok(LayerGrad { params: Vec::new(), input: upsample2d_backward(upstream, *f)? })
            }
            (Layer::Relu, Cache::Input(x)) => {
                Ok(LayerGrad { params: Vec::new(), input: relu_backward(x, upstream)? })
            }
            _ => Err(missing()),
        }
    }
}

pub fn relu_forward(input: &Tensor) -> Tensor {
    input.map(|v| v.max(0.0))
}

/// Subgradient 0 at exactly 0.
pub fn relu_backward(input: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    input.check_same_shape(upstream)?;
    let data = input.data().iter().zip(upstream.data()).map(|(&x, &g)| if x > 0.0 { g } else { 0.0 }).collect();
    Tensor::from_vec(input.shape(), data)
}

/// Per-example sum of squared errors, averaged over the leading (batch)
/// axis. Returns the loss and its gradient with respect to `prediction`.
pub fn mse_loss(prediction: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    prediction.check_same_shape(target)?;
    let batch = prediction.shape().first().copied().unwrap_or(1).max(1) as f64;
    mse_loss_scaled(prediction, target, batch)
}

/// Like [`mse_loss`] but dividing by an explicit example count, so that a
/// mini-batch can be split into chunks whose losses and gradients add up.
pub fn mse_loss_scaled(prediction: &Tensor, target: &Tensor, examples: f64) -> Result<(f64, Tensor)> {
    prediction.check_same_shape(target)?;
    let mut loss = 0.0;
    let grad = prediction
        .data()
        .iter()
        .zip(target.data())
        .map(|(z, s)| {
            let d = z - s;
            loss += d * d;
            2.0 * d / examples
        })
        .collect();
    Ok((loss / examples, Tensor::from_vec(prediction.shape(), grad)?))
}
