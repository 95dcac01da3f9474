//! Central finite-difference checks of the analytic gradients.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::ModelGraph;
use crate::nn::{mse_loss, Conv2d, Dense, Layer};
use crate::{Error, Result, Tensor};

/// Kinds with a checker, in report order.
pub const CHECKED_KINDS: [&str; 6] = ["conv2d", "maxpool2d", "upsample2d", "relu", "dense", "mse"];

pub const STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub kind: String,
    pub instances: usize,
    /// Largest relative error seen over all instances.
    pub worst: f64,
}

/// `|a - b| / max(|a|, |b|)` over whole vectors; 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Central differences of `f` at `x`, one coordinate at a time.
pub fn numeric_gradient(mut f: impl FnMut(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe)?;
            probe[i] = x[i] - h;
            let down = f(&probe)?;
            probe[i] = x[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| rng.gen_range(-1.0..1.0))
}

/// Values at least 0.04 apart so no pooling block is near a tie.
fn distinct(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let n: usize = shape.iter().product();
    let mut ranks: Vec<usize> = (0..n).collect();
    ranks.shuffle(rng);
    Tensor::from_fn(shape, |i| ranks[i] as f64 * 0.05 + rng.gen_range(0.0..0.01))
}

/// Values at least 1e-3 away from the ReLU kink.
fn off_kink(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    Tensor::from_fn(shape, |_| {
        let v: f64 = rng.gen_range(1e-3..1.0);
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    })
}

/// Flattened gradient of `<r, layer(x)>` with respect to input then
/// parameters, analytic and numeric.
fn layer_gradients(layer: &Layer, x: &Tensor, r: &Tensor) -> Result<(Vec<f64>, Vec<f64>)> {
    let (_, cache) = layer.forward_cached(x.clone())?;
    let g = layer.backward(&cache, r)?;
    let mut analytic = g.input.into_vec();
    g.params.into_iter().for_each(|p| analytic.extend(p.into_vec()));

    let objective = |l: &Layer, input: &Tensor| -> Result<f64> { Ok(l.forward(input)?.dot(r)) };
    let mut numeric = numeric_gradient(
        |v| objective(layer, &Tensor::from_vec(x.shape(), v.to_vec())?),
        x.data(),
        STEP,
    )?;
    for p in 0..layer.params().len() {
        let base = layer.params()[p].clone();
        let grad = numeric_gradient(
            |v| {
                let mut l = layer.clone();
                *l.params_mut()[p] = Tensor::from_vec(base.shape(), v.to_vec())?;
                objective(&l, x)
            },
            base.data(),
            STEP,
        )?;
        numeric.extend(grad);
    }
    Ok((analytic, numeric))
}

fn instance(kind: &str, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>)> {
    let batch = rng.gen_range(1..=2);
    let factors = (rng.gen_range(1..=3), rng.gen_range(1..=3));
    let (ch, h, w) = (rng.gen_range(1..=3), rng.gen_range(2..=5), rng.gen_range(2..=5));
    match kind {
        "conv2d" => {
            let co = rng.gen_range(1..=3);
            let layer = Layer::Conv2d(Conv2d {
                weight: uniform(rng, &[co, ch, 3, 3]),
                bias: uniform(rng, &[co]),
            });
            let x = uniform(rng, &[batch, ch, h, w]);
            let r = uniform(rng, &[batch, co, h, w]);
            layer_gradients(&layer, &x, &r)
        }
        "maxpool2d" => {
            let x = distinct(rng, &[batch, ch, h * factors.0, w * factors.1]);
            let r = uniform(rng, &[batch, ch, h, w]);
            layer_gradients(&Layer::MaxPool2d(factors), &x, &r)
        }
        "upsample2d" => {
            let x = uniform(rng, &[batch, ch, h, w]);
            let r = uniform(rng, &[batch, ch, h * factors.0, w * factors.1]);
            layer_gradients(&Layer::Upsample2d(factors), &x, &r)
        }
        "relu" => {
            let x = off_kink(rng, &[batch, ch, h, w]);
            let r = uniform(rng, &[batch, ch, h, w]);
            layer_gradients(&Layer::Relu, &x, &r)
        }
        "dense" => {
            let (i, o) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
            let layer = Layer::Dense(Dense { weight: uniform(rng, &[o, i]), bias: uniform(rng, &[o]) });
            let x = uniform(rng, &[batch, i]);
            let r = uniform(rng, &[batch, o]);
            layer_gradients(&layer, &x, &r)
        }
        "mse" => {
            let pred = uniform(rng, &[batch, ch, h, w]);
            let target = uniform(rng, &[batch, ch, h, w]);
            let analytic = mse_loss(&pred, &target)?.1.into_vec();
            let numeric = numeric_gradient(
                |v| Ok(mse_loss(&Tensor::from_vec(pred.shape(), v.to_vec())?, &target)?.0),
                pred.data(),
                STEP,
            )?;
            Ok((analytic, numeric))
        }
        other => Err(Error::Config(format!("no gradient check for layer kind {other}"))),
    }
}

/// Checks `instances` random configurations of one layer kind.
pub fn check_kind(kind: &str, instances: usize, seed: u64) -> Result<GradCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let (a, n) = instance(kind, &mut rng)?;
        worst = worst.max(relative_error(&a, &n));
    }
    Ok(GradCheck { kind: kind.to_string(), instances, worst })
}

/// Checks the full parameter gradient of a model's summed squared-error
/// loss on one batch.
pub fn check_model(model: &ModelGraph, inputs: &Tensor, targets: &Tensor) -> Result<f64> {
    let examples = inputs.shape()[0] as f64;
    let (_, grads) = model.loss_and_grad(inputs, targets, examples)?;
    let analytic: Vec<f64> = grads.into_iter().flat_map(Tensor::into_vec).collect();
    let mut numeric = Vec::with_capacity(analytic.len());
    for p in 0..model.params().len() {
        let base = model.params()[p].clone();
        numeric.extend(numeric_gradient(
            |v| {
                let mut m = model.clone();
                *m.params_mut()[p] = Tensor::from_vec(base.shape(), v.to_vec())?;
                Ok(mse_loss(&m.forward(inputs)?, targets)?.0)
            },
            base.data(),
            STEP,
        )?);
    }
    Ok(relative_error(&analytic, &numeric))
}
