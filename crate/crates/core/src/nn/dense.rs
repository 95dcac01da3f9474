use crate::nn::LayerGrad;
use crate::{Error, Result, Tensor};

/// Fully connected layer, `y = W x + b` for each row of a `[batch, in]` input.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    /// `[out, in]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense { weight: Tensor::zeros(&[outputs, inputs]), bias: Tensor::zeros(&[outputs]) }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn check_input(&self, input: &Tensor) -> Result<usize> {
        match *input.shape() {
            [b, n] if n == self.inputs() => Ok(b),
            ref s => Err(Error::Shape(format!("dense expects [batch, {}], got {s:?}", self.inputs()))),
        }
    }
}

pub fn dense_forward(input: &Tensor, layer: &Dense) -> Result<Tensor> {
    let batch = layer.check_input(input)?;
    let (n_in, n_out) = (layer.inputs(), layer.outputs());
    let w = layer.weight.data();
    let mut out = Vec::with_capacity(batch * n_out);
    for x in input.data().chunks_exact(n_in) {
        for (row, b) in w.chunks_exact(n_in).zip(layer.bias.data()) {
            out.push(b + row.iter().zip(x).map(|(a, c)| a * c).sum::<f64>());
        }
    }
    Tensor::from_vec(&[batch, n_out], out)
}

pub fn dense_backward(input: &Tensor, layer: &Dense, upstream: &Tensor) -> Result<LayerGrad> {
    let batch = layer.check_input(input)?;
    let (n_in, n_out) = (layer.inputs(), layer.outputs());
    if upstream.shape() != [batch, n_out] {
        return Err(Error::Shape(format!(
            "dense upstream {:?}, expected [{batch}, {n_out}]",
            upstream.shape()
        )));
    }
    let mut grad_w = Tensor::zeros(layer.weight.shape());
    let mut grad_b = Tensor::zeros(layer.bias.shape());
    let mut grad_x = Tensor::zeros(input.shape());
    let w = layer.weight.data();
    for ((x, g), dx) in input
        .data()
        .chunks_exact(n_in)
        .zip(upstream.data().chunks_exact(n_out))
        .zip(grad_x.data_mut().chunks_exact_mut(n_in))
    {
        for (o, &go) in g.iter().enumerate() {
            if go == 0.0 {
                continue;
            }
            grad_b.data_mut()[o] += go;
            let gw = &mut grad_w.data_mut()[o * n_in..][..n_in];
            let row = &w[o * n_in..][..n_in];
            for i in 0..n_in {
                gw[i] += go * x[i];
                dx[i] += go * row[i];
            }
        }
    }
    Ok(LayerGrad { params: vec![grad_w, grad_b], input: grad_x })
}
