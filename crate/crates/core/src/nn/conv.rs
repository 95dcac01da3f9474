//! 3x3 "same" convolution (cross-correlation, zero padding of one).

use crate::nn::LayerGrad;
use crate::{Error, Result, Tensor};

pub const KERNEL: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d {
    /// `[out_channels, in_channels, 3, 3]`
    pub weight: Tensor,
    /// `[out_channels]`
    pub bias: Tensor,
}

impl Conv2d {
    pub fn zeros(in_channels: usize, out_channels: usize) -> Self {
        Conv2d {
            weight: Tensor::zeros(&[out_channels, in_channels, KERNEL, KERNEL]),
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn parameter_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    fn check_input(&self, input: &Tensor) -> Result<(usize, usize, usize)> {
        let s = input.shape();
        if s.len() != 4 {
            return Err(Error::Shape(format!("conv2d expects [batch, ch, h, w], got {s:?}")));
        }
        if s[1] != self.in_channels() {
            return Err(Error::Shape(format!(
                "conv2d expects {} input channels, got {}",
                self.in_channels(),
                s[1]
            )));
        }
        Ok((s[0], s[2], s[3]))
    }
}

/// Visits every in-bounds (output row, input row, column range, column
/// offset) combination for a kernel tap at `(kh, kw)`.
#[inline]
fn for_tap(
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    mut f: impl FnMut(usize, usize, std::ops::Range<usize>, isize),
) {
    let di = kh as isize - 1;
    let dj = kw as isize - 1;
    let j0 = if dj < 0 { 1 } else { 0 };
    let j1 = if dj > 0 { w.saturating_sub(1) } else { w };
    if j0 >= j1 {
        return;
    }
    for i in 0..h {
        let src = i as isize + di;
        if src < 0 || src >= h as isize {
            continue;
        }
        f(i, src as usize, j0..j1, dj);
    }
}

pub fn conv2d_forward(input: &Tensor, layer: &Conv2d) -> Result<Tensor> {
    let (batch, h, w) = layer.check_input(input)?;
    let (cin, cout) = (layer.in_channels(), layer.out_channels());
    let plane = h * w;
    let mut out = Tensor::zeros(&[batch, cout, h, w]);
    let x = input.data();
    let wt = layer.weight.data();
    let bias = layer.bias.data();
    let y = out.data_mut();
    for b in 0..batch {
        for co in 0..cout {
            let dst = &mut y[(b * cout + co) * plane..][..plane];
            dst.fill(bias[co]);
            for ci in 0..cin {
                let src = &x[(b * cin + ci) * plane..][..plane];
                for kh in 0..KERNEL {
                    for kw in 0..KERNEL {
                        let k = wt[((co * cin + ci) * KERNEL + kh) * KERNEL + kw];
                        if k == 0.0 {
                            continue;
                        }
                        for_tap(h, w, kh, kw, |i, si, cols, dj| {
                            let o = &mut dst[i * w + cols.start..i * w + cols.end];
                            let s0 = (si * w) as isize + cols.start as isize + dj;
                            let s = &src[s0 as usize..s0 as usize + cols.len()];
                            for (a, b) in o.iter_mut().zip(s) {
                                *a += k * b;
                            }
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Returns gradients `[d weight, d bias]` and the input gradient.
pub fn conv2d_backward(input: &Tensor, layer: &Conv2d, upstream: &Tensor) -> Result<LayerGrad> {
    let (batch, h, w) = layer.check_input(input)?;
    let (cin, cout) = (layer.in_channels(), layer.out_channels());
    if upstream.shape() != [batch, cout, h, w] {
        return Err(Error::Shape(format!(
            "conv2d upstream gradient {:?} does not match output [{batch}, {cout}, {h}, {w}]",
            upstream.shape()
        )));
    }
    let plane = h * w;
    let mut grad_w = Tensor::zeros(layer.weight.shape());
    let mut grad_b = Tensor::zeros(layer.bias.shape());
    let mut grad_x = Tensor::zeros(input.shape());
    let x = input.data();
    let g = upstream.data();
    let wt = layer.weight.data();
    {
        let gw = grad_w.data_mut();
        let gb = grad_b.data_mut();
        let gx = grad_x.data_mut();
        for b in 0..batch {
            for co in 0..cout {
                let up = &g[(b * cout + co) * plane..][..plane];
                gb[co] += up.iter().sum::<f64>();
                for ci in 0..cin {
                    let src = &x[(b * cin + ci) * plane..][..plane];
                    let dsrc = &mut gx[(b * cin + ci) * plane..][..plane];
                    for kh in 0..KERNEL {
                        for kw in 0..KERNEL {
                            let widx = ((co * cin + ci) * KERNEL + kh) * KERNEL + kw;
                            let k = wt[widx];
                            let mut acc = 0.0;
                            for_tap(h, w, kh, kw, |i, si, cols, dj| {
                                let u = &up[i * w + cols.start..i * w + cols.end];
                                let s0 = ((si * w) as isize + cols.start as isize + dj) as usize;
                                let s = &src[s0..s0 + cols.len()];
                                acc += u.iter().zip(s).map(|(a, b)| a * b).sum::<f64>();
                                if k != 0.0 {
                                    let d = &mut dsrc[s0..s0 + cols.len()];
                                    for (a, b) in d.iter_mut().zip(u) {
                                        *a += k * b;
                                    }
                                }
                            });
                            gw[widx] += acc;
                        }
                    }
                }
            }
        }
    }
    Ok(LayerGrad { params: vec![grad_w, grad_b], input: grad_x })
}
