//! Block max-pooling and nearest-neighbour up-sampling over the two
//! trailing (time, frequency) axes of `[batch, channels, h, w]` tensors.

use crate::{Error, Result, Tensor};

/// Pooling / up-sampling factors along (time, frequency).
pub type Factors = (usize, usize);

fn spatial(t: &Tensor, op: &str) -> Result<(usize, usize, usize)> {
    match *t.shape() {
        [b, c, h, w] => Ok((b * c, h, w)),
        ref s => Err(Error::Shape(format!("{op} expects [batch, ch, h, w], got {s:?}"))),
    }
}

fn check_factors((t, f): Factors) -> Result<()> {
    if t == 0 || f == 0 {
        return Err(Error::Config(format!("factors must be positive, got ({t}, {f})")));
    }
    Ok(())
}

/// Flat input index of the maximum of each pooled block. Ties go to the
/// first element in row-major block order.
#[derive(Clone, Debug, PartialEq)]
pub struct ArgMax {
    pub input_shape: Vec<usize>,
    pub indices: Vec<usize>,
}

pub fn maxpool2d_forward(input: &Tensor, factors: Factors) -> Result<(Tensor, ArgMax)> {
    check_factors(factors)?;
    let (planes, h, w) = spatial(input, "maxpool2d")?;
    let (ft, ff) = factors;
    if h % ft != 0 || w % ff != 0 {
        return Err(Error::Shape(format!("({h}, {w}) is not divisible by pool factors ({ft}, {ff})")));
    }
    let (oh, ow) = (h / ft, w / ff);
    let mut shape = input.shape().to_vec();
    shape[2] = oh;
    shape[3] = ow;
    let x = input.data();
    let mut values = Vec::with_capacity(planes * oh * ow);
    let mut indices = Vec::with_capacity(planes * oh * ow);
    for p in 0..planes {
        let base = p * h * w;
        for i in 0..oh {
            for j in 0..ow {
                let mut best = base + i * ft * w + j * ff;
                for u in 0..ft {
                    let row = base + (i * ft + u) * w + j * ff;
                    for idx in row..row + ff {
                        if x[idx] > x[best] {
                            best = idx;
                        }
                    }
                }
                values.push(x[best]);
                indices.push(best);
            }
        }
    }
    Ok((Tensor::from_vec(&shape, values)?, ArgMax { input_shape: input.shape().to_vec(), indices }))
}

pub fn maxpool2d_backward(argmax: &ArgMax, upstream: &Tensor) -> Result<Tensor> {
    if upstream.len() != argmax.indices.len() {
        return Err(Error::Shape(format!(
            "upstream has {} values, pooled output had {}",
            upstream.len(),
            argmax.indices.len()
        )));
    }
    let mut grad = Tensor::zeros(&argmax.input_shape);
    let n = grad.len();
    let g = grad.data_mut();
    for (&idx, &u) in argmax.indices.iter().zip(upstream.data()) {
        if idx >= n {
            return Err(Error::Shape(format!("argmax index {idx} out of range {n}")));
        }
        g[idx] += u;
    }
    Ok(grad)
}

pub fn upsample2d_forward(input: &Tensor, factors: Factors) -> Result<Tensor> {
    check_factors(factors)?;
    let (planes, h, w) = spatial(input, "upsample2d")?;
    let (ft, ff) = factors;
    let (oh, ow) = (h * ft, w * ff);
    let mut shape = input.shape().to_vec();
    shape[2] = oh;
    shape[3] = ow;
    let x = input.data();
    let mut out = Vec::with_capacity(planes * oh * ow);
    let mut row = Vec::with_capacity(ow);
    for p in 0..planes {
        for i in 0..h {
            row.clear();
            for &v in &x[(p * h + i) * w..][..w] {
                row.extend(std::iter::repeat_n(v, ff));
            }
            for _ in 0..ft {
                out.extend_from_slice(&row);
            }
        }
    }
    Tensor::from_vec(&shape, out)
}

pub fn upsample2d_backward(upstream: &Tensor, factors: Factors) -> Result<Tensor> {
    check_factors(factors)?;
    let (planes, oh, ow) = spatial(upstream, "upsample2d")?;
    let (ft, ff) = factors;
    if oh % ft != 0 || ow % ff != 0 {
        return Err(Error::Shape(format!(
            "({oh}, {ow}) is not divisible by up-sampling factors ({ft}, {ff})"
        )));
    }
    let (h, w) = (oh / ft, ow / ff);
    let mut shape = upstream.shape().to_vec();
    shape[2] = h;
    shape[3] = w;
    let mut grad = Tensor::zeros(&shape);
    let g = upstream.data();
    let out = grad.data_mut();
    for p in 0..planes {
        for r in 0..oh {
            let dst = &mut out[(p * h + r / ft) * w..][..w];
            let src = &g[(p * oh + r) * ow..][..ow];
            for (d, block) in dst.iter_mut().zip(src.chunks_exact(ff)) {
                *d += block.iter().sum::<f64>();
            }
        }
    }
    Ok(grad)
}
