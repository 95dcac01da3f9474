//! Nesterov-accelerated adaptive moment estimation with the warming
//! momentum schedule `mu_t = beta1 * (1 - 0.5 * 0.96^(t * schedule_decay))`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NadamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub schedule_decay: f64,
}

impl Default for NadamConfig {
    fn default() -> Self {
        NadamConfig { beta1: 0.9, beta2: 0.999, epsilon: 1e-8, schedule_decay: 0.004 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub config: NadamConfig,
    pub learning_rate: f64,
    pub step: u64,
    /// Running product of the momentum schedule.
    pub m_schedule: f64,
    pub first_moment: Vec<Tensor>,
    pub second_moment: Vec<Tensor>,
}

impl OptimizerState {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Tensor>, learning_rate: f64, config: NadamConfig) -> Self {
        let zeros: Vec<Tensor> = params.into_iter().map(|p| Tensor::zeros(p.shape())).collect();
        OptimizerState {
            config,
            learning_rate,
            step: 0,
            m_schedule: 1.0,
            second_moment: zeros.clone(),
            first_moment: zeros,
        }
    }

    fn momentum(&self, t: u64) -> f64 {
        let c = &self.config;
        c.beta1 * (1.0 - 0.5 * 0.96f64.powf(t as f64 * c.schedule_decay))
    }
}

/// One Nadam update. Leaves parameters and state untouched if any gradient
/// is non-finite.
pub fn nadam_step(params: &mut [&mut Tensor], grads: &[Tensor], state: &mut OptimizerState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::Shape(format!(
            "{} parameters, {} gradients, {} moment slots",
            params.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.first_moment[i].shape() {
            return Err(Error::Shape(format!("parameter {i}: {:?} vs gradient {:?}", p.shape(), g.shape())));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite(format!("gradient of parameter {i}")));
        }
    }

    let t = state.step + 1;
    let NadamConfig { beta1, beta2, epsilon, .. } = state.config;
    let mu_t = state.momentum(t);
    let mu_next = state.momentum(t + 1);
    let schedule_new = state.m_schedule * mu_t;
    let schedule_next = schedule_new * mu_next;
    let v_correction = 1.0 - beta2.powf(t as f64);
    let lr = state.learning_rate;

    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.first_moment.iter_mut().zip(state.second_moment.iter_mut()))
    {
        for (((w, &g), m), v) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            let g_hat = g / (1.0 - schedule_new);
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / (1.0 - schedule_next);
            let v_hat = *v / v_correction;
            let m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
            *w -= lr * m_bar / (v_hat.sqrt() + epsilon);
        }
    }
    state.m_schedule = schedule_new;
    state.step = t;
    Ok(())
}
