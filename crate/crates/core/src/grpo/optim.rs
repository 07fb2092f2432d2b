//! AdamW for gradient ascent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::{PolicyParams, SparseGrad};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// With the second moment disabled the update is the bias-corrected
    /// momentum; with `beta1 = 0` as well it is plain SGD ascent.
    pub second_moment: bool,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            lr: 5e-2,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
            second_moment: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamWConfig,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(config: AdamWConfig, len: usize) -> Self {
        Self {
            config,
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

/// One ascent step on `params` along `grad` (the gradient of the objective
/// being maximized). Every coordinate's moments decay each step; untouched
/// coordinates see a zero gradient.
pub fn adamw_step(
    params: &mut PolicyParams,
    grad: &SparseGrad,
    state: &mut OptimizerState,
) -> Result<()> {
    if !grad.is_finite() {
        return Err(Error::Numeric("non-finite gradient".into()));
    }
    let len = params.values().len();
    if state.m.len() != len || state.v.len() != len {
        return Err(Error::InvalidDimension(format!(
            "optimizer state sized {} for {} parameters",
            state.m.len(),
            len
        )));
    }
    let c = state.config;
    state.step += 1;
    let bc1 = 1.0 - c.beta1.powi(state.step as i32);
    let bc2 = 1.0 - c.beta2.powi(state.step as i32);
    let g = grad.to_dense(len);

    for (i, theta) in params.values_mut().iter_mut().enumerate() {
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g[i];
        let m_hat = if bc1 > 0.0 {
            state.m[i] / bc1
        } else {
            state.m[i]
        };
        let direction = if c.second_moment {
            state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g[i] * g[i];
            m_hat / ((state.v[i] / bc2).sqrt() + c.eps)
        } else {
            m_hat
        };
        *theta -= c.lr * c.weight_decay * *theta;
        *theta += c.lr * direction;
    }
    if !params.is_finite() {
        return Err(Error::Numeric("parameters became non-finite".into()));
    }
    Ok(())
}
