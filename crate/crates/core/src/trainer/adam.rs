//! Adam with bias correction.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(len: usize) -> AdamState {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
        }
    }
}

pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState, lr: f64) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Shape(format!(
            "adam: {} params, {} grads, {} moments",
            params.len(),
            grads.len(),
            state.m.len()
        )));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = BETA1 * state.m[i] + (1.0 - BETA1) * g;
        let v = BETA2 * state.v[i] + (1.0 - BETA2) * g * g;
        state.m[i] = m;
        state.v[i] = v;
        if m != 0.0 {
            params[i] -= lr * (m / c1) / ((v / c2).sqrt() + EPSILON);
        }
    }
    Ok(())
}
