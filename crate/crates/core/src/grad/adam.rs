use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::wrap_angle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    /// Rotation angles; kept in `[−π, π]` after every update.
    Quantum,
    Classical,
}

/// A flat block of parameters sharing one learning rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamGroup {
    pub kind: ParamKind,
    pub values: Vec<f64>,
    pub learning_rate: f64,
}

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Bias-corrected Adam moments for a list of parameter groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step_count: u64,
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
}

impl AdamState {
    pub fn new(groups: &[ParamGroup]) -> Self {
        let zeros = || groups.iter().map(|g| vec![0.0; g.values.len()]).collect();
        Self {
            beta1: BETA1,
            beta2: BETA2,
            epsilon: EPSILON,
            step_count: 0,
            first_moment: zeros(),
            second_moment: zeros(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[Vec<f64>] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[Vec<f64>] {
        &self.second_moment
    }

    /// One Adam update of every group. Inputs are fully validated before any
    /// parameter or moment is touched.
    pub fn step(&mut self, groups: &mut [ParamGroup], grads: &[Vec<f64>]) -> Result<()> {
        if groups.len() != grads.len() || groups.len() != self.first_moment.len() {
            return Err(Error::shape(format!(
                "{} groups, {} gradients, optimizer tracks {}",
                groups.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for (gi, ((group, grad), m)) in groups.iter().zip(grads).zip(&self.first_moment).enumerate() {
            if group.values.len() != grad.len() || group.values.len() != m.len() {
                return Err(Error::shape(format!(
                    "group {gi} has {} values, gradient {}, moments {}",
                    group.values.len(),
                    grad.len(),
                    m.len()
                )));
            }
            if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
                return Err(Error::Numeric(format!(
                    "gradient of group {gi} ({:?}) index {i} is {}",
                    group.kind, grad[i]
                )));
            }
        }

        self.step_count += 1;
        let t = self.step_count as i32;
        let correction1 = 1.0 - self.beta1.powi(t);
        let correction2 = 1.0 - self.beta2.powi(t);
        for ((group, grad), (m, v)) in groups
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            let lr = group.learning_rate;
            for (((x, &g), mi), vi) in group.values.iter_mut().zip(grad).zip(m.iter_mut()).zip(v.iter_mut()) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let m_hat = *mi / correction1;
                let v_hat = *vi / correction2;
                *x -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
            if group.kind == ParamKind::Quantum {
                for x in group.values.iter_mut() {
                    *x = wrap_angle(*x);
                }
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::step`].
pub fn adam_step(groups: &mut [ParamGroup], grads: &[Vec<f64>], state: &mut AdamState) -> Result<()> {
    state.step(groups, grads)
}
