use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::arch::HybridAutoencoder;
use super::forward::SampleGradient;
use super::loss::LossTerms;
use crate::error::{Error, Result};
use crate::grad::{AdamState, ParamGroup, ParamKind};

/// Adam state plus the two per-group learning rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimizer {
    pub quantum_lr: f64,
    pub classical_lr: f64,
    adam: AdamState,
}

impl Optimizer {
    pub fn new(model: &HybridAutoencoder, quantum_lr: f64, classical_lr: f64) -> Self {
        let groups = param_groups(model, quantum_lr, classical_lr);
        Self {
            quantum_lr,
            classical_lr,
            adam: AdamState::new(&groups),
        }
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }
}

/// `[quantum, classical]` groups holding copies of the model's parameters.
pub fn param_groups(model: &HybridAutoencoder, quantum_lr: f64, classical_lr: f64) -> Vec<ParamGroup> {
    vec![
        ParamGroup {
            kind: ParamKind::Quantum,
            values: model.quantum_params(),
            learning_rate: quantum_lr,
        },
        ParamGroup {
            kind: ParamKind::Classical,
            values: model.classical_params(),
            learning_rate: classical_lr,
        },
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    /// Mean loss over the batch, evaluated before the update.
    pub loss: LossTerms,
    pub circuit_evals: usize,
}

/// One optimizer step on the mean gradient of `batch`.
///
/// VAE noise is drawn from `rng` sequentially before the per-sample work,
/// which may run in parallel; gradients are reduced in batch order, so the
/// result does not depend on the worker count.
pub fn train_step<R: Rng + ?Sized>(
    model: &mut HybridAutoencoder,
    batch: &[&[f64]],
    optimizer: &mut Optimizer,
    rng: &mut R,
) -> Result<StepMetrics> {
    if batch.is_empty() {
        return Err(Error::Contract("empty batch".into()));
    }
    let noises: Vec<Option<Vec<f64>>> = batch
        .iter()
        .map(|_| {
            model
                .head()
                .map(|_| (0..model.latent_dim()).map(|_| rng.sample(StandardNormal)).collect())
        })
        .collect();

    let shared: &HybridAutoencoder = model;
    let grads: Vec<Result<SampleGradient>> = batch
        .par_iter()
        .zip(noises.par_iter())
        .map(|(x, noise)| shared.sample_gradient(x, noise.as_deref()))
        .collect();

    let count = model.count_parameters();
    let mut quantum = vec![0.0; count.quantum];
    let mut classical = vec![0.0; count.classical];
    let mut loss = LossTerms::default();
    let mut circuit_evals = 0;
    for (i, g) in grads.into_iter().enumerate() {
        let g = g.map_err(|e| match e {
            Error::DegenerateInput(m) => Error::DegenerateInput(format!("batch sample {i}: {m}")),
            Error::Contract(m) => Error::Contract(format!("batch sample {i}: {m}")),
            other => other,
        })?;
        if !g.loss.is_finite() {
            return Err(Error::Numeric(format!(
                "loss of batch sample {i} is {} (mse {}, kl {})",
                g.loss.total, g.loss.recon, g.loss.kl
            )));
        }
        for (a, v) in quantum.iter_mut().zip(&g.quantum) {
            *a += v;
        }
        for (a, v) in classical.iter_mut().zip(&g.classical) {
            *a += v;
        }
        loss.total += g.loss.total;
        loss.recon += g.loss.recon;
        loss.kl += g.loss.kl;
        circuit_evals += g.circuit_evals;
    }
    let n = batch.len() as f64;
    for v in quantum.iter_mut().chain(classical.iter_mut()) {
        *v /= n;
    }
    loss.total /= n;
    loss.recon /= n;
    loss.kl /= n;

    let mut groups = param_groups(model, optimizer.quantum_lr, optimizer.classical_lr);
    optimizer.adam.step(&mut groups, &[quantum, classical])?;
    model.set_params(&groups[0].values, &groups[1].values)?;
    Ok(StepMetrics { loss, circuit_evals })
}
