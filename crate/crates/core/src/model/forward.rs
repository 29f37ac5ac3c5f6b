//! Inference, sampling, and exact per-sample gradients.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::arch::{HybridAutoencoder, Stage};
use super::loss::{kl_divergence, mse, reparameterize, LatentSample, LossTerms};
use crate::error::{Error, Result};
use crate::grad::{circuit_grad_shift, DenseCache};

/// Encoder result: a point latent for AEs, Gaussian parameters for VAEs.
#[derive(Clone, Debug, PartialEq)]
pub enum Encoded {
    Latent(Vec<f64>),
    Gaussian { mu: Vec<f64>, log_var: Vec<f64> },
}

impl Encoded {
    /// The deterministic latent: the point itself, or `μ`.
    pub fn mean(&self) -> &[f64] {
        match self {
            Encoded::Latent(z) => z,
            Encoded::Gaussian { mu, .. } => mu,
        }
    }
}

/// Gradient of the loss for one input, split into the two parameter groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGradient {
    pub loss: LossTerms,
    pub quantum: Vec<f64>,
    pub classical: Vec<f64>,
    /// Circuit executions used (forward patches plus shifted evaluations).
    pub circuit_evals: usize,
}

enum StageCache {
    Dense(DenseCache),
    Circuit(Vec<f64>),
}

struct Pass {
    outputs: Vec<f64>,
    caches: Vec<StageCache>,
    circuit_evals: usize,
}

fn run_stages(stages: &[Stage], input: &[f64], keep: bool) -> Result<Pass> {
    let mut x = input.to_vec();
    let mut caches = Vec::with_capacity(if keep { stages.len() } else { 0 });
    let mut circuit_evals = 0;
    for stage in stages {
        let y = match stage {
            Stage::Dense(d) => {
                let (y, cache) = d.forward(&x)?;
                if keep {
                    caches.push(StageCache::Dense(cache));
                }
                y
            }
            Stage::Circuit(c) => {
                let y = c.forward(&x)?;
                circuit_evals += c.config.num_patches;
                if keep {
                    caches.push(StageCache::Circuit(x.clone()));
                }
                y
            }
        };
        x = y;
    }
    Ok(Pass { outputs: x, caches, circuit_evals })
}

/// Per-stage parameter gradients, in stage order.
struct StageGrads {
    per_stage: Vec<Vec<f64>>,
    input: Vec<f64>,
    circuit_evals: usize,
}

fn backprop_stages(stages: &[Stage], caches: &[StageCache], grad_out: Vec<f64>, need_input: bool) -> Result<StageGrads> {
    let mut per_stage = vec![Vec::new(); stages.len()];
    let mut g = grad_out;
    let mut circuit_evals = 0;
    for (i, (stage, cache)) in stages.iter().zip(caches).enumerate().rev() {
        let want_input = i > 0 || need_input;
        match (stage, cache) {
            (Stage::Dense(d), StageCache::Dense(c)) => {
                let grad = d.backward(c, &g)?;
                per_stage[i] = grad.weights.into_iter().chain(grad.bias).collect();
                g = grad.input;
            }
            (Stage::Circuit(c), StageCache::Circuit(input)) => {
                let grad = circuit_grad_shift(&c.config, &c.params, input, c.embed, c.measure, &g, want_input)?;
                circuit_evals += grad.evaluations;
                per_stage[i] = grad.angles;
                g = grad.input.unwrap_or_default();
            }
            _ => return Err(Error::Contract("stage cache does not match stage kind".into())),
        }
    }
    Ok(StageGrads { per_stage, input: g, circuit_evals })
}

impl HybridAutoencoder {
    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.feature_dim {
            return Err(Error::shape(format!(
                "model expects {} features, got {}",
                self.spec.feature_dim,
                x.len()
            )));
        }
        if self.spec.variant.requires_l1_input() {
            let sum: f64 = x.iter().sum();
            if x.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-6 {
                return Err(Error::Contract(format!(
                    "{} needs nonnegative L1-normalized input (sum is {sum}); normalize the dataset first",
                    self.spec.variant
                )));
            }
        }
        Ok(())
    }

    /// Encoder output before any Gaussian head.
    pub fn encoder_output(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(run_stages(&self.encoder, x, false)?.outputs)
    }

    pub fn encode(&self, x: &[f64]) -> Result<Encoded> {
        let h = self.encoder_output(x)?;
        Ok(match &self.head {
            None => Encoded::Latent(h),
            Some(head) => Encoded::Gaussian {
                mu: head.mu.forward(&h)?.0,
                log_var: head.log_var.forward(&h)?.0,
            },
        })
    }

    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.latent_dim {
            return Err(Error::shape(format!(
                "decoder expects a {}-dimensional latent, got {}",
                self.latent_dim,
                z.len()
            )));
        }
        Ok(run_stages(&self.decoder, z, false)?.outputs)
    }

    /// Deterministic reconstruction through the latent mean.
    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decode(self.encode(x)?.mean())
    }

    /// Reconstruction MSE plus, for VAEs, the KL term of the encoder's Gaussian.
    pub fn loss(&self, x: &[f64], reconstruction: &[f64], latent: Option<&LatentSample>) -> Result<LossTerms> {
        if x.len() != self.spec.feature_dim || reconstruction.len() != x.len() {
            return Err(Error::shape(format!(
                "loss over {} features with a reconstruction of {}",
                x.len(),
                reconstruction.len()
            )));
        }
        let recon = mse(x, reconstruction)?;
        let kl = match (self.spec.variant.is_vae(), latent) {
            (true, Some(s)) => kl_divergence(&s.mu, &s.log_var)?,
            (true, None) => return Err(Error::Contract("VAE loss needs the latent sample".into())),
            (false, _) => 0.0,
        };
        Ok(LossTerms::new(recon, kl))
    }

    /// Noise-free loss: VAEs decode `μ` and report the analytic KL.
    pub fn evaluate(&self, x: &[f64]) -> Result<LossTerms> {
        let encoded = self.encode(x)?;
        let recon = self.decode(encoded.mean())?;
        match encoded {
            Encoded::Latent(_) => self.loss(x, &recon, None),
            Encoded::Gaussian { mu, log_var } => {
                let noise = vec![0.0; mu.len()];
                let s = reparameterize(&mu, &log_var, &noise)?;
                self.loss(x, &recon, Some(&s))
            }
        }
    }

    /// Draws `count` latents from `N(0, I)` and decodes each.
    pub fn sample_latent<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if self.head.is_none() {
            return Err(Error::Unsupported(format!(
                "{} is not generative; sampling needs a VAE variant",
                self.spec.variant
            )));
        }
        (0..count)
            .map(|_| {
                let z: Vec<f64> = (0..self.latent_dim).map(|_| rng.sample(StandardNormal)).collect();
                self.decode(&z)
            })
            .collect()
    }

    /// Loss and exact gradient for one input. VAEs need `noise` (ε) of latent length.
    pub fn sample_gradient(&self, x: &[f64], noise: Option<&[f64]>) -> Result<SampleGradient> {
        self.check_input(x)?;
        let enc = run_stages(&self.encoder, x, true)?;
        let mut circuit_evals = enc.circuit_evals;

        let (z, head_state) = match &self.head {
            None => (enc.outputs.clone(), None),
            Some(head) => {
                let noise = noise.ok_or_else(|| Error::Contract("VAE gradient needs latent noise".into()))?;
                let (mu, mu_cache) = head.mu.forward(&enc.outputs)?;
                let (log_var, lv_cache) = head.log_var.forward(&enc.outputs)?;
                let sample = reparameterize(&mu, &log_var, noise)?;
                (sample.z.clone(), Some((sample, mu_cache, lv_cache)))
            }
        };

        let dec = run_stages(&self.decoder, &z, true)?;
        circuit_evals += dec.circuit_evals;
        let loss = self.loss(x, &dec.outputs, head_state.as_ref().map(|s| &s.0))?;

        let scale = 2.0 / x.len() as f64;
        let grad_recon: Vec<f64> = dec.outputs.iter().zip(x).map(|(r, t)| scale * (r - t)).collect();
        let dec_grads = backprop_stages(&self.decoder, &dec.caches, grad_recon, true)?;
        circuit_evals += dec_grads.circuit_evals;
        let grad_z = dec_grads.input;
        if grad_z.len() != self.latent_dim {
            return Err(Error::Contract("decoder did not yield a latent gradient".into()));
        }

        let mut head_grads = Vec::new();
        let grad_h = match (&self.head, head_state) {
            (Some(head), Some((sample, mu_cache, lv_cache))) => {
                let grad_mu: Vec<f64> = grad_z.iter().zip(&sample.mu).map(|(g, m)| g + m).collect();
                let grad_lv: Vec<f64> = grad_z
                    .iter()
                    .zip(&sample.log_var)
                    .zip(&sample.noise)
                    .map(|((g, lv), e)| g * e * 0.5 * (lv / 2.0).exp() + 0.5 * (lv.exp() - 1.0))
                    .collect();
                let gm = head.mu.backward(&mu_cache, &grad_mu)?;
                let gl = head.log_var.backward(&lv_cache, &grad_lv)?;
                let grad_h = gm.input.iter().zip(&gl.input).map(|(a, b)| a + b).collect();
                head_grads.extend(gm.weights.into_iter().chain(gm.bias));
                head_grads.extend(gl.weights.into_iter().chain(gl.bias));
                grad_h
            }
            _ => grad_z,
        };

        let enc_grads = backprop_stages(&self.encoder, &enc.caches, grad_h, false)?;
        circuit_evals += enc_grads.circuit_evals;

        let mut quantum = Vec::new();
        let mut classical = Vec::new();
        let all = self.encoder.iter().zip(enc_grads.per_stage).chain(self.decoder.iter().zip(dec_grads.per_stage));
        for (stage, g) in all {
            match stage {
                Stage::Circuit(_) => quantum.extend(g),
                Stage::Dense(_) => classical.extend(g),
            }
        }
        classical.extend(head_grads);
        Ok(SampleGradient { loss, quantum, classical, circuit_evals })
    }
}
