use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }

    fn derivative(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer `y = act(W x + b)` with `W` stored row-major `[out × in]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    activation: Activation,
}

/// Values retained by [`DenseLayer::forward`] for the matching backward call.
#[derive(Clone, Debug)]
pub struct DenseCache {
    input: Vec<f64>,
    pre_activation: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub input: Vec<f64>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize, weights: Vec<f64>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.len() != in_dim * out_dim {
            return Err(Error::shape(format!(
                "{} weights for a {out_dim}x{in_dim} layer",
                weights.len()
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::shape(format!(
                "bias of length {} for {out_dim} outputs",
                bias.len()
            )));
        }
        Ok(Self { in_dim, out_dim, weights, bias, activation })
    }

    /// Weights uniform in `±1/√in_dim`, zero bias.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let weights = (0..in_dim * out_dim).map(|_| rng.random_range(-bound..=bound)).collect();
        Self {
            in_dim,
            out_dim,
            weights,
            bias: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut weights = vec![0.0; dim * dim];
        for i in 0..dim {
            weights[i * dim + i] = 1.0;
        }
        Self {
            in_dim: dim,
            out_dim: dim,
            weights,
            bias: vec![0.0; dim],
            activation: Activation::Identity,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Weights followed by bias.
    pub fn flat(&self) -> Vec<f64> {
        self.weights.iter().chain(&self.bias).copied().collect()
    }

    pub(crate) fn set_flat(&mut self, flat: &[f64]) {
        let (w, b) = flat.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        if x.len() != self.in_dim {
            return Err(Error::shape(format!(
                "dense layer expects {} inputs, got {}",
                self.in_dim,
                x.len()
            )));
        }
        let pre: Vec<f64> = self
            .weights
            .chunks_exact(self.in_dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect();
        let y = pre.iter().map(|&p| self.activation.apply(p)).collect();
        Ok((y, DenseCache { input: x.to_vec(), pre_activation: pre }))
    }

    pub fn backward(&self, cache: &DenseCache, grad_out: &[f64]) -> Result<DenseGrad> {
        if cache.input.len() != self.in_dim || cache.pre_activation.len() != self.out_dim {
            return Err(Error::Contract(
                "dense cache was produced by a layer of a different shape".into(),
            ));
        }
        if grad_out.len() != self.out_dim {
            return Err(Error::shape(format!(
                "dense layer has {} outputs, gradient has {}",
                self.out_dim,
                grad_out.len()
            )));
        }
        let delta: Vec<f64> = grad_out
            .iter()
            .zip(&cache.pre_activation)
            .map(|(g, &p)| g * self.activation.derivative(p))
            .collect();
        let mut weights = vec![0.0; self.weights.len()];
        let mut input = vec![0.0; self.in_dim];
        for (o, &d) in delta.iter().enumerate() {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut weights[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] = d * cache.input[i];
                input[i] += d * row[i];
            }
        }
        Ok(DenseGrad { weights, bias: delta, input })
    }
}
