use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reparameterized draw `z = μ + exp(log_var / 2) ⊙ ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentSample {
    pub mu: Vec<f64>,
    pub log_var: Vec<f64>,
    pub noise: Vec<f64>,
    pub z: Vec<f64>,
}

pub fn reparameterize(mu: &[f64], log_var: &[f64], noise: &[f64]) -> Result<LatentSample> {
    if mu.len() != log_var.len() || mu.len() != noise.len() {
        return Err(Error::shape(format!(
            "reparameterize: mu {}, log_var {}, noise {}",
            mu.len(),
            log_var.len(),
            noise.len()
        )));
    }
    let z = mu
        .iter()
        .zip(log_var)
        .zip(noise)
        .map(|((m, lv), e)| m + (lv / 2.0).exp() * e)
        .collect();
    Ok(LatentSample {
        mu: mu.to_vec(),
        log_var: log_var.to_vec(),
        noise: noise.to_vec(),
        z,
    })
}

/// `KL(N(μ, diag(exp(log_var))) ‖ N(0, I))`.
pub fn kl_divergence(mu: &[f64], log_var: &[f64]) -> Result<f64> {
    if mu.len() != log_var.len() {
        return Err(Error::shape(format!(
            "kl: mu has {} entries, log_var {}",
            mu.len(),
            log_var.len()
        )));
    }
    let kl = 0.5
        * mu
            .iter()
            .zip(log_var)
            .map(|(m, lv)| m * m + lv.exp() - lv - 1.0)
            .sum::<f64>();
    if !kl.is_finite() {
        return Err(Error::Numeric(format!("kl divergence is {kl}")));
    }
    // Each summand is ≥ 0 analytically; clamp rounding noise near zero.
    Ok(kl.max(0.0))
}

pub fn mse(target: &[f64], prediction: &[f64]) -> Result<f64> {
    if target.len() != prediction.len() || target.is_empty() {
        return Err(Error::shape(format!(
            "mse: {} targets, {} predictions",
            target.len(),
            prediction.len()
        )));
    }
    Ok(target
        .iter()
        .zip(prediction)
        .map(|(t, p)| (p - t) * (p - t))
        .sum::<f64>()
        / target.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub total: f64,
    pub recon: f64,
    pub kl: f64,
}

impl LossTerms {
    pub fn new(recon: f64, kl: f64) -> Self {
        Self { total: recon + kl, recon, kl }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.recon.is_finite() && self.kl.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn reparameterize_cases() {
        let s = reparameterize(&[1.0, -2.0], &[0.3, 0.1], &[0.0, 0.0]).unwrap();
        assert_eq!(s.z, vec![1.0, -2.0]);
        let s = reparameterize(&[1.0, -2.0], &[0.0, 0.0], &[0.5, 0.25]).unwrap();
        assert_eq!(s.z, vec![1.5, -1.75]);
        assert!(matches!(reparameterize(&[1.0], &[0.0, 0.0], &[0.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn reparameterized_mean_converges() {
        let mu = [0.7, -1.3];
        let log_var = [0.4, -0.8];
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut sums = [0.0; 2];
        for _ in 0..n {
            let noise: Vec<f64> = (0..2).map(|_| StandardNormal.sample(&mut rng)).collect();
            let s = reparameterize(&mu, &log_var, &noise).unwrap();
            sums[0] += s.z[0];
            sums[1] += s.z[1];
        }
        for i in 0..2 {
            let sigma = f64::exp(log_var[i] / 2.0);
            let mean = sums[i] / n as f64;
            assert!((mean - mu[i]).abs() < 3.0 * sigma / (n as f64).sqrt(), "{mean} vs {}", mu[i]);
        }
    }

    #[test]
    fn kl_closed_form() {
        assert_eq!(kl_divergence(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!((kl_divergence(&[1.0], &[0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(kl_divergence(&[f64::INFINITY], &[0.0]), Err(Error::Numeric(_))));
    }

    #[test]
    fn kl_matches_monte_carlo() {
        // E_q[log q(z) − log p(z)] for q = N(1, 1), p = N(0, 1).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let e: f64 = StandardNormal.sample(&mut rng);
            let z = 1.0 + e;
            acc += -0.5 * (z - 1.0) * (z - 1.0) + 0.5 * z * z;
        }
        let mc = acc / n as f64;
        assert!((mc - kl_divergence(&[1.0], &[0.0]).unwrap()).abs() < 0.01, "{mc}");
    }

    proptest::proptest! {
        #[test]
        fn kl_nonnegative(mu in proptest::collection::vec(-5.0..5.0f64, 1..8), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lv: Vec<f64> = mu.iter().map(|_| rand::Rng::random_range(&mut rng, -4.0..4.0)).collect();
            proptest::prop_assert!(kl_divergence(&mu, &lv).unwrap() >= 0.0);
        }
    }
}
