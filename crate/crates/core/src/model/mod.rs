//! Classical, baseline-quantum, and patched-quantum autoencoders.
//!
//! Every variant is a list of encoder stages, a list of decoder stages, and
//! optionally a Gaussian head. Circuit stages are differentiated with the
//! parameter-shift rule and dense stages by backpropagation; the two feed a
//! single Adam optimizer with separate quantum and classical learning rates.

mod arch;
mod forward;
mod loss;
mod train;

pub use arch::{
    build_model, latent_dim_for, CircuitStage, GaussianHead, HybridAutoencoder, ModelSpec, ParamCount, Stage, Variant,
};
pub use forward::{Encoded, SampleGradient};
pub use loss::{kl_divergence, mse, reparameterize, LatentSample, LossTerms};
pub use train::{param_groups, train_step, Optimizer, StepMetrics};
