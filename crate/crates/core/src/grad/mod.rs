//! Gradients for hybrid models: parameter-shift rule for circuits, exact
//! backpropagation for dense layers, and Adam over parameter groups with
//! per-group learning rates.

mod adam;
mod dense;
mod shift;

pub use adam::{adam_step, AdamState, ParamGroup, ParamKind, BETA1, BETA2, EPSILON};
pub use dense::{Activation, DenseCache, DenseGrad, DenseLayer};
pub use shift::{circuit_grad_shift, ShiftGradient};
