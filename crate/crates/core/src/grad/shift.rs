//! Parameter-shift differentiation of patched circuits.
//!
//! Every trainable gate here is `exp(−iαP/2)` for a Pauli `P` (the Rz/Ry/Rz
//! factors of Rot and the Ry of angle embedding), so
//! `∂f/∂α = [f(α + π/2) − f(α − π/2)] / 2` holds exactly for any measured
//! observable, including basis-state projectors.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::sim::{embed, entangling_layer, measure, AnsatzConfig, AnsatzParams, EmbedMode, Measurement, QuantumState};

#[derive(Clone, Debug, PartialEq)]
pub struct ShiftGradient {
    /// Gradient for every ansatz angle in `AnsatzParams::flat` order.
    pub angles: Vec<f64>,
    /// Gradient with respect to the circuit input, present only when requested
    /// (angle embedding only).
    pub input: Option<Vec<f64>>,
    /// Number of shifted circuit executions performed.
    pub evaluations: usize,
}

fn weighted(grad_out: &[f64], plus: &[f64], minus: &[f64]) -> f64 {
    grad_out
        .iter()
        .zip(plus.iter().zip(minus))
        .map(|(g, (p, m))| g * (p - m))
        .sum::<f64>()
        / 2.0
}

/// Vector-Jacobian product of a patched circuit by the parameter-shift rule.
///
/// `grad_out` is `∂L/∂output`; the result holds `∂L/∂angle` for every ansatz
/// angle and, if `want_input` is set, `∂L/∂input`.
pub fn circuit_grad_shift(
    config: &AnsatzConfig,
    params: &AnsatzParams,
    input: &[f64],
    embed_mode: EmbedMode,
    measurement: Measurement,
    grad_out: &[f64],
    want_input: bool,
) -> Result<ShiftGradient> {
    if want_input && embed_mode == EmbedMode::Amplitude {
        return Err(Error::Unsupported(
            "input gradients through amplitude embedding".into(),
        ));
    }
    config.validate(embed_mode)?;
    if !params.matches(config) {
        return Err(Error::shape("ansatz parameters do not match the circuit shape"));
    }
    if input.len() != config.feature_dim {
        return Err(Error::shape(format!(
            "circuit expects {} inputs, got {}",
            config.feature_dim,
            input.len()
        )));
    }
    let out_len = config.patch_output_len(measurement);
    if grad_out.len() != config.num_patches * out_len {
        return Err(Error::shape(format!(
            "output gradient has length {}, circuit produces {}",
            grad_out.len(),
            config.num_patches * out_len
        )));
    }

    let q = config.qubits_per_patch;
    let in_len = config.patch_input_len();
    let mut angles = Vec::with_capacity(config.angle_count());
    let mut input_grad = want_input.then(|| Vec::with_capacity(input.len()));
    let mut evaluations = 0;

    for patch in 0..config.num_patches {
        let sub = &input[patch * in_len..(patch + 1) * in_len];
        let g = &grad_out[patch * out_len..(patch + 1) * out_len];
        let patch_angles = params.patch(patch);

        // entering[l] is the state just before layer l.
        let mut entering: Vec<QuantumState> = Vec::with_capacity(config.num_layers);
        let mut state = embed(sub, embed_mode)?;
        for layer in patch_angles.chunks_exact(q) {
            entering.push(state.clone());
            entangling_layer(&mut state, layer)?;
        }

        let run_shifted = |layer: usize, qubit: usize, component: usize, delta: f64| -> Result<Vec<f64>> {
            let mut s = entering[layer].clone();
            let mut first = patch_angles[layer * q..(layer + 1) * q].to_vec();
            first[qubit][component] += delta;
            entangling_layer(&mut s, &first)?;
            for rest in patch_angles[(layer + 1) * q..].chunks_exact(q) {
                entangling_layer(&mut s, rest)?;
            }
            Ok(measure(&s, measurement))
        };

        for layer in 0..config.num_layers {
            for qubit in 0..q {
                for component in 0..3 {
                    let plus = run_shifted(layer, qubit, component, FRAC_PI_2)?;
                    let minus = run_shifted(layer, qubit, component, -FRAC_PI_2)?;
                    angles.push(weighted(g, &plus, &minus));
                    evaluations += 2;
                }
            }
        }

        if let Some(acc) = input_grad.as_mut() {
            for i in 0..in_len {
                let eval = |delta: f64| -> Result<Vec<f64>> {
                    let mut shifted = sub.to_vec();
                    shifted[i] += delta;
                    let mut s = embed(&shifted, embed_mode)?;
                    for layer in patch_angles.chunks_exact(q) {
                        entangling_layer(&mut s, layer)?;
                    }
                    Ok(measure(&s, measurement))
                };
                let plus = eval(FRAC_PI_2)?;
                let minus = eval(-FRAC_PI_2)?;
                acc.push(weighted(g, &plus, &minus));
                evaluations += 2;
            }
        }
    }

    Ok(ShiftGradient { angles, input: input_grad, evaluations })
}
