//! Layered variational circuits and their patched execution.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{log2_exact, QuantumState};
use crate::error::{Error, Result};

/// How classical inputs are loaded into a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbedMode {
    /// `2^q` features per patch become normalized amplitudes.
    Amplitude,
    /// `q` features per patch become `Ry` angles, one qubit each.
    Angle,
}

/// What a circuit reports after the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measurement {
    /// `⟨Z⟩` of every qubit, `q` values per patch.
    ExpectationZ,
    /// Probability of every basis state, `2^q` values per patch.
    Probabilities,
}

/// Shape of a (possibly patched) layered circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub qubits_per_patch: usize,
    pub num_layers: usize,
    pub num_patches: usize,
    /// Flattened width of the input this circuit consumes.
    pub feature_dim: usize,
}

impl AnsatzConfig {
    /// Config for a circuit that consumes `feature_dim` inputs split into
    /// `num_patches` sub-vectors under the given embedding.
    pub fn for_input(feature_dim: usize, num_patches: usize, num_layers: usize, embed: EmbedMode) -> Result<Self> {
        if num_patches == 0 || feature_dim % num_patches != 0 {
            return Err(Error::shape(format!(
                "feature dimension {feature_dim} is not divisible into {num_patches} patches"
            )));
        }
        let per_patch = feature_dim / num_patches;
        let qubits_per_patch = match embed {
            EmbedMode::Amplitude => log2_exact(per_patch).ok_or_else(|| {
                Error::shape(format!(
                    "amplitude patches need a power-of-two width, got {per_patch}"
                ))
            })?,
            EmbedMode::Angle => per_patch,
        };
        let config = Self {
            qubits_per_patch,
            num_layers,
            num_patches,
            feature_dim,
        };
        config.validate(embed)?;
        Ok(config)
    }

    pub fn validate(&self, embed: EmbedMode) -> Result<()> {
        if self.qubits_per_patch == 0 || self.num_layers == 0 || self.num_patches == 0 {
            return Err(Error::shape(format!("degenerate circuit shape {self:?}")));
        }
        if self.feature_dim % self.num_patches != 0 {
            return Err(Error::shape(format!(
                "feature dimension {} is not divisible into {} patches",
                self.feature_dim, self.num_patches
            )));
        }
        let per_patch = self.feature_dim / self.num_patches;
        let expected = match embed {
            EmbedMode::Amplitude => 1usize.checked_shl(self.qubits_per_patch as u32).unwrap_or(0),
            EmbedMode::Angle => self.qubits_per_patch,
        };
        if per_patch != expected {
            return Err(Error::shape(format!(
                "{per_patch} features per patch do not fit {} qubits under {embed:?} embedding",
                self.qubits_per_patch
            )));
        }
        Ok(())
    }

    /// Length of one patch's input sub-vector.
    pub fn patch_input_len(&self) -> usize {
        self.feature_dim / self.num_patches
    }

    pub fn patch_output_len(&self, measure: Measurement) -> usize {
        match measure {
            Measurement::ExpectationZ => self.qubits_per_patch,
            Measurement::Probabilities => 1 << self.qubits_per_patch,
        }
    }

    pub fn output_len(&self, measure: Measurement) -> usize {
        self.num_patches * self.patch_output_len(measure)
    }

    /// `patches · layers · qubits` rotation triples.
    pub fn rotation_count(&self) -> usize {
        self.num_patches * self.num_layers * self.qubits_per_patch
    }

    pub fn angle_count(&self) -> usize {
        3 * self.rotation_count()
    }
}

/// Rotation angles `(ψ, θ, ω)` indexed `[patch][layer][qubit]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    num_patches: usize,
    num_layers: usize,
    qubits_per_patch: usize,
    angles: Vec<[f64; 3]>,
}

/// Maps an angle into `[−π, π)`. Circuit outputs are 2π-periodic in every angle.
pub fn wrap_angle(angle: f64) -> f64 {
    (angle + PI).rem_euclid(2.0 * PI) - PI
}

impl AnsatzParams {
    pub fn zeros(config: &AnsatzConfig) -> Self {
        Self {
            num_patches: config.num_patches,
            num_layers: config.num_layers,
            qubits_per_patch: config.qubits_per_patch,
            angles: vec![[0.0; 3]; config.rotation_count()],
        }
    }

    /// Angles drawn uniformly from `[−π, π]`.
    pub fn random<R: Rng + ?Sized>(config: &AnsatzConfig, rng: &mut R) -> Self {
        let mut params = Self::zeros(config);
        for triple in &mut params.angles {
            for a in triple.iter_mut() {
                *a = rng.random_range(-PI..=PI);
            }
        }
        params
    }

    pub fn from_flat(config: &AnsatzConfig, flat: &[f64]) -> Result<Self> {
        if flat.len() != config.angle_count() {
            return Err(Error::shape(format!(
                "{} angles supplied for a circuit with {}",
                flat.len(),
                config.angle_count()
            )));
        }
        let mut params = Self::zeros(config);
        params.set_flat(flat);
        Ok(params)
    }

    pub fn matches(&self, config: &AnsatzConfig) -> bool {
        self.num_patches == config.num_patches
            && self.num_layers == config.num_layers
            && self.qubits_per_patch == config.qubits_per_patch
    }

    pub fn len(&self) -> usize {
        self.angles.len() * 3
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Angles flattened in `[patch][layer][qubit][ψ θ ω]` order.
    pub fn flat(&self) -> Vec<f64> {
        self.angles.iter().flatten().copied().collect()
    }

    pub(crate) fn set_flat(&mut self, flat: &[f64]) {
        for (triple, chunk) in self.angles.iter_mut().zip(flat.chunks_exact(3)) {
            triple.copy_from_slice(chunk);
        }
    }

    /// All `layers · qubits` triples that belong to one patch.
    pub fn patch(&self, patch: usize) -> &[[f64; 3]] {
        let per = self.num_layers * self.qubits_per_patch;
        &self.angles[patch * per..(patch + 1) * per]
    }

    pub fn patch_mut(&mut self, patch: usize) -> &mut [[f64; 3]] {
        let per = self.num_layers * self.qubits_per_patch;
        &mut self.angles[patch * per..(patch + 1) * per]
    }

    pub fn layer(&self, patch: usize, layer: usize) -> &[[f64; 3]] {
        let q = self.qubits_per_patch;
        &self.patch(patch)[layer * q..(layer + 1) * q]
    }

    pub fn wrap(&mut self) {
        for a in self.angles.iter_mut().flatten() {
            *a = wrap_angle(*a);
        }
    }
}

/// Rot on every qubit, then `CNOT(i, (i+1) mod n)` for each `i`.
/// A single-qubit register gets no CNOT.
pub fn entangling_layer(state: &mut QuantumState, layer_angles: &[[f64; 3]]) -> Result<()> {
    let n = state.num_qubits();
    if layer_angles.len() != n {
        return Err(Error::shape(format!(
            "{} angle triples for a {n}-qubit layer",
            layer_angles.len()
        )));
    }
    for (q, &[psi, theta, omega]) in layer_angles.iter().enumerate() {
        state.apply_rot(q, psi, theta, omega)?;
    }
    if n > 1 {
        for q in 0..n {
            state.apply_cnot(q, (q + 1) % n)?;
        }
    }
    Ok(())
}

/// Applies every layer of one patch's angles (`layers · n` triples, layer-major).
pub fn run_layers(state: &mut QuantumState, patch_angles: &[[f64; 3]]) -> Result<()> {
    let n = state.num_qubits();
    if patch_angles.len() % n != 0 {
        return Err(Error::shape(format!(
            "{} angle triples do not split into {n}-qubit layers",
            patch_angles.len()
        )));
    }
    for layer in patch_angles.chunks_exact(n) {
        entangling_layer(state, layer)?;
    }
    Ok(())
}

/// Runs `num_layers` entangling layers using the angles of `patch`.
pub fn run_ansatz(
    state: &mut QuantumState,
    config: &AnsatzConfig,
    params: &AnsatzParams,
    patch: usize,
) -> Result<()> {
    if !params.matches(config) {
        return Err(Error::shape("ansatz parameters do not match the circuit shape"));
    }
    if patch >= config.num_patches {
        return Err(Error::Index(format!(
            "patch {patch} of {}",
            config.num_patches
        )));
    }
    if state.num_qubits() != config.qubits_per_patch {
        return Err(Error::shape(format!(
            "{}-qubit state for a {}-qubit patch",
            state.num_qubits(),
            config.qubits_per_patch
        )));
    }
    run_layers(state, params.patch(patch))
}

pub fn embed(input: &[f64], mode: EmbedMode) -> Result<QuantumState> {
    match mode {
        EmbedMode::Amplitude => QuantumState::amplitude_embed(input),
        EmbedMode::Angle => QuantumState::angle_embed(input),
    }
}

pub fn measure(state: &QuantumState, mode: Measurement) -> Vec<f64> {
    match mode {
        Measurement::ExpectationZ => state.expectation_z_all(),
        Measurement::Probabilities => state.basis_probabilities(),
    }
}

/// Embed → layers → measure for a single patch sub-vector.
pub fn run_patch(
    sub_input: &[f64],
    patch_angles: &[[f64; 3]],
    embed_mode: EmbedMode,
    measurement: Measurement,
) -> Result<Vec<f64>> {
    let mut state = embed(sub_input, embed_mode)?;
    run_layers(&mut state, patch_angles)?;
    Ok(measure(&state, measurement))
}

/// Splits `input` into equal contiguous patches, runs each through its own
/// register and parameters, and concatenates the per-patch measurements.
pub fn run_patched_with(
    input: &[f64],
    config: &AnsatzConfig,
    params: &AnsatzParams,
    embed_mode: EmbedMode,
    measurement: Measurement,
) -> Result<Vec<f64>> {
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
    let mut out = Vec::with_capacity(config.output_len(measurement));
    for (patch, sub) in input.chunks_exact(config.patch_input_len()).enumerate() {
        let measured = run_patch(sub, params.patch(patch), embed_mode, measurement).map_err(|e| match e {
            Error::DegenerateInput(msg) => Error::DegenerateInput(format!("patch {patch}: {msg}")),
            other => other,
        })?;
        out.extend(measured);
    }
    Ok(out)
}

/// Patched execution with per-qubit `⟨Z⟩` readout.
pub fn run_patched(
    input: &[f64],
    config: &AnsatzConfig,
    params: &AnsatzParams,
    embed_mode: EmbedMode,
) -> Result<Vec<f64>> {
    run_patched_with(input, config, params, embed_mode, Measurement::ExpectationZ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &QuantumState, b: &QuantumState, tol: f64) -> bool {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn zero_layer_is_identity_on_zero_state() {
        let mut s = QuantumState::zero(2).unwrap();
        entangling_layer(&mut s, &[[0.0; 3]; 2]).unwrap();
        assert!(close(&s, &QuantumState::zero(2).unwrap(), 0.0));
    }

    #[test]
    fn flip_then_cnot_ring_on_two_qubits() {
        // Ry(π) on qubit 0: |00⟩ → |10⟩; CNOT(0,1): → |11⟩; CNOT(1,0): → |01⟩.
        let mut s = QuantumState::zero(2).unwrap();
        entangling_layer(&mut s, &[[0.0, PI, 0.0], [0.0; 3]]).unwrap();
        let p = s.basis_probabilities();
        assert!((p[1] - 1.0).abs() < 1e-15, "{p:?}");
    }

    #[test]
    fn layer_shape_mismatch() {
        let mut s = QuantumState::zero(3).unwrap();
        assert!(matches!(entangling_layer(&mut s, &[[0.0; 3]; 2]), Err(Error::Shape(_))));
    }

    #[test]
    fn single_qubit_layer_skips_cnot() {
        let mut s = QuantumState::zero(1).unwrap();
        entangling_layer(&mut s, &[[0.0, PI, 0.0]]).unwrap();
        assert!((s.basis_probabilities()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn layer_equals_primitive_sequence() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let config = AnsatzConfig { qubits_per_patch: 3, num_layers: 1, num_patches: 1, feature_dim: 8 };
        let params = AnsatzParams::random(&config, &mut rng);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = QuantumState::amplitude_embed(&x).unwrap();
        entangling_layer(&mut a, params.layer(0, 0)).unwrap();
        let mut b = QuantumState::amplitude_embed(&x).unwrap();
        for (q, t) in params.layer(0, 0).iter().enumerate() {
            b.apply_rot(q, t[0], t[1], t[2]).unwrap();
        }
        for q in 0..3 {
            b.apply_cnot(q, (q + 1) % 3).unwrap();
        }
        assert!(close(&a, &b, 0.0));
    }

    #[test]
    fn ansatz_is_sequential_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let config = AnsatzConfig { qubits_per_patch: 3, num_layers: 5, num_patches: 1, feature_dim: 8 };
        let params = AnsatzParams::random(&config, &mut rng);
        let mut a = QuantumState::zero(3).unwrap();
        run_ansatz(&mut a, &config, &params, 0).unwrap();
        let mut b = QuantumState::zero(3).unwrap();
        for l in 0..5 {
            entangling_layer(&mut b, params.layer(0, l)).unwrap();
        }
        assert!(close(&a, &b, 0.0));

        let zero = AnsatzParams::zeros(&AnsatzConfig { num_layers: 3, ..config });
        let mut s = QuantumState::zero(3).unwrap();
        run_ansatz(&mut s, &AnsatzConfig { num_layers: 3, ..config }, &zero, 0).unwrap();
        assert!(close(&s, &QuantumState::zero(3).unwrap(), 1e-15));

        assert!(matches!(run_ansatz(&mut s, &config, &params, 1), Err(Error::Index(_))));
        assert!(matches!(
            run_ansatz(&mut s, &AnsatzConfig { num_layers: 2, ..config }, &params, 0),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn patched_lsd_for_1024_features() {
        let config = AnsatzConfig::for_input(1024, 2, 1, EmbedMode::Amplitude).unwrap();
        assert_eq!(config.qubits_per_patch, 9);
        let params = AnsatzParams::zeros(&config);
        let x: Vec<f64> = (0..1024).map(|i| (i % 7) as f64 + 1.0).collect();
        assert_eq!(run_patched(&x, &config, &params, EmbedMode::Amplitude).unwrap().len(), 18);
    }

    #[test]
    fn single_patch_equals_direct_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let config = AnsatzConfig::for_input(8, 1, 2, EmbedMode::Amplitude).unwrap();
        let params = AnsatzParams::random(&config, &mut rng);
        let x: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut s = QuantumState::amplitude_embed(&x).unwrap();
        run_ansatz(&mut s, &config, &params, 0).unwrap();
        assert_eq!(
            run_patched(&x, &config, &params, EmbedMode::Amplitude).unwrap(),
            s.expectation_z_all()
        );
    }

    #[test]
    fn patched_equals_manual_subcircuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let config = AnsatzConfig::for_input(16, 2, 2, EmbedMode::Amplitude).unwrap();
        assert_eq!(config.qubits_per_patch, 3);
        let params = AnsatzParams::random(&config, &mut rng);
        let x: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut expected = Vec::new();
        for p in 0..2 {
            let mut s = QuantumState::amplitude_embed(&x[8 * p..8 * (p + 1)]).unwrap();
            for l in 0..2 {
                entangling_layer(&mut s, params.layer(p, l)).unwrap();
            }
            expected.extend(s.expectation_z_all());
        }
        assert_eq!(run_patched(&x, &config, &params, EmbedMode::Amplitude).unwrap(), expected);
    }

    #[test]
    fn patched_errors() {
        assert!(matches!(
            AnsatzConfig::for_input(24, 2, 1, EmbedMode::Amplitude),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            AnsatzConfig::for_input(10, 3, 1, EmbedMode::Angle),
            Err(Error::Shape(_))
        ));
        let config = AnsatzConfig::for_input(8, 2, 1, EmbedMode::Amplitude).unwrap();
        let params = AnsatzParams::zeros(&config);
        let x = [1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            run_patched(&x, &config, &params, EmbedMode::Amplitude),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            run_patched(&x[..4], &config, &params, EmbedMode::Amplitude),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn angle_mode_patches() {
        let config = AnsatzConfig::for_input(6, 2, 1, EmbedMode::Angle).unwrap();
        assert_eq!(config.qubits_per_patch, 3);
        let params = AnsatzParams::zeros(&config);
        let out = run_patched(&[0.0; 6], &config, &params, EmbedMode::Angle).unwrap();
        assert_eq!(out, vec![1.0; 6]);
    }

    #[test]
    fn wrap_angle_range() {
        for a in [-10.0, -PI, -1.0, 0.0, 3.0, PI, 7.5, 100.0] {
            let w = wrap_angle(a);
            assert!((-PI..PI).contains(&w), "{a} -> {w}");
            assert!(((a - w) / (2.0 * PI)).fract().abs() < 1e-9 || ((a - w) / (2.0 * PI)).fract().abs() > 1.0 - 1e-9);
        }
    }
}
