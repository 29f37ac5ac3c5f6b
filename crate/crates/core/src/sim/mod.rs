//! Exact dense statevector simulation of layered Rot/CNOT circuits.
//!
//! States are prepared by amplitude or angle embedding, evolved by
//! [`entangling_layer`]s, and read out as per-qubit `⟨Z⟩` or full basis
//! probabilities. Gates are applied in place by stride-pair updates; no
//! `2^n × 2^n` matrix is ever built.

mod ansatz;
mod state;

pub use ansatz::{
    embed, entangling_layer, measure, run_ansatz, run_layers, run_patch, run_patched, run_patched_with,
    wrap_angle, AnsatzConfig, AnsatzParams, EmbedMode, Measurement,
};
pub use state::{matmul2, rot_matrix, ry_matrix, rz_matrix, Gate2, QuantumState, MAX_QUBITS};

/// `|0…0⟩` on `num_qubits` qubits.
pub fn new_zero_state(num_qubits: usize) -> crate::Result<QuantumState> {
    QuantumState::zero(num_qubits)
}
