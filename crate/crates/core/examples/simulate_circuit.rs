//! Builds a Bell state by hand, then runs a patched two-layer circuit on an
//! amplitude-embedded 16-vector and prints both readouts.
//!
//! cargo run --example simulate_circuit

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqvae::sim::{run_patched_with, AnsatzConfig, AnsatzParams, EmbedMode, Measurement, QuantumState};

fn main() -> sqvae::Result<()> {
    let mut bell = QuantumState::zero(2)?;
    bell.apply_ry(0, std::f64::consts::FRAC_PI_2)?;
    bell.apply_cnot(0, 1)?;
    println!("bell probabilities {:?}", bell.basis_probabilities());
    println!("bell <Z>           {:?}", bell.expectation_z_all());

    // 16 features in 2 patches: two independent 3-qubit registers.
    let x: Vec<f64> = (1..=16).map(f64::from).collect();
    let config = AnsatzConfig::for_input(16, 2, 2, EmbedMode::Amplitude)?;
    let params = AnsatzParams::random(&config, &mut ChaCha8Rng::seed_from_u64(1));
    println!("{} qubits per patch, {} angles", config.qubits_per_patch, config.angle_count());
    let z = run_patched_with(&x, &config, &params, EmbedMode::Amplitude, Measurement::ExpectationZ)?;
    println!("patched <Z>        {z:.4?}");
    let p = run_patched_with(&x, &config, &params, EmbedMode::Amplitude, Measurement::Probabilities)?;
    for (i, patch) in p.chunks(8).enumerate() {
        println!("patch {i} probabilities sum {:.12}", patch.iter().sum::<f64>());
    }
    Ok(())
}
