//! Compares parameter-shift gradients of a small angle-embedded circuit with
//! central finite differences.
//!
//! cargo run --example parameter_shift

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sqvae::grad::circuit_grad_shift;
use sqvae::sim::{run_patched_with, AnsatzConfig, AnsatzParams, EmbedMode, Measurement};

fn main() -> sqvae::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = AnsatzConfig::for_input(3, 1, 2, EmbedMode::Angle)?;
    let params = AnsatzParams::random(&config, &mut rng);
    let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    // Loss = sum of <Z>, so the output gradient is all ones.
    let ones = vec![1.0; 3];
    let f = |p: &AnsatzParams| -> f64 {
        run_patched_with(&x, &config, p, EmbedMode::Angle, Measurement::ExpectationZ).unwrap().iter().sum()
    };

    let g = circuit_grad_shift(&config, &params, &x, EmbedMode::Angle, Measurement::ExpectationZ, &ones, true)?;
    let flat = params.flat();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..flat.len() {
        let (mut up, mut down) = (flat.clone(), flat.clone());
        up[i] += h;
        down[i] -= h;
        let fd = (f(&AnsatzParams::from_flat(&config, &up)?) - f(&AnsatzParams::from_flat(&config, &down)?)) / (2.0 * h);
        worst = worst.max((fd - g.angles[i]).abs());
        if i < 6 {
            println!("angle {i}: shift {:+.9}  finite difference {fd:+.9}", g.angles[i]);
        }
    }
    println!("{} angles, worst difference {worst:.2e}, {} circuit runs", flat.len(), g.evaluations);
    println!("input gradient {:?}", g.input.unwrap_or_default());
    Ok(())
}
