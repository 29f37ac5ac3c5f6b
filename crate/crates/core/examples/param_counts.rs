//! Parameter counts for every variant at D=64, plus the patched model at
//! D=1024 for several patch counts.
//!
//! cargo run --example param_counts

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqvae::model::{build_model, latent_dim_for, ModelSpec, Variant};

fn main() -> sqvae::Result<()> {
    println!("{:<14}{:>9}{:>11}{:>9}", "variant", "quantum", "classical", "total");
    for v in Variant::ALL {
        let m = build_model(&ModelSpec::new(v, 64), &mut ChaCha8Rng::seed_from_u64(0))?;
        let c = m.count_parameters();
        println!("{:<14}{:>9}{:>11}{:>9}", v.tag(), c.quantum, c.classical, c.total);
    }
    println!();
    for p in [2, 4, 8, 16] {
        let spec = ModelSpec::new(Variant::SqVae, 1024).with_patches(p);
        let c = build_model(&spec, &mut ChaCha8Rng::seed_from_u64(0))?.count_parameters();
        println!("sq-vae D=1024 p={p:<2} latent {:>3}  quantum {:>5}  classical {:>7}", latent_dim_for(1024, p)?, c.quantum, c.classical);
    }
    Ok(())
}
