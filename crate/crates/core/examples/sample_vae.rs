//! Trains a small hybrid VAE on 8×8 molecules, samples from its prior, and
//! prints the discretized molecules.
//!
//! cargo run --release --example sample_vae [out-dir]

use std::path::PathBuf;

use sqvae::harness::{cmd_sample, cmd_train, TrainConfig};
use sqvae::model::Variant;

fn main() -> sqvae::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/sample_vae".into()).into();
    let mut cfg = TrainConfig::new(Variant::SqVae, 3);
    cfg.patches = 2;
    cfg.epochs = 20;
    cfg.classical_lr = 0.03;
    cfg.out = out.clone();
    let report = cmd_train(&cfg)?;

    let samples = cmd_sample(&report.checkpoint_path, 4, 99, &out.join("samples.txt"))?;
    for i in 0..samples.len() {
        let m = samples.molecule(i)?;
        println!("sample {i}: {} atoms, {} bonds", m.atom_count(), m.bond_count());
        print!("{}", m.to_text());
    }
    Ok(())
}
