//! Patched autoencoder on 64-dimensional molecules with separate quantum
//! and classical learning rates, writing metrics.csv and a checkpoint.
//!
//! cargo run --release --example train_sq [out-dir]

use sqvae::harness::{cmd_train, metrics_csv, TrainConfig};
use sqvae::model::Variant;

fn main() -> sqvae::Result<()> {
    let mut cfg = TrainConfig::new(Variant::SqAe, 11);
    cfg.patches = 4;
    cfg.layers = Some(5);
    cfg.epochs = 5;
    cfg.out = std::env::args().nth(1).unwrap_or_else(|| "out/train_sq".into()).into();
    let report = cmd_train(&cfg)?;
    print!("{}", metrics_csv(&report.history));
    println!("checkpoint at {}", report.checkpoint_path.display());
    Ok(())
}
