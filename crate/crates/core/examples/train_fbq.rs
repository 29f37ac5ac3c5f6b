//! Trains the fully quantum baseline autoencoder and a classical autoencoder
//! on 64 L1-normalized 8×8 synthetic molecules and reports when each first
//! halves its initial training MSE.
//!
//! cargo run --release --example train_fbq

use sqvae::harness::{evaluate_items, TrainConfig, Trainer};
use sqvae::model::Variant;
use sqvae::moldata::Split;

fn run(variant: Variant, lr: f64) -> sqvae::Result<()> {
    let mut cfg = TrainConfig::new(variant, 7);
    cfg.l1_normalize = true;
    cfg.train_fraction = 1.0;
    cfg.classical_lr = lr;
    cfg.quantum_lr = lr;

    let mut trainer = Trainer::new(cfg.clone())?;
    let c = trainer.model().count_parameters();
    let train_mse = |t: &Trainer| -> sqvae::Result<f64> {
        Ok(evaluate_items(t.model(), &t.data().dataset.subset(Split::Train))?.recon)
    };
    let initial = train_mse(&trainer)?;
    let mut halved = None;
    for epoch in 1..=cfg.epochs {
        trainer.run_epoch()?;
        let m = train_mse(&trainer)?;
        if halved.is_none() && m <= 0.5 * initial {
            halved = Some(epoch);
        }
    }
    let last = train_mse(&trainer)?;
    println!(
        "{variant:<13} params {:>5}  initial mse {initial:.6e}  final {last:.6e}  ratio {:.3}  halved at {}",
        c.total,
        last / initial,
        halved.map_or("never".to_string(), |e| format!("epoch {e}"))
    );
    Ok(())
}

fn main() -> sqvae::Result<()> {
    run(Variant::FbqAe, 0.001)?;
    run(Variant::ClassicalAe, 0.001)?;
    Ok(())
}
