//! Depth and learning-rate sweeps at desk scale, printing the final losses
//! of each run. Writes ablate_depth.csv and ablate_lr.csv.
//!
//! cargo run --release --example ablation_sweep [out-dir]

use sqvae::harness::{cmd_ablate_depth, cmd_ablate_lr, TrainConfig, DEPTH_SWEEP_LR};
use sqvae::model::Variant;
use sqvae::moldata::Split;

fn main() -> sqvae::Result<()> {
    let mut cfg = TrainConfig::new(Variant::SqAe, 21);
    cfg.patches = 4;
    cfg.epochs = 2;
    cfg.synth_count = 32;
    cfg.out = std::env::args().nth(1).unwrap_or_else(|| "out/ablation".into()).into();

    let mut depth_cfg = cfg.clone();
    depth_cfg.classical_lr = DEPTH_SWEEP_LR;
    depth_cfg.quantum_lr = DEPTH_SWEEP_LR;
    for run in cmd_ablate_depth(&depth_cfg, &[1, 3, 5])? {
        let test = run.history.iter().rev().find(|r| r.split == Split::Test).expect("test row");
        println!("depth {}: final test mse {:.6}", run.depth, test.mse);
    }
    for cell in cmd_ablate_lr(&cfg, &[0.01, 0.03], &[0.01, 0.03])? {
        println!(
            "classical {:<5} quantum {:<5} train {:.6} test {:.6}",
            cell.classical_lr, cell.quantum_lr, cell.final_train_mse, cell.final_test_mse
        );
    }
    Ok(())
}
