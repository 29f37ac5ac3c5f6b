use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::metrics::{metrics_csv, MetricsRecord, METRICS_HEADER};
use super::trainer::{load_raw, prepare, prepare_data, PreparedData, Trainer};
use crate::error::{Error, Result};
use crate::model::{build_model, mse, ModelSpec, ParamCount};
use crate::moldata::{
    discretize_output, matrix_to_vector, read_dataset, synth_dataset, write_dataset, DataKind, Split, SynthKind,
    VectorDataset,
};
use crate::numfmt::sig9;

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub params: ParamCount,
    pub history: Vec<MetricsRecord>,
    pub metrics_path: PathBuf,
    pub checkpoint_path: PathBuf,
}

fn print_counts(variant: impl std::fmt::Display, c: ParamCount) {
    println!("{variant}: quantum {} classical {} total {}", c.quantum, c.classical, c.total);
}

fn finish(trainer: Trainer, out: &Path) -> Result<TrainReport> {
    ensure_dir(out)?;
    let metrics_path = out.join(METRICS_FILE);
    let checkpoint_path = out.join(CHECKPOINT_FILE);
    write(&metrics_path, &metrics_csv(trainer.history()))?;
    let params = trainer.model().count_parameters();
    let ck = trainer.into_checkpoint();
    ck.save(&checkpoint_path)?;
    Ok(TrainReport { params, history: ck.history, metrics_path, checkpoint_path })
}

/// Trains from scratch and writes `metrics.csv` and `checkpoint.bin` under `cfg.out`.
pub fn cmd_train(cfg: &TrainConfig) -> Result<TrainReport> {
    let mut trainer = Trainer::new(cfg.clone())?;
    print_counts(cfg.variant, trainer.model().count_parameters());
    trainer.run_until(cfg.epochs)?;
    finish(trainer, &cfg.out)
}

/// Continues a saved run to `epochs` total; the metrics file holds the full history.
pub fn cmd_resume(checkpoint: &Path, epochs: usize, out: &Path) -> Result<TrainReport> {
    let mut ck = Checkpoint::load(checkpoint)?;
    ck.config.epochs = epochs;
    ck.config.out = out.to_path_buf();
    let mut trainer = Trainer::resume(ck)?;
    print_counts(trainer.model().variant(), trainer.model().count_parameters());
    trainer.run_until(epochs)?;
    finish(trainer, out)
}

pub const DEPTH_CSV: &str = "ablate_depth.csv";
pub const LR_CSV: &str = "ablate_lr.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct DepthRun {
    pub depth: usize,
    pub history: Vec<MetricsRecord>,
}

/// One run per depth on a shared split; rows are `depth,` + the metrics columns.
///
/// `cfg` carries the learning rates; sweeps from the CLI default both to 0.001.
pub fn cmd_ablate_depth(cfg: &TrainConfig, depths: &[usize]) -> Result<Vec<DepthRun>> {
    if depths.is_empty() {
        return Err(Error::Argument("depth list is empty".into()));
    }
    let data = prepare_data(cfg)?;
    let runs = depths
        .par_iter()
        .map(|&depth| {
            let mut c = cfg.clone();
            c.layers = Some(depth);
            let mut t = Trainer::with_data(c, data.clone())?;
            t.run_until(cfg.epochs)?;
            Ok(DepthRun { depth, history: t.history().to_vec() })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = format!("depth,{METRICS_HEADER}\n");
    for run in &runs {
        for r in &run.history {
            csv.push_str(&format!("{},{}", run.depth, r.csv_line()));
        }
    }
    ensure_dir(&cfg.out)?;
    write(&cfg.out.join(DEPTH_CSV), &csv)?;
    Ok(runs)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LrCell {
    pub classical_lr: f64,
    pub quantum_lr: f64,
    pub final_train_mse: f64,
    pub final_test_mse: f64,
}

/// Trains every (classical, quantum) rate pair on a shared split.
pub fn cmd_ablate_lr(cfg: &TrainConfig, classical_rates: &[f64], quantum_rates: &[f64]) -> Result<Vec<LrCell>> {
    if classical_rates.is_empty() || quantum_rates.is_empty() {
        return Err(Error::Argument("learning-rate lists must be nonempty".into()));
    }
    let data = prepare_data(cfg)?;
    let grid: Vec<(f64, f64)> = classical_rates
        .iter()
        .flat_map(|&c| quantum_rates.iter().map(move |&q| (c, q)))
        .collect();
    let cells = grid
        .par_iter()
        .map(|&(c_lr, q_lr)| {
            let mut c = cfg.clone();
            c.classical_lr = c_lr;
            c.quantum_lr = q_lr;
            let mut t = Trainer::with_data(c, data.clone())?;
            t.run_until(cfg.epochs)?;
            let last = |split| t.history().iter().rev().find(|r| r.split == split).map_or(f64::NAN, |r| r.mse);
            Ok(LrCell {
                classical_lr: c_lr,
                quantum_lr: q_lr,
                final_train_mse: last(Split::Train),
                final_test_mse: last(Split::Test),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("classical_lr,quantum_lr,final_train_mse,final_test_mse\n");
    for c in &cells {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            sig9(c.classical_lr),
            sig9(c.quantum_lr),
            sig9(c.final_train_mse),
            sig9(c.final_test_mse)
        ));
    }
    ensure_dir(&cfg.out)?;
    write(&cfg.out.join(LR_CSV), &csv)?;
    Ok(cells)
}

/// Rescales a decoder output to code scale and, for molecule data, snaps it to codes.
fn export_item(ck: &Checkpoint, y: &[f64]) -> Result<Vec<f64>> {
    let scale = ck.output_scale.unwrap_or(1.0);
    let y: Vec<f64> = y.iter().map(|v| v * scale).collect();
    match ck.data_kind {
        DataKind::Molecule(style) => Ok(matrix_to_vector(&discretize_output(&y, style)?)),
        DataKind::Vector => Ok(y),
    }
}

/// Decodes `count` prior samples from a VAE checkpoint and writes them to `out`.
pub fn cmd_sample(checkpoint: &Path, count: usize, seed: u64, out: &Path) -> Result<VectorDataset> {
    let ck = Checkpoint::load(checkpoint)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = ck.model.sample_latent(count, &mut rng)?;
    let items = raw.iter().map(|y| export_item(&ck, y)).collect::<Result<Vec<_>>>()?;
    let samples = VectorDataset::new(ck.model.feature_dim(), ck.data_kind, items, Vec::new())?;
    write_dataset(out, &samples)?;
    Ok(samples)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub id: String,
    pub input: Vec<f64>,
    pub output: Vec<f64>,
    /// Present for molecule data.
    pub discretized: Option<Vec<f64>>,
    pub mse: f64,
}

pub const RECON_FILE: &str = "reconstructions.txt";
pub const RECON_CSV: &str = "reconstruct_mse.csv";

/// Reconstructs `k` seeded-random test items (all items if the test split is empty).
///
/// `reconstructions.txt` is a vector dataset holding, per item, the model
/// input, its reconstruction, and for molecule data the discretized
/// reconstruction at code scale; `reconstruct_mse.csv` has one row per item.
pub fn cmd_reconstruct(checkpoint: &Path, data: Option<&Path>, k: usize, seed: u64, out: &Path) -> Result<Vec<Reconstruction>> {
    let ck = Checkpoint::load(checkpoint)?;
    let prepared: PreparedData = match data {
        Some(path) => prepare(&ck.config, &read_dataset(path)?)?,
        None => prepare(&ck.config, &load_raw(&ck.config)?)?,
    };
    let d = &prepared.dataset;
    if d.feature_dim() != ck.model.feature_dim() {
        return Err(Error::shape(format!(
            "checkpoint model takes {} features, dataset has {}",
            ck.model.feature_dim(),
            d.feature_dim()
        )));
    }
    let mut pool = d.indices(Split::Test);
    if pool.is_empty() {
        pool = (0..d.len()).collect();
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pool.truncate(k);

    let mut recs = Vec::with_capacity(pool.len());
    for i in pool {
        let x = &d.items()[i];
        let y = ck.model.reconstruct(x)?;
        let discretized = match ck.data_kind {
            DataKind::Molecule(_) => Some(export_item(&ck, &y)?),
            DataKind::Vector => None,
        };
        recs.push(Reconstruction { id: d.ids()[i].clone(), mse: mse(x, &y)?, input: x.clone(), output: y, discretized });
    }

    let mut items = Vec::new();
    let mut ids = Vec::new();
    let mut csv = String::from("id,mse\n");
    for r in &recs {
        items.push(r.input.clone());
        ids.push(format!("{} input", r.id));
        items.push(r.output.clone());
        ids.push(format!("{} reconstruction", r.id));
        if let Some(q) = &r.discretized {
            items.push(q.clone());
            ids.push(format!("{} discretized", r.id));
        }
        csv.push_str(&format!("{},{}\n", r.id, sig9(r.mse)));
    }
    ensure_dir(out)?;
    write_dataset(&out.join(RECON_FILE), &VectorDataset::new(d.feature_dim(), DataKind::Vector, items, ids)?)?;
    write(&out.join(RECON_CSV), &csv)?;
    Ok(recs)
}

/// Builds the model (weights are irrelevant) and prints its parameter table.
pub fn cmd_param_count(spec: &ModelSpec) -> Result<ParamCount> {
    let model = build_model(spec, &mut ChaCha8Rng::seed_from_u64(0))?;
    let c = model.count_parameters();
    println!("variant\tquantum\tclassical\ttotal");
    println!("{}\t{}\t{}\t{}", spec.variant, c.quantum, c.classical, c.total);
    Ok(c)
}

pub fn cmd_synth(kind: SynthKind, count: usize, seed: u64, out: &Path) -> Result<VectorDataset> {
    let d = synth_dataset(kind, count, seed)?;
    write_dataset(out, &d)?;
    Ok(d)
}
