use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use sqvae::harness::{self, layer, take, TrainConfig, DEPTH_SWEEP_LR, LR_GRID};
use sqvae::model::{ModelSpec, Variant};
use sqvae::moldata::SynthKind;
use sqvae::{Error, Result};

/// Hybrid quantum-classical autoencoder experiments.
///
/// Every flag can also be given as a key of the same name in a TOML file
/// passed with --config; flags win over the file, the file over --preset.
#[derive(Parser)]
#[command(name = "sqvae", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model; writes metrics.csv and checkpoint.bin under --out.
    Train(TrainArgs),
    /// Reconstruct seeded-random test items from a checkpoint.
    Reconstruct(ReconstructArgs),
    /// Decode prior samples from a VAE checkpoint.
    Sample(SampleArgs),
    /// Train one model per circuit depth on a shared split.
    AblateDepth(DepthArgs),
    /// Train every (classical, quantum) learning-rate pair on a shared split.
    AblateLr(LrArgs),
    /// Print quantum, classical, and total parameter counts.
    ParamCount(CountArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct RunFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PathBuf>,
    /// bq64, sq-mini, or sq-full (long-running).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    patches: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layers: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    latent_dim: Option<usize>,
    /// Comma-separated hidden widths (classical variants).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epochs: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    batch_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    classical_lr: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_lr: Option<f64>,
    /// Dataset file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    /// qm9, ligand, or blobs:<dim>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    synth: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    synth_count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    l1_normalize: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    train_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Record real durations in the seconds column (breaks byte-identical reruns).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    wall_clock: bool,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    run: RunFlags,
    /// Continue a checkpoint to --epochs total epochs.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resume: Option<PathBuf>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct DepthArgs {
    #[command(flatten)]
    #[serde(flatten)]
    run: RunFlags,
    /// Comma-separated depths [default: 1,2,...,9].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    depths: Option<Vec<usize>>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct LrArgs {
    #[command(flatten)]
    #[serde(flatten)]
    run: RunFlags,
    /// Comma-separated classical rates [default: 0.001,0.003,0.01,0.03,0.1].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    classical_rates: Option<Vec<f64>>,
    /// Comma-separated quantum rates [default: 0.001,0.003,0.01,0.03,0.1].
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    quantum_rates: Option<Vec<f64>>,
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SampleArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    checkpoint: Option<PathBuf>,
    /// [default: 1000]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Export file [default: samples.txt].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Sample {
    checkpoint: PathBuf,
    #[serde(default = "thousand")]
    count: usize,
    seed: u64,
    #[serde(default = "samples_file")]
    out: PathBuf,
}

fn thousand() -> usize {
    1000
}
fn samples_file() -> PathBuf {
    PathBuf::from("samples.txt")
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ReconstructArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    checkpoint: Option<PathBuf>,
    /// Dataset file [default: the checkpoint's training data].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<PathBuf>,
    /// Items to reconstruct [default: 3].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Output directory [default: out].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Reconstruct {
    checkpoint: PathBuf,
    data: Option<PathBuf>,
    #[serde(default = "three")]
    k: usize,
    seed: u64,
    #[serde(default = "out_dir")]
    out: PathBuf,
}

fn three() -> usize {
    3
}
fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CountArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<String>,
    /// [default: 64]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    feature_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    patches: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layers: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    latent_dim: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    hidden: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Count {
    variant: String,
    #[serde(default = "sixty_four")]
    feature_dim: usize,
    patches: Option<usize>,
    layers: Option<usize>,
    latent_dim: Option<usize>,
    hidden: Option<Vec<usize>>,
}

fn sixty_four() -> usize {
    64
}

#[derive(Args, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SynthArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<PathBuf>,
    /// qm9, ligand, or blobs:<dim>.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    /// [default: 64]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    count: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct Synth {
    kind: String,
    #[serde(default = "sixty_four")]
    count: usize,
    seed: u64,
    out: PathBuf,
}

fn flags<T: Serialize>(args: &T) -> Result<Table> {
    Table::try_from(args).map_err(|e| Error::Usage(e.to_string()))
}

/// Layers `args` over its config file and deserializes the result.
fn resolve<T: DeserializeOwned>(args: &impl Serialize) -> Result<T> {
    let table = layer(Table::new(), flags(args)?)?;
    Value::Table(table).try_into().map_err(|e: toml::de::Error| {
        let msg = e.message().to_string();
        match msg.strip_prefix("missing field `") {
            Some(rest) => Error::Usage(format!("--{} is required", rest.trim_end_matches('`'))),
            None => Error::Usage(msg),
        }
    })
}

fn run_config(defaults: Table, args: &impl Serialize, extra: &[&str]) -> Result<(TrainConfig, Table)> {
    let mut table = layer(defaults, flags(args)?)?;
    let mut rest = Table::new();
    for key in extra {
        if let Some(v) = table.remove(*key) {
            rest.insert(key.to_string(), v);
        }
    }
    Ok((TrainConfig::from_table(table)?, rest))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let mut table = layer(Table::new(), flags(&args)?)?;
            if let Some(ck) = take::<PathBuf>(&mut table, "resume")? {
                let saved = harness::Checkpoint::load(&ck)?;
                let epochs = take(&mut table, "epochs")?.unwrap_or(saved.config.epochs);
                let out = take(&mut table, "out")?.unwrap_or(saved.config.out);
                let report = harness::cmd_resume(&ck, epochs, &out)?;
                println!("wrote {} and {}", report.metrics_path.display(), report.checkpoint_path.display());
                return Ok(());
            }
            let cfg = TrainConfig::from_table(table)?;
            let report = harness::cmd_train(&cfg)?;
            println!("wrote {} and {}", report.metrics_path.display(), report.checkpoint_path.display());
        }
        Command::AblateDepth(args) => {
            let mut defaults = Table::new();
            defaults.insert("classical-lr".into(), Value::Float(DEPTH_SWEEP_LR));
            defaults.insert("quantum-lr".into(), Value::Float(DEPTH_SWEEP_LR));
            let (cfg, mut rest) = run_config(defaults, &args, &["depths"])?;
            let depths: Vec<usize> = take(&mut rest, "depths")?.unwrap_or_else(|| (1..=9).collect());
            let runs = harness::cmd_ablate_depth(&cfg, &depths)?;
            for r in &runs {
                let test = r.history.iter().rev().find(|m| m.split == sqvae::moldata::Split::Test);
                println!("depth {}: final test mse {}", r.depth, test.map_or(f64::NAN, |m| m.mse));
            }
            println!("wrote {}", cfg.out.join(harness::DEPTH_CSV).display());
        }
        Command::AblateLr(args) => {
            let (cfg, mut rest) = run_config(Table::new(), &args, &["classical-rates", "quantum-rates"])?;
            let c: Vec<f64> = take(&mut rest, "classical-rates")?.unwrap_or_else(|| LR_GRID.to_vec());
            let q: Vec<f64> = take(&mut rest, "quantum-rates")?.unwrap_or_else(|| LR_GRID.to_vec());
            let cells = harness::cmd_ablate_lr(&cfg, &c, &q)?;
            for cell in &cells {
                println!(
                    "classical {} quantum {}: final train mse {} test mse {}",
                    cell.classical_lr, cell.quantum_lr, cell.final_train_mse, cell.final_test_mse
                );
            }
            println!("wrote {}", cfg.out.join(harness::LR_CSV).display());
        }
        Command::Sample(args) => {
            let s: Sample = resolve(&args)?;
            let d = harness::cmd_sample(&s.checkpoint, s.count, s.seed, &s.out)?;
            println!("wrote {} samples to {}", d.len(), s.out.display());
        }
        Command::Reconstruct(args) => {
            let r: Reconstruct = resolve(&args)?;
            let recs = harness::cmd_reconstruct(&r.checkpoint, r.data.as_deref(), r.k, r.seed, &r.out)?;
            for rec in &recs {
                println!("{}: mse {}", rec.id, rec.mse);
            }
        }
        Command::ParamCount(args) => {
            let c: Count = resolve(&args)?;
            let variant: Variant = c.variant.parse()?;
            let mut spec = ModelSpec::new(variant, c.feature_dim).with_patches(c.patches.unwrap_or(1));
            if let Some(l) = c.layers {
                spec = spec.with_layers(l);
            }
            if let Some(l) = c.latent_dim {
                spec = spec.with_latent_dim(l);
            }
            if let Some(h) = c.hidden {
                spec = spec.with_hidden(h);
            }
            harness::cmd_param_count(&spec)?;
        }
        Command::Synth(args) => {
            let s: Synth = resolve(&args)?;
            let d = harness::cmd_synth(SynthKind::parse(&s.kind)?, s.count, s.seed, &s.out)?;
            println!("wrote {} items of width {} to {}", d.len(), d.feature_dim(), s.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Usage(_)) { 2 } else { 1 })
        }
    }
}
