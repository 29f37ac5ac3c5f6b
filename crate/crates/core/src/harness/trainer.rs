use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::Checkpoint;
use super::config::TrainConfig;
use super::metrics::MetricsRecord;
use crate::error::{Error, Result};
use crate::model::{build_model, train_step, HybridAutoencoder, LossTerms, Optimizer, Stage};
use crate::moldata::{read_dataset, split_dataset, synth_dataset, Split, VectorDataset};

// Independent ChaCha streams under the run seed.
const MODEL_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;

/// Dataset after loading, optional normalization, and the seeded split.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedData {
    pub dataset: VectorDataset,
    pub output_scale: Option<f64>,
}

pub fn load_raw(cfg: &TrainConfig) -> Result<VectorDataset> {
    match (&cfg.data, cfg.synth_kind()?) {
        (Some(path), _) => read_dataset(path),
        (None, Some(kind)) => synth_dataset(kind, cfg.synth_count, cfg.seed),
        (None, None) => Err(Error::Usage("no data: pass --data <file> or --synth <kind>".into())),
    }
}

/// Normalizes (if configured) and splits `raw` with the run seed.
pub fn prepare(cfg: &TrainConfig, raw: &VectorDataset) -> Result<PreparedData> {
    if let Some(d) = cfg.feature_dim {
        if d != raw.feature_dim() {
            return Err(Error::shape(format!(
                "config says feature-dim {d}, data has {}",
                raw.feature_dim()
            )));
        }
    }
    let split = split_dataset(raw, cfg.train_fraction, cfg.seed)?;
    if !cfg.l1_normalize {
        return Ok(PreparedData { dataset: split, output_scale: None });
    }
    let train = split.subset(Split::Train);
    let scale = train.iter().map(|x| x.iter().map(|v| v.abs()).sum::<f64>()).sum::<f64>() / train.len().max(1) as f64;
    Ok(PreparedData { dataset: split.l1_normalized()?, output_scale: Some(scale) })
}

pub fn prepare_data(cfg: &TrainConfig) -> Result<PreparedData> {
    prepare(cfg, &load_raw(cfg)?)
}

/// Circuit executions for one forward pass.
pub fn forward_circuit_evals(model: &HybridAutoencoder) -> usize {
    model
        .encoder_stages()
        .iter()
        .chain(model.decoder_stages())
        .map(|s| match s {
            Stage::Circuit(c) => c.config.num_patches,
            Stage::Dense(_) => 0,
        })
        .sum()
}

/// Mean noise-free loss over `items`; NaN when `items` is empty.
pub fn evaluate_items(model: &HybridAutoencoder, items: &[&[f64]]) -> Result<LossTerms> {
    let mut acc = LossTerms::default();
    for (i, x) in items.iter().enumerate() {
        let l = model.evaluate(x).map_err(|e| with_context(e, &format!("evaluation item {i}")))?;
        acc.total += l.total;
        acc.recon += l.recon;
        acc.kl += l.kl;
    }
    let n = items.len() as f64;
    Ok(LossTerms { total: acc.total / n, recon: acc.recon / n, kl: acc.kl / n })
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::Numeric(m) => Error::Numeric(format!("{ctx}: {m}")),
        Error::Contract(m) => Error::Contract(format!("{ctx}: {m}")),
        Error::DegenerateInput(m) => Error::DegenerateInput(format!("{ctx}: {m}")),
        Error::Shape(m) => Error::Shape(format!("{ctx}: {m}")),
        other => other,
    }
}

/// A training run: model, optimizer, RNG, and the rows written so far.
pub struct Trainer {
    state: Checkpoint,
    data: PreparedData,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self> {
        let data = prepare_data(&cfg)?;
        Self::with_data(cfg, data)
    }

    /// Starts a run on already prepared data (sweeps share one split).
    pub fn with_data(cfg: TrainConfig, data: PreparedData) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(MODEL_STREAM);
        let model = build_model(&cfg.model_spec(data.dataset.feature_dim()), &mut rng)?;
        let optimizer = Optimizer::new(&model, cfg.quantum_lr, cfg.classical_lr);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(TRAIN_STREAM);
        let state = Checkpoint {
            data_kind: data.dataset.kind(),
            output_scale: data.output_scale,
            config: cfg,
            model,
            optimizer,
            rng,
            epochs_done: 0,
            history: Vec::new(),
        };
        Ok(Self { state, data })
    }

    /// Continues from a checkpoint; the data is reloaded and re-split from its config.
    pub fn resume(state: Checkpoint) -> Result<Self> {
        let data = prepare_data(&state.config)?;
        if data.dataset.feature_dim() != state.model.feature_dim() {
            return Err(Error::shape(format!(
                "checkpoint model takes {} features, data has {}",
                state.model.feature_dim(),
                data.dataset.feature_dim()
            )));
        }
        Ok(Self { state, data })
    }

    pub fn model(&self) -> &HybridAutoencoder {
        &self.state.model
    }

    pub fn data(&self) -> &PreparedData {
        &self.data
    }

    pub fn history(&self) -> &[MetricsRecord] {
        &self.state.history
    }

    pub fn epochs_done(&self) -> usize {
        self.state.epochs_done
    }

    pub fn checkpoint(&self) -> &Checkpoint {
        &self.state
    }

    pub fn into_checkpoint(self) -> Checkpoint {
        self.state
    }

    /// One pass over the shuffled train split, then a full test evaluation.
    pub fn run_epoch(&mut self) -> Result<[MetricsRecord; 2]> {
        let epoch = self.state.epochs_done + 1;
        let started = Instant::now();
        let wall = self.state.config.wall_clock;
        let batch_size = self.state.config.batch_size;

        let mut order = self.data.dataset.indices(Split::Train);
        if order.is_empty() {
            return Err(Error::Contract("train split is empty".into()));
        }
        order.shuffle(&mut self.state.rng);
        let items = self.data.dataset.items();
        let mut sum = LossTerms::default();
        let mut evals = 0;
        for (b, chunk) in order.chunks(batch_size).enumerate() {
            let batch: Vec<&[f64]> = chunk.iter().map(|&i| items[i].as_slice()).collect();
            let step = train_step(&mut self.state.model, &batch, &mut self.state.optimizer, &mut self.state.rng)
                .map_err(|e| with_context(e, &format!("epoch {epoch}, batch {b}")))?;
            let n = batch.len() as f64;
            sum.total += step.loss.total * n;
            sum.recon += step.loss.recon * n;
            sum.kl += step.loss.kl * n;
            evals += step.circuit_evals;
        }
        let n = order.len() as f64;
        let train_seconds = started.elapsed().as_secs_f64();
        let train = MetricsRecord {
            epoch,
            split: Split::Train,
            mse: sum.recon / n,
            kl: sum.kl / n,
            total: sum.total / n,
            seconds: if wall { train_seconds } else { 0.0 },
            circuit_evals: evals,
        };

        let test_started = Instant::now();
        let test_items = self.data.dataset.subset(Split::Test);
        let t = evaluate_items(&self.state.model, &test_items)?;
        let test = MetricsRecord {
            epoch,
            split: Split::Test,
            mse: t.recon,
            kl: t.kl,
            total: t.total,
            seconds: if wall { test_started.elapsed().as_secs_f64() } else { 0.0 },
            circuit_evals: test_items.len() * forward_circuit_evals(&self.state.model),
        };
        self.state.epochs_done = epoch;
        self.state.history.extend([train, test]);
        Ok([train, test])
    }

    /// Runs until `epochs` epochs have been completed in total.
    pub fn run_until(&mut self, epochs: usize) -> Result<()> {
        while self.state.epochs_done < epochs {
            self.run_epoch()?;
        }
        Ok(())
    }
}
