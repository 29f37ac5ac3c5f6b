//! Experiment driver: configuration, the training loop, checkpoints, and
//! the commands behind the `sqvae` binary.

mod checkpoint;
mod commands;
mod config;
mod metrics;
mod trainer;

pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use commands::*;
pub use config::{layer, preset, read_config_file, take, TrainConfig, DEPTH_SWEEP_LR, LR_GRID};
pub use metrics::{metrics_csv, MetricsRecord, METRICS_HEADER};
pub use trainer::{evaluate_items, forward_circuit_evals, load_raw, prepare, prepare_data, PreparedData, Trainer};
