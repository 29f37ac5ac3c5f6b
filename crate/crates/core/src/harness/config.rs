//! Training configuration and the preset < config file < flags layering.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, Variant};
use crate::moldata::SynthKind;

/// One training run. Serialized keys are the CLI flag names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    pub seed: u64,
    #[serde(default = "one")]
    pub patches: usize,
    /// Entangling layers per circuit; defaults per variant.
    #[serde(default)]
    pub layers: Option<usize>,
    #[serde(default)]
    pub latent_dim: Option<usize>,
    #[serde(default)]
    pub hidden: Option<Vec<usize>>,
    /// Expected feature width; checked against the data when set.
    #[serde(default)]
    pub feature_dim: Option<usize>,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_classical_lr")]
    pub classical_lr: f64,
    #[serde(default = "default_quantum_lr")]
    pub quantum_lr: f64,
    /// Dataset file in the text format.
    #[serde(default)]
    pub data: Option<PathBuf>,
    /// Synthetic data (`qm9`, `ligand`, `blobs:<dim>`), used when `data` is unset.
    #[serde(default = "default_synth")]
    pub synth: Option<String>,
    #[serde(default = "default_synth_count")]
    pub synth_count: usize,
    #[serde(default)]
    pub l1_normalize: bool,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Record real epoch durations; otherwise `seconds` is written as 0 so
    /// that reruns are byte-identical.
    #[serde(default)]
    pub wall_clock: bool,
}

fn one() -> usize {
    1
}
fn default_epochs() -> usize {
    20
}
fn default_batch() -> usize {
    32
}
fn default_classical_lr() -> f64 {
    0.01
}
fn default_quantum_lr() -> f64 {
    0.03
}
fn default_synth() -> Option<String> {
    Some("qm9".into())
}
fn default_synth_count() -> usize {
    64
}
fn default_train_fraction() -> f64 {
    0.85
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Learning rate shared by both groups in depth sweeps.
pub const DEPTH_SWEEP_LR: f64 = 0.001;
/// Rates examined for both groups in learning-rate sweeps.
pub const LR_GRID: [f64; 5] = [0.001, 0.003, 0.01, 0.03, 0.1];

impl TrainConfig {
    /// Defaults everywhere, on synthetic QM9-style data.
    pub fn new(variant: Variant, seed: u64) -> Self {
        Self {
            variant,
            seed,
            patches: 1,
            layers: None,
            latent_dim: None,
            hidden: None,
            feature_dim: None,
            epochs: default_epochs(),
            batch_size: default_batch(),
            classical_lr: default_classical_lr(),
            quantum_lr: default_quantum_lr(),
            data: None,
            synth: default_synth(),
            synth_count: default_synth_count(),
            l1_normalize: false,
            train_fraction: default_train_fraction(),
            out: default_out(),
            wall_clock: false,
        }
    }

    pub fn model_spec(&self, feature_dim: usize) -> ModelSpec {
        let mut spec = ModelSpec::new(self.variant, feature_dim).with_patches(self.patches);
        if let Some(l) = self.layers {
            spec = spec.with_layers(l);
        }
        if let Some(h) = &self.hidden {
            spec = spec.with_hidden(h.clone());
        }
        if let Some(l) = self.latent_dim {
            spec = spec.with_latent_dim(l);
        }
        spec
    }

    pub fn synth_kind(&self) -> Result<Option<SynthKind>> {
        self.synth.as_deref().map(SynthKind::parse).transpose()
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Argument("batch size must be positive".into()));
        }
        if self.data.is_none() && self.synth.is_none() {
            return Err(Error::Usage("no data: pass --data <file> or --synth <kind>".into()));
        }
        self.synth_kind()?;
        for (name, lr) in [("classical-lr", self.classical_lr), ("quantum-lr", self.quantum_lr)] {
            if !(lr.is_finite() && lr >= 0.0) {
                return Err(Error::Argument(format!("{name} must be finite and nonnegative, got {lr}")));
            }
        }
        if self.synth_count == 0 && self.data.is_none() {
            return Err(Error::Argument("synth-count must be positive".into()));
        }
        Ok(())
    }

    /// Deserializes a fully layered table.
    pub fn from_table(mut table: Table) -> Result<Self> {
        for key in ["variant", "seed"] {
            if !table.contains_key(key) {
                return Err(Error::Usage(format!("--{key} is required")));
            }
        }
        // Integers written where floats are expected (`classical-lr = 1`).
        for key in ["classical-lr", "quantum-lr", "train-fraction"] {
            if let Some(Value::Integer(i)) = table.get(key) {
                let f = *i as f64;
                table.insert(key.into(), Value::Float(f));
            }
        }
        let cfg: Self = Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Usage(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Named desk-scale and full-scale configurations.
pub fn preset(name: &str) -> Result<Table> {
    let text = match name {
        // 64-dimensional baseline: 8×8 molecules, L1-normalized for amplitude embedding.
        "bq64" => {
            r#"
            variant = "fbq-ae"
            synth = "qm9"
            synth-count = 64
            l1-normalize = true
            epochs = 20
            classical-lr = 0.001
            quantum-lr = 0.001
            "#
        }
        "sq-mini" => {
            r#"
            variant = "sq-ae"
            synth = "qm9"
            synth-count = 64
            patches = 4
            layers = 5
            epochs = 10
            "#
        }
        // Long-running: 1024-dimensional ligands, one circuit per 256 features.
        "sq-full" => {
            r#"
            variant = "sq-vae"
            synth = "ligand"
            synth-count = 2492
            patches = 4
            layers = 5
            epochs = 20
            "#
        }
        _ => return Err(Error::Usage(format!("unknown preset `{name}` (bq64, sq-mini, sq-full)"))),
    };
    Ok(text.parse::<Table>().expect("preset tables are valid TOML"))
}

pub fn read_config_file(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.parse::<Table>()
        .map_err(|e| Error::Usage(format!("{}: {}", path.display(), e.message())))
}

fn overlay(base: &mut Table, top: Table) {
    for (k, v) in top {
        base.insert(k, v);
    }
}

/// Stacks `defaults`, the preset, the `config` file, then `flags`.
///
/// `preset` and `config` may appear in the flags or the file; a flag wins.
/// Both keys are removed from the result.
pub fn layer(defaults: Table, mut flags: Table) -> Result<Table> {
    let mut file = match flags.remove("config") {
        Some(Value::String(p)) => read_config_file(Path::new(&p))?,
        Some(other) => return Err(Error::Usage(format!("config must be a path, got {other}"))),
        None => Table::new(),
    };
    if file.contains_key("config") {
        return Err(Error::Usage("config files cannot include other config files".into()));
    }
    let preset_name = match (flags.remove("preset"), file.remove("preset")) {
        (Some(v), _) | (None, Some(v)) => Some(v),
        (None, None) => None,
    };
    let mut out = defaults;
    if let Some(name) = preset_name {
        let name = name.as_str().ok_or_else(|| Error::Usage("preset must be a name".into()))?.to_string();
        overlay(&mut out, preset(&name)?);
    }
    overlay(&mut out, file);
    overlay(&mut out, flags);
    Ok(out)
}

/// Removes and deserializes `key` from a layered table.
pub fn take<T: serde::de::DeserializeOwned>(table: &mut Table, key: &str) -> Result<Option<T>> {
    match table.remove(key) {
        None => Ok(None),
        Some(v) => v
            .try_into()
            .map(Some)
            .map_err(|e: toml::de::Error| Error::Usage(format!("{key}: {}", e.message()))),
    }
}
