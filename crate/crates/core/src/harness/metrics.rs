use serde::{Deserialize, Serialize};

use crate::moldata::Split;
use crate::numfmt::sig9;

pub const METRICS_HEADER: &str = "epoch,split,mse,kl,total,seconds,circuit_evals";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// 1-based.
    pub epoch: usize,
    pub split: Split,
    pub mse: f64,
    pub kl: f64,
    pub total: f64,
    pub seconds: f64,
    pub circuit_evals: usize,
}

impl MetricsRecord {
    /// The CSV fields after `epoch`, without a newline.
    pub fn csv_fields(&self) -> String {
        let split = match self.split {
            Split::Train => "train",
            Split::Test => "test",
        };
        format!(
            "{},{},{},{},{},{}",
            split,
            sig9(self.mse),
            sig9(self.kl),
            sig9(self.total),
            sig9(self.seconds),
            self.circuit_evals
        )
    }

    pub fn csv_line(&self) -> String {
        format!("{},{}\n", self.epoch, self.csv_fields())
    }
}

pub fn metrics_csv(records: &[MetricsRecord]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in records {
        out.push_str(&r.csv_line());
    }
    out
}
