use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Column order of the metrics table.
pub const METRICS_HEADER: [&str; 10] = [
    "step",
    "zero_reward_groups",
    "cliffs_intervened",
    "hints_knowledge",
    "hints_planning",
    "hints_solution",
    "intractable",
    "mean_train_reward",
    "clip_fraction",
    "val_pass1",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub zero_reward_groups: usize,
    pub cliffs_intervened: usize,
    pub hints_knowledge: usize,
    pub hints_planning: usize,
    pub hints_solution: usize,
    pub intractable: usize,
    pub mean_train_reward: f64,
    pub clip_fraction: f64,
    /// Present only on evaluation steps.
    pub val_pass1: Option<f64>,
}

impl MetricsRow {
    pub fn hints_total(&self) -> usize {
        self.hints_knowledge + self.hints_planning + self.hints_solution
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsLog {
    pub rows: Vec<MetricsRow>,
}

impl MetricsLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: MetricsRow) {
        debug_assert!(self.rows.last().is_none_or(|last| last.step < row.step));
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&MetricsRow> {
        self.rows.last()
    }

    /// `(step, pass@1)` for every evaluated step.
    pub fn evaluations(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.rows
            .iter()
            .filter_map(|r| r.val_pass1.map(|v| (r.step, v)))
    }

    pub fn final_pass1(&self) -> Option<f64> {
        self.evaluations().last().map(|(_, v)| v)
    }

    pub fn best_pass1(&self) -> Option<f64> {
        self.evaluations().map(|(_, v)| v).reduce(f64::max)
    }

    /// Mean zero-reward group count over the last `n` rows.
    pub fn tail_zero_reward_mean(&self, n: usize) -> Option<f64> {
        let tail = &self.rows[self.rows.len().saturating_sub(n)..];
        if tail.is_empty() {
            return None;
        }
        Some(
            tail.iter()
                .map(|r| r.zero_reward_groups as f64)
                .sum::<f64>()
                / tail.len() as f64,
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        writer.write_record(METRICS_HEADER)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let header = reader.headers()?.clone();
        if header.iter().ne(METRICS_HEADER) {
            return Err(crate::error::Error::Precondition(format!(
                "unexpected metrics header: {}",
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = reader
            .deserialize()
            .collect::<std::result::Result<Vec<MetricsRow>, _>>()?;
        Ok(Self { rows })
    }
}

pub fn emit_metrics(log: &MetricsLog, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    log.write_csv(std::io::BufWriter::new(file))
}

pub fn parse_metrics(path: impl AsRef<Path>) -> Result<MetricsLog> {
    MetricsLog::read_csv(std::fs::File::open(path)?)
}
