//! Experiment driver: bank filtering, training, evaluation, metrics, plots
//! and ablation comparisons.

pub mod compare;
pub mod config;
pub mod evaluate;
pub mod filter;
pub mod metrics;
pub mod plot;
pub mod train;

pub use compare::{compare, Comparison, SummaryRow};
pub use config::{TrainConfig, Variant};
pub use evaluate::evaluate;
pub use filter::{filter_bank, FilterCategory, FilterEntry, FilteredBank};
pub use metrics::{emit_metrics, parse_metrics, MetricsLog, MetricsRow, METRICS_HEADER};
pub use plot::{emit_plot, render_plot, PlotRun};
pub use train::{train, training_bank, TrainOutcome, Trainer};

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::scaffold::ScaffoldEvent;

/// Writes one JSON object per line.
pub fn write_events<W: Write>(events: &[ScaffoldEvent], mut out: W) -> Result<()> {
    for e in events {
        let line = serde_json::to_string(e)
            .map_err(|err| crate::error::Error::Numeric(err.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_events(events: &[ScaffoldEvent], path: impl AsRef<Path>) -> Result<()> {
    write_events(
        events,
        std::io::BufWriter::new(std::fs::File::create(path)?),
    )
}
