use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::{TrainConfig, Variant};
use crate::harness::train::{train, TrainOutcome};
use crate::problem::{HintCategory, ProblemBank, HINT_LEVELS};

/// Rows over which the tail zero-reward mean is taken.
pub const TAIL_WINDOW: usize = 20;

/// One line of the ablation table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variant: Variant,
    pub final_pass1: f64,
    pub best_pass1: f64,
    pub final_zero_reward_groups: usize,
    pub tail_zero_reward_mean: f64,
    pub hints_knowledge: u64,
    pub hints_planning: u64,
    pub hints_solution: u64,
    pub hints_level1: u64,
    pub hints_level2: u64,
    pub hints_level3: u64,
    pub hints_level4: u64,
    pub intractable: u64,
    /// First step whose batch received a hint search, if any.
    pub first_hint_step: Option<u64>,
    /// Step at which the exemption period ended (0 when disabled).
    pub exemption_ended_at: Option<u64>,
}

impl SummaryRow {
    pub fn from_outcome(variant: Variant, outcome: &TrainOutcome) -> Self {
        let log = &outcome.log;
        let (by_level, by_tier, intractable, ended) = match &outcome.scaffold {
            Some(s) => {
                let mut by_level = [0u64; HINT_LEVELS];
                for tier in &s.hints_used {
                    for (l, n) in tier.iter().enumerate() {
                        by_level[l] += n;
                    }
                }
                let by_tier = HintCategory::ALL.map(|c| s.hints_in(c));
                (
                    by_level,
                    by_tier,
                    s.intractable_count,
                    s.exemption.ended_at(),
                )
            }
            None => ([0; HINT_LEVELS], [0; 3], 0, None),
        };
        Self {
            variant,
            final_pass1: log.final_pass1().unwrap_or(0.0),
            best_pass1: log.best_pass1().unwrap_or(0.0),
            final_zero_reward_groups: log.last().map_or(0, |r| r.zero_reward_groups),
            tail_zero_reward_mean: log.tail_zero_reward_mean(TAIL_WINDOW).unwrap_or(0.0),
            hints_knowledge: by_tier[0],
            hints_planning: by_tier[1],
            hints_solution: by_tier[2],
            hints_level1: by_level[0],
            hints_level2: by_level[1],
            hints_level3: by_level[2],
            hints_level4: by_level[3],
            intractable,
            first_hint_step: log
                .rows
                .iter()
                .find(|r| r.cliffs_intervened > 0)
                .map(|r| r.step),
            exemption_ended_at: ended,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<SummaryRow>,
    pub runs: Vec<TrainOutcome>,
}

impl Comparison {
    pub fn row(&self, variant: Variant) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Runs every config on `bank` and summarizes each run. Configs must agree
/// on everything except the variant.
pub fn compare(configs: &[TrainConfig], bank: &ProblemBank) -> Result<Comparison> {
    let Some(first) = configs.first() else {
        return Err(Error::Precondition("no configs to compare".into()));
    };
    for (i, c) in configs.iter().enumerate() {
        if c.with_variant(first.variant) != *first {
            return Err(Error::Config(format!(
                "config {i} differs from config 0 in more than the variant"
            )));
        }
    }
    let runs = configs
        .par_iter()
        .map(|c| train(c, bank))
        .collect::<Result<Vec<_>>>()?;
    let rows = configs
        .iter()
        .zip(&runs)
        .map(|(c, run)| SummaryRow::from_outcome(c.variant, run))
        .collect();
    Ok(Comparison { rows, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate_bank, DifficultyMix};

    #[test]
    fn mismatched_configs_rejected() {
        let bank =
            generate_bank(0, 10, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap();
        let a = TrainConfig::default();
        let b = TrainConfig {
            lr: 0.1,
            ..TrainConfig::default().with_variant(Variant::VanillaGrpo)
        };
        assert!(matches!(compare(&[a, b], &bank), Err(Error::Config(_))));
        assert!(compare(&[], &bank).is_err());
    }

    #[test]
    fn summary_table_has_one_row_per_variant() {
        let bank =
            generate_bank(0, 16, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap();
        let base = TrainConfig {
            total_steps: 6,
            prompts_per_batch: 4,
            eval_interval: 3,
            ..TrainConfig::default()
        };
        let configs: Vec<_> = [Variant::VanillaGrpo, Variant::NoPhase1]
            .iter()
            .map(|&v| base.with_variant(v))
            .collect();
        let cmp = compare(&configs, &bank).unwrap();
        assert_eq!(cmp.rows.len(), 2);
        let vanilla = cmp.row(Variant::VanillaGrpo).unwrap();
        assert_eq!(
            vanilla.hints_knowledge + vanilla.hints_planning + vanilla.hints_solution,
            0
        );
        assert_eq!(
            cmp.row(Variant::NoPhase1).unwrap().exemption_ended_at,
            Some(0)
        );
        let mut buf = Vec::new();
        cmp.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("variant,final_pass1,"));
        assert_eq!(text.lines().count(), 3);
    }
}
