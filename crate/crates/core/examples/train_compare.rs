//! Trains plain GRPO and the scaffolded variant on the same bank and seeds,
//! prints a summary and writes metrics plus an overlay plot.
//!
//! ```text
//! cargo run --release --example train_compare -- [seed] [out_dir]
//! ```

use std::path::PathBuf;

use grpo_scaffold::harness::{compare, emit_metrics, emit_plot, PlotRun, TrainConfig, Variant};
use grpo_scaffold::problem::{generate_bank, DifficultyMix};

fn main() -> grpo_scaffold::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args
        .next()
        .map_or(0, |s| s.parse().expect("seed must be an integer"));
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "target/train_compare".into()));
    std::fs::create_dir_all(&out_dir)?;

    let bank = generate_bank(seed, 200, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25)?)?;
    let base = TrainConfig {
        bank_seed: seed,
        rollout_seed: seed.wrapping_add(1),
        scaffold_seed: seed.wrapping_add(2),
        replacement_seed: seed.wrapping_add(3),
        ..TrainConfig::default()
    };
    let configs = [
        base.with_variant(Variant::VanillaGrpo),
        base.with_variant(Variant::ScafFull),
    ];
    let result = compare(&configs, &bank)?;

    println!(
        "{:<14} {:>8} {:>8} {:>10} {:>6} {:>6} {:>6} {:>6} {:>8}",
        "variant", "final@1", "best@1", "tail_zero", "K", "P", "S", "intr", "ex_end"
    );
    for row in &result.rows {
        println!(
            "{:<14} {:>8.3} {:>8.3} {:>10.2} {:>6} {:>6} {:>6} {:>6} {:>8}",
            row.variant.as_str(),
            row.final_pass1,
            row.best_pass1,
            row.tail_zero_reward_mean,
            row.hints_knowledge,
            row.hints_planning,
            row.hints_solution,
            row.intractable,
            row.exemption_ended_at
                .map_or("-".to_string(), |s| s.to_string()),
        );
    }

    for (config, run) in configs.iter().zip(&result.runs) {
        emit_metrics(&run.log, out_dir.join(format!("{}.csv", config.variant)))?;
    }
    let runs: Vec<PlotRun> = configs
        .iter()
        .zip(&result.runs)
        .map(|(c, r)| PlotRun {
            label: c.variant.as_str(),
            log: &r.log,
        })
        .collect();
    emit_plot(&runs, out_dir.join("curves.svg"))?;
    println!("wrote {}", out_dir.display());
    Ok(())
}
