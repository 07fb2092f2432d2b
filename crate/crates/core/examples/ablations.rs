//! Runs all eight variants on a 50-problem bank and prints the summary table.
//!
//! ```text
//! cargo run --release --example ablations -- [steps]
//! ```

use grpo_scaffold::harness::{compare, TrainConfig, Variant};
use grpo_scaffold::problem::{generate_bank, DifficultyMix};

fn main() -> grpo_scaffold::Result<()> {
    let steps: u64 = std::env::args()
        .nth(1)
        .map_or(100, |s| s.parse().expect("steps"));
    let bank = generate_bank(5, 50, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25)?)?;
    let base = TrainConfig {
        total_steps: steps,
        ..TrainConfig::default()
    };
    let configs: Vec<TrainConfig> = Variant::ALL.iter().map(|&v| base.with_variant(v)).collect();
    let table = compare(&configs, &bank)?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
