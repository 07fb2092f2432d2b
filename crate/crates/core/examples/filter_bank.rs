//! Applies the 8-sample difficulty filter to a generated bank and prints the
//! per-category counts.
//!
//! ```text
//! cargo run --example filter_bank -- [seed]
//! ```

use grpo_scaffold::harness::{filter_bank, FilterCategory};
use grpo_scaffold::policy::PolicyParams;
use grpo_scaffold::problem::{generate_bank, DifficultyMix};

fn main() -> grpo_scaffold::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed"));
    let bank = generate_bank(seed, 300, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25)?)?;
    let initial = PolicyParams::from_bank(&bank);
    let filtered = filter_bank(&bank, &initial, seed, 8, 0.5)?;

    for category in [
        FilterCategory::TooEasy,
        FilterCategory::PotentiallySolvable,
        FilterCategory::TooHard,
    ] {
        println!(
            "{category:<20?} {:>4} seen {:>4} kept",
            filtered.count(category),
            filtered.kept(category)
        );
    }
    println!("{} of {} problems kept", filtered.bank.len(), bank.len());
    let mut histogram = [0usize; 9];
    for entry in &filtered.report {
        histogram[entry.successes] += 1;
    }
    println!("successes out of 8: {histogram:?}");
    Ok(())
}
