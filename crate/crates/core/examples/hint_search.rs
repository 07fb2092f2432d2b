//! Runs the hint search on every hard problem of a small bank and reports the
//! least concrete hint that worked. Hints act through shared constraint
//! weights that start at zero, so the policy first trains for a few steps
//! with hints enabled from the start.
//!
//! ```text
//! cargo run --example hint_search -- [attempts_per_level]
//! ```

use grpo_scaffold::harness::{train, TrainConfig, Variant};
use grpo_scaffold::problem::{generate_bank, DifficultyMix};
use grpo_scaffold::rng;
use grpo_scaffold::scaffold::{search_hints, SearchResult};

fn main() -> grpo_scaffold::Result<()> {
    let attempts: usize = std::env::args()
        .nth(1)
        .map_or(4, |s| s.parse().expect("attempts"));
    let bank = generate_bank(2, 40, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25)?)?;
    let warmup = TrainConfig {
        variant: Variant::NoPhase1,
        total_steps: 40,
        ..TrainConfig::default()
    };
    let params = train(&warmup, &bank)?.params;

    let mut found = 0;
    let mut hard = 0;
    for problem in bank.problems.iter().filter(|p| p.beta == 0.0) {
        hard += 1;
        let outcome = search_hints(
            problem,
            &params,
            &mut rng::stream(9, &[problem.id as u64]),
            attempts,
        )?;
        match &outcome.result {
            SearchResult::Found { hint, trajectory } => {
                found += 1;
                println!(
                    "#{:<3} solved with {:<13} after {:>2} attempts, tokens {:?}",
                    problem.id,
                    hint.to_string(),
                    outcome.attempts_made,
                    trajectory.tokens
                );
            }
            SearchResult::Intractable { last_tried } => {
                println!("#{:<3} intractable (last tried {last_tried})", problem.id);
            }
        }
    }
    println!("{found}/{hard} hard problems unlocked with {attempts} attempt(s) per level");
    Ok(())
}
