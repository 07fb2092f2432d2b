//! Trains briefly, saves a checkpoint, reloads it and evaluates greedy
//! pass@1 before and after training.
//!
//! ```text
//! cargo run --release --example checkpoint_eval
//! ```

use grpo_scaffold::checkpoint::{load_checkpoint, save_checkpoint};
use grpo_scaffold::harness::{evaluate, train, TrainConfig};
use grpo_scaffold::policy::PolicyParams;
use grpo_scaffold::problem::{generate_bank, DifficultyMix};

fn main() -> grpo_scaffold::Result<()> {
    let bank = generate_bank(8, 60, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25)?)?;
    let config = TrainConfig {
        total_steps: 60,
        ..TrainConfig::default()
    };
    println!(
        "initial pass@1 {:.3}",
        evaluate(&PolicyParams::from_bank(&bank), &bank)?
    );
    let outcome = train(&config, &bank)?;

    let path = std::env::temp_dir().join("grpo_scaffold_checkpoint_example.txt");
    save_checkpoint(&outcome.params, &outcome.optimizer, &path)?;
    let (params, optimizer) = load_checkpoint(&path)?;
    assert_eq!(params, outcome.params);
    println!(
        "checkpoint {} after {} optimizer steps",
        path.display(),
        optimizer.step
    );
    println!("trained pass@1 {:.3}", evaluate(&params, &bank)?);
    Ok(())
}
