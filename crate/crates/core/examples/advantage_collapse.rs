//! The learning cliff in numbers: an all-failure group has zero advantages
//! and therefore zero gradient; swapping in one hinted success restores both.
//!
//! ```text
//! cargo run --example advantage_collapse
//! ```

use grpo_scaffold::grpo::{batch_surrogate, group_advantages, RolloutGroup, DEFAULT_EPS_STD};
use grpo_scaffold::policy::{ParamIndex, PolicyParams, PromptContext, RolloutPolicy};
use grpo_scaffold::problem::{generate_bank, DifficultyMix, Granularity};
use grpo_scaffold::rng;
use grpo_scaffold::scaffold::{augment_group, search_hints};

fn main() -> grpo_scaffold::Result<()> {
    for k in 0..=8usize {
        let rewards: Vec<f64> = (0..8).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
        let adv = group_advantages(&rewards, DEFAULT_EPS_STD)?;
        println!(
            "{k}/8 successes: mean {:.3} std {:.3} A(success) {:>8.4} A(failure) {:>8.4}",
            adv.mean, adv.std, adv.values[0], adv.values[7]
        );
    }

    let bank = generate_bank(1, 4, 8, 4, DifficultyMix::new(0.0, 0.0, 1.0)?)?;
    let mut params = PolicyParams::from_bank(&bank);
    // A policy that has learned to follow exact hints. At initialization the
    // constraint weights are zero and hints change nothing.
    params.set(
        ParamIndex::Constraint {
            granularity: Granularity::Exact,
            consistent: true,
        },
        4.0,
    );
    let problem = bank.get(0)?;
    let mut stream = rng::stream(5, &[0]);
    let bare = PromptContext::bare(problem.id);
    let trajectories = (0..8)
        .map(|_| params.rollout(problem, &bare, &mut stream))
        .collect::<grpo_scaffold::Result<Vec<_>>>()?;
    let group = RolloutGroup::new(problem.id, trajectories);
    let adv = group_advantages(&group.rewards(), DEFAULT_EPS_STD)?;
    let report = batch_surrogate(std::slice::from_ref(&group), &[adv], &params, &params, 0.2)?;
    println!(
        "\nhard problem, 8 failures: J = {:.4} |grad| = {:.4} ({} non-zero entries)",
        report.objective,
        report.gradient.norm(),
        report.gradient.len()
    );

    let outcome = search_hints(problem, &params, &mut rng::stream(5, &[1]), 4)?;
    let Some(hint) = outcome.hint() else {
        println!("no hint unlocked this problem; the group stays a cliff");
        return Ok(());
    };
    println!("hint used: {hint} after {} attempts", outcome.attempts_made);
    let augmented = augment_group(&group, &outcome, &mut rng::stream(5, &[2]))?;
    let adv = group_advantages(&augmented.rewards(), DEFAULT_EPS_STD)?;
    let report = batch_surrogate(
        std::slice::from_ref(&augmented),
        std::slice::from_ref(&adv),
        &params,
        &params,
        0.2,
    )?;
    println!(
        "augmented (slot {}): mean {:.3} std {:.3} |grad| = {:.4}",
        augmented.augmented_index.expect("augmented"),
        adv.mean,
        adv.std,
        report.gradient.norm()
    );
    Ok(())
}
