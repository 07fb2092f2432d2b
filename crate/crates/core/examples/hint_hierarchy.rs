//! Shows the three-tier hint hierarchy of one problem and how each
//! cumulative hint changes the initial policy's chance of solving it.
//!
//! ```text
//! cargo run --example hint_hierarchy
//! ```

use grpo_scaffold::policy::{PolicyParams, PromptContext};
use grpo_scaffold::problem::{
    generate_bank, DifficultyMix, HintCategory, HintHierarchy, HintRef, HINT_LEVELS,
};

fn main() -> grpo_scaffold::Result<()> {
    let bank = generate_bank(7, 12, 8, 4, DifficultyMix::new(0.0, 1.0, 0.0)?)?;
    let mut params = PolicyParams::from_bank(&bank);
    // Give the shared constraint feature some weight, as training would.
    let shape = params.shape();
    for (i, w) in [0.0, 1.5, 0.0, 2.0, 0.0, 3.0].into_iter().enumerate() {
        params.values_mut()[shape.len() - 6 + i] = w;
    }

    let problem = bank.get(0)?;
    let hierarchy = HintHierarchy::for_problem(problem);
    println!(
        "problem #{} answer {:?} beta {:.3}",
        problem.id, problem.answer, problem.beta
    );
    let bare = params.success_probability(problem, &PromptContext::bare(problem.id))?;
    println!("bare prompt: P(solve) = {bare:.4}");

    for category in HintCategory::ALL {
        for level in 1..=HINT_LEVELS {
            let hint = HintRef::new(category, level)?;
            let item = hierarchy.item(hint);
            let p = params.success_probability(problem, &PromptContext::hinted(problem, hint))?;
            println!(
                "{:<12} adds position {} class {} ({:?})  P(solve) = {p:.4}",
                hint.to_string(),
                item.position,
                item.value,
                item.granularity
            );
        }
    }
    Ok(())
}
