use crate::error::{Error, Result};
use crate::policy::{PolicyParams, PromptContext};
use crate::problem::{verify, ProblemBank};

/// Greedy, hint-free pass@1 over every problem of `bank`.
pub fn evaluate(params: &PolicyParams, bank: &ProblemBank) -> Result<f64> {
    if bank.is_empty() {
        return Err(Error::Precondition("evaluation bank is empty".into()));
    }
    let mut solved = 0usize;
    for problem in &bank.problems {
        let tokens = params.greedy_decode(&PromptContext::bare(problem.id))?;
        if verify(problem, &tokens)? == 1.0 {
            solved += 1;
        }
    }
    Ok(solved as f64 / bank.len() as f64)
}
