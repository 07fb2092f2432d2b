use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::policy::{PromptContext, RolloutPolicy};
use crate::problem::{Problem, ProblemBank};
use crate::rng::{self, TAG_FILTER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterCategory {
    /// Every sample succeeded; always discarded.
    TooEasy,
    /// Some but not all samples succeeded; kept with the subsample probability.
    PotentiallySolvable,
    /// No sample succeeded; always kept.
    TooHard,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterEntry {
    pub source_id: usize,
    pub successes: usize,
    pub category: FilterCategory,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredBank {
    /// Kept problems, re-numbered densely in source order.
    pub bank: ProblemBank,
    /// `source_ids[i]` is the original id of `bank.problems[i]`.
    pub source_ids: Vec<usize>,
    pub report: Vec<FilterEntry>,
}

impl FilteredBank {
    pub fn count(&self, category: FilterCategory) -> usize {
        self.report
            .iter()
            .filter(|e| e.category == category)
            .count()
    }

    pub fn kept(&self, category: FilterCategory) -> usize {
        self.report
            .iter()
            .filter(|e| e.category == category && e.kept)
            .count()
    }
}

/// Difficulty filter run with the initial policy.
///
/// Each problem gets `samples` bare rollouts from its own stream; the
/// keep/discard draw for partially solved problems comes from the same
/// stream afterwards.
pub fn filter_bank<P: RolloutPolicy>(
    bank: &ProblemBank,
    policy: &P,
    seed: u64,
    samples: usize,
    subsample: f64,
) -> Result<FilteredBank> {
    if samples == 0 {
        return Err(Error::Precondition(
            "samples_per_problem must be >= 1".into(),
        ));
    }
    if !(0.0..=1.0).contains(&subsample) {
        return Err(Error::Precondition(format!(
            "subsample {subsample} outside [0, 1]"
        )));
    }
    let mut report = Vec::with_capacity(bank.len());
    let mut kept: Vec<Problem> = Vec::new();
    let mut source_ids = Vec::new();
    for problem in &bank.problems {
        let mut rng = rng::stream(seed, &[TAG_FILTER, problem.id as u64]);
        let ctx = PromptContext::bare(problem.id);
        let mut successes = 0;
        for _ in 0..samples {
            if policy.rollout(problem, &ctx, &mut rng)?.reward == 1.0 {
                successes += 1;
            }
        }
        let (category, keep) = if successes == samples {
            (FilterCategory::TooEasy, false)
        } else if successes == 0 {
            (FilterCategory::TooHard, true)
        } else {
            (
                FilterCategory::PotentiallySolvable,
                rng.gen::<f64>() < subsample,
            )
        };
        if keep {
            source_ids.push(problem.id);
            kept.push(Problem {
                id: kept.len(),
                ..problem.clone()
            });
        }
        report.push(FilterEntry {
            source_id: problem.id,
            successes,
            category,
            kept: keep,
        });
    }
    if kept.is_empty() {
        return Err(Error::EmptyFilter);
    }
    Ok(FilteredBank {
        bank: ProblemBank::new(kept, bank.bank_seed)?,
        source_ids,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::PolicyParams;
    use crate::problem::{generate_bank, DifficultyMix};

    fn bank() -> ProblemBank {
        generate_bank(11, 120, 8, 4, DifficultyMix::new(0.25, 0.5, 0.25).unwrap()).unwrap()
    }

    #[test]
    fn categories_follow_success_counts() {
        let b = bank();
        let f = filter_bank(&b, &PolicyParams::from_bank(&b), 5, 8, 0.5).unwrap();
        assert_eq!(f.report.len(), b.len());
        for e in &f.report {
            match e.category {
                FilterCategory::TooEasy => assert!(!e.kept && e.successes == 8),
                FilterCategory::TooHard => assert!(e.kept && e.successes == 0),
                FilterCategory::PotentiallySolvable => assert!((1..8).contains(&e.successes)),
            }
        }
        for (i, p) in f.bank.problems.iter().enumerate() {
            assert_eq!(p.id, i);
            let src = &b.problems[f.source_ids[i]];
            assert_eq!((&p.answer, p.beta), (&src.answer, src.beta));
        }
    }

    #[test]
    fn zero_subsample_keeps_only_too_hard() {
        let b = bank();
        let f = filter_bank(&b, &PolicyParams::from_bank(&b), 5, 8, 0.0).unwrap();
        assert_eq!(f.bank.len(), f.count(FilterCategory::TooHard));
    }

    #[test]
    fn deterministic() {
        let b = bank();
        let p = PolicyParams::from_bank(&b);
        assert_eq!(
            filter_bank(&b, &p, 9, 8, 0.5).unwrap(),
            filter_bank(&b, &p, 9, 8, 0.5).unwrap()
        );
    }

    #[test]
    fn all_easy_bank_is_empty_error() {
        let b = generate_bank(1, 10, 8, 4, DifficultyMix::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        let mut p = PolicyParams::from_bank(&b);
        for v in p.values_mut() {
            *v *= 10.0;
        }
        assert!(matches!(
            filter_bank(&b, &p, 0, 8, 0.5),
            Err(Error::EmptyFilter)
        ));
    }
}
