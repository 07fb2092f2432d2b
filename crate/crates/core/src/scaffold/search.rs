use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::policy::{PromptContext, RolloutPolicy, Trajectory};
use crate::problem::{HintCategory, HintRef, Problem, HINT_LEVELS};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq)]
pub enum SearchResult {
    Found {
        hint: HintRef,
        trajectory: Trajectory,
    },
    Intractable {
        last_tried: HintRef,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HintSearchOutcome {
    pub result: SearchResult,
    pub attempts_made: usize,
}

impl HintSearchOutcome {
    pub fn hint(&self) -> Option<HintRef> {
        match &self.result {
            SearchResult::Found { hint, .. } => Some(*hint),
            SearchResult::Intractable { .. } => None,
        }
    }
}

/// Which hints the search may use, and in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HintSchedule {
    /// Knowledge, planning, solution; levels 1..=4 within each.
    Full,
    SolutionOnly,
    WithoutKnowledge,
    WithoutPlanning,
    WithoutSolution,
    /// Level 4 of each tier directly, tiers in the usual order.
    NonIncremental,
}

impl HintSchedule {
    pub fn categories(self) -> &'static [HintCategory] {
        use HintCategory::*;
        match self {
            HintSchedule::Full | HintSchedule::NonIncremental => &[Knowledge, Planning, Solution],
            HintSchedule::SolutionOnly => &[Solution],
            HintSchedule::WithoutKnowledge => &[Planning, Solution],
            HintSchedule::WithoutPlanning => &[Knowledge, Solution],
            HintSchedule::WithoutSolution => &[Knowledge, Planning],
        }
    }

    pub fn order(self) -> Vec<HintRef> {
        let levels: Vec<usize> = if self == HintSchedule::NonIncremental {
            vec![HINT_LEVELS]
        } else {
            (1..=HINT_LEVELS).collect()
        };
        self.categories()
            .iter()
            .flat_map(|&c| {
                levels
                    .iter()
                    .map(move |&l| HintRef::new(c, l).expect("valid level"))
            })
            .collect()
    }
}

/// Searches the full hierarchy in knowledge, planning, solution order.
pub fn search_hints<P: RolloutPolicy + ?Sized>(
    problem: &Problem,
    policy: &P,
    rng: &mut StreamRng,
    attempts_per_level: usize,
) -> Result<HintSearchOutcome> {
    search_hints_in_order(
        problem,
        policy,
        &HintSchedule::Full.order(),
        rng,
        attempts_per_level,
    )
}

/// Tries each hint of `order` up to `attempts_per_level` times and returns
/// the first success.
pub fn search_hints_in_order<P: RolloutPolicy + ?Sized>(
    problem: &Problem,
    policy: &P,
    order: &[HintRef],
    rng: &mut StreamRng,
    attempts_per_level: usize,
) -> Result<HintSearchOutcome> {
    let mut attempts_made = 0;
    for &hint in order {
        let ctx = PromptContext::hinted(problem, hint);
        for _ in 0..attempts_per_level {
            attempts_made += 1;
            let trajectory = policy.rollout(problem, &ctx, rng)?;
            if trajectory.reward == 1.0 {
                return Ok(HintSearchOutcome {
                    result: SearchResult::Found { hint, trajectory },
                    attempts_made,
                });
            }
        }
    }
    let last_tried = *order
        .last()
        .unwrap_or(&HintRef::new(HintCategory::Solution, HINT_LEVELS)?);
    Ok(HintSearchOutcome {
        result: SearchResult::Intractable { last_tried },
        attempts_made,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Granularity;
    use crate::rng;
    use std::sync::Mutex;

    /// Records every hint it sees and succeeds according to `rule`.
    struct Scripted<F: Fn(&PromptContext) -> bool + Sync> {
        rule: F,
        seen: Mutex<Vec<Option<HintRef>>>,
    }

    impl<F: Fn(&PromptContext) -> bool + Sync> Scripted<F> {
        fn new(rule: F) -> Self {
            Self {
                rule,
                seen: Mutex::new(Vec::new()),
            }
        }
    }

    impl<F: Fn(&PromptContext) -> bool + Sync> RolloutPolicy for Scripted<F> {
        fn rollout(
            &self,
            problem: &Problem,
            ctx: &PromptContext,
            _rng: &mut StreamRng,
        ) -> Result<Trajectory> {
            self.seen.lock().unwrap().push(ctx.hint);
            let ok = (self.rule)(ctx);
            Ok(Trajectory {
                context: ctx.clone(),
                tokens: problem.answer.clone(),
                behavior_logprobs: vec![-1.0; problem.length],
                reward: if ok { 1.0 } else { 0.0 },
            })
        }
    }

    fn problem() -> Problem {
        Problem {
            id: 0,
            alphabet: 8,
            length: 4,
            answer: vec![5, 0, 7, 2],
            beta: 0.0,
        }
    }

    #[test]
    fn exact_at_position_zero() {
        let policy = Scripted::new(|ctx: &PromptContext| {
            ctx.constraints
                .iter()
                .any(|c| c.position == 0 && c.granularity == Granularity::Exact)
        });
        for attempts in [1, 3] {
            let out =
                search_hints(&problem(), &policy, &mut rng::stream(0, &[]), attempts).unwrap();
            assert_eq!(
                out.hint(),
                Some(HintRef::new(HintCategory::Solution, 1).unwrap())
            );
            assert_eq!(out.attempts_made, 8 * attempts + 1);
        }
    }

    #[test]
    fn always_failing_is_intractable() {
        let policy = Scripted::new(|_: &PromptContext| false);
        let out = search_hints(&problem(), &policy, &mut rng::stream(0, &[]), 2).unwrap();
        assert_eq!(out.hint(), None);
        assert_eq!(out.attempts_made, 24);
    }

    #[test]
    fn any_parity_hint_stops_at_knowledge_one() {
        let policy = Scripted::new(|ctx: &PromptContext| {
            ctx.constraints
                .iter()
                .any(|c| c.granularity == Granularity::Parity)
        });
        let out = search_hints(&problem(), &policy, &mut rng::stream(0, &[]), 1).unwrap();
        assert_eq!(
            out.hint(),
            Some(HintRef::new(HintCategory::Knowledge, 1).unwrap())
        );
        assert_eq!(out.attempts_made, 1);
    }

    #[test]
    fn visits_pairs_in_fixed_order() {
        let policy = Scripted::new(|_: &PromptContext| false);
        search_hints(&problem(), &policy, &mut rng::stream(0, &[]), 1).unwrap();
        let seen: Vec<HintRef> = policy
            .seen
            .into_inner()
            .unwrap()
            .into_iter()
            .flatten()
            .collect();
        assert_eq!(seen, HintSchedule::Full.order());
        let labels: Vec<String> = seen.iter().map(|h| h.to_string()).collect();
        assert_eq!(labels[0], "knowledge/1");
        assert_eq!(labels[4], "planning/1");
        assert_eq!(labels[11], "solution/4");
    }

    #[test]
    fn schedule_orders() {
        assert_eq!(HintSchedule::Full.order().len(), 12);
        assert!(HintSchedule::SolutionOnly
            .order()
            .iter()
            .all(|h| h.category == HintCategory::Solution));
        assert_eq!(HintSchedule::WithoutPlanning.order().len(), 8);
        let non_inc = HintSchedule::NonIncremental.order();
        assert_eq!(non_inc.len(), 3);
        assert!(non_inc.iter().all(|h| h.level() == 4));
    }
}
