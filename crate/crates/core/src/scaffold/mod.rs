//! Hint scaffolding around GRPO.
//!
//! Groups that contain a success pass through untouched. After the guidance
//! exemption period, a group in which every rollout failed triggers a search
//! through the hint hierarchy (knowledge, then planning, then solution; four
//! cumulative levels each). The first hinted rollout that succeeds replaces
//! one randomly chosen failed rollout, so the group again has reward variance.

mod exemption;
mod search;

pub use exemption::{ExemptionConfig, ExemptionMonitor};
pub use search::{
    search_hints, search_hints_in_order, HintSchedule, HintSearchOutcome, SearchResult,
};

use std::collections::BTreeSet;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grpo::RolloutGroup;
use crate::policy::RolloutPolicy;
use crate::problem::{HintCategory, ProblemBank, HINT_LEVELS};
use crate::rng::{self, StreamRng, TAG_REPLACE, TAG_SEARCH};

/// True iff every rollout in the group earned zero reward.
pub fn detect_cliff(group: &RolloutGroup) -> bool {
    group.is_cliff()
}

/// Replaces a uniformly chosen failed trajectory with the hint-guided success.
pub fn augment_group(
    group: &RolloutGroup,
    outcome: &HintSearchOutcome,
    rng: &mut StreamRng,
) -> Result<RolloutGroup> {
    if !detect_cliff(group) {
        return Err(Error::Precondition(format!(
            "group for problem {} has a success and must not be augmented",
            group.problem_id
        )));
    }
    let SearchResult::Found { trajectory, .. } = &outcome.result else {
        return Err(Error::Precondition(
            "hint search found no successful trajectory".into(),
        ));
    };
    if trajectory.reward != 1.0 || !trajectory.context.is_hinted() {
        return Err(Error::Precondition(
            "replacement must be a hinted trajectory with reward 1".into(),
        ));
    }
    if group.is_empty() {
        return Err(Error::Precondition("cannot augment an empty group".into()));
    }
    let j = rng.gen_range(0..group.len());
    let mut out = group.clone();
    out.trajectories[j] = trajectory.clone();
    out.augmented_index = Some(j);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaffoldConfig {
    pub exemption: ExemptionConfig,
    pub schedule: HintSchedule,
    pub attempts_per_level: usize,
}

impl Default for ScaffoldConfig {
    fn default() -> Self {
        Self {
            exemption: ExemptionConfig::default(),
            schedule: HintSchedule::Full,
            attempts_per_level: 1,
        }
    }
}

/// Controller state carried across training steps.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaffoldState {
    pub step: u64,
    pub exemption: ExemptionMonitor,
    pub true_hard: BTreeSet<usize>,
    /// Successful searches by `[category][level - 1]`.
    pub hints_used: [[u64; HINT_LEVELS]; 3],
    pub intractable_count: u64,
    pub hint_attempts: u64,
}

impl ScaffoldState {
    pub fn new(exemption: ExemptionConfig, total_steps: u64) -> Self {
        Self {
            step: 0,
            exemption: ExemptionMonitor::new(exemption, total_steps),
            true_hard: BTreeSet::new(),
            hints_used: [[0; HINT_LEVELS]; 3],
            intractable_count: 0,
            hint_attempts: 0,
        }
    }

    pub fn exemption_over(&self) -> bool {
        self.exemption.is_over()
    }

    pub fn hints_in(&self, category: HintCategory) -> u64 {
        self.hints_used[category.index()].iter().sum()
    }
}

/// Seeds for the per-group streams of one step.
#[derive(Debug, Clone, Copy)]
pub struct StepStreams {
    pub search_seed: u64,
    pub replace_seed: u64,
    pub step: u64,
}

impl StepStreams {
    fn search(&self, group: usize) -> StreamRng {
        rng::stream(self.search_seed, &[TAG_SEARCH, self.step, group as u64])
    }

    fn replace(&self, group: usize) -> StreamRng {
        rng::stream(self.replace_seed, &[TAG_REPLACE, self.step, group as u64])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    HintSuccess,
    Intractable,
}

/// One intervention, serialized as a single JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldEvent {
    pub step: u64,
    pub problem: usize,
    pub event: EventKind,
    /// Category and level of the hint that succeeded, or of the last one tried.
    pub category: HintCategory,
    pub level: usize,
    pub attempts: usize,
}

/// Per-step counts produced by [`scaffold_step`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepReport {
    pub zero_reward_groups: usize,
    pub cliffs_intervened: usize,
    pub hints: [usize; 3],
    pub intractable: usize,
    pub attempts: usize,
    pub events: Vec<ScaffoldEvent>,
}

/// Builds the final groups for one batch.
///
/// Updates the exemption monitor with this batch's zero-reward count first,
/// then, once the exemption is over, searches hints for every cliff group.
/// All groups must have been rolled out under the snapshot passed as `policy`.
pub fn scaffold_step<P: RolloutPolicy>(
    groups: Vec<RolloutGroup>,
    state: &mut ScaffoldState,
    config: &ScaffoldConfig,
    bank: &ProblemBank,
    policy: &P,
    streams: StepStreams,
) -> Result<(Vec<RolloutGroup>, StepReport)> {
    state.step = streams.step;
    let cliffs: Vec<usize> = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| detect_cliff(g))
        .map(|(i, _)| i)
        .collect();
    let mut report = StepReport {
        zero_reward_groups: cliffs.len(),
        ..StepReport::default()
    };
    state
        .exemption
        .update(streams.step, cliffs.len(), groups.len());

    for g in groups.iter().filter(|g| !detect_cliff(g)) {
        state.true_hard.remove(&g.problem_id);
    }
    if !state.exemption_over() || cliffs.is_empty() {
        return Ok((groups, report));
    }

    let order = config.schedule.order();
    let outcomes: Vec<HintSearchOutcome> = cliffs
        .par_iter()
        .map(|&i| {
            let problem = bank.get(groups[i].problem_id)?;
            search_hints_in_order(
                problem,
                policy,
                &order,
                &mut streams.search(i),
                config.attempts_per_level,
            )
        })
        .collect::<Result<_>>()?;

    let mut groups = groups;
    for (&i, outcome) in cliffs.iter().zip(outcomes) {
        let problem_id = groups[i].problem_id;
        state.true_hard.insert(problem_id);
        report.cliffs_intervened += 1;
        report.attempts += outcome.attempts_made;
        state.hint_attempts += outcome.attempts_made as u64;
        let (event, hint) = match &outcome.result {
            SearchResult::Found { hint, .. } => {
                groups[i] = augment_group(&groups[i], &outcome, &mut streams.replace(i))?;
                report.hints[hint.category.index()] += 1;
                state.hints_used[hint.category.index()][hint.level() - 1] += 1;
                (EventKind::HintSuccess, *hint)
            }
            SearchResult::Intractable { last_tried } => {
                report.intractable += 1;
                state.intractable_count += 1;
                (EventKind::Intractable, *last_tried)
            }
        };
        report.events.push(ScaffoldEvent {
            step: streams.step,
            problem: problem_id,
            event,
            category: hint.category,
            level: hint.level(),
            attempts: outcome.attempts_made,
        });
    }
    Ok((groups, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpo::group_advantages;
    use crate::policy::{PolicyParams, PromptContext, Trajectory};
    use crate::problem::{HintRef, Problem};
    use crate::rng::StreamRng;

    /// Succeeds exactly when the context carries `target`.
    struct SolvesAt(Option<HintRef>);

    impl RolloutPolicy for SolvesAt {
        fn rollout(
            &self,
            problem: &Problem,
            ctx: &PromptContext,
            _rng: &mut StreamRng,
        ) -> Result<Trajectory> {
            let solved = ctx.hint.is_some() && ctx.hint == self.0;
            let tokens = if solved {
                problem.answer.clone()
            } else {
                problem
                    .answer
                    .iter()
                    .map(|t| (t + 1) % problem.alphabet)
                    .collect()
            };
            Ok(Trajectory {
                context: ctx.clone(),
                tokens,
                behavior_logprobs: vec![-(problem.alphabet as f64).ln(); problem.length],
                reward: if solved { 1.0 } else { 0.0 },
            })
        }
    }

    fn bank() -> ProblemBank {
        let problems = (0..3)
            .map(|id| Problem {
                id,
                alphabet: 8,
                length: 4,
                answer: vec![id, 1, 2, 3],
                beta: 0.0,
            })
            .collect();
        ProblemBank::new(problems, 0).unwrap()
    }

    fn failing_group(problem: &Problem, n: usize) -> RolloutGroup {
        let policy = SolvesAt(None);
        let mut rng = rng::stream(0, &[]);
        let ctx = PromptContext::bare(problem.id);
        RolloutGroup::new(
            problem.id,
            (0..n)
                .map(|_| policy.rollout(problem, &ctx, &mut rng).unwrap())
                .collect(),
        )
    }

    fn with_success(mut g: RolloutGroup, problem: &Problem) -> RolloutGroup {
        g.trajectories[3].tokens = problem.answer.clone();
        g.trajectories[3].reward = 1.0;
        g
    }

    fn solution_one() -> HintRef {
        HintRef::new(HintCategory::Solution, 1).unwrap()
    }

    fn streams(step: u64) -> StepStreams {
        StepStreams {
            search_seed: 11,
            replace_seed: 12,
            step,
        }
    }

    #[test]
    fn cliff_detection() {
        let b = bank();
        let p = &b.problems[0];
        let g = failing_group(p, 8);
        assert!(detect_cliff(&g));
        assert!(!detect_cliff(&with_success(g.clone(), p)));
        let mut all = g;
        all.trajectories.iter_mut().for_each(|t| t.reward = 1.0);
        assert!(!detect_cliff(&all));
    }

    #[test]
    fn augmentation_replaces_exactly_one() {
        let b = bank();
        let p = &b.problems[1];
        let g = failing_group(p, 8);
        let outcome = search_hints(
            p,
            &SolvesAt(Some(solution_one())),
            &mut rng::stream(1, &[]),
            1,
        )
        .unwrap();
        let a = augment_group(&g, &outcome, &mut rng::stream(5, &[])).unwrap();
        let j = a.augmented_index.unwrap();
        let changed: Vec<usize> = (0..8)
            .filter(|&i| a.trajectories[i] != g.trajectories[i])
            .collect();
        assert_eq!(changed, vec![j]);
        assert_eq!(a.len(), 8);
        let rewards = a.rewards();
        assert_eq!(rewards.iter().sum::<f64>(), 1.0);
        assert_eq!(rewards[j], 1.0);
        a.validate().unwrap();

        let adv = group_advantages(&rewards, 1e-6).unwrap();
        assert_eq!(adv.mean, 0.125);
        assert!(adv.std > 0.0);
        let scale = adv.std / (adv.std + 1e-6);
        assert!((adv.values[j] - 7f64.sqrt() * scale).abs() < 1e-12);

        let again = augment_group(&g, &outcome, &mut rng::stream(5, &[])).unwrap();
        assert_eq!(again.augmented_index, Some(j));
    }

    #[test]
    fn success_groups_are_never_augmented() {
        let b = bank();
        let p = &b.problems[0];
        let g = with_success(failing_group(p, 8), p);
        let outcome = search_hints(
            p,
            &SolvesAt(Some(solution_one())),
            &mut rng::stream(1, &[]),
            1,
        )
        .unwrap();
        assert!(matches!(
            augment_group(&g, &outcome, &mut rng::stream(5, &[])),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn case_one_batches_pass_through() {
        let b = bank();
        let groups: Vec<_> = b
            .problems
            .iter()
            .map(|p| with_success(failing_group(p, 8), p))
            .collect();
        let mut state = ScaffoldState::new(ExemptionConfig::disabled(), 100);
        let (out, report) = scaffold_step(
            groups.clone(),
            &mut state,
            &ScaffoldConfig::default(),
            &b,
            &SolvesAt(Some(solution_one())),
            streams(1),
        )
        .unwrap();
        assert_eq!(out, groups);
        assert_eq!(report.cliffs_intervened, 0);
        assert_eq!(state.hint_attempts, 0);
    }

    #[test]
    fn exemption_blocks_hints() {
        let b = bank();
        let groups: Vec<_> = b.problems.iter().map(|p| failing_group(p, 8)).collect();
        let mut state = ScaffoldState::new(ExemptionConfig::default(), 100);
        let (out, report) = scaffold_step(
            groups.clone(),
            &mut state,
            &ScaffoldConfig::default(),
            &b,
            &SolvesAt(Some(solution_one())),
            streams(3),
        )
        .unwrap();
        assert_eq!(out, groups);
        assert_eq!(report.zero_reward_groups, 3);
        assert_eq!(report.cliffs_intervened, 0);
        assert_eq!(report.attempts, 0);
        assert!(state.true_hard.is_empty());
    }

    #[test]
    fn post_exemption_augments_only_the_cliff() {
        let b = bank();
        let mut groups: Vec<_> = b.problems.iter().map(|p| failing_group(p, 8)).collect();
        groups[0] = with_success(groups[0].clone(), &b.problems[0]);
        groups[2] = with_success(groups[2].clone(), &b.problems[2]);
        let mut state = ScaffoldState::new(ExemptionConfig::disabled(), 100);
        state.true_hard.insert(0);
        let (out, report) = scaffold_step(
            groups.clone(),
            &mut state,
            &ScaffoldConfig::default(),
            &b,
            &SolvesAt(Some(solution_one())),
            streams(7),
        )
        .unwrap();
        assert_eq!(out[0], groups[0]);
        assert_eq!(out[2], groups[2]);
        assert!(out[1].augmented_index.is_some());
        assert_eq!(report.cliffs_intervened, 1);
        assert_eq!(report.hints, [0, 0, 1]);
        assert_eq!(report.attempts, 9);
        assert_eq!(state.hints_used[HintCategory::Solution.index()][0], 1);
        assert_eq!(state.true_hard, BTreeSet::from([1]));
        assert_eq!(
            report.events,
            vec![ScaffoldEvent {
                step: 7,
                problem: 1,
                event: EventKind::HintSuccess,
                category: HintCategory::Solution,
                level: 1,
                attempts: 9,
            }]
        );
        let line = serde_json::to_string(&report.events[0]).unwrap();
        assert_eq!(
            line,
            r#"{"step":7,"problem":1,"event":"hint_success","category":"solution","level":1,"attempts":9}"#
        );
    }

    #[test]
    fn intractable_leaves_group_unchanged() {
        let b = bank();
        let groups = vec![failing_group(&b.problems[0], 8)];
        let mut state = ScaffoldState::new(ExemptionConfig::disabled(), 100);
        let (out, report) = scaffold_step(
            groups.clone(),
            &mut state,
            &ScaffoldConfig::default(),
            &b,
            &SolvesAt(None),
            streams(2),
        )
        .unwrap();
        assert_eq!(out, groups);
        assert_eq!(report.intractable, 1);
        assert_eq!(state.intractable_count, 1);
        assert_eq!(report.events[0].event, EventKind::Intractable);
        assert_eq!(report.events[0].attempts, 12);
    }

    #[test]
    fn real_policy_augmented_group_has_gradient() {
        let b = bank();
        let params = PolicyParams::from_bank(&b);
        let snap = params.snapshot();
        let g = failing_group(&b.problems[0], 8);
        let outcome = search_hints(
            &b.problems[0],
            &SolvesAt(Some(solution_one())),
            &mut rng::stream(1, &[]),
            1,
        )
        .unwrap();
        let a = augment_group(&g, &outcome, &mut rng::stream(2, &[])).unwrap();
        let adv_before = group_advantages(&g.rewards(), 1e-6).unwrap();
        let adv_after = group_advantages(&a.rewards(), 1e-6).unwrap();
        let before =
            crate::grpo::batch_surrogate(&[g], &[adv_before], &params, &snap, 0.2).unwrap();
        let after = crate::grpo::batch_surrogate(&[a], &[adv_after], &params, &snap, 0.2).unwrap();
        assert_eq!(before.gradient.norm(), 0.0);
        assert!(after.gradient.norm() > 0.0);
    }
}
