use crate::error::{Error, Result};
use crate::grpo::{AdvantageVector, RolloutGroup};
use crate::policy::{PolicyParams, SparseGrad};

/// Objective value and exact gradient of the clipped surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateReport {
    pub objective: f64,
    pub gradient: SparseGrad,
    /// Fraction of token terms where the clipped branch is strictly smaller.
    pub clip_fraction: f64,
    pub token_count: usize,
}

/// Per-trajectory, per-token ratios `pi_theta / pi_old`, each evaluated in
/// the trajectory's own context (bare prompt, or prompt plus hint for the
/// augmented trajectory).
pub fn token_ratios(
    theta: &PolicyParams,
    theta_old: &PolicyParams,
    group: &RolloutGroup,
) -> Result<Vec<Vec<f64>>> {
    if let Some(j) = group.augmented_index {
        if !group
            .trajectories
            .get(j)
            .is_some_and(|t| t.context.is_hinted())
        {
            return Err(Error::ContextMismatch { index: j });
        }
    }
    group
        .trajectories
        .iter()
        .map(|traj| {
            let new = theta.logprob(traj)?;
            let old = theta_old.logprob(traj)?;
            Ok(new.iter().zip(&old).map(|(n, o)| (n - o).exp()).collect())
        })
        .collect()
}

/// `J = (1 / (N L)) sum_{i,t} min(r A, clip(r, 1-eps, 1+eps) A)` and its gradient.
///
/// A term contributes `A r grad log pi` when the unclipped branch attains the
/// minimum (including the boundary) and nothing when the clip binds.
pub fn clipped_surrogate(
    group: &RolloutGroup,
    advantages: &AdvantageVector,
    ratios: &[Vec<f64>],
    eps: f64,
    theta: &PolicyParams,
) -> Result<SurrogateReport> {
    if advantages.values.len() != group.len() || ratios.len() != group.len() {
        return Err(Error::Precondition(format!(
            "shape mismatch: {} trajectories, {} advantages, {} ratio rows",
            group.len(),
            advantages.values.len(),
            ratios.len()
        )));
    }
    let token_count: usize = group.trajectories.iter().map(|t| t.tokens.len()).sum();
    let scale = 1.0 / token_count as f64;
    let mut objective = 0.0;
    let mut clipped = 0usize;
    let mut gradient = SparseGrad::new();

    for ((traj, &adv), row) in group
        .trajectories
        .iter()
        .zip(&advantages.values)
        .zip(ratios)
    {
        if row.len() != traj.tokens.len() {
            return Err(Error::Precondition("ratio row length mismatch".into()));
        }
        for (t, (&token, &r)) in traj.tokens.iter().zip(row).enumerate() {
            let unclipped = r * adv;
            let clipped_term = r.clamp(1.0 - eps, 1.0 + eps) * adv;
            objective += unclipped.min(clipped_term);
            if clipped_term < unclipped {
                clipped += 1;
            } else if adv != 0.0 {
                theta.accumulate_token_grad(
                    &traj.context,
                    t,
                    token,
                    scale * adv * r,
                    &mut gradient,
                )?;
            }
        }
    }
    Ok(SurrogateReport {
        objective: objective * scale,
        gradient,
        clip_fraction: clipped as f64 / token_count as f64,
        token_count,
    })
}

/// Mean of the per-group surrogates over a batch. Every group has `N L`
/// tokens, so this equals the token mean over the whole batch.
pub fn batch_surrogate(
    groups: &[RolloutGroup],
    advantages: &[AdvantageVector],
    theta: &PolicyParams,
    theta_old: &PolicyParams,
    eps: f64,
) -> Result<SurrogateReport> {
    let mut total = SurrogateReport {
        objective: 0.0,
        gradient: SparseGrad::new(),
        clip_fraction: 0.0,
        token_count: 0,
    };
    if groups.is_empty() {
        return Ok(total);
    }
    let weight = 1.0 / groups.len() as f64;
    let mut clipped_tokens = 0.0;
    for (group, adv) in groups.iter().zip(advantages) {
        let ratios = token_ratios(theta, theta_old, group)?;
        let report = clipped_surrogate(group, adv, &ratios, eps, theta)?;
        total.objective += weight * report.objective;
        total.gradient.add_scaled(&report.gradient, weight);
        clipped_tokens += report.clip_fraction * report.token_count as f64;
        total.token_count += report.token_count;
    }
    total.clip_fraction = clipped_tokens / total.token_count as f64;
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grpo::group_advantages;
    use crate::policy::{ParamIndex, PolicyShape, PromptContext, Trajectory};
    use crate::problem::{HintCategory, HintRef, Problem};

    fn shape() -> PolicyShape {
        PolicyShape {
            alphabet: 4,
            length: 4,
            problems: 1,
        }
    }

    fn traj(tokens: Vec<usize>, reward: f64) -> Trajectory {
        Trajectory {
            context: PromptContext::bare(0),
            tokens,
            behavior_logprobs: vec![-(4f64.ln()); 4],
            reward,
        }
    }

    fn group() -> RolloutGroup {
        RolloutGroup::new(
            0,
            vec![
                traj(vec![0, 1, 2, 3], 1.0),
                traj(vec![1, 1, 2, 0], 0.0),
                traj(vec![3, 0, 0, 0], 0.0),
            ],
        )
    }

    #[test]
    fn equal_params_give_unit_ratios() {
        let p = PolicyParams::zeros(shape());
        let r = token_ratios(&p, &p, &group()).unwrap();
        assert!(r.iter().flatten().all(|&x| x == 1.0));
    }

    #[test]
    fn perturbation_changes_only_matching_trajectories() {
        let old = PolicyParams::zeros(shape());
        let mut new = old.clone();
        let delta = 0.3;
        new.set(
            ParamIndex::Problem {
                problem: 0,
                position: 0,
                token: 3,
            },
            delta,
        );
        let r = token_ratios(&new, &old, &group()).unwrap();
        // Token 3 sampled at position 0: ratio = e^d / ((e^d + 3) / 4).
        let hit = delta.exp() * 4.0 / (delta.exp() + 3.0);
        let miss = 4.0 / (delta.exp() + 3.0);
        assert!((r[2][0] - hit).abs() < 1e-14);
        assert!((r[0][0] - miss).abs() < 1e-14);
        assert!((r[1][0] - miss).abs() < 1e-14);
        for row in &r {
            assert!(row[1..].iter().all(|&x| x == 1.0));
        }
    }

    #[test]
    fn augmented_trajectory_uses_its_own_context() {
        let problem = Problem {
            id: 0,
            alphabet: 4,
            length: 4,
            answer: vec![0, 1, 2, 3],
            beta: 0.0,
        };
        let mut p = PolicyParams::zeros(shape());
        p.set(
            ParamIndex::Constraint {
                granularity: crate::problem::Granularity::Exact,
                consistent: true,
            },
            2.0,
        );
        let mut g = group();
        g.trajectories[0].context =
            PromptContext::hinted(&problem, HintRef::new(HintCategory::Solution, 4).unwrap());
        g.augmented_index = Some(0);
        let r = token_ratios(&p, &p, &g).unwrap();
        assert!(r[0].iter().all(|&x| x == 1.0));

        g.trajectories[0].context = PromptContext::bare(0);
        assert!(matches!(
            token_ratios(&p, &p, &g),
            Err(Error::ContextMismatch { index: 0 })
        ));
    }

    fn single_term(ratio: f64, adv: f64) -> SurrogateReport {
        let g = RolloutGroup::new(0, vec![traj(vec![0, 0, 0, 0], 0.0)]);
        let adv = AdvantageVector {
            values: vec![adv],
            mean: 0.0,
            std: 0.0,
        };
        let ratios = vec![vec![ratio, 1.0, 1.0, 1.0]];
        let theta = PolicyParams::zeros(shape());
        clipped_surrogate(&g, &adv, &ratios, 0.2, &theta).unwrap()
    }

    #[test]
    fn clip_cases() {
        // r = 1.5, A = +1: min(1.5, 1.2) = 1.2, clip binds.
        let rep = single_term(1.5, 1.0);
        assert!((rep.objective - (1.2 + 3.0) / 4.0).abs() < 1e-15);
        assert_eq!(rep.clip_fraction, 0.25);
        let theta = PolicyParams::zeros(shape());
        let mut only_rest = SparseGrad::new();
        for t in 1..4 {
            theta
                .accumulate_token_grad(&PromptContext::bare(0), t, 0, 0.25, &mut only_rest)
                .unwrap();
        }
        assert_eq!(rep.gradient, only_rest);

        // r = 0.5, A = -1: min(-0.5, -0.8) = -0.8, clip binds.
        let rep = single_term(0.5, -1.0);
        assert!((rep.objective - (-0.8 - 3.0) / 4.0).abs() < 1e-15);
        assert_eq!(rep.clip_fraction, 0.25);

        // r = 0.5, A = +1: min(0.5, 0.8) = 0.5, unclipped.
        let rep = single_term(0.5, 1.0);
        assert!((rep.objective - (0.5 + 3.0) / 4.0).abs() < 1e-15);
        assert_eq!(rep.clip_fraction, 0.0);
    }

    #[test]
    fn boundary_counts_as_unclipped() {
        let rep = single_term(1.2, 1.0);
        assert_eq!(rep.clip_fraction, 0.0);
        let g = rep.gradient.get(shape().flat(ParamIndex::Problem {
            problem: 0,
            position: 0,
            token: 0,
        }));
        assert!(g > 0.0);
    }

    #[test]
    fn on_policy_objective_is_mean_advantage() {
        let p = PolicyParams::zeros(shape());
        let g = group();
        let adv = group_advantages(&g.rewards(), 1e-6).unwrap();
        let ratios = token_ratios(&p, &p, &g).unwrap();
        let rep = clipped_surrogate(&g, &adv, &ratios, 0.2, &p).unwrap();
        let mean_adv = adv.values.iter().sum::<f64>() / 3.0;
        assert!((rep.objective - mean_adv).abs() < 1e-15);
        assert_eq!(rep.clip_fraction, 0.0);
        assert_eq!(rep.token_count, 12);

        let mut expected = SparseGrad::new();
        for (traj, a) in g.trajectories.iter().zip(&adv.values) {
            expected.add_scaled(&p.grad_logprob(traj).unwrap(), a / 12.0);
        }
        for (k, v) in expected.iter() {
            assert!((rep.gradient.get(k) - v).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_rewards_give_null_objective() {
        let mut p = PolicyParams::zeros(shape());
        p.values_mut()[3] = 0.7;
        let old = PolicyParams::zeros(shape());
        let mut g = group();
        g.trajectories.iter_mut().for_each(|t| t.reward = 0.0);
        let adv = group_advantages(&g.rewards(), 1e-6).unwrap();
        let rep = batch_surrogate(&[g], &[adv], &p, &old, 0.2).unwrap();
        assert_eq!(rep.objective, 0.0);
        assert_eq!(rep.gradient.norm(), 0.0);
    }
}
