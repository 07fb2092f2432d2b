//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls the crate's logits, softmax, advantage or surrogate
//! code. Parameters are read one scalar at a time through `ParamIndex`.

#![allow(dead_code)]

use grpo_scaffold::grpo::RolloutGroup;
use grpo_scaffold::policy::{ParamIndex, PolicyParams, PromptContext, Trajectory};

pub fn oracle_logits(params: &PolicyParams, ctx: &PromptContext, position: usize) -> Vec<f64> {
    let shape = params.shape();
    (0..shape.alphabet)
        .map(|v| {
            let mut z = params.get(ParamIndex::Global { position, token: v })
                + params.get(ParamIndex::Problem {
                    problem: ctx.problem_id,
                    position,
                    token: v,
                });
            for c in &ctx.constraints {
                if c.position == position {
                    z += params.get(ParamIndex::Constraint {
                        granularity: c.granularity,
                        consistent: c.admits(v),
                    });
                }
            }
            z
        })
        .collect()
}

/// Log-probabilities by direct normalization, without max shifting.
pub fn oracle_log_probs(params: &PolicyParams, ctx: &PromptContext, position: usize) -> Vec<f64> {
    let z = oracle_logits(params, ctx, position);
    let norm: f64 = z.iter().map(|x| x.exp()).sum::<f64>().ln();
    z.iter().map(|x| x - norm).collect()
}

pub fn oracle_token_logprobs(params: &PolicyParams, traj: &Trajectory) -> Vec<f64> {
    traj.tokens
        .iter()
        .enumerate()
        .map(|(t, &v)| oracle_log_probs(params, &traj.context, t)[v])
        .collect()
}

/// Population-std normalized advantages.
pub fn oracle_advantages(rewards: &[f64], eps_std: f64) -> Vec<f64> {
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let var = rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
    rewards
        .iter()
        .map(|r| (r - mean) / (var.sqrt() + eps_std))
        .collect()
}

/// Clipped surrogate of one group, plus a per-term flag that is true where
/// the clipped branch is strictly smaller.
pub fn oracle_surrogate(
    group: &RolloutGroup,
    advantages: &[f64],
    theta: &PolicyParams,
    theta_old: &PolicyParams,
    eps: f64,
) -> (f64, Vec<bool>) {
    let mut total = 0.0;
    let mut count = 0usize;
    let mut pattern = Vec::new();
    for (traj, &a) in group.trajectories.iter().zip(advantages) {
        let new = oracle_token_logprobs(theta, traj);
        let old = oracle_token_logprobs(theta_old, traj);
        for (n, o) in new.iter().zip(&old) {
            let r = (n - o).exp();
            let clipped_r = r.max(1.0 - eps).min(1.0 + eps);
            let (u, c) = (r * a, clipped_r * a);
            total += if c < u { c } else { u };
            pattern.push(c < u);
            count += 1;
        }
    }
    (total / count as f64, pattern)
}

/// Mean of per-group oracle surrogates.
pub fn oracle_batch_surrogate(
    groups: &[RolloutGroup],
    advantages: &[Vec<f64>],
    theta: &PolicyParams,
    theta_old: &PolicyParams,
    eps: f64,
) -> (f64, Vec<bool>) {
    let mut j = 0.0;
    let mut pattern = Vec::new();
    for (g, a) in groups.iter().zip(advantages) {
        let (v, p) = oracle_surrogate(g, a, theta, theta_old, eps);
        j += v;
        pattern.extend(p);
    }
    (j / groups.len() as f64, pattern)
}
