//! Group-relative policy optimization.
//!
//! For each prompt a group of `N` trajectories is scored by the verifier.
//! Rewards are normalized within the group to give one advantage per
//! trajectory, and the policy ascends a PPO-style clipped surrogate built
//! from per-token probability ratios against the rollout snapshot.

mod advantages;
mod optim;
mod surrogate;

pub use advantages::{group_advantages, AdvantageVector, DEFAULT_EPS_STD};
pub use optim::{adamw_step, AdamWConfig, OptimizerState};
pub use surrogate::{batch_surrogate, clipped_surrogate, token_ratios, SurrogateReport};

use crate::error::{Error, Result};
use crate::policy::Trajectory;

/// The `N` trajectories sampled for one prompt, possibly with one of them
/// replaced by a hint-guided success.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutGroup {
    pub problem_id: usize,
    pub trajectories: Vec<Trajectory>,
    pub augmented_index: Option<usize>,
}

impl RolloutGroup {
    pub fn new(problem_id: usize, trajectories: Vec<Trajectory>) -> Self {
        Self {
            problem_id,
            trajectories,
            augmented_index: None,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.trajectories.iter().map(|t| t.reward).collect()
    }

    /// True when every reward is zero.
    pub fn is_cliff(&self) -> bool {
        self.trajectories.iter().all(|t| t.reward == 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::Precondition(format!(
                "a group needs at least 2 trajectories, got {}",
                self.len()
            )));
        }
        for (i, t) in self.trajectories.iter().enumerate() {
            if t.context.problem_id != self.problem_id {
                return Err(Error::Precondition(format!(
                    "trajectory {i} belongs to problem {}, group is for {}",
                    t.context.problem_id, self.problem_id
                )));
            }
        }
        if let Some(j) = self.augmented_index {
            let t = self
                .trajectories
                .get(j)
                .ok_or_else(|| Error::Precondition(format!("augmented index {j} out of range")))?;
            if !t.context.is_hinted() {
                return Err(Error::ContextMismatch { index: j });
            }
            if t.reward != 1.0 {
                return Err(Error::Precondition(format!(
                    "augmented trajectory {j} has reward {}",
                    t.reward
                )));
            }
        }
        Ok(())
    }
}
