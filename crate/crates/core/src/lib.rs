//! Group-relative policy optimization with hierarchical hint scaffolding.
//!
//! A synthetic verifiable-reward task stands in for reasoning prompts: each
//! problem asks for a hidden token sequence, and a tabular softmax policy
//! proposes one token per position. Plain GRPO learns nothing from a prompt
//! whose rollouts all fail. The [`scaffold`] module handles such groups by
//! searching a three-tier hint hierarchy (knowledge, planning, solution) for
//! the least concrete hint that lets the current policy succeed, then swaps
//! that guided rollout into the group.
//!
//! Start with [`harness::train`] for end-to-end runs, or the lower layers:
//! [`problem`] for banks, hints and the verifier, [`policy`] for the model,
//! [`grpo`] for advantages, the clipped surrogate and AdamW.

pub mod checkpoint;
pub mod error;
pub mod grpo;
pub mod harness;
pub mod policy;
pub mod problem;
pub mod rng;
pub mod scaffold;

pub use error::{Error, Result};
pub use harness::{train, TrainConfig, Variant};
pub use policy::{PolicyParams, PromptContext, Trajectory};
pub use problem::{generate_bank, DifficultyMix, Problem, ProblemBank};
