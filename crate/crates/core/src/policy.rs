//! Featurized softmax sequence policy.
//!
//! Tokens are drawn independently per position. The logit of token `v` at
//! position `t` for problem `p` is
//!
//! ```text
//! logit(v) = global[t, v] + problem[p, t, v]
//!          + sum over constraints c at t of constraint[c.granularity, c.admits(v)]
//! ```
//!
//! The constraint weights are shared across problems and positions, so
//! learning to follow a hint transfers between problems.

use std::collections::BTreeMap;
use std::ops::Deref;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::problem::{self, hint_content, Constraint, Granularity, HintRef, Problem, ProblemBank};
use crate::rng::StreamRng;

/// Dimensions of a parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicyShape {
    pub alphabet: usize,
    pub length: usize,
    pub problems: usize,
}

impl PolicyShape {
    fn problem_offset(&self) -> usize {
        self.length * self.alphabet
    }

    fn constraint_offset(&self) -> usize {
        self.problem_offset() + self.problems * self.length * self.alphabet
    }

    pub fn len(&self) -> usize {
        self.constraint_offset() + Granularity::ALL.len() * 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, index: ParamIndex) -> usize {
        let (a, l) = (self.alphabet, self.length);
        match index {
            ParamIndex::Global { position, token } => position * a + token,
            ParamIndex::Problem {
                problem,
                position,
                token,
            } => self.problem_offset() + (problem * l + position) * a + token,
            ParamIndex::Constraint {
                granularity,
                consistent,
            } => self.constraint_offset() + granularity.index() * 2 + consistent as usize,
        }
    }

    pub fn unflat(&self, flat: usize) -> ParamIndex {
        let (a, l) = (self.alphabet, self.length);
        if flat < self.problem_offset() {
            ParamIndex::Global {
                position: flat / a,
                token: flat % a,
            }
        } else if flat < self.constraint_offset() {
            let rel = flat - self.problem_offset();
            ParamIndex::Problem {
                problem: rel / (l * a),
                position: (rel / a) % l,
                token: rel % a,
            }
        } else {
            let rel = flat - self.constraint_offset();
            ParamIndex::Constraint {
                granularity: Granularity::ALL[rel / 2],
                consistent: rel % 2 == 1,
            }
        }
    }
}

/// Names one scalar weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamIndex {
    Global {
        position: usize,
        token: usize,
    },
    Problem {
        problem: usize,
        position: usize,
        token: usize,
    },
    Constraint {
        granularity: Granularity,
        consistent: bool,
    },
}

/// Sparse vector over the flat parameter layout, iterated in index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseGrad {
    entries: BTreeMap<usize, f64>,
}

impl SparseGrad {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, flat: usize, value: f64) {
        *self.entries.entry(flat).or_insert(0.0) += value;
    }

    pub fn get(&self, flat: usize) -> f64 {
        self.entries.get(&flat).copied().unwrap_or(0.0)
    }

    pub fn add_scaled(&mut self, other: &SparseGrad, scale: f64) {
        for (&k, &v) in &other.entries {
            self.add(k, scale * v);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.entries.values_mut().for_each(|v| *v *= factor);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc + v * v).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.values().all(|v| v.is_finite())
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (k, v) in self.iter() {
            out[k] = v;
        }
        out
    }
}

/// What the policy conditions on: the bare prompt, or the prompt with a hint.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptContext {
    pub problem_id: usize,
    pub hint: Option<HintRef>,
    pub constraints: Vec<Constraint>,
}

impl PromptContext {
    pub fn bare(problem_id: usize) -> Self {
        Self {
            problem_id,
            hint: None,
            constraints: Vec::new(),
        }
    }

    pub fn hinted(problem: &Problem, hint: HintRef) -> Self {
        Self {
            problem_id: problem.id,
            hint: Some(hint),
            constraints: hint_content(problem, hint),
        }
    }

    pub fn is_hinted(&self) -> bool {
        self.hint.is_some()
    }
}

/// One sampled answer with the log-probabilities it was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub context: PromptContext,
    pub tokens: Vec<usize>,
    pub behavior_logprobs: Vec<f64>,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    shape: PolicyShape,
    values: Vec<f64>,
}

impl PolicyParams {
    pub fn zeros(shape: PolicyShape) -> Self {
        Self {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    /// Initial parameters: `problem[p, t, answer_t] = beta_p`, everything else 0.
    pub fn from_bank(bank: &ProblemBank) -> Self {
        let shape = PolicyShape {
            alphabet: bank.alphabet(),
            length: problem::HINT_LEVELS,
            problems: bank.len(),
        };
        let mut params = Self::zeros(shape);
        for p in &bank.problems {
            for (position, &token) in p.answer.iter().enumerate() {
                params.set(
                    ParamIndex::Problem {
                        problem: p.id,
                        position,
                        token,
                    },
                    p.beta,
                );
            }
        }
        params
    }

    pub fn from_values(shape: PolicyShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::InvalidDimension(format!(
                "expected {} parameters, got {}",
                shape.len(),
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    pub fn shape(&self) -> PolicyShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, index: ParamIndex) -> f64 {
        self.values[self.shape.flat(index)]
    }

    pub fn set(&mut self, index: ParamIndex, value: f64) {
        let i = self.shape.flat(index);
        self.values[i] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Deep, immutable copy used as `theta_old`.
    pub fn snapshot(&self) -> PolicySnapshot {
        PolicySnapshot(Arc::new(self.clone()))
    }

    fn check(&self, ctx: &PromptContext, position: usize) -> Result<()> {
        if ctx.problem_id >= self.shape.problems {
            return Err(Error::UnknownProblem(ctx.problem_id));
        }
        if position >= self.shape.length {
            return Err(Error::Precondition(format!(
                "position {position} outside [0, {})",
                self.shape.length
            )));
        }
        Ok(())
    }

    pub fn logits(&self, ctx: &PromptContext, position: usize) -> Result<Vec<f64>> {
        self.check(ctx, position)?;
        let a = self.shape.alphabet;
        let global = self.shape.flat(ParamIndex::Global { position, token: 0 });
        let local = self.shape.flat(ParamIndex::Problem {
            problem: ctx.problem_id,
            position,
            token: 0,
        });
        let mut out: Vec<f64> = (0..a)
            .map(|v| self.values[global + v] + self.values[local + v])
            .collect();
        for c in ctx.constraints.iter().filter(|c| c.position == position) {
            let on = self.get(ParamIndex::Constraint {
                granularity: c.granularity,
                consistent: true,
            });
            let off = self.get(ParamIndex::Constraint {
                granularity: c.granularity,
                consistent: false,
            });
            for (v, logit) in out.iter_mut().enumerate() {
                *logit += if c.admits(v) { on } else { off };
            }
        }
        Ok(out)
    }

    /// Token probabilities at `position`.
    pub fn distribution(&self, ctx: &PromptContext, position: usize) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(ctx, position)?))
    }

    pub fn sample_trajectory(
        &self,
        ctx: &PromptContext,
        rng: &mut StreamRng,
    ) -> Result<Trajectory> {
        let mut tokens = Vec::with_capacity(self.shape.length);
        let mut behavior_logprobs = Vec::with_capacity(self.shape.length);
        for t in 0..self.shape.length {
            let logp = log_softmax(&self.logits(ctx, t)?);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut pick = logp.len() - 1;
            for (v, lp) in logp.iter().enumerate() {
                acc += lp.exp();
                if u < acc {
                    pick = v;
                    break;
                }
            }
            tokens.push(pick);
            behavior_logprobs.push(logp[pick]);
        }
        Ok(Trajectory {
            context: ctx.clone(),
            tokens,
            behavior_logprobs,
            reward: 0.0,
        })
    }

    /// Per-token log-probabilities of `trajectory` under these parameters.
    pub fn logprob(&self, trajectory: &Trajectory) -> Result<Vec<f64>> {
        trajectory
            .tokens
            .iter()
            .enumerate()
            .map(|(t, &v)| Ok(log_softmax(&self.logits(&trajectory.context, t)?)[v]))
            .collect()
    }

    /// Adds `weight * d log pi(token | ctx, position) / d theta` into `grad`.
    pub fn accumulate_token_grad(
        &self,
        ctx: &PromptContext,
        position: usize,
        token: usize,
        weight: f64,
        grad: &mut SparseGrad,
    ) -> Result<()> {
        let probs = self.distribution(ctx, position)?;
        let shape = &self.shape;
        for (u, &p) in probs.iter().enumerate() {
            let indicator = if u == token { 1.0 } else { 0.0 };
            let g = weight * (indicator - p);
            grad.add(shape.flat(ParamIndex::Global { position, token: u }), g);
            grad.add(
                shape.flat(ParamIndex::Problem {
                    problem: ctx.problem_id,
                    position,
                    token: u,
                }),
                g,
            );
        }
        for c in ctx.constraints.iter().filter(|c| c.position == position) {
            let mass_on: f64 = probs
                .iter()
                .enumerate()
                .filter(|(u, _)| c.admits(*u))
                .map(|(_, p)| p)
                .sum();
            let hit = c.admits(token);
            for (consistent, mass) in [(true, mass_on), (false, 1.0 - mass_on)] {
                let indicator = if hit == consistent { 1.0 } else { 0.0 };
                grad.add(
                    shape.flat(ParamIndex::Constraint {
                        granularity: c.granularity,
                        consistent,
                    }),
                    weight * (indicator - mass),
                );
            }
        }
        Ok(())
    }

    /// Score function of the whole trajectory: sum over positions of d log pi.
    pub fn grad_logprob(&self, trajectory: &Trajectory) -> Result<SparseGrad> {
        let mut grad = SparseGrad::new();
        for (t, &v) in trajectory.tokens.iter().enumerate() {
            self.accumulate_token_grad(&trajectory.context, t, v, 1.0, &mut grad)?;
        }
        Ok(grad)
    }

    /// Argmax per position; ties go to the lowest token index.
    pub fn greedy_decode(&self, ctx: &PromptContext) -> Result<Vec<usize>> {
        (0..self.shape.length)
            .map(|t| {
                let logits = self.logits(ctx, t)?;
                let mut best = 0;
                for (v, &x) in logits.iter().enumerate().skip(1) {
                    if x > logits[best] {
                        best = v;
                    }
                }
                Ok(best)
            })
            .collect()
    }

    /// Exact probability that a sample under `ctx` solves `problem`.
    pub fn success_probability(&self, problem: &Problem, ctx: &PromptContext) -> Result<f64> {
        problem
            .answer
            .iter()
            .enumerate()
            .try_fold(1.0, |acc, (t, &v)| Ok(acc * self.distribution(ctx, t)?[v]))
    }
}

/// Frozen parameters; cloning shares the same immutable storage.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySnapshot(Arc<PolicyParams>);

impl Deref for PolicySnapshot {
    type Target = PolicyParams;

    fn deref(&self) -> &PolicyParams {
        &self.0
    }
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    logits.iter().map(|x| x - lse).collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Anything that can produce a verified rollout for a prompt.
///
/// [`PolicyParams`] is the real implementation; tests substitute scripted
/// policies to drive the hint search deterministically.
pub trait RolloutPolicy: Sync {
    fn rollout(
        &self,
        problem: &Problem,
        ctx: &PromptContext,
        rng: &mut StreamRng,
    ) -> Result<Trajectory>;
}

impl RolloutPolicy for PolicyParams {
    fn rollout(
        &self,
        problem: &Problem,
        ctx: &PromptContext,
        rng: &mut StreamRng,
    ) -> Result<Trajectory> {
        let mut trajectory = self.sample_trajectory(ctx, rng)?;
        trajectory.reward = problem::verify(problem, &trajectory.tokens)?;
        Ok(trajectory)
    }
}

impl RolloutPolicy for PolicySnapshot {
    fn rollout(
        &self,
        problem: &Problem,
        ctx: &PromptContext,
        rng: &mut StreamRng,
    ) -> Result<Trajectory> {
        self.0.rollout(problem, ctx, rng)
    }
}
