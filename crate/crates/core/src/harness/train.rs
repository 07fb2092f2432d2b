//! The training loop.
//!
//! Each step samples a prompt batch, snapshots the policy as `theta_old`,
//! rolls out `N` bare-prompt trajectories per prompt, lets the scaffold
//! rewrite cliff groups (unless the variant is plain GRPO), and takes
//! `inner_epochs` passes of clipped-surrogate ascent.

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grpo::{adamw_step, batch_surrogate, group_advantages, OptimizerState, RolloutGroup};
use crate::harness::config::TrainConfig;
use crate::harness::evaluate::evaluate;
use crate::harness::filter::filter_bank;
use crate::harness::metrics::{MetricsLog, MetricsRow};
use crate::policy::{PolicyParams, PolicySnapshot, PromptContext, RolloutPolicy};
use crate::problem::{bank_io, generate_bank, ProblemBank, HINT_LEVELS};
use crate::rng::{self, TAG_ROLLOUT, TAG_SHUFFLE};
use crate::scaffold::{scaffold_step, ScaffoldConfig, ScaffoldEvent, ScaffoldState, StepStreams};

/// Epoch-wise shuffled round robin over the bank.
#[derive(Debug, Clone)]
struct BatchSampler {
    seed: u64,
    len: usize,
    epoch: u64,
    order: Vec<usize>,
    cursor: usize,
}

impl BatchSampler {
    fn new(seed: u64, len: usize) -> Self {
        Self {
            seed,
            len,
            epoch: 0,
            order: Vec::new(),
            cursor: 0,
        }
    }

    fn next_id(&mut self) -> usize {
        if self.cursor == self.order.len() {
            self.order = (0..self.len).collect();
            self.order
                .shuffle(&mut rng::stream(self.seed, &[TAG_SHUFFLE, self.epoch]));
            self.epoch += 1;
            self.cursor = 0;
        }
        self.cursor += 1;
        self.order[self.cursor - 1]
    }

    fn next_batch(&mut self, size: usize) -> Vec<usize> {
        (0..size).map(|_| self.next_id()).collect()
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub optimizer: OptimizerState,
    pub log: MetricsLog,
    pub events: Vec<ScaffoldEvent>,
    /// Scaffold bookkeeping; `None` for plain GRPO.
    pub scaffold: Option<ScaffoldState>,
}

/// Step-by-step driver. [`train`] runs it to completion.
#[derive(Debug)]
pub struct Trainer<'a> {
    config: TrainConfig,
    bank: &'a ProblemBank,
    params: PolicyParams,
    optimizer: OptimizerState,
    scaffold: Option<(ScaffoldConfig, ScaffoldState)>,
    sampler: BatchSampler,
    log: MetricsLog,
    events: Vec<ScaffoldEvent>,
    step: u64,
    total_steps: u64,
}

impl<'a> Trainer<'a> {
    /// Starts from the bank's initial parameters.
    pub fn new(config: &TrainConfig, bank: &'a ProblemBank) -> Result<Self> {
        Self::with_params(config, bank, PolicyParams::from_bank(bank))
    }

    pub fn with_params(
        config: &TrainConfig,
        bank: &'a ProblemBank,
        params: PolicyParams,
    ) -> Result<Self> {
        config.validate()?;
        if bank.is_empty() {
            return Err(Error::Precondition("training bank is empty".into()));
        }
        let shape = params.shape();
        if shape.problems != bank.len() || shape.alphabet != bank.alphabet() {
            return Err(Error::InvalidDimension(format!(
                "parameters cover {} problems over alphabet {}, bank has {} over {}",
                shape.problems,
                shape.alphabet,
                bank.len(),
                bank.alphabet()
            )));
        }
        let total_steps = config.steps_for(bank.len());
        let scaffold = config.scaffold().map(|sc| {
            let state = ScaffoldState::new(sc.exemption, total_steps);
            (sc, state)
        });
        Ok(Self {
            config: config.clone(),
            bank,
            optimizer: OptimizerState::new(config.adamw(), shape.len()),
            params,
            scaffold,
            sampler: BatchSampler::new(config.bank_seed, bank.len()),
            log: MetricsLog::new(),
            events: Vec::new(),
            step: 0,
            total_steps,
        })
    }

    /// Number of steps taken so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.total_steps
    }

    pub fn params(&self) -> &PolicyParams {
        &self.params
    }

    pub fn optimizer(&self) -> &OptimizerState {
        &self.optimizer
    }

    pub fn log(&self) -> &MetricsLog {
        &self.log
    }

    pub fn events(&self) -> &[ScaffoldEvent] {
        &self.events
    }

    pub fn scaffold_state(&self) -> Option<&ScaffoldState> {
        self.scaffold.as_ref().map(|(_, s)| s)
    }

    /// Rolls out `N` bare-prompt trajectories per problem id under `policy`,
    /// using the per-group streams of the given step.
    pub fn rollout_batch<P: RolloutPolicy>(
        &self,
        problem_ids: &[usize],
        policy: &P,
        step: u64,
    ) -> Result<Vec<RolloutGroup>> {
        let n = self.config.rollouts;
        let seed = self.config.rollout_seed;
        problem_ids
            .par_iter()
            .enumerate()
            .map(|(g, &id)| {
                let problem = self.bank.get(id)?;
                let ctx = PromptContext::bare(id);
                let mut rng = rng::stream(seed, &[TAG_ROLLOUT, step, g as u64]);
                let trajectories = (0..n)
                    .map(|_| policy.rollout(problem, &ctx, &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RolloutGroup::new(id, trajectories))
            })
            .collect()
    }

    /// Runs one full training step.
    pub fn step_once(&mut self) -> Result<&MetricsRow> {
        if self.is_done() {
            return Err(Error::Precondition(format!(
                "all {} steps already taken",
                self.total_steps
            )));
        }
        let step = self.step + 1;
        let ids = self.sampler.next_batch(self.config.prompts_per_batch);
        let snapshot = self.params.snapshot();
        let groups = self.rollout_batch(&ids, &snapshot, step)?;
        self.update(groups, &snapshot)
    }

    /// Applies one step to externally supplied groups, which must have been
    /// sampled from the current parameters. The batch sampler is not advanced.
    pub fn apply_groups(&mut self, groups: Vec<RolloutGroup>) -> Result<&MetricsRow> {
        let snapshot = self.params.snapshot();
        self.update(groups, &snapshot)
    }

    fn update(
        &mut self,
        groups: Vec<RolloutGroup>,
        snapshot: &PolicySnapshot,
    ) -> Result<&MetricsRow> {
        let step = self.step + 1;
        for g in &groups {
            g.validate()?;
        }
        let rewards: Vec<f64> = groups.iter().flat_map(|g| g.rewards()).collect();
        let mean_train_reward = rewards.iter().sum::<f64>() / rewards.len().max(1) as f64;

        let (groups, report) = match &mut self.scaffold {
            Some((config, state)) => scaffold_step(
                groups,
                state,
                config,
                self.bank,
                snapshot,
                StepStreams {
                    search_seed: self.config.scaffold_seed,
                    replace_seed: self.config.replacement_seed,
                    step,
                },
            )?,
            None => {
                let zero = groups.iter().filter(|g| g.is_cliff()).count();
                let report = crate::scaffold::StepReport {
                    zero_reward_groups: zero,
                    ..Default::default()
                };
                (groups, report)
            }
        };

        let advantages = groups
            .iter()
            .map(|g| group_advantages(&g.rewards(), self.config.eps_std))
            .collect::<Result<Vec<_>>>()?;

        let chunk = groups.len().div_ceil(self.config.minibatches).max(1);
        let mut clipped = 0.0;
        let mut tokens = 0usize;
        for _ in 0..self.config.inner_epochs {
            for (gs, advs) in groups.chunks(chunk).zip(advantages.chunks(chunk)) {
                let surrogate =
                    batch_surrogate(gs, advs, &self.params, snapshot, self.config.clip_eps)?;
                adamw_step(&mut self.params, &surrogate.gradient, &mut self.optimizer)?;
                clipped += surrogate.clip_fraction * surrogate.token_count as f64;
                tokens += surrogate.token_count;
            }
        }

        self.step = step;
        let val_pass1 =
            if step.is_multiple_of(self.config.eval_interval) || step == self.total_steps {
                Some(evaluate(&self.params, self.bank)?)
            } else {
                None
            };
        self.events.extend(report.events);
        self.log.push(MetricsRow {
            step,
            zero_reward_groups: report.zero_reward_groups,
            cliffs_intervened: report.cliffs_intervened,
            hints_knowledge: report.hints[0],
            hints_planning: report.hints[1],
            hints_solution: report.hints[2],
            intractable: report.intractable,
            mean_train_reward,
            clip_fraction: if tokens == 0 {
                0.0
            } else {
                clipped / tokens as f64
            },
            val_pass1,
        });
        Ok(self.log.last().expect("row just pushed"))
    }

    /// Runs the remaining steps.
    pub fn run(&mut self) -> Result<()> {
        while !self.is_done() {
            self.step_once()?;
        }
        Ok(())
    }

    pub fn finish(self) -> TrainOutcome {
        TrainOutcome {
            params: self.params,
            optimizer: self.optimizer,
            log: self.log,
            events: self.events,
            scaffold: self.scaffold.map(|(_, s)| s),
        }
    }
}

/// Trains from the bank's initial parameters for the configured number of steps.
pub fn train(config: &TrainConfig, bank: &ProblemBank) -> Result<TrainOutcome> {
    let mut trainer = Trainer::new(config, bank)?;
    trainer.run()?;
    Ok(trainer.finish())
}

/// The bank a config trains on: loaded from `bank_path` or generated, then
/// optionally passed through the difficulty filter.
pub fn training_bank(config: &TrainConfig) -> Result<ProblemBank> {
    let bank = if config.bank_path.is_empty() {
        generate_bank(
            config.bank_seed,
            config.bank_count,
            config.alphabet,
            HINT_LEVELS,
            config.mix()?,
        )?
    } else {
        bank_io::load_bank(&config.bank_path)?
    };
    if !config.filter_bank {
        return Ok(bank);
    }
    let initial = PolicyParams::from_bank(&bank);
    Ok(filter_bank(
        &bank,
        &initial,
        config.bank_seed,
        config.filter_samples,
        config.filter_subsample,
    )?
    .bank)
}
