use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grpo::AdamWConfig;
use crate::problem::DifficultyMix;
use crate::scaffold::{ExemptionConfig, HintSchedule, ScaffoldConfig};

/// Training variants, including the ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    VanillaGrpo,
    ScafFull,
    SolutionOnly,
    NoKnowledge,
    NoPlanning,
    NoSolution,
    FullHintNonincremental,
    NoPhase1,
}

impl Variant {
    pub const ALL: [Variant; 8] = [
        Variant::VanillaGrpo,
        Variant::ScafFull,
        Variant::SolutionOnly,
        Variant::NoKnowledge,
        Variant::NoPlanning,
        Variant::NoSolution,
        Variant::FullHintNonincremental,
        Variant::NoPhase1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::VanillaGrpo => "vanilla_grpo",
            Variant::ScafFull => "scaf_full",
            Variant::SolutionOnly => "solution_only",
            Variant::NoKnowledge => "no_knowledge",
            Variant::NoPlanning => "no_planning",
            Variant::NoSolution => "no_solution",
            Variant::FullHintNonincremental => "full_hint_nonincremental",
            Variant::NoPhase1 => "no_phase1",
        }
    }

    /// Hint schedule, or `None` for plain GRPO.
    pub fn schedule(self) -> Option<HintSchedule> {
        match self {
            Variant::VanillaGrpo => None,
            Variant::ScafFull | Variant::NoPhase1 => Some(HintSchedule::Full),
            Variant::SolutionOnly => Some(HintSchedule::SolutionOnly),
            Variant::NoKnowledge => Some(HintSchedule::WithoutKnowledge),
            Variant::NoPlanning => Some(HintSchedule::WithoutPlanning),
            Variant::NoSolution => Some(HintSchedule::WithoutSolution),
            Variant::FullHintNonincremental => Some(HintSchedule::NonIncremental),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Every knob of a training run. Loaded from a flat TOML document; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub variant: Variant,
    pub total_steps: u64,
    /// When non-zero, overrides `total_steps` with this many passes over the bank.
    pub epochs: u64,
    pub prompts_per_batch: usize,
    /// Rollouts per prompt (`N`).
    pub rollouts: usize,
    pub clip_eps: f64,
    pub eps_std: f64,

    // Sized for this task; large-model fine-tuning uses lr = 1e-6.
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub second_moment: bool,
    pub inner_epochs: usize,
    pub minibatches: usize,

    pub exemption_floor: f64,
    pub exemption_cap: f64,
    pub plateau_window: usize,
    pub plateau_tau: f64,
    pub attempts_per_level: usize,

    pub eval_interval: u64,
    /// Must stay 0: no KL penalty term exists.
    pub kl_coef: f64,
    /// Must stay 0: no entropy bonus term exists.
    pub entropy_coef: f64,

    pub bank_seed: u64,
    pub rollout_seed: u64,
    pub scaffold_seed: u64,
    pub replacement_seed: u64,

    /// Bank file to train on; when empty a bank is generated from the fields below.
    pub bank_path: String,
    pub bank_count: usize,
    pub alphabet: usize,
    pub mix_easy: f64,
    pub mix_medium: f64,
    pub mix_hard: f64,
    /// Apply the 8-sample difficulty filter before training.
    pub filter_bank: bool,
    pub filter_samples: usize,
    pub filter_subsample: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamWConfig::default();
        let ex = ExemptionConfig::default();
        Self {
            variant: Variant::ScafFull,
            total_steps: 300,
            epochs: 0,
            prompts_per_batch: 16,
            rollouts: 8,
            clip_eps: 0.2,
            eps_std: crate::grpo::DEFAULT_EPS_STD,
            lr: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            adam_eps: adam.eps,
            weight_decay: adam.weight_decay,
            second_moment: adam.second_moment,
            inner_epochs: 1,
            minibatches: 1,
            exemption_floor: ex.floor_fraction,
            exemption_cap: ex.cap_fraction,
            plateau_window: ex.window,
            plateau_tau: ex.plateau_tau,
            attempts_per_level: 1,
            eval_interval: 10,
            kl_coef: 0.0,
            entropy_coef: 0.0,
            bank_seed: 0,
            rollout_seed: 1,
            scaffold_seed: 2,
            replacement_seed: 3,
            bank_path: String::new(),
            bank_count: 200,
            alphabet: 8,
            mix_easy: 0.25,
            mix_medium: 0.5,
            mix_hard: 0.25,
            filter_bank: false,
            filter_samples: 8,
            filter_subsample: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: TrainConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_variant(&self, variant: Variant) -> Self {
        Self {
            variant,
            ..self.clone()
        }
    }

    pub fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.adam_eps,
            weight_decay: self.weight_decay,
            second_moment: self.second_moment,
        }
    }

    pub fn exemption(&self) -> ExemptionConfig {
        ExemptionConfig {
            floor_fraction: self.exemption_floor,
            cap_fraction: self.exemption_cap,
            window: self.plateau_window,
            plateau_tau: self.plateau_tau,
            enabled: self.variant != Variant::NoPhase1,
        }
    }

    pub fn scaffold(&self) -> Option<ScaffoldConfig> {
        self.variant.schedule().map(|schedule| ScaffoldConfig {
            exemption: self.exemption(),
            schedule,
            attempts_per_level: self.attempts_per_level,
        })
    }

    pub fn mix(&self) -> Result<DifficultyMix> {
        DifficultyMix::new(self.mix_easy, self.mix_medium, self.mix_hard)
    }

    /// Number of optimizer steps for a bank of `bank_len` problems.
    pub fn steps_for(&self, bank_len: usize) -> u64 {
        if self.epochs > 0 {
            (self.epochs * bank_len as u64).div_ceil(self.prompts_per_batch as u64)
        } else {
            self.total_steps
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.rollouts < 2 {
            return fail(format!("rollouts (N) must be >= 2, got {}", self.rollouts));
        }
        if self.prompts_per_batch == 0 {
            return fail("prompts_per_batch must be >= 1".into());
        }
        if self.clip_eps.is_nan() || self.clip_eps <= 0.0 {
            return fail(format!("clip_eps must be > 0, got {}", self.clip_eps));
        }
        if self.eps_std.is_nan() || self.eps_std <= 0.0 {
            return fail(format!("eps_std must be > 0, got {}", self.eps_std));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("lr must be a positive number, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("beta1 and beta2 must lie in [0, 1)".into());
        }
        if self.weight_decay < 0.0 {
            return fail("weight_decay must be >= 0".into());
        }
        if self.kl_coef != 0.0 {
            return fail(format!(
                "kl_coef must be 0.0: the objective has no KL penalty term (got {})",
                self.kl_coef
            ));
        }
        if self.entropy_coef != 0.0 {
            return fail(format!(
                "entropy_coef must be 0.0: the objective has no entropy bonus (got {})",
                self.entropy_coef
            ));
        }
        if self.inner_epochs == 0 || self.minibatches == 0 {
            return fail("inner_epochs and minibatches must be >= 1".into());
        }
        if self.attempts_per_level == 0 {
            return fail("attempts_per_level must be >= 1".into());
        }
        if self.eval_interval == 0 {
            return fail("eval_interval must be >= 1".into());
        }
        if self.filter_samples == 0 || !(0.0..=1.0).contains(&self.filter_subsample) {
            return fail("filter_samples must be >= 1 and filter_subsample in [0, 1]".into());
        }
        self.exemption().validate().map_err(Error::Config)?;
        self.mix().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}
