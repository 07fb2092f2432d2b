//! Guidance exemption period.
//!
//! Hints stay off while the policy is still clearing zero-reward prompts on
//! its own. The period ends at the first step that is past the floor
//! fraction of training and where the windowed mean per-batch improvement of
//! the solve rate (share of groups with at least one success) falls below
//! `plateau_tau`. It always ends at the cap fraction. Once over it stays over.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExemptionConfig {
    pub floor_fraction: f64,
    pub cap_fraction: f64,
    /// Number of batches in the plateau window.
    pub window: usize,
    pub plateau_tau: f64,
    /// `false` turns hints on from the first step.
    pub enabled: bool,
}

impl Default for ExemptionConfig {
    fn default() -> Self {
        Self {
            floor_fraction: 0.15,
            cap_fraction: 0.30,
            window: 20,
            plateau_tau: 0.005,
            enabled: true,
        }
    }
}

impl ExemptionConfig {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ok = self.floor_fraction > 0.0
            && self.floor_fraction <= self.cap_fraction
            && self.cap_fraction <= 1.0;
        if !ok {
            return Err(format!(
                "need 0 < floor ({}) <= cap ({}) <= 1",
                self.floor_fraction, self.cap_fraction
            ));
        }
        if self.window < 2 {
            return Err(format!("plateau window must be >= 2, got {}", self.window));
        }
        Ok(())
    }
}

/// `ceil(fraction * total)`, tolerant of representation error in `fraction`.
fn fraction_step(fraction: f64, total: u64) -> u64 {
    (fraction * total as f64 - 1e-9).ceil().max(0.0) as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExemptionMonitor {
    config: ExemptionConfig,
    floor_step: u64,
    cap_step: u64,
    history: VecDeque<f64>,
    over: bool,
    ended_at: Option<u64>,
}

impl ExemptionMonitor {
    pub fn new(config: ExemptionConfig, total_steps: u64) -> Self {
        let mut monitor = Self {
            config,
            floor_step: fraction_step(config.floor_fraction, total_steps),
            cap_step: fraction_step(config.cap_fraction, total_steps),
            history: VecDeque::with_capacity(config.window),
            over: false,
            ended_at: None,
        };
        if !config.enabled {
            monitor.over = true;
            monitor.ended_at = Some(0);
        }
        monitor
    }

    pub fn is_over(&self) -> bool {
        self.over
    }

    /// Step at which the exemption ended, if it has.
    pub fn ended_at(&self) -> Option<u64> {
        self.ended_at
    }

    pub fn floor_step(&self) -> u64 {
        self.floor_step
    }

    pub fn cap_step(&self) -> u64 {
        self.cap_step
    }

    /// Mean per-batch change of the solve rate over a full window.
    pub fn mean_improvement(&self) -> Option<f64> {
        if self.history.len() < self.config.window {
            return None;
        }
        let first = self.history.front()?;
        let last = self.history.back()?;
        Some((last - first) / (self.history.len() - 1) as f64)
    }

    pub fn update(&mut self, step: u64, zero_reward_groups: usize, group_count: usize) {
        let solve_rate = if group_count == 0 {
            0.0
        } else {
            1.0 - zero_reward_groups as f64 / group_count as f64
        };
        if self.history.len() == self.config.window {
            self.history.pop_front();
        }
        self.history.push_back(solve_rate);
        if self.over {
            return;
        }
        let plateaued = self
            .mean_improvement()
            .is_some_and(|m| m < self.config.plateau_tau);
        if step >= self.cap_step || (step >= self.floor_step && plateaued) {
            self.over = true;
            self.ended_at = Some(step);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monitor() -> ExemptionMonitor {
        ExemptionMonitor::new(ExemptionConfig::default(), 300)
    }

    #[test]
    fn thresholds_for_300_steps() {
        let m = monitor();
        assert_eq!((m.floor_step(), m.cap_step()), (45, 90));
    }

    #[test]
    fn still_exempt_before_floor() {
        let mut m = monitor();
        for step in 1..=30 {
            m.update(step, 5, 16);
        }
        assert!(!m.is_over());
    }

    #[test]
    fn flat_history_ends_after_floor() {
        let mut m = monitor();
        for step in 1..=47 {
            m.update(step, 5, 16);
        }
        assert!(m.is_over());
        assert_eq!(m.ended_at(), Some(45));
    }

    #[test]
    fn cap_ends_improving_history() {
        let mut m = monitor();
        // Solve rate climbs by 1/100 per batch, well above tau.
        for step in 1..=90u64 {
            let zero = 100 - step as usize;
            m.update(step, zero, 100);
            if step < 90 {
                assert!(!m.is_over(), "ended early at {step}");
            }
        }
        assert!(m.is_over());
        assert_eq!(m.ended_at(), Some(90));
    }

    #[test]
    fn latch_never_reverts() {
        let mut m = monitor();
        for step in 1..=90 {
            m.update(step, 0, 16);
        }
        assert!(m.is_over());
        for step in 91..200u64 {
            m.update(step, (step % 16) as usize, 16);
            assert!(m.is_over());
        }
    }

    #[test]
    fn disabled_is_over_from_start() {
        let m = ExemptionMonitor::new(ExemptionConfig::disabled(), 300);
        assert!(m.is_over());
        assert_eq!(m.ended_at(), Some(0));
    }

    #[test]
    fn validation() {
        assert!(ExemptionConfig::default().validate().is_ok());
        let bad = ExemptionConfig {
            floor_fraction: 0.4,
            ..ExemptionConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
