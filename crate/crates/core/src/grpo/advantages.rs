use crate::error::{Error, Result};

pub const DEFAULT_EPS_STD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageVector {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divides by `N`).
    pub std: f64,
}

/// `A_i = (R_i - mean) / (std + eps_std)` with population statistics.
pub fn group_advantages(rewards: &[f64], eps_std: f64) -> Result<AdvantageVector> {
    if rewards.len() < 2 {
        return Err(Error::Precondition(format!(
            "group advantages need N >= 2, got {}",
            rewards.len()
        )));
    }
    if eps_std.is_nan() || eps_std <= 0.0 {
        return Err(Error::Precondition(format!(
            "eps_std must be > 0, got {eps_std}"
        )));
    }
    let n = rewards.len() as f64;
    let mean = rewards.iter().sum::<f64>() / n;
    let std = (rewards.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
    let values = rewards
        .iter()
        .map(|r| (r - mean) / (std + eps_std))
        .collect();
    Ok(AdvantageVector { values, mean, std })
}
