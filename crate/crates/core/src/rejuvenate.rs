//! Warm → cold corruption of rating vectors.
//!
//! The time-based rule keeps the item at 0-based rank `i` (earliest first) of
//! a user with `count` ratings with probability
//!
//! ```text
//! p(i) = p_min + (p_max − p_min) · exp(−α · i / count)
//! ```
//!
//! so early ratings survive more often than late ones. The uniform variant
//! keeps every rating with the same probability and exists for ablations.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::RatingVector;

#[derive(Debug, Error, PartialEq)]
pub enum RejuvenationError {
    #[error("invalid rejuvenation config: {0}")]
    InvalidConfig(String),
    #[error("rank {rank} outside 0..{count}")]
    RankOutOfRange { rank: usize, count: usize },
    #[error("cannot rejuvenate a vector with no ratings")]
    EmptyVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RejuvenationMode {
    #[default]
    TimeBased,
    RandomUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RejuvenationConfig {
    pub p_min: f64,
    pub p_max: f64,
    pub alpha: f64,
    pub mode: RejuvenationMode,
    /// Keep probability for [`RejuvenationMode::RandomUniform`].
    pub random_keep_prob: f64,
}

impl Default for RejuvenationConfig {
    fn default() -> Self {
        Self {
            p_min: 0.1,
            p_max: 0.9,
            alpha: 2.0,
            mode: RejuvenationMode::TimeBased,
            random_keep_prob: 0.5,
        }
    }
}

impl RejuvenationConfig {
    pub fn validate(&self) -> Result<(), RejuvenationError> {
        let bad = |msg: String| Err(RejuvenationError::InvalidConfig(msg));
        if !(0.0 <= self.p_min && self.p_min < self.p_max && self.p_max <= 1.0) {
            return bad(format!(
                "need 0 <= p_min < p_max <= 1, got p_min={} p_max={}",
                self.p_min, self.p_max
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.random_keep_prob > 0.0 && self.random_keep_prob <= 1.0) {
            return bad(format!(
                "random_keep_prob must lie in (0, 1], got {}",
                self.random_keep_prob
            ));
        }
        Ok(())
    }
}

/// Retention probability of the item at 0-based time rank `rank` among
/// `count` rated items.
pub fn retention_probability(rank: usize, count: usize, cfg: &RejuvenationConfig) -> Result<f64, RejuvenationError> {
    if rank >= count {
        return Err(RejuvenationError::RankOutOfRange { rank, count });
    }
    let decay = (-cfg.alpha * rank as f64 / count as f64).exp();
    Ok(cfg.p_min + (cfg.p_max - cfg.p_min) * decay)
}

fn sample<R: Rng + ?Sized>(
    w: &RatingVector,
    rng: &mut R,
    keep_prob: impl Fn(usize) -> f64,
) -> Result<RatingVector, RejuvenationError> {
    if w.count() == 0 {
        return Err(RejuvenationError::EmptyVector);
    }
    let mut kept: Vec<usize> = (0..w.count())
        .filter(|&rank| rng.gen::<f64>() < keep_prob(rank))
        .collect();
    if kept.is_empty() {
        kept.push(0);
    }
    Ok(w.retain_ranks(&kept))
}

/// Time-based rejuvenation. One Bernoulli draw per rated item, earliest
/// first; if every draw fails the earliest item is kept.
pub fn rejuvenate<R: Rng + ?Sized>(
    w: &RatingVector,
    cfg: &RejuvenationConfig,
    rng: &mut R,
) -> Result<RatingVector, RejuvenationError> {
    cfg.validate()?;
    let count = w.count();
    let probs = (0..count)
        .map(|rank| retention_probability(rank, count, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    sample(w, rng, |rank| probs[rank])
}

/// Uniform dropout with `cfg.random_keep_prob`, same forced-keep rule.
pub fn rejuvenate_random<R: Rng + ?Sized>(
    w: &RatingVector,
    cfg: &RejuvenationConfig,
    rng: &mut R,
) -> Result<RatingVector, RejuvenationError> {
    cfg.validate()?;
    sample(w, rng, |_| cfg.random_keep_prob)
}

/// Dispatches on `cfg.mode`.
pub fn apply<R: Rng + ?Sized>(
    w: &RatingVector,
    cfg: &RejuvenationConfig,
    rng: &mut R,
) -> Result<RatingVector, RejuvenationError> {
    match cfg.mode {
        RejuvenationMode::TimeBased => rejuvenate(w, cfg, rng),
        RejuvenationMode::RandomUniform => rejuvenate_random(w, cfg, rng),
    }
}
