//! Top-N recommendation for cold-start users.

use std::cmp::Ordering;

use sha2::{Digest, Sha256};

use crate::data::{InteractionLog, RatingVector};
use crate::gan::{normalize_ratings, Generator};
use crate::metrics::EvalError;

/// Anything that scores every item for a user given their cold ratings.
pub trait Scorer {
    fn score(&self, cold: &RatingVector) -> Result<Vec<f64>, EvalError>;
}

impl Scorer for Generator {
    fn score(&self, cold: &RatingVector) -> Result<Vec<f64>, EvalError> {
        Ok(self.generate(&normalize_ratings(cold, self.rating_scale))?)
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score(&self, cold: &RatingVector) -> Result<Vec<f64>, EvalError> {
        (**self).score(cold)
    }
}

/// Scores items by how many train-cohort users rated them.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityScorer {
    counts: Vec<f64>,
}

impl PopularityScorer {
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }
}

impl Scorer for PopularityScorer {
    fn score(&self, cold: &RatingVector) -> Result<Vec<f64>, EvalError> {
        if cold.len() != self.counts.len() {
            return Err(EvalError::Dimension {
                expected: self.counts.len(),
                found: cold.len(),
            });
        }
        Ok(self.counts.clone())
    }
}

pub fn popularity_baseline(log: &InteractionLog, train_users: &[usize]) -> PopularityScorer {
    let mut in_train = vec![false; log.num_users()];
    for &u in train_users {
        if let Some(slot) = in_train.get_mut(u) {
            *slot = true;
        }
    }
    let mut counts = vec![0.0; log.num_items()];
    for r in log.interactions() {
        if in_train[r.user] {
            counts[r.item] += 1.0;
        }
    }
    PopularityScorer { counts }
}

/// Uniform random scores, reproducible per (seed, cold vector).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn score(&self, cold: &RatingVector) -> Result<Vec<f64>, EvalError> {
        use rand::Rng;
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        for &item in cold.rated_order() {
            hasher.update((item as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        let mut rng = crate::seed::rng(u64::from_le_bytes(bytes));
        Ok((0..cold.len()).map(|_| rng.gen::<f64>()).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecommendationList {
    pub user: usize,
    /// Best first.
    pub items: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Ranks every item not rated in `cold` by descending score, ties broken by
/// ascending item index, and returns the first `k`.
pub fn rank_unrated(scores: &[f64], cold: &RatingVector, k: usize) -> Result<Vec<(usize, f64)>, EvalError> {
    if scores.len() != cold.len() {
        return Err(EvalError::Dimension {
            expected: cold.len(),
            found: scores.len(),
        });
    }
    let pool = cold.len() - cold.count();
    if k == 0 || k > pool {
        return Err(EvalError::KExceedsPool { k, pool });
    }
    let mut candidates: Vec<(usize, f64)> = scores
        .iter()
        .enumerate()
        .filter(|&(i, _)| !cold.is_rated(i))
        .map(|(i, &s)| (i, s))
        .collect();
    let order = |a: &(usize, f64), b: &(usize, f64)| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        other => other,
    };
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, order);
        candidates.truncate(k);
    }
    candidates.sort_by(order);
    Ok(candidates)
}

pub fn recommend<S: Scorer + ?Sized>(
    scorer: &S,
    user: usize,
    cold: &RatingVector,
    k: usize,
) -> Result<RecommendationList, EvalError> {
    let scores = scorer.score(cold)?;
    let ranked = rank_unrated(&scores, cold, k)?;
    let (items, scores) = ranked.into_iter().unzip();
    Ok(RecommendationList { user, items, scores })
}
