//! Ranking metrics and the cold-start evaluation protocol.
//!
//! For each evaluated user the cold input is their `cold_keep` earliest
//! ratings; the held-out relevant set is every item rated above the user's
//! mean (over the full warm vector) that is not in the cold input. Users with
//! an empty held-out relevant set are excluded from the averages and counted.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{build_rating_vector, cold_input, relevance_vector, DataError, DatasetSplit, InteractionLog};
use crate::nn::NnError;
use crate::recommend::{recommend, Scorer};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("user has no relevant items")]
    NoRelevant,
    #[error("k = {k} exceeds the {pool} recommendable items")]
    KExceedsPool { k: usize, pool: usize },
    #[error("scores for {found} items, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("test cohort is empty")]
    EmptyCohort,
    #[error("no user could be evaluated ({excluded} excluded)")]
    NoEvaluatedUsers { excluded: usize },
    #[error("invalid evaluation setting: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] NnError),
    #[error(transparent)]
    Data(#[from] DataError),
}

fn hits(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> usize {
    recs.iter().take(k).filter(|i| relevant.contains(i)).count()
}

fn require_relevant(relevant: &HashSet<usize>, k: usize) -> Result<(), EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidArgument("k must be positive".into()));
    }
    if relevant.is_empty() {
        return Err(EvalError::NoRelevant);
    }
    Ok(())
}

/// `|top-k ∩ relevant| / k`.
pub fn precision_at_k(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> Result<f64, EvalError> {
    require_relevant(relevant, k)?;
    Ok(hits(recs, relevant, k) as f64 / k as f64)
}

/// `|top-k ∩ relevant| / |relevant|`.
pub fn recall_at_k(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> Result<f64, EvalError> {
    require_relevant(relevant, k)?;
    Ok(hits(recs, relevant, k) as f64 / relevant.len() as f64)
}

/// Binary-gain nDCG with discount `1 / log2(p + 1)` at 1-based position `p`.
pub fn ndcg_at_k(recs: &[usize], relevant: &HashSet<usize>, k: usize) -> Result<f64, EvalError> {
    require_relevant(relevant, k)?;
    let dcg: f64 = recs
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, i)| relevant.contains(i))
        .map(|(p, _)| 1.0 / ((p + 2) as f64).log2())
        .sum();
    let idcg: f64 = (0..relevant.len().min(k)).map(|p| 1.0 / ((p + 2) as f64).log2()).sum();
    Ok(dcg / idcg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalProtocol {
    pub ks: Vec<usize>,
    /// Earliest ratings used as each user's cold input.
    pub cold_keep: usize,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            ks: vec![5, 10],
            cold_keep: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsAtK {
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserMetrics {
    pub user: usize,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub ndcg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub metrics: Vec<MetricsAtK>,
    pub evaluated_users: usize,
    pub excluded_users: usize,
    pub seed: u64,
    pub config_hash: String,
}

impl MetricsReport {
    pub fn at(&self, k: usize) -> Option<&MetricsAtK> {
        self.metrics.iter().find(|m| m.k == k)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>4}  {:>9}  {:>9}  {:>9}", "k", "precision", "recall", "ndcg");
        for m in &self.metrics {
            let _ = writeln!(
                out,
                "{:>4}  {:>9.4}  {:>9.4}  {:>9.4}",
                m.k, m.precision, m.recall, m.ndcg
            );
        }
        let _ = writeln!(
            out,
            "evaluated users: {}  excluded users: {}  seed: {}  config: {}",
            self.evaluated_users, self.excluded_users, self.seed, self.config_hash
        );
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub per_user: Vec<UserMetrics>,
}

pub fn write_per_user_csv<W: Write>(rows: &[UserMetrics], mut out: W) -> std::io::Result<()> {
    writeln!(out, "user,k,p,r,ndcg")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.user, r.k, r.precision, r.recall, r.ndcg)?;
    }
    Ok(())
}

/// Cold input and held-out relevant set for one user, or `None` when the
/// held-out relevant set is empty.
pub fn held_out_target(
    log: &InteractionLog,
    user: usize,
    cold_keep: usize,
) -> Result<Option<(crate::data::RatingVector, HashSet<usize>)>, EvalError> {
    let warm = build_rating_vector(log, user)?;
    let cold = cold_input(&warm, cold_keep);
    let relevant: HashSet<usize> = relevance_vector(&warm)
        .items()
        .into_iter()
        .filter(|&i| !cold.is_rated(i))
        .collect();
    Ok((!relevant.is_empty()).then_some((cold, relevant)))
}

/// Runs the protocol over `users`. Users are processed in the given order
/// and averages are accumulated in that order.
pub fn evaluate_users<S: Scorer + ?Sized>(
    scorer: &S,
    log: &InteractionLog,
    users: &[usize],
    protocol: &EvalProtocol,
) -> Result<Evaluation, EvalError> {
    if users.is_empty() {
        return Err(EvalError::EmptyCohort);
    }
    if protocol.ks.is_empty() || protocol.ks.contains(&0) || protocol.cold_keep == 0 {
        return Err(EvalError::InvalidArgument(
            "ks must be nonempty and positive, cold_keep positive".into(),
        ));
    }
    let k_max = *protocol.ks.iter().max().expect("nonempty");
    let mut sums = vec![(0.0, 0.0, 0.0); protocol.ks.len()];
    let mut per_user = Vec::new();
    let mut evaluated = 0usize;
    let mut excluded = 0usize;
    for &user in users {
        let Some((cold, relevant)) = held_out_target(log, user, protocol.cold_keep)? else {
            excluded += 1;
            continue;
        };
        let pool = cold.len() - cold.count();
        let recs = recommend(scorer, user, &cold, k_max.min(pool))?;
        evaluated += 1;
        for (slot, &k) in sums.iter_mut().zip(&protocol.ks) {
            let p = precision_at_k(&recs.items, &relevant, k)?;
            let r = recall_at_k(&recs.items, &relevant, k)?;
            let n = ndcg_at_k(&recs.items, &relevant, k)?;
            slot.0 += p;
            slot.1 += r;
            slot.2 += n;
            per_user.push(UserMetrics {
                user,
                k,
                precision: p,
                recall: r,
                ndcg: n,
            });
        }
    }
    if evaluated == 0 {
        return Err(EvalError::NoEvaluatedUsers { excluded });
    }
    let count = evaluated as f64;
    let metrics = protocol
        .ks
        .iter()
        .zip(sums)
        .map(|(&k, (p, r, n))| MetricsAtK {
            k,
            precision: p / count,
            recall: r / count,
            ndcg: n / count,
        })
        .collect();
    Ok(Evaluation {
        report: MetricsReport {
            metrics,
            evaluated_users: evaluated,
            excluded_users: excluded,
            seed: 0,
            config_hash: String::new(),
        },
        per_user,
    })
}

/// Expected P@k of a uniformly random ranking over the same users: each
/// evaluated user contributes `|relevant| / pool` (any k up to the pool).
pub fn expected_random_precision(log: &InteractionLog, users: &[usize], cold_keep: usize) -> Result<f64, EvalError> {
    let mut sum = 0.0;
    let mut evaluated = 0usize;
    for &user in users {
        if let Some((cold, relevant)) = held_out_target(log, user, cold_keep)? {
            sum += relevant.len() as f64 / (cold.len() - cold.count()) as f64;
            evaluated += 1;
        }
    }
    if evaluated == 0 {
        return Err(EvalError::NoEvaluatedUsers { excluded: users.len() });
    }
    Ok(sum / evaluated as f64)
}

/// Evaluates the test cohort of `split`.
pub fn evaluate<S: Scorer + ?Sized>(
    scorer: &S,
    log: &InteractionLog,
    split: &DatasetSplit,
    protocol: &EvalProtocol,
) -> Result<Evaluation, EvalError> {
    let mut eval = evaluate_users(scorer, log, &split.test_users, protocol)?;
    eval.report.seed = split.seed;
    Ok(eval)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> HashSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn worked_example() {
        let recs = [0, 1, 2, 3, 4];
        let rel = set(&[0, 2]);
        assert!((precision_at_k(&recs, &rel, 5).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(recall_at_k(&recs, &rel, 5).unwrap(), 1.0);
        let ndcg = ndcg_at_k(&recs, &rel, 5).unwrap();
        let expected = 1.5 / (1.0 + 1.0 / 3f64.log2());
        assert!((ndcg - expected).abs() < 1e-15);
        assert!((ndcg - 0.91972).abs() < 1e-5);
    }

    #[test]
    fn degenerate_lists() {
        let recs = [5, 6, 7];
        assert_eq!(precision_at_k(&recs, &set(&[1]), 3).unwrap(), 0.0);
        assert_eq!(recall_at_k(&recs, &set(&[1]), 3).unwrap(), 0.0);
        assert_eq!(precision_at_k(&recs, &set(&[5, 6, 7]), 3).unwrap(), 1.0);
        assert_eq!(recall_at_k(&recs, &set(&[5, 6, 7]), 3).unwrap(), 1.0);
        assert_eq!(ndcg_at_k(&recs, &set(&[5, 6]), 3).unwrap(), 1.0);
        assert!(matches!(
            precision_at_k(&recs, &set(&[]), 3),
            Err(EvalError::NoRelevant)
        ));
        assert!(matches!(ndcg_at_k(&recs, &set(&[]), 3), Err(EvalError::NoRelevant)));
    }

    #[test]
    fn single_hit_at_last_position() {
        let recs = [0, 1, 2, 3, 4];
        let n = ndcg_at_k(&recs, &set(&[4]), 5).unwrap();
        assert!((n - 1.0 / 6f64.log2()).abs() < 1e-15);
        assert!((n - 0.38685).abs() < 1e-5);
    }

    fn user_rows(user: &str, ratings: &[f64]) -> Vec<(String, String, f64, u64)> {
        ratings
            .iter()
            .enumerate()
            .map(|(i, &r)| (user.to_owned(), format!("i{i}"), r, i as u64))
            .collect()
    }

    fn owned(rows: &[(String, String, f64, u64)]) -> InteractionLog {
        InteractionLog::from_records(rows.iter().map(|(u, i, r, t)| (u.as_str(), i.as_str(), *r, *t)))
    }

    #[test]
    fn excluded_only_cohort_is_an_error() {
        let log = owned(&user_rows("u", &[4.0; 14]));
        let protocol = EvalProtocol::default();
        match evaluate_users(&crate::recommend::RandomScorer { seed: 1 }, &log, &[0], &protocol) {
            Err(EvalError::NoEvaluatedUsers { excluded: 1 }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            evaluate_users(&crate::recommend::RandomScorer { seed: 1 }, &log, &[], &protocol),
            Err(EvalError::EmptyCohort)
        ));
    }

    struct Oracle {
        relevant: Vec<HashSet<usize>>,
        log_items: usize,
    }

    impl Scorer for Oracle {
        fn score(&self, cold: &crate::data::RatingVector) -> Result<Vec<f64>, EvalError> {
            // Identify the user by their first cold item (unique per user below).
            let user = cold.rated_order()[0] / 100;
            Ok((0..self.log_items)
                .map(|i| if self.relevant[user].contains(&i) { 1.0 } else { 0.0 })
                .collect())
        }
    }

    #[test]
    fn perfect_model_scores_one() {
        // Two users, each with 10 cold items and 6 held-out, 5 of them rated 5.
        let mut rows = Vec::new();
        let mut relevant = Vec::new();
        for u in 0..2usize {
            let mut rel = HashSet::new();
            for j in 0..16usize {
                let item = u * 100 + j;
                let rating = if (10..15).contains(&j) { 5.0 } else { 2.0 };
                if rating == 5.0 {
                    rel.insert(item);
                }
                rows.push((format!("u{u}"), format!("{item}"), rating, j as u64));
            }
            relevant.push(rel);
        }
        // Pad the vocabulary so item ids equal indices.
        let mut padded: Vec<(String, String, f64, u64)> = Vec::new();
        for i in 0..200usize {
            padded.push(("pad".into(), format!("{i}"), 3.0, 0));
        }
        padded.extend(rows);
        let log = owned(&padded);
        let users = [log.users().get("u0").unwrap(), log.users().get("u1").unwrap()];
        let oracle = Oracle {
            relevant,
            log_items: log.num_items(),
        };
        let eval = evaluate_users(
            &oracle,
            &log,
            &users,
            &EvalProtocol {
                ks: vec![5],
                cold_keep: 10,
            },
        )
        .unwrap();
        let m = eval.report.at(5).unwrap();
        assert_eq!((m.precision, m.recall, m.ndcg), (1.0, 1.0, 1.0));
        assert_eq!(eval.report.evaluated_users, 2);
        assert_eq!(eval.per_user.len(), 2);
    }
}
