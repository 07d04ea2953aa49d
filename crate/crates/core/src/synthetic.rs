//! Seeded synthetic rating corpora with known structure.
//!
//! [`planted_clusters`] builds a tiny dataset where each user belongs to one
//! of a few clusters and likes exactly that cluster's item block.
//! [`movielens_like`] builds a corpus shaped like MovieLens 100K with genre
//! tastes, popularity skew and popular-first rating timelines.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use crate::data::{Interaction, InteractionLog, Vocab};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedConfig {
    pub users: usize,
    pub items: usize,
    pub clusters: usize,
    /// Items rated from the user's own block (capped at the block size).
    pub ratings_per_user: usize,
    /// Items rated from other blocks, on top of `ratings_per_user`.
    pub off_cluster_per_user: usize,
}

impl Default for PlantedConfig {
    fn default() -> Self {
        Self {
            users: 50,
            items: 30,
            clusters: 2,
            ratings_per_user: 15,
            off_cluster_per_user: 3,
        }
    }
}

/// Cluster of a planted user, given its external id `u{index}`.
pub fn planted_cluster_of(user_index: usize, clusters: usize) -> usize {
    user_index % clusters
}

/// Users `u0..` alternate between clusters; items `i0..` are split into
/// contiguous blocks, one per cluster. In-block ratings are 4 or 5,
/// off-block ratings 1 or 2, and timestamps are a random order per user.
pub fn planted_clusters(cfg: &PlantedConfig, seed_value: u64) -> InteractionLog {
    let mut rng = seed::substream(seed_value, "planted");
    let block = cfg.items / cfg.clusters.max(1);
    // Items are interned up front so that item `i{k}` has index k.
    let mut users = Vocab::default();
    let mut items = Vocab::default();
    for i in 0..cfg.items {
        items.intern(&format!("i{i}"));
    }
    let mut raw = Vec::new();
    for u in 0..cfg.users {
        let cluster = planted_cluster_of(u, cfg.clusters);
        let own: Vec<usize> = (cluster * block..(cluster + 1) * block).collect();
        let others: Vec<usize> = (0..cfg.items).filter(|i| !own.contains(i)).collect();
        let mut picked: Vec<(usize, f64)> = own
            .choose_multiple(&mut rng, cfg.ratings_per_user.min(own.len()))
            .map(|&i| (i, if rng.gen_bool(0.5) { 5.0 } else { 4.0 }))
            .collect();
        picked.extend(
            others
                .choose_multiple(&mut rng, cfg.off_cluster_per_user.min(others.len()))
                .map(|&i| (i, if rng.gen_bool(0.5) { 2.0 } else { 1.0 })),
        );
        picked.shuffle(&mut rng);
        let user = users.intern(&format!("u{u}"));
        for (t, (item, rating)) in picked.into_iter().enumerate() {
            raw.push(Interaction {
                user,
                item,
                rating,
                timestamp: 1_000 + t as u64,
            });
        }
    }
    InteractionLog::from_parts(raw, users, items)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub users: usize,
    pub items: usize,
    pub genres: usize,
    /// Median ratings per user above the 20-rating floor.
    pub median_extra_ratings: f64,
    /// Log-normal spread of the per-user rating count.
    pub count_spread: f64,
    /// Zipf exponent of item popularity.
    pub popularity_exponent: f64,
}

impl Default for CorpusConfig {
    /// About 943 users, 1,682 items and 100k ratings.
    fn default() -> Self {
        Self {
            users: 943,
            items: 1682,
            genres: 10,
            median_extra_ratings: 60.0,
            count_spread: 0.9,
            popularity_exponent: 0.9,
        }
    }
}

/// A MovieLens-shaped corpus. Each user has a primary and a secondary genre;
/// items are drawn without replacement with weight `popularity × affinity`;
/// ratings rise with affinity; a user's timeline starts with their most
/// popular items.
pub fn movielens_like(cfg: &CorpusConfig, seed_value: u64) -> InteractionLog {
    let mut rng = seed::substream(seed_value, "corpus");
    let noise = Normal::new(0.0, 1.0).expect("valid normal");
    let counts = LogNormal::new(cfg.median_extra_ratings.ln(), cfg.count_spread).expect("valid log-normal");

    let genre: Vec<usize> = (0..cfg.items).map(|_| rng.gen_range(0..cfg.genres)).collect();
    let mut ranks: Vec<usize> = (0..cfg.items).collect();
    ranks.shuffle(&mut rng);
    let popularity: Vec<f64> = ranks
        .iter()
        .map(|&r| 1.0 / ((r + 1) as f64).powf(cfg.popularity_exponent))
        .collect();
    let quality: Vec<f64> = (0..cfg.items).map(|_| 0.4 * noise.sample(&mut rng)).collect();

    let mut rows = Vec::new();
    for u in 0..cfg.users {
        let primary = rng.gen_range(0..cfg.genres);
        let mut secondary = rng.gen_range(0..cfg.genres);
        if secondary == primary {
            secondary = (secondary + 1) % cfg.genres;
        }
        let affinity = |g: usize| {
            if g == primary {
                8.0
            } else if g == secondary {
                3.0
            } else {
                0.3
            }
        };
        let bonus = |g: usize| {
            if g == primary {
                1.0
            } else if g == secondary {
                0.4
            } else {
                -0.6
            }
        };
        let n = (20.0 + counts.sample(&mut rng)).min(cfg.items as f64 * 0.4) as usize;
        // Weighted sampling without replacement via exponential keys.
        let mut keyed: Vec<(f64, usize)> = (0..cfg.items)
            .map(|i| {
                let w = popularity[i] * affinity(genre[i]);
                let e: f64 = -rng.gen::<f64>().ln();
                (e / w, i)
            })
            .collect();
        keyed.select_nth_unstable_by(n - 1, |a, b| a.0.total_cmp(&b.0));
        keyed.truncate(n);
        let user_bias = 3.4 + 0.35 * noise.sample(&mut rng);
        // Timeline: popular items first, with jitter.
        let mut timeline: Vec<(f64, usize)> = keyed
            .iter()
            .map(|&(_, i)| (-popularity[i].ln() + 1.5 * noise.sample(&mut rng), i))
            .collect();
        timeline.sort_by(|a, b| a.0.total_cmp(&b.0));
        let start = 880_000_000u64 + rng.gen_range(0..20_000_000);
        let mut t = start;
        for (_, i) in timeline {
            t += rng.gen_range(1..5_000);
            let raw = user_bias + bonus(genre[i]) + quality[i] + 0.6 * noise.sample(&mut rng);
            let rating = raw.round().clamp(1.0, 5.0);
            rows.push((u + 1, i + 1, rating, t));
        }
    }
    // MovieLens files are grouped by user, not globally sorted by time.
    let ids: Vec<(String, String, f64, u64)> = rows
        .into_iter()
        .map(|(u, i, r, t)| (u.to_string(), i.to_string(), r, t))
        .collect();
    InteractionLog::from_records(ids.iter().map(|(u, i, r, t)| (u.as_str(), i.as_str(), *r, *t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_rating_vector, relevance_vector};

    #[test]
    fn planted_structure() {
        let cfg = PlantedConfig::default();
        let log = planted_clusters(&cfg, 1);
        assert_eq!(log.num_users(), 50);
        assert_eq!(log.num_items(), 30);
        assert_eq!(log.len(), 50 * 18);
        for u in 0..50 {
            let cluster = planted_cluster_of(u, 2);
            let w = build_rating_vector(&log, log.users().get(&format!("u{u}")).unwrap()).unwrap();
            for item in relevance_vector(&w).items() {
                assert_eq!(item / 15, cluster);
            }
        }
        assert_eq!(planted_clusters(&cfg, 1), log);
    }

    #[test]
    fn corpus_shape() {
        let log = movielens_like(&CorpusConfig::default(), 5);
        assert_eq!(log.num_users(), 943);
        assert!(log.num_items() > 1500, "{}", log.num_items());
        assert!((80_000..130_000).contains(&log.len()), "{}", log.len());
        let min_count = (0..log.num_users())
            .map(|u| log.user_interactions(u).unwrap().count())
            .min()
            .unwrap();
        assert!(min_count >= 20);
    }
}
