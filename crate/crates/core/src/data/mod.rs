//! Rating logs, user cohorts and the per-user vectors fed to the model.
//!
//! Ratings stay on their native `[1, 5]` scale here; the GAN normalizes them
//! at its own boundary.

mod format;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use thiserror::Error;

pub use format::{
    parse_canonical, parse_csv_ratings, parse_movielens, write_canonical, write_csv_ratings, write_movielens,
};

/// Lowest rating on the supported scale.
pub const MIN_RATING: f64 = 1.0;
/// Highest rating on the supported scale.
pub const MAX_RATING: f64 = 5.0;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: rating {rating} outside [{MIN_RATING}, {MAX_RATING}]")]
    RatingOutOfScale { line: usize, rating: f64 },
    #[error("unknown user index {0}")]
    UnknownUser(usize),
    #[error("dataset has no users")]
    EmptyDataset,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A single rating event, with user and item resolved to vocabulary indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub user: usize,
    pub item: usize,
    pub rating: f64,
    pub timestamp: u64,
}

/// Bijection between opaque external ids and contiguous indices.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    /// Returns the index for `id`, assigning the next free one on first sight.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&idx) = self.index.get(id) {
            return idx;
        }
        let idx = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), idx);
        idx
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, idx: usize) -> Option<&str> {
        self.ids.get(idx).map(String::as_str)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Timestamped ratings plus user and item vocabularies.
///
/// Holds at most one interaction per (user, item) pair. A per-user index is
/// kept alongside so vector construction does not rescan the whole log.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionLog {
    interactions: Vec<Interaction>,
    users: Vocab,
    items: Vocab,
    by_user: Vec<Vec<usize>>,
}

impl InteractionLog {
    pub fn empty() -> Self {
        Self::from_parts(Vec::new(), Vocab::default(), Vocab::default())
    }

    /// Builds a log from already-resolved interactions. Duplicate
    /// (user, item) pairs collapse onto the first occurrence's position,
    /// carrying the values of the latest timestamp (later lines win ties).
    pub(crate) fn from_parts(raw: Vec<Interaction>, users: Vocab, items: Vocab) -> Self {
        let mut slot: HashMap<(usize, usize), usize> = HashMap::new();
        let mut interactions: Vec<Interaction> = Vec::with_capacity(raw.len());
        for record in raw {
            match slot.get(&(record.user, record.item)) {
                Some(&pos) => {
                    if record.timestamp >= interactions[pos].timestamp {
                        interactions[pos] = record;
                    }
                }
                None => {
                    slot.insert((record.user, record.item), interactions.len());
                    interactions.push(record);
                }
            }
        }
        let mut by_user = vec![Vec::new(); users.len()];
        for (pos, record) in interactions.iter().enumerate() {
            by_user[record.user].push(pos);
        }
        Self {
            interactions,
            users,
            items,
            by_user,
        }
    }

    /// Builds a log from external ids, assigning vocabularies in
    /// first-appearance order.
    pub fn from_records<'a, I>(records: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str, f64, u64)>,
    {
        let mut users = Vocab::default();
        let mut items = Vocab::default();
        let raw = records
            .into_iter()
            .map(|(u, i, rating, timestamp)| Interaction {
                user: users.intern(u),
                item: items.intern(i),
                rating,
                timestamp,
            })
            .collect();
        Self::from_parts(raw, users, items)
    }

    pub fn interactions(&self) -> &[Interaction] {
        &self.interactions
    }

    pub fn users(&self) -> &Vocab {
        &self.users
    }

    pub fn items(&self) -> &Vocab {
        &self.items
    }

    /// Number of users, `M`.
    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    /// Number of items, `N`.
    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn len(&self) -> usize {
        self.interactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interactions.is_empty()
    }

    /// Interactions of one user, in log order.
    pub fn user_interactions(&self, user: usize) -> Option<impl Iterator<Item = &Interaction>> {
        self.by_user
            .get(user)
            .map(|positions| positions.iter().map(move |&p| &self.interactions[p]))
    }

    /// `1 − ratings / (users · items)`, or 0 for an empty log.
    pub fn sparsity(&self) -> f64 {
        let cells = self.num_users() as f64 * self.num_items() as f64;
        if cells == 0.0 {
            0.0
        } else {
            1.0 - self.len() as f64 / cells
        }
    }
}

/// Drops users with fewer than `min_user_interactions` ratings, then items
/// with fewer than `min_item_raters` ratings among the remaining users, and
/// rebuilds both vocabularies. One pass each; not iterated to a fixed point.
pub fn filter_sparse(
    log: &InteractionLog,
    min_user_interactions: usize,
    min_item_raters: usize,
) -> Result<InteractionLog, DataError> {
    if min_user_interactions == 0 || min_item_raters == 0 {
        return Err(DataError::InvalidArgument(
            "filter thresholds must be at least 1".into(),
        ));
    }
    let keep_user: Vec<bool> = log.by_user.iter().map(|p| p.len() >= min_user_interactions).collect();
    let mut item_raters = vec![0usize; log.num_items()];
    for record in log.interactions.iter().filter(|r| keep_user[r.user]) {
        item_raters[record.item] += 1;
    }

    let mut users = Vocab::default();
    let mut items = Vocab::default();
    let mut kept = Vec::new();
    for record in &log.interactions {
        if !keep_user[record.user] || item_raters[record.item] < min_item_raters {
            continue;
        }
        kept.push(Interaction {
            user: users.intern(&log.users.ids[record.user]),
            item: items.intern(&log.items.ids[record.item]),
            rating: record.rating,
            timestamp: record.timestamp,
        });
    }
    Ok(InteractionLog::from_parts(kept, users, items))
}

/// Partition of user indices into train and test cohorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    /// Sorted ascending.
    pub train_users: Vec<usize>,
    /// Sorted ascending.
    pub test_users: Vec<usize>,
    pub seed: u64,
}

/// Shuffles user indices with a generator seeded by `seed` and takes the
/// first `floor(train_fraction · M)` as the train cohort.
pub fn split_users(log: &InteractionLog, train_fraction: f64, seed: u64) -> Result<DatasetSplit, DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::InvalidArgument(format!(
            "train fraction {train_fraction} must lie in (0, 1)"
        )));
    }
    let num_users = log.num_users();
    if num_users == 0 {
        return Err(DataError::EmptyDataset);
    }
    let mut order: Vec<usize> = (0..num_users).collect();
    order.shuffle(&mut crate::seed::rng(seed));
    // Tolerates representation error such as 0.7 * 10 = 6.999...
    let cut = (train_fraction * num_users as f64 + 1e-9).floor() as usize;
    let mut train_users = order[..cut].to_vec();
    let mut test_users = order[cut..].to_vec();
    train_users.sort_unstable();
    test_users.sort_unstable();
    Ok(DatasetSplit {
        train_users,
        test_users,
        seed,
    })
}

/// Dense rating vector over all `N` items; 0 marks an unrated item.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingVector {
    values: Vec<f64>,
    rated_order: Vec<usize>,
}

impl RatingVector {
    /// Builds a vector from `(item, rating)` pairs already sorted by time.
    pub fn from_timeline(num_items: usize, timeline: &[(usize, f64)]) -> Result<Self, DataError> {
        let mut values = vec![0.0; num_items];
        let mut rated_order = Vec::with_capacity(timeline.len());
        for &(item, rating) in timeline {
            if item >= num_items {
                return Err(DataError::InvalidArgument(format!(
                    "item {item} outside 0..{num_items}"
                )));
            }
            if rating == 0.0 || !rating.is_finite() {
                return Err(DataError::InvalidArgument(format!(
                    "rating {rating} for item {item} is not a valid rating"
                )));
            }
            if values[item] != 0.0 {
                return Err(DataError::InvalidArgument(format!(
                    "item {item} appears twice in timeline"
                )));
            }
            values[item] = rating;
            rated_order.push(item);
        }
        Ok(Self { values, rated_order })
    }

    pub fn zeros(num_items: usize) -> Self {
        Self {
            values: vec![0.0; num_items],
            rated_order: Vec::new(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rated item indices, earliest first.
    pub fn rated_order(&self) -> &[usize] {
        &self.rated_order
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of rated items.
    pub fn count(&self) -> usize {
        self.rated_order.len()
    }

    pub fn is_rated(&self, item: usize) -> bool {
        self.values.get(item).is_some_and(|&v| v != 0.0)
    }

    /// Keeps only the items at the given ranks (indices into `rated_order`),
    /// which must be ascending.
    pub(crate) fn retain_ranks(&self, ranks: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        let rated_order: Vec<usize> = ranks.iter().map(|&r| self.rated_order[r]).collect();
        for &item in &rated_order {
            values[item] = self.values[item];
        }
        Self { values, rated_order }
    }
}

/// The user's ratings, ordered by `(timestamp, item index)`.
pub fn build_rating_vector(log: &InteractionLog, user: usize) -> Result<RatingVector, DataError> {
    let records = log.user_interactions(user).ok_or(DataError::UnknownUser(user))?;
    let mut timeline: Vec<(u64, usize, f64)> = records.map(|r| (r.timestamp, r.item, r.rating)).collect();
    timeline.sort_by_key(|a| (a.0, a.1));
    let pairs: Vec<(usize, f64)> = timeline.into_iter().map(|(_, i, r)| (i, r)).collect();
    RatingVector::from_timeline(log.num_items(), &pairs)
}

/// The `keep` earliest ratings of `w`; everything else zeroed.
pub fn cold_input(w: &RatingVector, keep: usize) -> RatingVector {
    let ranks: Vec<usize> = (0..keep.min(w.count())).collect();
    w.retain_ranks(&ranks)
}

/// Items whose rating is strictly above the user's mean rating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelevanceVector {
    bits: Vec<bool>,
}

impl RelevanceVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Relevant item indices, ascending.
    pub fn items(&self) -> Vec<usize> {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// As 0.0 / 1.0 targets.
    pub fn to_targets(&self) -> Vec<f64> {
        self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }
}

pub fn relevance_vector(w: &RatingVector) -> RelevanceVector {
    let rated: Vec<f64> = w.rated_order.iter().map(|&i| w.values[i]).collect();
    let mut bits = vec![false; w.len()];
    if !rated.is_empty() {
        let mean = rated.iter().sum::<f64>() / rated.len() as f64;
        for &item in &w.rated_order {
            bits[item] = w.values[item] > mean;
        }
    }
    RelevanceVector { bits }
}
