//! Rating-log ingestion and the canonical internal data model.
//!
//! Raw datasets are parsed into [`Interaction`] lists, collapsed into a
//! [`RatingMatrix`] with dense user/item indices, and enriched into the
//! derived structures the rest of the pipeline consumes: per-item quality
//! scores, time-ordered consumption [`Sequences`] and per-item [`LikeSets`].
//! Everything here is immutable once built and safe to share read-only.

mod parse;
mod snapshot;

pub use parse::{
    parse_amazon, parse_label_sidecar, parse_movielens, AmazonParse, FieldKind, LabelSidecar,
    ParseStats, ParsedRatings, RatingsFormat, SidecarEntry, SidecarFormat,
};
pub use snapshot::{read_snapshot, write_snapshot, SNAPSHOT_SCHEMA_VERSION};

use std::collections::HashMap;

use log::warn;

use crate::error::{Error, Result};

/// One user-item rating event.
#[derive(Debug, Clone, PartialEq)]
pub struct Interaction {
    pub user_id: String,
    pub item_id: String,
    pub rating: f32,
    /// Seconds; 0 when the source record carries no timestamp.
    pub timestamp: i64,
}

/// Inclusive rating bounds of a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatingScale {
    pub min: f64,
    pub max: f64,
}

impl RatingScale {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min > 0.0 && max > min) {
            return Err(Error::InvalidInput(format!(
                "rating scale must satisfy 0 < min < max, got [{min}, {max}]"
            )));
        }
        Ok(RatingScale { min, max })
    }

    /// MovieLens half-star scale.
    pub fn half_stars() -> Self {
        RatingScale { min: 0.5, max: 5.0 }
    }

    /// Amazon review scale.
    pub fn five_star() -> Self {
        RatingScale { min: 1.0, max: 5.0 }
    }

    pub fn contains(&self, rating: f64) -> bool {
        rating >= self.min && rating <= self.max
    }
}

/// Sparse user×item rating matrix with dense 0-based index remappings.
///
/// Stored twice for access locality: row-compressed by user (with
/// timestamps and original record order, for sequence building) and
/// column-compressed by item (for quality and like sets).
#[derive(Debug, Clone)]
pub struct RatingMatrix {
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    user_lookup: HashMap<String, u32>,
    item_lookup: HashMap<String, u32>,
    scale: RatingScale,

    user_offsets: Vec<usize>,
    user_items: Vec<u32>,
    user_ratings: Vec<f32>,
    user_times: Vec<i64>,
    user_seqs: Vec<u32>,

    item_offsets: Vec<usize>,
    item_users: Vec<u32>,
    item_ratings: Vec<f32>,

    duplicates_dropped: usize,
}

impl RatingMatrix {
    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn n_entries(&self) -> usize {
        self.user_items.len()
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn user_id(&self, u: u32) -> &str {
        &self.user_ids[u as usize]
    }

    pub fn item_id(&self, i: u32) -> &str {
        &self.item_ids[i as usize]
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn user_index(&self, raw: &str) -> Option<u32> {
        self.user_lookup.get(raw).copied()
    }

    pub fn item_index(&self, raw: &str) -> Option<u32> {
        self.item_lookup.get(raw).copied()
    }

    pub fn item_lookup(&self) -> &HashMap<String, u32> {
        &self.item_lookup
    }

    fn user_range(&self, u: u32) -> std::ops::Range<usize> {
        self.user_offsets[u as usize]..self.user_offsets[u as usize + 1]
    }

    fn item_range(&self, i: u32) -> std::ops::Range<usize> {
        self.item_offsets[i as usize]..self.item_offsets[i as usize + 1]
    }

    pub fn user_items(&self, u: u32) -> &[u32] {
        &self.user_items[self.user_range(u)]
    }

    pub fn user_ratings(&self, u: u32) -> &[f32] {
        &self.user_ratings[self.user_range(u)]
    }

    pub fn user_times(&self, u: u32) -> &[i64] {
        &self.user_times[self.user_range(u)]
    }

    pub fn user_seqs(&self, u: u32) -> &[u32] {
        &self.user_seqs[self.user_range(u)]
    }

    pub fn item_users(&self, i: u32) -> &[u32] {
        &self.item_users[self.item_range(i)]
    }

    pub fn item_ratings(&self, i: u32) -> &[f32] {
        &self.item_ratings[self.item_range(i)]
    }

    pub fn item_rating_count(&self, i: u32) -> usize {
        self.item_range(i).len()
    }

    /// Mean rating of an item, `None` if it has no ratings.
    pub fn item_mean(&self, i: u32) -> Option<f64> {
        let r = self.item_ratings(i);
        if r.is_empty() {
            None
        } else {
            Some(r.iter().map(|&x| x as f64).sum::<f64>() / r.len() as f64)
        }
    }

    pub fn global_mean(&self) -> Option<f64> {
        if self.user_ratings.is_empty() {
            None
        } else {
            Some(
                self.user_ratings.iter().map(|&x| x as f64).sum::<f64>()
                    / self.user_ratings.len() as f64,
            )
        }
    }

    /// Rebuild a matrix from its row-compressed parts (snapshot loading and
    /// hand-built test fixtures). Items never rated are legal here.
    #[allow(clippy::too_many_arguments)]
    pub fn from_csr(
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        scale: RatingScale,
        user_offsets: Vec<usize>,
        user_items: Vec<u32>,
        user_ratings: Vec<f32>,
        user_times: Vec<i64>,
        user_seqs: Vec<u32>,
        duplicates_dropped: usize,
    ) -> Result<Self> {
        if user_offsets.len() != user_ids.len() + 1
            || *user_offsets.last().unwrap_or(&0) != user_items.len()
            || user_items.len() != user_ratings.len()
            || user_items.len() != user_times.len()
            || user_items.len() != user_seqs.len()
        {
            return Err(Error::InvalidInput(
                "inconsistent CSR arrays for rating matrix".into(),
            ));
        }
        if let Some(&bad) = user_items.iter().find(|&&i| i as usize >= item_ids.len()) {
            return Err(Error::InvalidInput(format!(
                "item index {bad} out of range (n_items = {})",
                item_ids.len()
            )));
        }

        let user_lookup = index_of(&user_ids)?;
        let item_lookup = index_of(&item_ids)?;

        // Column-compressed view by item.
        let n_items = item_ids.len();
        let mut counts = vec![0usize; n_items + 1];
        for &i in &user_items {
            counts[i as usize + 1] += 1;
        }
        for i in 0..n_items {
            counts[i + 1] += counts[i];
        }
        let item_offsets = counts.clone();
        let mut item_users = vec![0u32; user_items.len()];
        let mut item_ratings = vec![0f32; user_items.len()];
        let mut cursor = item_offsets.clone();
        for u in 0..user_ids.len() {
            for e in user_offsets[u]..user_offsets[u + 1] {
                let i = user_items[e] as usize;
                item_users[cursor[i]] = u as u32;
                item_ratings[cursor[i]] = user_ratings[e];
                cursor[i] += 1;
            }
        }

        Ok(RatingMatrix {
            user_ids,
            item_ids,
            user_lookup,
            item_lookup,
            scale,
            user_offsets,
            user_items,
            user_ratings,
            user_times,
            user_seqs,
            item_offsets,
            item_users,
            item_ratings,
            duplicates_dropped,
        })
    }

    pub(crate) fn csr_parts(&self) -> (&[usize], &[u32], &[f32], &[i64], &[u32]) {
        (
            &self.user_offsets,
            &self.user_items,
            &self.user_ratings,
            &self.user_times,
            &self.user_seqs,
        )
    }
}

fn index_of(ids: &[String]) -> Result<HashMap<String, u32>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (pos, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), pos as u32).is_some() {
            return Err(Error::InvalidInput(format!("duplicate id `{id}`")));
        }
    }
    Ok(map)
}

/// Collapse interactions into a [`RatingMatrix`].
///
/// Indices are assigned in order of first appearance. Duplicate
/// `(user, item)` pairs keep the rating with the latest timestamp (ties:
/// the later record); the number dropped is logged and recorded.
pub fn build_rating_matrix(
    interactions: &[Interaction],
    scale: RatingScale,
) -> Result<RatingMatrix> {
    if interactions.is_empty() {
        return Err(Error::InvalidInput(
            "cannot build a rating matrix from an empty interaction list".into(),
        ));
    }

    let mut user_ids: Vec<String> = Vec::new();
    let mut item_ids: Vec<String> = Vec::new();
    let mut user_lookup: HashMap<String, u32> = HashMap::new();
    let mut item_lookup: HashMap<String, u32> = HashMap::new();

    // (user, item) -> position in `kept`
    let mut slot: HashMap<(u32, u32), usize> = HashMap::new();
    // (user, item, rating, timestamp, original record index)
    let mut kept: Vec<(u32, u32, f32, i64, u32)> = Vec::new();
    let mut duplicates = 0usize;

    for (pos, x) in interactions.iter().enumerate() {
        if x.user_id.is_empty() || x.item_id.is_empty() {
            return Err(Error::InvalidInput(format!(
                "interaction #{pos} has an empty user or item id"
            )));
        }
        if !scale.contains(x.rating as f64) {
            return Err(Error::InvalidInput(format!(
                "interaction #{pos} rating {} outside scale [{}, {}]",
                x.rating, scale.min, scale.max
            )));
        }
        let u = *user_lookup.entry(x.user_id.clone()).or_insert_with(|| {
            user_ids.push(x.user_id.clone());
            (user_ids.len() - 1) as u32
        });
        let i = *item_lookup.entry(x.item_id.clone()).or_insert_with(|| {
            item_ids.push(x.item_id.clone());
            (item_ids.len() - 1) as u32
        });
        let record = (u, i, x.rating, x.timestamp, pos as u32);
        match slot.get(&(u, i)) {
            None => {
                slot.insert((u, i), kept.len());
                kept.push(record);
            }
            Some(&at) => {
                duplicates += 1;
                // keep the latest opinion
                if x.timestamp >= kept[at].3 {
                    kept[at] = record;
                }
            }
        }
    }
    if duplicates > 0 {
        warn!("dropped {duplicates} duplicate (user, item) ratings, keeping the latest");
    }

    kept.sort_unstable_by_key(|&(u, i, ..)| (u, i));

    let n_users = user_ids.len();
    let mut user_offsets = vec![0usize; n_users + 1];
    for &(u, ..) in &kept {
        user_offsets[u as usize + 1] += 1;
    }
    for u in 0..n_users {
        user_offsets[u + 1] += user_offsets[u];
    }
    let user_items: Vec<u32> = kept.iter().map(|e| e.1).collect();
    let user_ratings: Vec<f32> = kept.iter().map(|e| e.2).collect();
    let user_times: Vec<i64> = kept.iter().map(|e| e.3).collect();
    let user_seqs: Vec<u32> = kept.iter().map(|e| e.4).collect();

    let matrix = RatingMatrix::from_csr(
        user_ids,
        item_ids,
        scale,
        user_offsets,
        user_items,
        user_ratings,
        user_times,
        user_seqs,
        duplicates,
    )?;

    let thin_users = (0..matrix.n_users() as u32)
        .filter(|&u| matrix.user_items(u).len() < 5)
        .count();
    let thin_items = (0..matrix.n_items() as u32)
        .filter(|&i| matrix.item_rating_count(i) < 5)
        .count();
    if thin_users > 0 || thin_items > 0 {
        warn!(
            "dataset is not 5-core: {thin_users} users and {thin_items} items have fewer than 5 interactions"
        );
    }

    Ok(matrix)
}

/// How per-item quality is quantified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityMode {
    /// Average user rating.
    Mean,
    /// Average user rating weighted by the number of ratings.
    WeightedMean,
}

impl QualityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            QualityMode::Mean => "mean",
            QualityMode::WeightedMean => "weighted_mean",
        }
    }
}

/// Normalized per-item quality vector (sums to 1, all entries positive).
///
/// Items with no ratings are assigned the global mean rating (and unit
/// weight in `WeightedMean` mode) before normalizing, so that downstream
/// desired-exposure vectors stay strictly positive.
pub fn item_quality(matrix: &RatingMatrix, mode: QualityMode) -> Result<Vec<f64>> {
    let global = matrix
        .global_mean()
        .ok_or_else(|| Error::InvalidInput("rating matrix has no ratings at all".into()))?;
    let mut unrated = 0usize;
    let mut q: Vec<f64> = (0..matrix.n_items() as u32)
        .map(|i| {
            let (mean, count) = match matrix.item_mean(i) {
                Some(m) => (m, matrix.item_rating_count(i) as f64),
                None => {
                    unrated += 1;
                    (global, 1.0)
                }
            };
            match mode {
                QualityMode::Mean => mean,
                QualityMode::WeightedMean => mean * count,
            }
        })
        .collect();
    if unrated > 0 {
        warn!("{unrated} items have zero ratings; assigned the global mean rating {global:.3}");
    }
    let total: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= total);
    Ok(q)
}

/// Per-user item lists ordered by consumption time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequences {
    pub per_user: Vec<Vec<u32>>,
}

impl Sequences {
    pub fn total_len(&self) -> usize {
        self.per_user.iter().map(Vec::len).sum()
    }
}

/// Time-ordered item sequence per user, ties broken by item index.
///
/// When no record in the matrix carries a timestamp, original record order
/// is used instead (logged).
pub fn build_sequences(matrix: &RatingMatrix) -> Sequences {
    let has_times = (0..matrix.n_users() as u32).any(|u| matrix.user_times(u).iter().any(|&t| t != 0));
    if !has_times {
        warn!("no timestamps in dataset; sequences use original record order");
    }
    let per_user = (0..matrix.n_users() as u32)
        .map(|u| {
            let items = matrix.user_items(u);
            let times = matrix.user_times(u);
            let seqs = matrix.user_seqs(u);
            let mut order: Vec<usize> = (0..items.len()).collect();
            if has_times {
                order.sort_by_key(|&e| (times[e], items[e]));
            } else {
                order.sort_by_key(|&e| seqs[e]);
            }
            order.into_iter().map(|e| items[e]).collect()
        })
        .collect();
    Sequences { per_user }
}

/// Per-item rater and liker sets (sorted user indices).
#[derive(Debug, Clone)]
pub struct LikeSets {
    /// `R_i`: users who rated item i.
    pub rated: Vec<Vec<u32>>,
    /// `L_i ⊆ R_i`: users who rated item i strictly above the threshold.
    pub liked: Vec<Vec<u32>>,
    pub threshold: f64,
}

/// Users who rated each item, and those who liked it (rating strictly
/// greater than `threshold`).
pub fn like_sets(matrix: &RatingMatrix, threshold: f64) -> Result<LikeSets> {
    let scale = matrix.scale();
    if !(threshold >= scale.min && threshold <= scale.max) {
        return Err(Error::InvalidInput(format!(
            "like threshold {threshold} outside rating scale [{}, {}]",
            scale.min, scale.max
        )));
    }
    let mut rated = Vec::with_capacity(matrix.n_items());
    let mut liked = Vec::with_capacity(matrix.n_items());
    for i in 0..matrix.n_items() as u32 {
        let users = matrix.item_users(i);
        let ratings = matrix.item_ratings(i);
        rated.push(users.to_vec());
        liked.push(
            users
                .iter()
                .zip(ratings)
                .filter(|&(_, &r)| r as f64 > threshold)
                .map(|(&u, _)| u)
                .collect(),
        );
    }
    Ok(LikeSets {
        rated,
        liked,
        threshold,
    })
}

/// Per-item metadata: title, genre/category labels and rating statistics.
#[derive(Debug, Clone, Default)]
pub struct ItemCatalog {
    pub titles: Vec<String>,
    /// Sorted, deduplicated label sets; may be empty (such items are
    /// excluded from overlap metrics and counted).
    pub labels: Vec<Vec<String>>,
    pub n_ratings: Vec<u32>,
    pub mean_rating: Vec<f64>,
}

impl ItemCatalog {
    pub fn n_items(&self) -> usize {
        self.titles.len()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_empty()).count()
    }
}

/// Assemble the catalog for a matrix from an optional label sidecar.
/// Items absent from the sidecar get their raw id as title and no labels.
pub fn build_catalog(matrix: &RatingMatrix, sidecar: Option<&LabelSidecar>) -> ItemCatalog {
    let global = matrix.global_mean().unwrap_or(0.0);
    let mut titles = Vec::with_capacity(matrix.n_items());
    let mut labels = Vec::with_capacity(matrix.n_items());
    for i in 0..matrix.n_items() as u32 {
        let raw = matrix.item_id(i);
        let entry = sidecar.and_then(|s| s.get(raw));
        titles.push(
            entry
                .and_then(|e| e.title.clone())
                .unwrap_or_else(|| raw.to_string()),
        );
        let mut ls: Vec<String> = entry.map(|e| e.labels.clone()).unwrap_or_default();
        ls.sort();
        ls.dedup();
        labels.push(ls);
    }
    let n_ratings = (0..matrix.n_items() as u32)
        .map(|i| matrix.item_rating_count(i) as u32)
        .collect();
    let mean_rating = (0..matrix.n_items() as u32)
        .map(|i| matrix.item_mean(i).unwrap_or(global))
        .collect();
    let catalog = ItemCatalog {
        titles,
        labels,
        n_ratings,
        mean_rating,
    };
    let unlabeled = catalog.unlabeled_count();
    if unlabeled > 0 {
        warn!("{unlabeled} of {} items have no labels; they are skipped by overlap metrics", catalog.n_items());
    }
    catalog
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interaction(u: &str, i: &str, r: f32, t: i64) -> Interaction {
        Interaction {
            user_id: u.into(),
            item_id: i.into(),
            rating: r,
            timestamp: t,
        }
    }

    fn small_matrix() -> RatingMatrix {
        // users a, b; items x, y; 3 ratings
        build_rating_matrix(
            &[
                interaction("a", "x", 4.0, 10),
                interaction("a", "y", 3.0, 20),
                interaction("b", "x", 5.0, 5),
            ],
            RatingScale::half_stars(),
        )
        .unwrap()
    }

    #[test]
    fn matrix_shape_and_counts() {
        let m = small_matrix();
        assert_eq!(m.n_users(), 2);
        assert_eq!(m.n_items(), 2);
        assert_eq!(m.n_entries(), 3);
    }

    #[test]
    fn matrix_id_round_trip() {
        let m = small_matrix();
        for u in 0..m.n_users() as u32 {
            assert_eq!(m.user_index(m.user_id(u)), Some(u));
        }
        for i in 0..m.n_items() as u32 {
            assert_eq!(m.item_index(m.item_id(i)), Some(i));
        }
    }

    #[test]
    fn duplicate_keeps_latest_timestamp() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 2.0, 100),
                interaction("a", "x", 4.5, 50),
                interaction("a", "y", 3.0, 1),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        assert_eq!(m.n_entries(), 2);
        assert_eq!(m.duplicates_dropped(), 1);
        let x = m.item_index("x").unwrap();
        assert_eq!(m.item_ratings(x), &[2.0]); // t=100 beats t=50
    }

    #[test]
    fn duplicate_same_timestamp_last_record_wins() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 2.0, 7),
                interaction("a", "x", 4.0, 7),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let x = m.item_index("x").unwrap();
        assert_eq!(m.item_ratings(x), &[4.0]);
    }

    #[test]
    fn empty_interactions_rejected() {
        assert!(build_rating_matrix(&[], RatingScale::half_stars()).is_err());
    }

    #[test]
    fn quality_equal_means_split_evenly() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 4.0, 0),
                interaction("b", "y", 4.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let q = item_quality(&m, QualityMode::Mean).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quality_proportional_to_mean() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 3.0, 0),
                interaction("b", "y", 1.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let q = item_quality(&m, QualityMode::Mean).unwrap();
        assert!((q[0] - 0.75).abs() < 1e-12);
        assert!((q[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn quality_weighted_by_rating_count() {
        // means [4.0, 2.0] with counts [1, 4] -> weights [4, 8] -> [1/3, 2/3]
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 4.0, 0),
                interaction("a", "y", 2.0, 0),
                interaction("b", "y", 2.0, 0),
                interaction("c", "y", 2.0, 0),
                interaction("d", "y", 2.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let q = item_quality(&m, QualityMode::WeightedMean).unwrap();
        assert!((q[0] - 4.0 / 12.0).abs() < 1e-12);
        assert!((q[1] - 8.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn quality_sums_to_one_and_positive() {
        let m = small_matrix();
        for mode in [QualityMode::Mean, QualityMode::WeightedMean] {
            let q = item_quality(&m, mode).unwrap();
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(q.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn zero_rating_item_gets_global_mean() {
        // hand-built CSR with an item nobody rated
        let m = RatingMatrix::from_csr(
            vec!["a".into()],
            vec!["x".into(), "ghost".into()],
            RatingScale::half_stars(),
            vec![0, 1],
            vec![0],
            vec![4.0],
            vec![0],
            vec![0],
            0,
        )
        .unwrap();
        let q = item_quality(&m, QualityMode::Mean).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-12 && (q[1] - 0.5).abs() < 1e-12);
        let qw = item_quality(&m, QualityMode::WeightedMean).unwrap();
        assert!(qw.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn sequences_sorted_by_time() {
        let m = build_rating_matrix(
            &[
                interaction("u", "B", 4.0, 5),
                interaction("u", "A", 4.0, 1),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let s = build_sequences(&m);
        let a = m.item_index("A").unwrap();
        let b = m.item_index("B").unwrap();
        assert_eq!(s.per_user[0], vec![a, b]);
    }

    #[test]
    fn sequences_tie_broken_by_item_index() {
        // items first seen in order i3, i7 -> indices 0, 1; same timestamp
        let m = build_rating_matrix(
            &[
                interaction("u", "i7", 4.0, 9),
                interaction("u", "i3", 4.0, 9),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let s = build_sequences(&m);
        assert_eq!(s.per_user[0], vec![0, 1]);
    }

    #[test]
    fn sequences_without_timestamps_use_record_order() {
        let m = build_rating_matrix(
            &[
                interaction("u", "B", 4.0, 0),
                interaction("u", "A", 4.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let s = build_sequences(&m);
        let a = m.item_index("A").unwrap();
        let b = m.item_index("B").unwrap();
        assert_eq!(s.per_user[0], vec![b, a]);
    }

    #[test]
    fn sequences_cover_all_entries() {
        let m = small_matrix();
        let s = build_sequences(&m);
        assert_eq!(s.total_len(), m.n_entries());
    }

    #[test]
    fn like_sets_strictly_greater() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 4.0, 0),
                interaction("b", "x", 3.5, 0),
                interaction("c", "x", 5.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let ls = like_sets(&m, 3.5).unwrap();
        let x = m.item_index("x").unwrap() as usize;
        assert_eq!(ls.rated[x].len(), 3);
        let a = m.user_index("a").unwrap();
        let c = m.user_index("c").unwrap();
        assert_eq!(ls.liked[x], vec![a, c]);
    }

    #[test]
    fn like_sets_threshold_at_scale_max_empties_liked() {
        let m = small_matrix();
        let ls = like_sets(&m, 5.0).unwrap();
        assert!(ls.liked.iter().all(Vec::is_empty));
    }

    #[test]
    fn like_sets_threshold_four() {
        let m = build_rating_matrix(
            &[
                interaction("a", "x", 4.5, 0),
                interaction("b", "x", 4.0, 0),
            ],
            RatingScale::half_stars(),
        )
        .unwrap();
        let ls = like_sets(&m, 4.0).unwrap();
        assert_eq!(ls.liked[0], vec![m.user_index("a").unwrap()]);
    }

    #[test]
    fn liked_subset_of_rated() {
        let m = small_matrix();
        let ls = like_sets(&m, 3.5).unwrap();
        for i in 0..m.n_items() {
            for u in &ls.liked[i] {
                assert!(ls.rated[i].contains(u));
            }
        }
    }

    #[test]
    fn out_of_scale_rating_rejected_by_matrix() {
        let r = build_rating_matrix(
            &[interaction("a", "x", 9.0, 0)],
            RatingScale::half_stars(),
        );
        assert!(r.is_err());
    }
}
