//! Post records, the discrete time grid, and the bucketed count indexes that
//! every later stage reads from.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One annotated post. Concepts are opaque, case-sensitive identifiers.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PostRecord {
    pub post_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub concepts: BTreeSet<String>,
}

impl PostRecord {
    /// Builds a record, trimming concept ids and dropping the ones left empty.
    pub fn new<I, S>(post_id: impl Into<String>, user_id: impl Into<String>, timestamp: i64, concepts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let concepts =
            concepts.into_iter().map(|c| String::from(c.as_ref().trim())).filter(|c| !c.is_empty()).collect();
        PostRecord { post_id: post_id.into(), user_id: user_id.into(), timestamp, concepts }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Interval {
    Hourly,
    Daily,
}

impl Interval {
    pub const fn seconds(self) -> i64 {
        match self {
            Interval::Hourly => 3_600,
            Interval::Daily => 86_400,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Interval::Hourly => "hourly",
            Interval::Daily => "daily",
        }
    }
}

impl core::str::FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hourly" => Ok(Interval::Hourly),
            "daily" => Ok(Interval::Daily),
            other => Err(Error::Config(format!("unknown interval `{other}`"))),
        }
    }
}

/// `len` consecutive half-open intervals starting at `start` (epoch seconds).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    pub start: i64,
    pub interval: Interval,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: i64, interval: Interval, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::Config(format!("time grid needs at least 2 intervals, got {len}")));
        }
        Ok(TimeGrid { start, interval, len })
    }

    /// Smallest grid starting at `start` whose span covers `[start, end)`.
    pub fn covering(start: i64, end: i64, interval: Interval) -> Result<Self> {
        if end <= start {
            return Err(Error::Config(format!("empty period [{start}, {end})")));
        }
        let step = interval.seconds();
        let len = (end - start + step - 1) / step;
        TimeGrid::new(start, interval, len as usize)
    }

    pub fn end(&self) -> i64 {
        self.start + self.len as i64 * self.interval.seconds()
    }

    /// Interval index of `timestamp`, or `None` when it falls outside the grid.
    pub fn bucket(&self, timestamp: i64) -> Option<usize> {
        if timestamp < self.start {
            return None;
        }
        let idx = (timestamp - self.start) / self.interval.seconds();
        (idx < self.len as i64).then_some(idx as usize)
    }
}

/// Per-concept and per-user count indexes over a [`TimeGrid`].
///
/// `concept_count(c, t)` is the number of distinct posts in interval `t` whose
/// concept set contains `c`. Both rosters hold only ids that were observed in
/// range, sorted lexicographically.
#[derive(Debug, Clone)]
pub struct BucketedCorpus {
    grid: TimeGrid,
    concepts: Vec<String>,
    users: Vec<String>,
    /// Sparse (interval, count) runs per concept, sorted by interval.
    concept_index: Vec<Vec<(usize, u64)>>,
    /// Sparse (concept, interval, count) entries per user, sorted.
    user_index: Vec<Vec<(usize, usize, u64)>>,
    in_range: usize,
    dropped: usize,
}

impl BucketedCorpus {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    /// Posts that fell inside the grid.
    pub fn post_count(&self) -> usize {
        self.in_range
    }

    /// Posts dropped because their timestamp was outside the grid.
    pub fn dropped_out_of_range(&self) -> usize {
        self.dropped
    }

    pub fn concept_position(&self, concept: &str) -> Option<usize> {
        self.concepts.binary_search_by(|c| c.as_str().cmp(concept)).ok()
    }

    pub fn user_position(&self, user: &str) -> Option<usize> {
        self.users.binary_search_by(|u| u.as_str().cmp(user)).ok()
    }

    pub fn concept_count(&self, concept: &str, interval: usize) -> u64 {
        self.concept_position(concept)
            .and_then(|c| {
                let runs = &self.concept_index[c];
                runs.binary_search_by_key(&interval, |&(t, _)| t).ok().map(|i| runs[i].1)
            })
            .unwrap_or(0)
    }

    pub fn user_count(&self, user: &str, concept: &str, interval: usize) -> u64 {
        let (Some(u), Some(c)) = (self.user_position(user), self.concept_position(concept)) else {
            return 0;
        };
        let entries = &self.user_index[u];
        entries.binary_search_by(|&(ec, et, _)| (ec, et).cmp(&(c, interval))).map(|i| entries[i].2).unwrap_or(0)
    }

    /// Sparse `(interval, count)` entries of the concept at roster position `idx`.
    pub fn concept_entries(&self, idx: usize) -> &[(usize, u64)] {
        &self.concept_index[idx]
    }

    /// Sparse `(concept position, interval, count)` entries of the user at
    /// roster position `idx`.
    pub fn user_entries(&self, idx: usize) -> &[(usize, usize, u64)] {
        &self.user_index[idx]
    }
}

/// Buckets records onto `grid`; out-of-range records are dropped and counted.
pub fn bucketize<'a, I>(records: I, grid: TimeGrid) -> Result<BucketedCorpus>
where
    I: IntoIterator<Item = &'a PostRecord>,
{
    if grid.len < 2 {
        return Err(Error::Config(format!("time grid needs at least 2 intervals, got {}", grid.len)));
    }
    let mut concept_counts: BTreeMap<&'a str, BTreeMap<usize, u64>> = BTreeMap::new();
    let mut user_counts: BTreeMap<&'a str, BTreeMap<(&'a str, usize), u64>> = BTreeMap::new();
    let mut in_range = 0;
    let mut dropped = 0;

    for record in records {
        let Some(t) = grid.bucket(record.timestamp) else {
            dropped += 1;
            continue;
        };
        in_range += 1;
        let per_user = user_counts.entry(record.user_id.as_str()).or_default();
        for concept in &record.concepts {
            *concept_counts.entry(concept.as_str()).or_default().entry(t).or_insert(0) += 1;
            *per_user.entry((concept.as_str(), t)).or_insert(0) += 1;
        }
    }

    let concepts: Vec<String> = concept_counts.keys().map(|c| String::from(*c)).collect();
    let concept_index = concept_counts.values().map(|runs| runs.iter().map(|(&t, &n)| (t, n)).collect()).collect();
    let users: Vec<String> = user_counts.keys().map(|u| String::from(*u)).collect();
    let user_index = user_counts
        .values()
        .map(|entries| {
            entries
                .iter()
                .map(|(&(c, t), &n)| {
                    let pos = concepts.binary_search_by(|x| x.as_str().cmp(c)).expect("concept indexed");
                    (pos, t, n)
                })
                .collect()
        })
        .collect();

    Ok(BucketedCorpus { grid, concepts, users, concept_index, user_index, in_range, dropped })
}

/// Undirected follower graph edges, deduplicated, without self-loops.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FollowEdgeList {
    edges: BTreeSet<(String, String)>,
}

impl FollowEdgeList {
    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut list = FollowEdgeList::default();
        for (a, b) in pairs {
            list.insert(a.into(), b.into());
        }
        list
    }

    /// Returns false for self-loops and duplicates.
    pub fn insert(&mut self, a: String, b: String) -> bool {
        match a.cmp(&b) {
            core::cmp::Ordering::Equal => false,
            core::cmp::Ordering::Less => self.edges.insert((a, b)),
            core::cmp::Ordering::Greater => self.edges.insert((b, a)),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Edges with the lexicographically smaller endpoint first.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn grid(len: usize) -> TimeGrid {
        TimeGrid::new(0, Interval::Hourly, len).unwrap()
    }

    #[test]
    fn post_with_two_concepts_counts_once_each() {
        let records = vec![PostRecord::new("1", "u", 0, ["A", "B"])];
        let corpus = bucketize(&records, grid(4)).unwrap();
        assert_eq!(corpus.concept_count("A", 0), 1);
        assert_eq!(corpus.concept_count("B", 0), 1);
    }

    #[test]
    fn same_user_two_posts_same_interval() {
        let records = vec![PostRecord::new("1", "u", 3 * 3600, ["A"]), PostRecord::new("2", "u", 3 * 3600 + 59, ["A"])];
        let corpus = bucketize(&records, grid(4)).unwrap();
        assert_eq!(corpus.concept_count("A", 3), 2);
        assert_eq!(corpus.user_count("u", "A", 3), 2);
    }

    #[test]
    fn repeated_concept_is_a_set() {
        let records = vec![PostRecord::new("1", "u", 0, ["A", "A", " A "])];
        assert_eq!(records[0].concepts.len(), 1);
        let corpus = bucketize(&records, grid(4)).unwrap();
        assert_eq!(corpus.concept_count("A", 0), 1);
    }

    #[test]
    fn boundary_belongs_to_later_interval_and_out_of_range_dropped() {
        let records = vec![
            PostRecord::new("1", "u", 3600, ["A"]),
            PostRecord::new("2", "u", -1, ["A"]),
            PostRecord::new("3", "u", 4 * 3600, ["A"]),
        ];
        let corpus = bucketize(&records, grid(4)).unwrap();
        assert_eq!(corpus.concept_count("A", 1), 1);
        assert_eq!(corpus.concept_count("A", 0), 0);
        assert_eq!(corpus.dropped_out_of_range(), 2);
        assert_eq!(corpus.post_count(), 1);
    }

    #[test]
    fn short_grid_rejected() {
        assert!(matches!(TimeGrid::new(0, Interval::Daily, 1), Err(Error::Config(_))));
        let g = TimeGrid { start: 0, interval: Interval::Daily, len: 1 };
        assert!(bucketize(core::iter::empty(), g).is_err());
    }

    #[test]
    fn covering_rounds_up() {
        let g = TimeGrid::covering(0, 86_400 * 2 + 1, Interval::Daily).unwrap();
        assert_eq!(g.len, 3);
        assert_eq!(g.bucket(86_400 * 2), Some(2));
        assert_eq!(g.bucket(g.end()), None);
    }

    #[test]
    fn empty_concept_set_retained_but_silent() {
        let records = vec![PostRecord::new("1", "u", 0, [""; 0])];
        let corpus = bucketize(&records, grid(2)).unwrap();
        assert_eq!(corpus.post_count(), 1);
        assert!(corpus.concepts().is_empty());
    }

    #[test]
    fn follow_edges_dedup_and_self_loops() {
        let list = FollowEdgeList::from_pairs([("u1", "u2"), ("u2", "u1"), ("u1", "u1")]);
        assert_eq!(list.len(), 1);
        let list = FollowEdgeList::from_pairs([("a", "b"), ("b", "c"), ("c", "a")]);
        assert_eq!(list.len(), 3);
    }
}
