//! User-topic contribution matrices, 2D cross-correlation, and latent user
//! communities.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{build_graph, louvain_labels, LouvainConfig, WeightedGraph};
use crate::ingest::{BucketedCorpus, Interval};
use crate::partition::Partition;
use crate::signal::{normalize, CorrelationSet, Sample};
use crate::topics::{check_threshold, ordered_clusters, ClusterDiagnostics, Topic};

/// Row-major `rows x cols` matrix of nonnegative counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl CountMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CountMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::Dimension { left: cols, right: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(CountMatrix { rows: rows.len(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.data[r * self.cols + c]
    }

    pub fn add(&mut self, r: usize, c: usize, v: u64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Row-major flattening.
    pub fn as_flat(&self) -> &[u64] {
        &self.data
    }

    pub fn total(&self) -> u64 {
        self.data.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Sums each row over its columns, giving a `rows x 1` matrix. Applied to
    /// a topic x interval matrix this discards all timing.
    pub fn collapse_columns(&self) -> CountMatrix {
        CountMatrix { rows: self.rows, cols: 1, data: (0..self.rows).map(|r| self.row(r).iter().sum()).collect() }
    }

    fn same_shape(&self, other: &CountMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension { left: self.data.len(), right: other.data.len() });
        }
        Ok(())
    }
}

/// Per-topic, per-interval contributions of one user. Row `j` is topic `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserTopicSignal {
    pub user_id: String,
    pub matrix: CountMatrix,
}

/// Entry `(j, t)` for user `u` is the sum over concepts `c` of topic `j` of
/// the number of `u`'s posts in interval `t` containing `c`. A post with two
/// concepts of the same topic therefore contributes 2.
///
/// Every user in the corpus roster gets a matrix, possibly all-zero.
pub fn build_user_topic_signals(
    corpus: &BucketedCorpus,
    topics: &[Topic],
) -> Result<BTreeMap<String, UserTopicSignal>> {
    if topics.is_empty() {
        return Err(Error::EmptyInput("no topics"));
    }
    let len = corpus.grid().len;
    let mut topic_of: Vec<Option<usize>> = vec![None; corpus.concepts().len()];
    for (row, topic) in topics.iter().enumerate() {
        for concept in &topic.concepts {
            if let Some(pos) = corpus.concept_position(concept) {
                topic_of[pos] = Some(row);
            }
        }
    }
    let build = |(u, user): (usize, &String)| {
        let mut matrix = CountMatrix::zeros(topics.len(), len);
        for &(c, t, n) in corpus.user_entries(u) {
            if let Some(row) = topic_of[c] {
                matrix.add(row, t, n);
            }
        }
        (user.clone(), UserTopicSignal { user_id: user.clone(), matrix })
    };

    #[cfg(feature = "std")]
    let out = {
        use rayon::prelude::*;
        corpus.users().par_iter().enumerate().map(build).collect::<Vec<_>>().into_iter().collect()
    };
    #[cfg(not(feature = "std"))]
    let out = corpus.users().iter().enumerate().map(build).collect();
    Ok(out)
}

/// 2D cross-correlation at shift `(i, j)`:
/// `sum_k sum_l M[k, l] * N[k - i, l - j]` over overlapping cells.
pub fn xcorr2d_at(m: &CountMatrix, n: &CountMatrix, i: isize, j: isize) -> Result<f64> {
    m.same_shape(n)?;
    let (rows, cols) = (m.rows as isize, m.cols as isize);
    if i <= -rows || i >= rows || j <= -cols || j >= cols {
        return Err(Error::Domain(alloc::format!("shift ({i}, {j}) outside ({rows}, {cols}) window")));
    }
    let mut acc = 0.0;
    for k in i.max(0)..(rows + i).min(rows) {
        for l in j.max(0)..(cols + j).min(cols) {
            acc += m.get(k as usize, l as usize).to_f64() * n.get((k - i) as usize, (l - j) as usize).to_f64();
        }
    }
    Ok(acc)
}

/// User similarity: the zero-shift 2D cross-correlation normalized by both
/// Frobenius norms. Equal to `ccm` of the flattened matrices; 0 when either
/// matrix is all-zero.
pub fn usd(m: &CountMatrix, n: &CountMatrix) -> Result<f64> {
    let cross = xcorr2d_at(m, n, 0, 0)?;
    Ok(normalize(cross, xcorr2d_at(m, m, 0, 0)?, xcorr2d_at(n, n, 0, 0)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CommunityExtractionConfig {
    pub interval: Interval,
    pub edge_threshold: f64,
}

impl Default for CommunityExtractionConfig {
    fn default() -> Self {
        CommunityExtractionConfig { interval: Interval::Daily, edge_threshold: 0.6 }
    }
}

#[derive(Debug, Clone)]
pub struct UserGraph {
    pub graph: WeightedGraph,
    /// Users left out because their matrix is all-zero.
    pub excluded: Vec<String>,
}

/// User graph over users with nonzero matrices; edges where `usd` exceeds
/// the threshold.
pub fn build_user_graph(
    signals: &BTreeMap<String, UserTopicSignal>,
    cfg: &CommunityExtractionConfig,
) -> Result<UserGraph> {
    check_threshold(cfg.edge_threshold)?;
    let (active, excluded): (Vec<&UserTopicSignal>, Vec<&UserTopicSignal>) =
        signals.values().partition(|s| !s.matrix.is_zero());
    if let Some(first) = active.first() {
        for s in &active {
            first.matrix.same_shape(&s.matrix)?;
        }
    }
    let ids: Vec<String> = active.iter().map(|s| s.user_id.clone()).collect();
    let rows: Vec<&[u64]> = active.iter().map(|s| s.matrix.as_flat()).collect();
    let set = CorrelationSet::new(&rows)?;
    Ok(UserGraph {
        graph: build_graph(ids, |i, j| set.ccm(i, j), cfg.edge_threshold),
        excluded: excluded.iter().map(|s| s.user_id.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Community {
    pub community_id: usize,
    /// Sorted user ids, at least two.
    pub members: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CommunityExtraction {
    pub communities: Vec<Community>,
    pub partition: Partition,
    pub diagnostics: ClusterDiagnostics,
}

impl CommunityExtraction {
    /// Partition over `users` where members of dropped singleton clusters and
    /// users absent from the graph get the `unclustered` label.
    pub fn labeled<'a, I>(&self, users: I, unclustered: &str) -> Result<Partition>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut of: BTreeMap<&str, String> = BTreeMap::new();
        for c in &self.communities {
            for m in &c.members {
                of.insert(m.as_str(), alloc::format!("{}", c.community_id));
            }
        }
        Partition::from_assignments(
            users.into_iter().map(|u| (u, of.get(u).cloned().unwrap_or_else(|| String::from(unclustered)))),
        )
    }
}

/// Louvain over the user graph with singleton clusters dropped.
pub fn extract_communities(graph: &WeightedGraph, louvain: &LouvainConfig) -> Result<CommunityExtraction> {
    let labels = louvain_labels(graph, louvain)?;
    let partition = Partition::from_labels(graph.ids(), &labels)?;
    let clusters = ordered_clusters(&partition);
    let diagnostics = ClusterDiagnostics::summarize(graph, &partition, &clusters, "communities");
    let communities =
        clusters.into_iter().enumerate().map(|(community_id, members)| Community { community_id, members }).collect();
    Ok(CommunityExtraction { communities, partition, diagnostics })
}
