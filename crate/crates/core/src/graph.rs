//! Undirected weighted graphs, modularity and Louvain clustering.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Undirected graph over string ids with nonnegative edge weights and no
/// self-loops. Adjacency lists are sorted by neighbor index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    adj: Vec<Vec<(usize, f64)>>,
    edge_count: usize,
}

impl WeightedGraph {
    pub fn edgeless(ids: Vec<String>) -> Self {
        let adj = vec![Vec::new(); ids.len()];
        WeightedGraph { ids, adj, edge_count: 0 }
    }

    /// Builds a graph from `(i, j, weight)` triples over positions in `ids`.
    pub fn from_edges<I>(ids: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = ids.len();
        let mut graph = WeightedGraph::edgeless(ids);
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::Domain(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop on node {i}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Domain(format!("invalid weight {w} on edge ({i}, {j})")));
            }
            graph.adj[i].push((j, w));
            graph.adj[j].push((i, w));
            graph.edge_count += 1;
        }
        for (i, row) in graph.adj.iter_mut().enumerate() {
            row.sort_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Domain(format!("duplicate edge at node {i}")));
            }
        }
        Ok(graph)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adj[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let row = &self.adj[i];
        row.binary_search_by_key(&j, |&(k, _)| k).ok().map(|p| row[p].1)
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of edge weights (`m`).
    pub fn total_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&(j, _)| j > i).map(move |&(j, w)| (i, j, w)))
    }

    /// Subgraph keeping edges with weight strictly above `threshold`.
    pub fn above_threshold(&self, threshold: f64) -> WeightedGraph {
        let adj: Vec<Vec<(usize, f64)>> =
            self.adj.iter().map(|row| row.iter().copied().filter(|&(_, w)| w > threshold).collect()).collect();
        let edge_count = adj.iter().map(Vec::len).sum::<usize>() / 2;
        WeightedGraph { ids: self.ids.clone(), adj, edge_count }
    }
}

/// Evaluates `weight(i, j)` for every unordered pair and keeps edges whose
/// weight is strictly above `threshold`. No dense matrix is materialized.
pub fn build_graph<F>(ids: Vec<String>, weight: F, threshold: f64) -> WeightedGraph
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = ids.len();
    let row = |i: usize| -> Vec<(usize, usize, f64)> {
        (i + 1..n)
            .filter_map(|j| {
                let w = weight(i, j);
                (w > threshold).then_some((i, j, w))
            })
            .collect()
    };

    #[cfg(feature = "std")]
    let rows: Vec<Vec<(usize, usize, f64)>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "std"))]
    let rows: Vec<Vec<(usize, usize, f64)>> = (0..n).map(row).collect();

    WeightedGraph::from_edges(ids, rows.into_iter().flatten()).expect("pairwise edges are well-formed")
}

/// Node-indexed modularity with resolution `gamma`:
/// `sum_c [ in_c / 2m - gamma * (tot_c / 2m)^2 ]`.
fn modularity_labels(graph: &WeightedGraph, labels: &[usize], gamma: f64) -> Result<f64> {
    let two_m = 2.0 * graph.total_weight();
    if graph.edge_count() == 0 || two_m <= 0.0 {
        return Err(Error::UndefinedModularity);
    }
    let clusters = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; clusters];
    let mut tot = vec![0.0; clusters];
    for (i, row) in graph.adj.iter().enumerate() {
        for &(j, w) in row {
            tot[labels[i]] += w;
            if labels[i] == labels[j] {
                internal[labels[i]] += w;
            }
        }
    }
    Ok(internal.iter().zip(&tot).map(|(&inside, &t)| inside / two_m - gamma * (t / two_m) * (t / two_m)).sum())
}

/// Weighted Newman modularity of `partition`, which must label every node.
pub fn modularity(graph: &WeightedGraph, partition: &Partition) -> Result<f64> {
    let labels = node_labels(graph, partition)?;
    modularity_labels(graph, &labels, 1.0)
}

pub(crate) fn node_labels(graph: &WeightedGraph, partition: &Partition) -> Result<Vec<usize>> {
    graph
        .ids
        .iter()
        .map(|id| partition.label(id).ok_or_else(|| Error::Domain(format!("node `{id}` missing from partition"))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LouvainConfig {
    pub resolution: f64,
    pub seed: u64,
    pub max_passes: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        LouvainConfig { resolution: 1.0, seed: 0, max_passes: 100 }
    }
}

impl LouvainConfig {
    pub fn with_seed(seed: u64) -> Self {
        LouvainConfig { seed, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0 && self.resolution.is_finite()) {
            return Err(Error::Config(format!("resolution must be positive, got {}", self.resolution)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// Aggregated graph of one Louvain level. Internal edge weight of merged
/// nodes lives only in `degree`; `adj` holds edges between distinct nodes.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
}

impl Level {
    fn aggregate(&self, community: &[usize], count: usize) -> Level {
        let mut degree = vec![0.0; count];
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); count];
        for (i, row) in self.adj.iter().enumerate() {
            let ci = community[i];
            degree[ci] += self.degree[i];
            for &(j, w) in row {
                let cj = community[j];
                if ci != cj {
                    rows[ci].push((cj, w));
                }
            }
        }
        for row in &mut rows {
            row.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, w) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            *row = merged;
        }
        Level { adj: rows, degree }
    }
}

const GAIN_EPS: f64 = 1e-12;

/// Local moving phase. Returns true if any node changed community.
fn move_nodes(level: &Level, community: &mut [usize], two_m: f64, cfg: &LouvainConfig, rng: &mut ChaCha8Rng) -> bool {
    let n = level.adj.len();
    let mut tot = vec![0.0; n];
    for (i, &c) in community.iter().enumerate() {
        tot[c] += level.degree[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut link = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;

    for _ in 0..cfg.max_passes {
        order.shuffle(rng);
        let mut moved = false;
        for &i in &order {
            let k_i = level.degree[i];
            if k_i <= 0.0 {
                continue;
            }
            let current = community[i];
            for &(j, w) in &level.adj[i] {
                let c = community[j];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                link[c] += w;
            }
            tot[current] -= k_i;
            let scale = cfg.resolution * k_i / two_m;
            let stay_gain = link[current] - scale * tot[current];

            touched.sort_unstable();
            let mut best = current;
            let mut best_gain = f64::NEG_INFINITY;
            for &c in &touched {
                if c == current {
                    continue;
                }
                let gain = link[c] - scale * tot[c];
                if gain > best_gain {
                    best_gain = gain;
                    best = c;
                }
            }
            if best == current || best_gain <= stay_gain + GAIN_EPS {
                best = current;
            }
            tot[best] += k_i;
            if best != current {
                community[i] = best;
                moved = true;
            }
            for &c in &touched {
                link[c] = 0.0;
                seen[c] = false;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
        any_move = true;
    }
    any_move
}

/// Renumbers labels densely in order of first appearance by node index.
fn renumber(community: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Louvain clustering returning one label per node, in node order.
///
/// Node visit order is shuffled by `cfg.seed` on each pass. A node moves
/// only when the best gain strictly beats staying; equal gains go to the
/// lowest community label. An edgeless graph yields all singletons.
pub fn louvain_labels(graph: &WeightedGraph, cfg: &LouvainConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    let n = graph.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let two_m = 2.0 * graph.total_weight();
    if graph.edge_count() == 0 || two_m <= 0.0 {
        return Ok(labels);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut level = Level { adj: graph.adj.clone(), degree: (0..n).map(|i| graph.degree(i)).collect() };
    loop {
        let size = level.adj.len();
        let mut community: Vec<usize> = (0..size).collect();
        if !move_nodes(&level, &mut community, two_m, cfg, &mut rng) {
            break;
        }
        let count = renumber(&mut community);
        for l in labels.iter_mut() {
            *l = community[*l];
        }
        if count == size {
            break;
        }
        level = level.aggregate(&community, count);
    }
    renumber(&mut labels);
    Ok(labels)
}

pub fn louvain(graph: &WeightedGraph, cfg: &LouvainConfig) -> Result<Partition> {
    let labels = louvain_labels(graph, cfg)?;
    Partition::from_labels(graph.ids(), &labels)
}
