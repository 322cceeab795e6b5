//! Partition agreement metrics (ARI, AMI) and the comparison tooling built
//! on them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{louvain, modularity, LouvainConfig, WeightedGraph};
use crate::ingest::FollowEdgeList;
use crate::partition::Partition;

/// Co-occurrence counts between two labelings of the same items.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// Nonzero cells as `(row, col, count)`.
    pub cells: Vec<(usize, usize, u64)>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub total: u64,
}

impl ContingencyTable {
    /// Labels are compacted; their values only need to be consistent.
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Dimension { left: a.len(), right: b.len() });
        }
        let dense = |labels: &[usize]| {
            let mut map = BTreeMap::new();
            let out: Vec<usize> = labels
                .iter()
                .map(|l| {
                    let next = map.len();
                    *map.entry(*l).or_insert(next)
                })
                .collect();
            (out, map.len())
        };
        let (a, rows) = dense(a);
        let (b, cols) = dense(b);
        let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut row_sums = vec![0; rows];
        let mut col_sums = vec![0; cols];
        for (&i, &j) in a.iter().zip(&b) {
            *counts.entry((i, j)).or_insert(0) += 1;
            row_sums[i] += 1;
            col_sums[j] += 1;
        }
        Ok(ContingencyTable {
            cells: counts.into_iter().map(|((i, j), n)| (i, j, n)).collect(),
            row_sums,
            col_sums,
            total: a.len() as u64,
        })
    }

    /// True when the two labelings are equal up to relabeling.
    pub fn is_bijective(&self) -> bool {
        self.cells.len() == self.row_sums.len() && self.cells.len() == self.col_sums.len()
    }
}

fn pairs(n: u64) -> i128 {
    let n = n as i128;
    n * (n - 1) / 2
}

/// Adjusted Rand index of two label vectors over the same items.
///
/// Pair counts are accumulated in exact integer arithmetic and combined in a
/// single final division. Two trivial labelings (both one cluster, or both
/// all singletons) score 1.
pub fn ari_labels(a: &[usize], b: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(a, b)?;
    if table.total == 0 {
        return Err(Error::EmptyInput("no items to compare"));
    }
    let index: i128 = table.cells.iter().map(|&(_, _, n)| pairs(n)).sum();
    let sum_a: i128 = table.row_sums.iter().map(|&n| pairs(n)).sum();
    let sum_b: i128 = table.col_sums.iter().map(|&n| pairs(n)).sum();
    let all = pairs(table.total);
    let numerator = 2 * (index * all - sum_a * sum_b);
    let denominator = (sum_a + sum_b) * all - 2 * sum_a * sum_b;
    if denominator == 0 {
        return Ok(1.0);
    }
    Ok(numerator as f64 / denominator as f64)
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

fn mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total as f64;
    table
        .cells
        .iter()
        .map(|&(i, j, nij)| {
            let nij = nij as f64;
            let outer = table.row_sums[i] as f64 * table.col_sums[j] as f64;
            nij / n * libm::log(n * nij / outer)
        })
        .sum()
}

/// Expected mutual information under the hypergeometric model of random
/// labelings with the observed cluster sizes.
pub fn expected_mutual_information(table: &ContingencyTable) -> f64 {
    let n = table.total;
    let nf = n as f64;
    let ln_fact: Vec<f64> = (0..=n).map(|k| libm::lgamma(k as f64 + 1.0)).collect();
    let mut emi = 0.0;
    for &a in &table.row_sums {
        for &b in &table.col_sums {
            let start = (a + b).saturating_sub(n).max(1);
            let fixed =
                ln_fact[a as usize] + ln_fact[b as usize] + ln_fact[(n - a) as usize] + ln_fact[(n - b) as usize]
                    - ln_fact[n as usize];
            for nij in start..=a.min(b) {
                let log_p = fixed
                    - ln_fact[nij as usize]
                    - ln_fact[(a - nij) as usize]
                    - ln_fact[(b - nij) as usize]
                    - ln_fact[(n + nij - a - b) as usize];
                let term = nij as f64 / nf * libm::log(nf * nij as f64 / (a as f64 * b as f64));
                emi += term * libm::exp(log_p);
            }
        }
    }
    emi
}

/// Adjusted mutual information with the arithmetic-mean entropy normalizer.
pub fn ami_labels(a: &[usize], b: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(a, b)?;
    if table.total == 0 {
        return Err(Error::EmptyInput("no items to compare"));
    }
    if table.is_bijective() {
        return Ok(1.0);
    }
    let n = table.total as f64;
    let mi = mutual_information(&table);
    let emi = expected_mutual_information(&table);
    let normalizer = 0.5 * (entropy(&table.row_sums, n) + entropy(&table.col_sums, n));
    let denominator = normalizer - emi;
    if denominator.abs() < f64::EPSILON {
        return Ok(0.0);
    }
    Ok((mi - emi) / denominator)
}

pub const AMI_NORMALIZER: &str = "arithmetic";

pub fn ari(p1: &Partition, p2: &Partition) -> Result<f64> {
    let (a, b) = p1.aligned_labels(p2)?;
    ari_labels(&a, &b)
}

pub fn ami(p1: &Partition, p2: &Partition) -> Result<f64> {
    let (a, b) = p1.aligned_labels(p2)?;
    ami_labels(&a, &b)
}

/// Louvain over the unit-weight follower graph.
pub fn topology_baseline(edges: &FollowEdgeList, cfg: &LouvainConfig) -> Result<(Partition, f64)> {
    if edges.is_empty() {
        return Err(Error::EmptyInput("no follower edges"));
    }
    let ids: Vec<String> =
        edges.iter().flat_map(|(a, b)| [a, b]).collect::<BTreeSet<&str>>().into_iter().map(String::from).collect();
    let pos = |id: &str| ids.binary_search_by(|x| x.as_str().cmp(id)).expect("id collected");
    let triples: Vec<(usize, usize, f64)> = edges.iter().map(|(a, b)| (pos(a), pos(b), 1.0)).collect();
    let graph = WeightedGraph::from_edges(ids.clone(), triples)?;
    let partition = louvain(&graph, cfg)?;
    let q = modularity(&graph, &partition)?;
    Ok((partition, q))
}

/// How items missing from some partitions are handled by [`compare_methods`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alignment {
    /// Compare over the union of items; an item missing from a partition gets
    /// a shared reserved "unclustered" label there.
    #[default]
    Unclustered,
    /// Compare over items present in every partition.
    Intersection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub items: usize,
    /// Items of the union left out (intersection alignment) or filled with
    /// the unclustered label somewhere (unclustered alignment).
    pub dropped: usize,
    pub ami: Vec<Vec<f64>>,
    pub ari: Vec<Vec<f64>>,
}

/// Pairwise AMI and ARI matrices between `partitions`.
pub fn compare_methods(partitions: &[Partition], alignment: Alignment) -> Result<Comparison> {
    let union: BTreeSet<&str> = partitions.iter().flat_map(|p| p.ids()).collect();
    let common: Vec<&str> =
        union.iter().copied().filter(|id| partitions.iter().all(|p| p.label(id).is_some())).collect();
    let items: Vec<&str> = match alignment {
        Alignment::Unclustered => union.iter().copied().collect(),
        Alignment::Intersection => common.clone(),
    };
    if items.is_empty() || common.is_empty() && alignment == Alignment::Intersection {
        return Err(Error::EmptyInput("partitions share no items"));
    }
    let labels: Vec<Vec<usize>> = partitions
        .iter()
        .map(|p| {
            let reserved = p.cluster_count();
            items.iter().map(|id| p.label(id).unwrap_or(reserved)).collect()
        })
        .collect();
    let k = partitions.len();
    let mut out = Comparison {
        items: items.len(),
        dropped: union.len() - common.len(),
        ami: vec![vec![1.0; k]; k],
        ari: vec![vec![1.0; k]; k],
    };
    for i in 0..k {
        for j in i..k {
            let (x, y) = (ami_labels(&labels[i], &labels[j])?, ari_labels(&labels[i], &labels[j])?);
            out.ami[i][j] = x;
            out.ami[j][i] = x;
            out.ari[i][j] = y;
            out.ari[j][i] = y;
        }
    }
    Ok(out)
}
