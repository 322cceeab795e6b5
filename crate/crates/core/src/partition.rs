use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Assignment of item ids to dense cluster labels `0..cluster_count()`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    labels: BTreeMap<String, usize>,
    clusters: usize,
}

impl Partition {
    /// Builds a partition from `(id, label)` pairs with arbitrary label
    /// values. Labels are renumbered densely in order of first appearance.
    pub fn from_assignments<I, S, L>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, L)>,
        S: Into<String>,
        L: Ord,
    {
        let mut dense: BTreeMap<L, usize> = BTreeMap::new();
        let mut labels = BTreeMap::new();
        for (id, label) in pairs {
            let next = dense.len();
            let l = *dense.entry(label).or_insert(next);
            let id = id.into();
            if labels.insert(id.clone(), l).is_some() {
                return Err(Error::Domain(alloc::format!("item `{id}` labeled twice")));
            }
        }
        let mut p = Partition { labels, clusters: dense.len() };
        p.compact();
        Ok(p)
    }

    /// Partition aligned with `ids` (label of `ids[i]` is `labels[i]`).
    pub fn from_labels(ids: &[String], labels: &[usize]) -> Result<Self> {
        if ids.len() != labels.len() {
            return Err(Error::Dimension { left: ids.len(), right: labels.len() });
        }
        Partition::from_assignments(ids.iter().cloned().zip(labels.iter().copied()))
    }

    /// Relabels so clusters are numbered in order of their smallest member id.
    fn compact(&mut self) {
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for l in self.labels.values_mut() {
            let next = remap.len();
            *l = *remap.entry(*l).or_insert(next);
        }
        self.clusters = remap.len();
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    pub fn label(&self, id: &str) -> Option<usize> {
        self.labels.get(id).copied()
    }

    /// `(id, label)` pairs in id order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.labels.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.labels.keys().map(String::as_str)
    }

    /// Members of each cluster, indexed by label, each sorted by id.
    pub fn clusters(&self) -> Vec<Vec<String>> {
        let mut out = alloc::vec![Vec::new(); self.clusters];
        for (id, &l) in &self.labels {
            out[l].push(id.clone());
        }
        out
    }

    /// Restriction to the ids accepted by `keep`, relabeled densely.
    pub fn restrict<F: Fn(&str) -> bool>(&self, keep: F) -> Partition {
        let labels = self.labels.iter().filter(|(id, _)| keep(id)).map(|(id, &l)| (id.clone(), l)).collect();
        let mut p = Partition { labels, clusters: 0 };
        p.compact();
        p
    }

    /// Label slices for two partitions over exactly the same item set.
    pub fn aligned_labels(&self, other: &Partition) -> Result<(Vec<usize>, Vec<usize>)> {
        if self.len() != other.len() || self.labels.keys().zip(other.labels.keys()).any(|(a, b)| a != b) {
            return Err(Error::Domain("partitions cover different item sets".into()));
        }
        Ok((self.labels.values().copied().collect(), other.labels.values().copied().collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn dense_relabeling_is_canonical() {
        let a = Partition::from_assignments([("x", "q"), ("y", "p"), ("z", "q")]).unwrap();
        let b = Partition::from_assignments([("x", 7), ("y", 3), ("z", 7)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cluster_count(), 2);
        assert_eq!(a.label("x"), Some(0));
        assert_eq!(a.clusters(), vec![vec!["x".to_string(), "z".to_string()], vec!["y".to_string()]]);
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(Partition::from_assignments([("x", 1), ("x", 2)]).is_err());
    }

    #[test]
    fn alignment_requires_same_items() {
        let a = Partition::from_assignments([("x", 0), ("y", 0)]).unwrap();
        let b = Partition::from_assignments([("x", 0), ("z", 0)]).unwrap();
        assert!(a.aligned_labels(&b).is_err());
        let r = a.restrict(|id| id == "x");
        assert_eq!(r.len(), 1);
        assert_eq!(r.cluster_count(), 1);
    }
}
