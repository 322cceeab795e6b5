//! Topics: multi-concept clusters of the thresholded concept graph.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{build_graph, louvain_labels, modularity, LouvainConfig, WeightedGraph};
use crate::ingest::Interval;
use crate::partition::Partition;
use crate::signal::{ConceptSignal, CorrelationSet};

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Topic {
    pub topic_id: usize,
    /// Sorted concept ids, at least two.
    pub concepts: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TopicExtractionConfig {
    pub interval: Interval,
    pub edge_threshold: f64,
}

impl Default for TopicExtractionConfig {
    fn default() -> Self {
        TopicExtractionConfig { interval: Interval::Hourly, edge_threshold: 0.7 }
    }
}

pub(crate) fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Config(format!("edge threshold must be in [0, 1], got {t}")))
    }
}

/// Quality figures reported alongside clustering output.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterDiagnostics {
    pub node_count: usize,
    pub edge_count: usize,
    /// `None` when the thresholded graph has no edges.
    pub modularity: Option<f64>,
    /// Clusters with at least two members.
    pub cluster_count: usize,
    pub singleton_count: usize,
    pub average_size: f64,
    pub warning: Option<String>,
}

impl ClusterDiagnostics {
    pub(crate) fn summarize(graph: &WeightedGraph, partition: &Partition, kept: &[Vec<String>], what: &str) -> Self {
        let singletons = partition.cluster_count() - kept.len();
        let average_size =
            if kept.is_empty() { 0.0 } else { kept.iter().map(Vec::len).sum::<usize>() as f64 / kept.len() as f64 };
        let warning = if graph.edge_count() == 0 {
            Some(format!("graph has no edges above the threshold; no {what} extracted"))
        } else if kept.is_empty() {
            Some(format!("every cluster is a singleton; no {what} extracted"))
        } else {
            None
        };
        ClusterDiagnostics {
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            modularity: modularity(graph, partition).ok(),
            cluster_count: kept.len(),
            singleton_count: singletons,
            average_size,
            warning,
        }
    }
}

/// Multi-member clusters ordered by size descending, then smallest member id.
pub(crate) fn ordered_clusters(partition: &Partition) -> Vec<Vec<String>> {
    let mut clusters: Vec<Vec<String>> = partition.clusters().into_iter().filter(|c| c.len() > 1).collect();
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    clusters
}

/// Concept graph with ccm edge weights above `threshold`. Nodes are the
/// signal ids in key order.
pub fn concept_graph(signals: &BTreeMap<String, ConceptSignal>, threshold: f64) -> Result<WeightedGraph> {
    let ids: Vec<String> = signals.keys().cloned().collect();
    let rows: Vec<&[u64]> = signals.values().map(|s| s.values.as_slice()).collect();
    let set = CorrelationSet::new(&rows)?;
    Ok(build_graph(ids, |i, j| set.ccm(i, j), threshold))
}

#[derive(Debug, Clone)]
pub struct TopicExtraction {
    pub topics: Vec<Topic>,
    pub partition: Partition,
    pub graph: WeightedGraph,
    pub diagnostics: ClusterDiagnostics,
}

impl TopicExtraction {
    /// Mean weight of edges inside `topic`; 0 when it has none.
    pub fn mean_edge_weight(&self, topic: &Topic) -> f64 {
        mean_internal_weight(&self.graph, &topic.concepts)
    }
}

pub(crate) fn mean_internal_weight(graph: &WeightedGraph, members: &[String]) -> f64 {
    let pos: Vec<usize> = members
        .iter()
        .filter_map(|m| graph.ids().binary_search(m).ok().or_else(|| graph.ids().iter().position(|x| x == m)))
        .collect();
    let (mut sum, mut count) = (0.0, 0usize);
    for (a, &i) in pos.iter().enumerate() {
        for &j in &pos[a + 1..] {
            if let Some(w) = graph.weight(i, j) {
                sum += w;
                count += 1;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Clusters an already built concept graph into topics.
pub fn topics_from_graph(graph: WeightedGraph, louvain: &LouvainConfig) -> Result<TopicExtraction> {
    let labels = louvain_labels(&graph, louvain)?;
    let partition = Partition::from_labels(graph.ids(), &labels)?;
    let clusters = ordered_clusters(&partition);
    let diagnostics = ClusterDiagnostics::summarize(&graph, &partition, &clusters, "topics");
    let topics = clusters.into_iter().enumerate().map(|(topic_id, concepts)| Topic { topic_id, concepts }).collect();
    Ok(TopicExtraction { topics, partition, graph, diagnostics })
}

/// Builds the concept graph over `signals`, clusters it, and keeps clusters
/// of two or more concepts as topics.
pub fn extract_topics(
    signals: &BTreeMap<String, ConceptSignal>,
    cfg: &TopicExtractionConfig,
    louvain: &LouvainConfig,
) -> Result<TopicExtraction> {
    check_threshold(cfg.edge_threshold)?;
    if signals.len() < 2 {
        return Err(Error::EmptyInput("topic extraction needs at least two concepts"));
    }
    topics_from_graph(concept_graph(signals, cfg.edge_threshold)?, louvain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn signal(id: &str, values: Vec<u64>) -> (String, ConceptSignal) {
        (id.into(), ConceptSignal { concept_id: id.into(), values })
    }

    #[test]
    fn identical_pair_forms_topic_orthogonal_dropped() {
        let signals: BTreeMap<_, _> =
            [signal("a", vec![1, 5, 0, 0, 2]), signal("b", vec![1, 5, 0, 0, 2]), signal("c", vec![0, 0, 3, 1, 0])]
                .into_iter()
                .collect();
        let out = extract_topics(&signals, &TopicExtractionConfig::default(), &LouvainConfig::default()).unwrap();
        assert_eq!(out.topics, vec![Topic { topic_id: 0, concepts: vec!["a".into(), "b".into()] }]);
        assert_eq!(out.diagnostics.singleton_count, 1);
        assert_eq!(out.mean_edge_weight(&out.topics[0]), 1.0);
    }

    #[test]
    fn threshold_one_gives_no_topics_with_warning() {
        let signals: BTreeMap<_, _> = [signal("a", vec![1, 2]), signal("b", vec![1, 2])].into_iter().collect();
        let cfg = TopicExtractionConfig { edge_threshold: 1.0, ..Default::default() };
        let out = extract_topics(&signals, &cfg, &LouvainConfig::default()).unwrap();
        assert!(out.topics.is_empty());
        assert!(out.diagnostics.warning.is_some());
        assert_eq!(out.diagnostics.modularity, None);
    }

    #[test]
    fn too_few_concepts_and_bad_threshold() {
        let one: BTreeMap<_, _> = [signal("a", vec![1, 2])].into_iter().collect();
        assert!(extract_topics(&one, &TopicExtractionConfig::default(), &LouvainConfig::default()).is_err());
        let cfg = TopicExtractionConfig { edge_threshold: 1.5, ..Default::default() };
        assert!(extract_topics(&one, &cfg, &LouvainConfig::default()).is_err());
    }

    #[test]
    fn topic_ids_by_size_then_name() {
        let p = Partition::from_assignments([("z", 0), ("y", 0), ("b", 1), ("c", 1), ("d", 1), ("a", 2), ("x", 2)])
            .unwrap();
        let ordered = ordered_clusters(&p);
        assert_eq!(ordered[0], vec!["b", "c", "d"]);
        assert_eq!(ordered[1], vec!["a", "x"]);
        assert_eq!(ordered[2], vec!["y", "z"]);
    }
}
