//! In-memory pipeline stages. The command layer wraps these with file IO.

use std::collections::BTreeMap;

use cotemporal_core::filter::{apply_filters, FilterConfig, FilterReport};
use cotemporal_core::graph::{build_graph, LouvainConfig, WeightedGraph};
use cotemporal_core::ingest::{bucketize, BucketedCorpus, Interval, PostRecord, TimeGrid};
use cotemporal_core::signal::{build_alltweets, build_concept_signals, AllTweetsSignal, ConceptSignal, CorrelationSet};
use cotemporal_core::topics::{concept_graph, topics_from_graph, ClusterDiagnostics, Topic, TopicExtraction};
use cotemporal_core::users::{
    build_user_graph, build_user_topic_signals, extract_communities, CommunityExtraction, CommunityExtractionConfig,
    UserGraph, UserTopicSignal,
};
use cotemporal_core::{Error, Result};
use serde::{Deserialize, Serialize};

const DAY: i64 = 86_400;

/// Half-open analysis period `[start, end)` in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub start: i64,
    pub end: i64,
}

impl Period {
    /// Whole UTC days spanning every record timestamp.
    pub fn spanning(records: &[PostRecord]) -> Result<Period> {
        let lo = records.iter().map(|r| r.timestamp).min().ok_or(Error::EmptyInput("no records"))?;
        let hi = records.iter().map(|r| r.timestamp).max().unwrap();
        Ok(Period { start: lo.div_euclid(DAY) * DAY, end: (hi.div_euclid(DAY) + 1) * DAY })
    }

    pub fn grid(&self, interval: Interval) -> Result<TimeGrid> {
        TimeGrid::covering(self.start, self.end, interval)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopicStage {
    pub interval: Interval,
    pub edge_threshold: f64,
    pub rho: f64,
    pub psd_peak_z: f64,
    pub min_total_count: u64,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for TopicStage {
    fn default() -> Self {
        let f = FilterConfig::default();
        TopicStage {
            interval: Interval::Hourly,
            edge_threshold: 0.7,
            rho: f.rho,
            psd_peak_z: f.psd_peak_z,
            min_total_count: f.min_total_count,
            resolution: 1.0,
            seed: 0,
        }
    }
}

impl TopicStage {
    pub fn filter(&self) -> FilterConfig {
        FilterConfig { rho: self.rho, psd_peak_z: self.psd_peak_z, min_total_count: self.min_total_count }
    }

    pub fn louvain(&self) -> LouvainConfig {
        LouvainConfig {
            resolution: self.resolution,
            seed: cotemporal_core::seed::derive_seed(self.seed, cotemporal_core::seed::stage::TOPICS),
            ..LouvainConfig::default()
        }
    }
}

/// Filtered concept signals for one interval, ready for graph construction.
#[derive(Debug, Clone)]
pub struct ConceptStage {
    pub corpus: BucketedCorpus,
    pub signals: BTreeMap<String, ConceptSignal>,
    pub alltweets: AllTweetsSignal,
    pub survivors: BTreeMap<String, ConceptSignal>,
    pub report: FilterReport,
}

pub fn prepare_concepts(
    records: &[PostRecord],
    period: Period,
    interval: Interval,
    filter: &FilterConfig,
) -> Result<ConceptStage> {
    let corpus = bucketize(records, period.grid(interval)?)?;
    let signals = build_concept_signals(&corpus);
    if signals.is_empty() {
        return Err(Error::EmptyInput("no concept occurrences inside the period"));
    }
    let alltweets = build_alltweets(signals.values())?;
    let (survivors, report) = apply_filters(&signals, &alltweets, filter)?;
    Ok(ConceptStage { corpus, signals, alltweets, survivors, report })
}

#[derive(Debug, Clone)]
pub struct TopicRun {
    pub concepts: ConceptStage,
    pub extraction: TopicExtraction,
}

/// Ingest, signals, filters and topic extraction.
pub fn run_topics(records: &[PostRecord], period: Period, stage: &TopicStage) -> Result<TopicRun> {
    check_unit(stage.edge_threshold)?;
    let louvain = stage.louvain();
    louvain.validate()?;
    let concepts = prepare_concepts(records, period, stage.interval, &stage.filter())?;
    if concepts.survivors.len() < 2 {
        return Err(Error::EmptyInput("fewer than two concepts survive filtering"));
    }
    let graph = concept_graph(&concepts.survivors, stage.edge_threshold)?;
    let extraction = topics_from_graph(graph, &louvain)?;
    Ok(TopicRun { concepts, extraction })
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Config(format!("edge threshold must be in [0, 1], got {t}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityStage {
    pub interval: Interval,
    pub edge_threshold: f64,
    pub resolution: f64,
    pub seed: u64,
}

impl Default for CommunityStage {
    fn default() -> Self {
        let c = CommunityExtractionConfig::default();
        CommunityStage { interval: c.interval, edge_threshold: c.edge_threshold, resolution: 1.0, seed: 0 }
    }
}

impl CommunityStage {
    pub fn config(&self) -> CommunityExtractionConfig {
        CommunityExtractionConfig { interval: self.interval, edge_threshold: self.edge_threshold }
    }

    pub fn louvain(&self) -> LouvainConfig {
        LouvainConfig {
            resolution: self.resolution,
            seed: cotemporal_core::seed::derive_seed(self.seed, cotemporal_core::seed::stage::COMMUNITIES),
            ..LouvainConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CommunityRun {
    pub corpus: BucketedCorpus,
    pub signals: BTreeMap<String, UserTopicSignal>,
    pub user_graph: UserGraph,
    pub extraction: CommunityExtraction,
}

/// User-topic matrices on the community grid, user graph and communities.
pub fn run_communities(
    records: &[PostRecord],
    period: Period,
    topics: &[Topic],
    stage: &CommunityStage,
) -> Result<CommunityRun> {
    let louvain = stage.louvain();
    louvain.validate()?;
    let corpus = bucketize(records, period.grid(stage.interval)?)?;
    let signals = build_user_topic_signals(&corpus, topics)?;
    let user_graph = build_user_graph(&signals, &stage.config())?;
    let extraction = extract_communities(&user_graph.graph, &louvain)?;
    Ok(CommunityRun { corpus, signals, user_graph, extraction })
}

/// One row of a threshold sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub stage: String,
    pub interval: Interval,
    pub threshold: f64,
    pub modularity: Option<f64>,
    pub cluster_count: usize,
    pub avg_size: f64,
    pub edge_count: usize,
    pub singleton_count: usize,
}

impl SweepPoint {
    pub fn from_diagnostics(stage: SweepStage, interval: Interval, threshold: f64, d: &ClusterDiagnostics) -> Self {
        SweepPoint {
            stage: stage.name().into(),
            interval,
            threshold,
            modularity: d.modularity,
            cluster_count: d.cluster_count,
            avg_size: d.average_size,
            edge_count: d.edge_count,
            singleton_count: d.singleton_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepStage {
    Topics,
    Communities,
}

impl SweepStage {
    pub fn name(self) -> &'static str {
        match self {
            SweepStage::Topics => "topics",
            SweepStage::Communities => "communities",
        }
    }
}

fn check_thresholds(thresholds: &[f64]) -> Result<()> {
    if thresholds.is_empty() {
        return Err(Error::Config("empty threshold list".into()));
    }
    thresholds.iter().try_for_each(|&t| check_unit(t))
}

/// Pairwise weights are computed once per interval; each threshold then
/// keeps the edges strictly above it.
fn sweep_graph(
    stage: SweepStage,
    interval: Interval,
    full: &WeightedGraph,
    thresholds: &[f64],
    louvain: &LouvainConfig,
) -> Result<Vec<SweepPoint>> {
    use rayon::prelude::*;
    thresholds
        .par_iter()
        .map(|&t| {
            let graph = full.above_threshold(t);
            let d = match stage {
                SweepStage::Topics => topics_from_graph(graph, louvain)?.diagnostics,
                SweepStage::Communities => extract_communities(&graph, louvain)?.diagnostics,
            };
            Ok(SweepPoint::from_diagnostics(stage, interval, t, &d))
        })
        .collect()
}

/// Topic-stage sweep over intervals and thresholds.
pub fn sweep_topics(
    records: &[PostRecord],
    period: Period,
    base: &TopicStage,
    intervals: &[Interval],
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>> {
    check_thresholds(thresholds)?;
    let louvain = base.louvain();
    louvain.validate()?;
    let mut rows = Vec::new();
    for &interval in intervals {
        let concepts = prepare_concepts(records, period, interval, &base.filter())?;
        let ids: Vec<String> = concepts.survivors.keys().cloned().collect();
        let rows_ref: Vec<&[u64]> = concepts.survivors.values().map(|s| s.values.as_slice()).collect();
        let set = CorrelationSet::new(&rows_ref)?;
        let full = build_graph(ids, |i, j| set.ccm(i, j), 0.0);
        rows.extend(sweep_graph(SweepStage::Topics, interval, &full, thresholds, &louvain)?);
    }
    Ok(rows)
}

/// Community-stage sweep; `topics` stay fixed while the community grid varies.
pub fn sweep_communities(
    records: &[PostRecord],
    period: Period,
    topics: &[Topic],
    base: &CommunityStage,
    intervals: &[Interval],
    thresholds: &[f64],
) -> Result<Vec<SweepPoint>> {
    check_thresholds(thresholds)?;
    let louvain = base.louvain();
    louvain.validate()?;
    let mut rows = Vec::new();
    for &interval in intervals {
        let corpus = bucketize(records, period.grid(interval)?)?;
        let signals = build_user_topic_signals(&corpus, topics)?;
        let cfg = CommunityExtractionConfig { interval, edge_threshold: 0.0 };
        let full = build_user_graph(&signals, &cfg)?.graph;
        rows.extend(sweep_graph(SweepStage::Communities, interval, &full, thresholds, &louvain)?);
    }
    Ok(rows)
}
