//! Output writers. Everything is written in a fixed order so reruns with the
//! same inputs produce identical bytes.

use std::collections::BTreeMap;
use std::io::{self, Write};

use cotemporal_core::eval::Comparison;
use cotemporal_core::filter::FilterReport;
use cotemporal_core::graph::WeightedGraph;
use cotemporal_core::signal::ConceptSignal;
use cotemporal_core::synth::GroundTruth;
use cotemporal_core::topics::{Topic, TopicExtraction};
use cotemporal_core::users::{CommunityExtraction, UserTopicSignal};
use cotemporal_core::{Partition, PostRecord};
use serde::{Deserialize, Serialize};

use crate::pipeline::SweepPoint;

pub const UNCLUSTERED: &str = "unclustered";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicEntry {
    pub topic_id: usize,
    pub size: usize,
    pub mean_edge_weight: f64,
    pub concepts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsFile {
    pub topics: Vec<TopicEntry>,
}

impl TopicsFile {
    pub fn from_extraction(x: &TopicExtraction) -> Self {
        let topics = x
            .topics
            .iter()
            .map(|t| TopicEntry {
                topic_id: t.topic_id,
                size: t.concepts.len(),
                mean_edge_weight: x.mean_edge_weight(t),
                concepts: t.concepts.clone(),
            })
            .collect();
        TopicsFile { topics }
    }

    /// Topics in id order, which is the matrix row order downstream.
    pub fn topics(&self) -> Vec<Topic> {
        let mut out: Vec<Topic> =
            self.topics.iter().map(|e| Topic { topic_id: e.topic_id, concepts: e.concepts.clone() }).collect();
        out.sort_by_key(|t| t.topic_id);
        out
    }
}

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_records_jsonl<W: Write>(mut w: W, records: &[PostRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()
}

pub fn write_topics_summary<W: Write>(mut w: W, x: &TopicExtraction) -> io::Result<()> {
    let d = &x.diagnostics;
    writeln!(w, "{} topics over {} concepts", d.cluster_count, d.node_count)?;
    match d.modularity {
        Some(q) => writeln!(w, "modularity {q:.4}, {} edges, {} singletons", d.edge_count, d.singleton_count)?,
        None => writeln!(w, "modularity undefined, {} edges", d.edge_count)?,
    }
    if let Some(warning) = &d.warning {
        writeln!(w, "warning: {warning}")?;
    }
    for t in &x.topics {
        writeln!(w)?;
        writeln!(w, "Topic {} ({} concepts, mean weight {:.3})", t.topic_id, t.concepts.len(), x.mean_edge_weight(t))?;
        for c in &t.concepts {
            writeln!(w, "  {c}")?;
        }
    }
    w.flush()
}

/// `id,label` rows in id order.
pub fn write_partition_csv<'a, W, I>(w: W, rows: I) -> csv::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, String)>,
{
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["id", "label"])?;
    for (id, label) in rows {
        wtr.write_record([id, label.as_str()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Partition rows with dense integer labels.
pub fn partition_rows(p: &Partition) -> impl Iterator<Item = (&str, String)> {
    p.iter().map(|(id, l)| (id, l.to_string()))
}

pub fn write_graph_csv<W: Write>(w: W, g: &WeightedGraph) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["id_a", "id_b", "weight"])?;
    for (i, j, weight) in g.edges() {
        wtr.write_record([g.ids()[i].as_str(), g.ids()[j].as_str(), &weight.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_filter_report_csv<W: Write>(w: W, report: &FilterReport) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["concept_id", "decision", "ccm_with_alltweets", "spectrum_max_z", "flatness_z"])?;
    for e in &report.entries {
        wtr.write_record([
            e.concept_id.as_str(),
            e.decision.as_str(),
            &e.ccm_with_alltweets.to_string(),
            &e.spectrum_max_z.to_string(),
            &e.flatness_z.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityEntry {
    pub community_id: usize,
    pub size: usize,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitiesFile {
    pub communities: Vec<CommunityEntry>,
    pub excluded_zero_users: Vec<String>,
}

impl CommunitiesFile {
    pub fn new(x: &CommunityExtraction, excluded: &[String]) -> Self {
        CommunitiesFile {
            communities: x
                .communities
                .iter()
                .map(|c| CommunityEntry {
                    community_id: c.community_id,
                    size: c.members.len(),
                    members: c.members.clone(),
                })
                .collect(),
            excluded_zero_users: excluded.to_vec(),
        }
    }
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepPoint]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn series_header(first: &str, extra: &[&str], len: usize) -> Vec<String> {
    let mut h = vec![first.to_owned()];
    h.extend(extra.iter().map(|s| s.to_string()));
    h.extend((0..len).map(|t| format!("v_{t}")));
    h
}

/// `concept_id,v_0,...,v_{L-1}`.
pub fn write_signals_csv<W: Write>(w: W, signals: &BTreeMap<String, ConceptSignal>, len: usize) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(series_header("concept_id", &[], len))?;
    for s in signals.values() {
        let mut row = vec![s.concept_id.clone()];
        row.extend(s.values.iter().map(u64::to_string));
        wtr.write_record(row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// One row per (user, topic): `user_id,topic_id,v_0,...`. All-zero users are skipped.
pub fn write_heatmaps_csv<W: Write>(w: W, signals: &BTreeMap<String, UserTopicSignal>, len: usize) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(series_header("user_id", &["topic_id"], len))?;
    for s in signals.values().filter(|s| !s.matrix.is_zero()) {
        for j in 0..s.matrix.rows() {
            let mut row = vec![s.user_id.clone(), j.to_string()];
            row.extend(s.matrix.row(j).iter().map(u64::to_string));
            wtr.write_record(row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Square matrix with method names on both axes.
pub fn write_matrix_csv<W: Write>(w: W, names: &[String], m: &[Vec<f64>]) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec![String::new()];
    header.extend(names.iter().cloned());
    wtr.write_record(header)?;
    for (name, row) in names.iter().zip(m) {
        let mut r = vec![name.clone()];
        r.extend(row.iter().map(f64::to_string));
        wtr.write_record(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonFile<'a> {
    pub methods: &'a [String],
    pub alignment: &'a str,
    pub ami_normalizer: &'a str,
    pub items: usize,
    pub dropped: usize,
    pub ami: &'a [Vec<f64>],
    pub ari: &'a [Vec<f64>],
}

impl<'a> ComparisonFile<'a> {
    pub fn new(methods: &'a [String], alignment: &'a str, c: &'a Comparison) -> Self {
        ComparisonFile {
            methods,
            alignment,
            ami_normalizer: cotemporal_core::eval::AMI_NORMALIZER,
            items: c.items,
            dropped: c.dropped,
            ami: &c.ami,
            ari: &c.ari,
        }
    }
}

pub const CROWD: &str = "crowd";

pub fn write_concept_truth_csv<W: Write>(w: W, truth: &GroundTruth) -> csv::Result<()> {
    write_partition_csv(w, truth.concept_topic.iter().map(|(c, t)| (c.as_str(), t.to_string())))
}

/// Crowd users carry the `crowd` label.
pub fn write_user_truth_csv<W: Write>(w: W, truth: &GroundTruth) -> csv::Result<()> {
    write_partition_csv(
        w,
        truth.user_community.iter().map(|(u, k)| (u.as_str(), k.map_or_else(|| CROWD.to_owned(), |k| k.to_string()))),
    )
}

pub fn write_edges_tsv<W: Write>(mut w: W, edges: &cotemporal_core::FollowEdgeList) -> io::Result<()> {
    for (a, b) in edges.iter() {
        writeln!(w, "{a}\t{b}")?;
    }
    w.flush()
}
