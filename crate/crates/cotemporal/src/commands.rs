//! Batch commands. Each reads its inputs from files, writes its outputs plus a
//! `manifest.json` into an output directory, and returns a short summary.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use cotemporal_core::eval::{ami, ari, compare_methods, topology_baseline, Alignment};
use cotemporal_core::graph::LouvainConfig;
use cotemporal_core::ingest::Interval;
use cotemporal_core::seed::{derive_seed, stage};
use cotemporal_core::synth::{generate, PlantedSpec};
use cotemporal_core::topics::Topic;
use cotemporal_core::{Partition, PostRecord};
use serde_json::json;

use crate::formats::{self, CommunitiesFile, ComparisonFile, TopicsFile, UNCLUSTERED};
use crate::io::{load_follow_edges, parse_records, read_partition_csv, FormatError};
use crate::pipeline::{self, CommunityStage, Period, SweepPoint, SweepStage, TopicStage};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0:#}")]
    Data(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<cotemporal_core::Error> for CliError {
    fn from(e: cotemporal_core::Error) -> Self {
        match e {
            cotemporal_core::Error::Config(msg) => CliError::Usage(msg),
            other => CliError::Data(anyhow!(other)),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

macro_rules! data_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Data(anyhow!(e))
            }
        }
    )*};
}

data_error_from!(FormatError, std::io::Error, csv::Error, serde_json::Error);

pub type CmdResult<T> = Result<T, CliError>;

fn create(dir: &Path, name: &str) -> CmdResult<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> CmdResult<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn prepare_out(dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, body: serde_json::Value) -> CmdResult<()> {
    let mut manifest = json!({ "command": command, "version": env!("CARGO_PKG_VERSION") });
    if let (Some(m), serde_json::Value::Object(extra)) = (manifest.as_object_mut(), body) {
        m.extend(extra);
    }
    let mut w = create(dir, "manifest.json")?;
    formats::write_json(&mut w, &manifest)?;
    w.flush()?;
    Ok(())
}

/// Parsed input posts and the parse counters.
#[derive(Debug, Clone)]
pub struct LoadedRecords {
    pub records: Vec<PostRecord>,
    pub malformed: usize,
}

pub fn load_records(path: &Path) -> CmdResult<LoadedRecords> {
    let parsed = parse_records(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    if parsed.records.is_empty() {
        return Err(CliError::Data(anyhow!("no records in {}", path.display())));
    }
    if parsed.malformed > 0 {
        eprintln!("warning: skipped {} malformed lines in {}", parsed.malformed, path.display());
    }
    Ok(LoadedRecords { records: parsed.records, malformed: parsed.malformed })
}

/// Explicit bounds override the whole-day span of the data.
pub fn resolve_period(records: &[PostRecord], from: Option<i64>, to: Option<i64>) -> CmdResult<Period> {
    let span = Period::spanning(records)?;
    let period = Period { start: from.unwrap_or(span.start), end: to.unwrap_or(span.end) };
    if period.end <= period.start {
        return Err(CliError::Usage(format!("empty period [{}, {})", period.start, period.end)));
    }
    Ok(period)
}

fn load_topics(path: &Path) -> CmdResult<Vec<Topic>> {
    let file: TopicsFile =
        serde_json::from_reader(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let topics = file.topics();
    if topics.is_empty() {
        return Err(CliError::Data(anyhow!("{} lists no topics", path.display())));
    }
    Ok(topics)
}

/// Scores `labels` against a truth partition over the truth's items; items
/// without a cluster get the reserved unclustered label.
fn score_against_truth(truth_path: &Path, label_of: impl Fn(&str) -> Option<String>) -> CmdResult<serde_json::Value> {
    let truth = read_partition_csv(open(truth_path)?).with_context(|| format!("reading {}", truth_path.display()))?;
    let predicted =
        Partition::from_assignments(truth.ids().map(|id| (id, label_of(id).unwrap_or_else(|| UNCLUSTERED.into()))))?;
    Ok(json!({
        "truth": truth_path.display().to_string(),
        "items": truth.len(),
        "ari": ari(&predicted, &truth)?,
        "ami": ami(&predicted, &truth)?,
        "ami_normalizer": cotemporal_core::eval::AMI_NORMALIZER,
    }))
}

#[derive(Debug, Clone)]
pub struct TopicsArgs {
    pub input: PathBuf,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub stage: TopicStage,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
    pub dump_signals: bool,
}

#[derive(Debug, Clone)]
pub struct TopicsOutcome {
    pub topics: usize,
    pub modularity: Option<f64>,
    pub warning: Option<String>,
    pub evaluation: Option<serde_json::Value>,
}

pub fn cmd_topics(args: &TopicsArgs) -> CmdResult<TopicsOutcome> {
    let loaded = load_records(&args.input)?;
    let period = resolve_period(&loaded.records, args.from, args.to)?;
    let run = pipeline::run_topics(&loaded.records, period, &args.stage)?;
    prepare_out(&args.out)?;
    let x = &run.extraction;
    let c = &run.concepts;

    formats::write_json(create(&args.out, "topics.json")?, &TopicsFile::from_extraction(x))?;
    formats::write_topics_summary(create(&args.out, "topics_summary.txt")?, x)?;
    let topic_of: std::collections::BTreeMap<&str, usize> =
        x.topics.iter().flat_map(|t| t.concepts.iter().map(move |c| (c.as_str(), t.topic_id))).collect();
    let label = |id: &str| topic_of.get(id).map(usize::to_string);
    formats::write_partition_csv(
        create(&args.out, "concept_partition.csv")?,
        x.graph.ids().iter().map(|id| (id.as_str(), label(id).unwrap_or_else(|| UNCLUSTERED.into()))),
    )?;
    formats::write_graph_csv(create(&args.out, "concept_graph.csv")?, &x.graph)?;
    formats::write_filter_report_csv(create(&args.out, "filter_report.csv")?, &c.report)?;
    let point = SweepPoint::from_diagnostics(
        SweepStage::Topics,
        args.stage.interval,
        args.stage.edge_threshold,
        &x.diagnostics,
    );
    formats::write_sweep_csv(create(&args.out, "diagnostics.csv")?, &[point])?;
    if args.dump_signals {
        formats::write_signals_csv(create(&args.out, "signals.csv")?, &c.signals, c.corpus.grid().len)?;
    }
    let evaluation = args.truth.as_deref().map(|t| score_against_truth(t, label)).transpose()?;

    write_manifest(
        &args.out,
        "topics",
        json!({
            "input": args.input.display().to_string(),
            "period": period,
            "config": args.stage,
            "counts": {
                "records": loaded.records.len(),
                "malformed_lines": loaded.malformed,
                "records_in_period": c.corpus.post_count(),
                "records_out_of_period": c.corpus.dropped_out_of_range(),
                "intervals": c.corpus.grid().len,
                "concepts": c.signals.len(),
                "sparse": c.report.sparse,
                "stop": c.report.stop,
                "white_noise": c.report.white_noise,
                "kept": c.report.kept,
            },
            "diagnostics": x.diagnostics,
            "evaluation": evaluation,
        }),
    )?;
    Ok(TopicsOutcome {
        topics: x.topics.len(),
        modularity: x.diagnostics.modularity,
        warning: x.diagnostics.warning.clone(),
        evaluation,
    })
}

#[derive(Debug, Clone)]
pub struct CommunitiesArgs {
    pub input: PathBuf,
    pub topics: PathBuf,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub stage: CommunityStage,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
    pub dump_heatmaps: bool,
}

#[derive(Debug, Clone)]
pub struct CommunitiesOutcome {
    pub communities: usize,
    pub excluded: usize,
    pub modularity: Option<f64>,
    pub warning: Option<String>,
    pub evaluation: Option<serde_json::Value>,
}

pub fn cmd_communities(args: &CommunitiesArgs) -> CmdResult<CommunitiesOutcome> {
    let topics = load_topics(&args.topics)?;
    let loaded = load_records(&args.input)?;
    let period = resolve_period(&loaded.records, args.from, args.to)?;
    let run = pipeline::run_communities(&loaded.records, period, &topics, &args.stage)?;
    prepare_out(&args.out)?;
    let x = &run.extraction;

    formats::write_json(create(&args.out, "communities.json")?, &CommunitiesFile::new(x, &run.user_graph.excluded))?;
    let community_of: std::collections::BTreeMap<&str, usize> =
        x.communities.iter().flat_map(|c| c.members.iter().map(move |m| (m.as_str(), c.community_id))).collect();
    let label = |id: &str| community_of.get(id).map(usize::to_string);
    formats::write_partition_csv(
        create(&args.out, "user_partition.csv")?,
        run.corpus.users().iter().map(|u| (u.as_str(), label(u).unwrap_or_else(|| UNCLUSTERED.into()))),
    )?;
    formats::write_graph_csv(create(&args.out, "user_graph.csv")?, &run.user_graph.graph)?;
    let point = SweepPoint::from_diagnostics(
        SweepStage::Communities,
        args.stage.interval,
        args.stage.edge_threshold,
        &x.diagnostics,
    );
    formats::write_sweep_csv(create(&args.out, "diagnostics.csv")?, &[point])?;
    if args.dump_heatmaps {
        formats::write_heatmaps_csv(create(&args.out, "heatmaps.csv")?, &run.signals, run.corpus.grid().len)?;
    }
    let evaluation = args.truth.as_deref().map(|t| score_against_truth(t, label)).transpose()?;
    if !run.user_graph.excluded.is_empty() {
        eprintln!(
            "note: {} users with no topic contribution excluded from the user graph",
            run.user_graph.excluded.len()
        );
    }

    write_manifest(
        &args.out,
        "communities",
        json!({
            "input": args.input.display().to_string(),
            "topics_file": args.topics.display().to_string(),
            "period": period,
            "config": args.stage,
            "counts": {
                "records": loaded.records.len(),
                "malformed_lines": loaded.malformed,
                "records_in_period": run.corpus.post_count(),
                "intervals": run.corpus.grid().len,
                "topics": topics.len(),
                "users": run.corpus.users().len(),
                "excluded_zero_users": run.user_graph.excluded.len(),
            },
            "diagnostics": x.diagnostics,
            "evaluation": evaluation,
        }),
    )?;
    Ok(CommunitiesOutcome {
        communities: x.communities.len(),
        excluded: run.user_graph.excluded.len(),
        modularity: x.diagnostics.modularity,
        warning: x.diagnostics.warning.clone(),
        evaluation,
    })
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub input: PathBuf,
    pub stage: SweepStage,
    pub topics: Option<PathBuf>,
    pub from: Option<i64>,
    pub to: Option<i64>,
    pub intervals: Vec<Interval>,
    pub thresholds: Vec<f64>,
    pub topic_stage: TopicStage,
    pub community_stage: CommunityStage,
    pub out: PathBuf,
}

pub fn cmd_sweep(args: &SweepArgs) -> CmdResult<Vec<SweepPoint>> {
    if args.thresholds.is_empty() {
        return Err(CliError::Usage("empty threshold list".into()));
    }
    if args.intervals.is_empty() {
        return Err(CliError::Usage("empty interval list".into()));
    }
    let topics = match (args.stage, &args.topics) {
        (SweepStage::Communities, Some(path)) => Some(load_topics(path)?),
        (SweepStage::Communities, None) => return Err(CliError::Usage("the communities sweep needs --topics".into())),
        (SweepStage::Topics, _) => None,
    };
    let loaded = load_records(&args.input)?;
    let period = resolve_period(&loaded.records, args.from, args.to)?;
    let rows = match &topics {
        None => pipeline::sweep_topics(&loaded.records, period, &args.topic_stage, &args.intervals, &args.thresholds)?,
        Some(topics) => pipeline::sweep_communities(
            &loaded.records,
            period,
            topics,
            &args.community_stage,
            &args.intervals,
            &args.thresholds,
        )?,
    };
    prepare_out(&args.out)?;
    formats::write_sweep_csv(create(&args.out, "sweep.csv")?, &rows)?;
    let config = match args.stage {
        SweepStage::Topics => json!(args.topic_stage),
        SweepStage::Communities => json!(args.community_stage),
    };
    write_manifest(
        &args.out,
        "sweep",
        json!({
            "input": args.input.display().to_string(),
            "stage": args.stage,
            "period": period,
            "intervals": args.intervals,
            "thresholds": args.thresholds,
            "config": config,
            "counts": { "records": loaded.records.len(), "malformed_lines": loaded.malformed, "rows": rows.len() },
        }),
    )?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct BaselineArgs {
    pub follow_edges: PathBuf,
    pub resolution: f64,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn cmd_baseline_topology(args: &BaselineArgs) -> CmdResult<(Partition, f64)> {
    let parsed = load_follow_edges(open(&args.follow_edges)?)
        .with_context(|| format!("reading {}", args.follow_edges.display()))?;
    if parsed.edges.is_empty() {
        return Err(CliError::Data(anyhow!("no follower edges in {}", args.follow_edges.display())));
    }
    let cfg = LouvainConfig {
        resolution: args.resolution,
        seed: derive_seed(args.seed, stage::BASELINE),
        ..LouvainConfig::default()
    };
    cfg.validate()?;
    let (partition, q) = topology_baseline(&parsed.edges, &cfg)?;
    prepare_out(&args.out)?;
    formats::write_partition_csv(create(&args.out, "baseline_partition.csv")?, formats::partition_rows(&partition))?;
    write_manifest(
        &args.out,
        "baseline-topology",
        json!({
            "follow_edges": args.follow_edges.display().to_string(),
            "config": { "resolution": args.resolution, "seed": args.seed },
            "counts": {
                "edges": parsed.edges.len(),
                "malformed_lines": parsed.malformed,
                "collapsed_lines": parsed.collapsed,
                "users": partition.len(),
                "communities": partition.cluster_count(),
            },
            "modularity": q,
        }),
    )?;
    Ok((partition, q))
}

#[derive(Debug, Clone)]
pub struct CompareArgs {
    pub partitions: Vec<PathBuf>,
    pub names: Option<Vec<String>>,
    pub intersection: bool,
    pub out: PathBuf,
}

pub fn cmd_compare(args: &CompareArgs) -> CmdResult<cotemporal_core::eval::Comparison> {
    if args.partitions.len() < 2 {
        return Err(CliError::Usage("compare needs at least two partition files".into()));
    }
    let names: Vec<String> = match &args.names {
        Some(n) if n.len() == args.partitions.len() => n.clone(),
        Some(_) => return Err(CliError::Usage("one name per partition file".into())),
        None => args
            .partitions
            .iter()
            .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
            .collect(),
    };
    let partitions = args
        .partitions
        .iter()
        .map(|p| {
            read_partition_csv(open(p)?).with_context(|| format!("reading {}", p.display())).map_err(CliError::from)
        })
        .collect::<CmdResult<Vec<_>>>()?;
    let (alignment, alignment_name) = if args.intersection {
        (Alignment::Intersection, "intersection")
    } else {
        (Alignment::Unclustered, "unclustered")
    };
    let cmp = compare_methods(&partitions, alignment)?;
    prepare_out(&args.out)?;
    formats::write_matrix_csv(create(&args.out, "ami_matrix.csv")?, &names, &cmp.ami)?;
    formats::write_matrix_csv(create(&args.out, "ari_matrix.csv")?, &names, &cmp.ari)?;
    formats::write_json(create(&args.out, "comparison.json")?, &ComparisonFile::new(&names, alignment_name, &cmp))?;
    write_manifest(
        &args.out,
        "compare",
        json!({
            "partitions": args.partitions.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "alignment": alignment_name,
            "counts": { "items": cmp.items, "dropped": cmp.dropped },
        }),
    )?;
    Ok(cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Topics,
    Communities,
}

#[derive(Debug, Clone)]
pub struct SynthArgs {
    pub spec: Option<PathBuf>,
    pub preset: Preset,
    pub seed: Option<u64>,
    pub out: PathBuf,
}

pub fn cmd_synth(args: &SynthArgs) -> CmdResult<cotemporal_core::synth::SyntheticCorpus> {
    let mut spec = match &args.spec {
        Some(path) => serde_json::from_reader::<_, PlantedSpec>(open(path)?)
            .map_err(|e| CliError::Usage(format!("invalid spec {}: {e}", path.display())))?,
        None => match args.preset {
            Preset::Topics => PlantedSpec::planted_topics(0),
            Preset::Communities => PlantedSpec::planted_communities(0),
        },
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let corpus = generate(&spec)?;
    prepare_out(&args.out)?;
    let mut w = create(&args.out, "posts.jsonl")?;
    formats::write_records_jsonl(&mut w, &corpus.records)?;
    w.flush()?;
    formats::write_concept_truth_csv(create(&args.out, "concept_topics.csv")?, &corpus.truth)?;
    formats::write_user_truth_csv(create(&args.out, "user_communities.csv")?, &corpus.truth)?;
    if !corpus.follow_edges.is_empty() {
        let mut w = create(&args.out, "follow_edges.tsv")?;
        formats::write_edges_tsv(&mut w, &corpus.follow_edges)?;
        w.flush()?;
    }
    write_manifest(
        &args.out,
        "synth",
        json!({
            "spec": spec,
            "counts": {
                "records": corpus.records.len(),
                "concepts": corpus.truth.concept_topic.len(),
                "users": corpus.truth.user_community.len(),
                "follow_edges": corpus.follow_edges.len(),
            },
        }),
    )?;
    Ok(corpus)
}
