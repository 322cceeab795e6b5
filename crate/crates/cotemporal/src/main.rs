use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cotemporal::commands::{
    cmd_baseline_topology, cmd_communities, cmd_compare, cmd_sweep, cmd_synth, cmd_topics, BaselineArgs, CliError,
    CommunitiesArgs, CompareArgs, Preset, SweepArgs, SynthArgs, TopicsArgs,
};
use cotemporal::io::parse_time;
use cotemporal::pipeline::{CommunityStage, SweepStage, TopicStage};
use cotemporal_core::Interval;

#[derive(Parser)]
#[command(
    name = "cotemporal",
    version,
    about = "Topic and latent community detection from temporally correlated signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect topics from annotated posts.
    Topics(TopicsCli),
    /// Detect latent user communities around previously detected topics.
    Communities(CommunitiesCli),
    /// Modularity and cluster counts over a grid of thresholds and intervals.
    Sweep(SweepCli),
    /// Louvain over the follower graph.
    BaselineTopology(BaselineCli),
    /// Pairwise AMI/ARI between partition files.
    Compare(CompareCli),
    /// Generate a planted synthetic corpus with ground truth.
    Synth(SynthCli),
}

#[derive(Clone, Copy, ValueEnum)]
enum IntervalArg {
    Hourly,
    Daily,
}

impl From<IntervalArg> for Interval {
    fn from(i: IntervalArg) -> Self {
        match i {
            IntervalArg::Hourly => Interval::Hourly,
            IntervalArg::Daily => Interval::Daily,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StageArg {
    Topics,
    Communities,
}

#[derive(Args)]
struct PeriodCli {
    /// Period start: epoch seconds, YYYY-MM-DD or RFC 3339. Defaults to midnight UTC of the first post's day.
    #[arg(long, value_parser = parse_time)]
    from: Option<i64>,
    /// Exclusive period end. Defaults to midnight UTC after the last post's day.
    #[arg(long, value_parser = parse_time)]
    to: Option<i64>,
}

#[derive(Args)]
struct LouvainCli {
    #[arg(long, default_value_t = 1.0)]
    resolution: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FilterCli {
    /// Stop-concept threshold on ccm with the AllTweets signal.
    #[arg(long, default_value_t = 0.9)]
    rho: f64,
    /// Spectral peak z threshold for the white-noise test.
    #[arg(long, default_value_t = 3.0)]
    psd_peak_z: f64,
    /// Concepts with fewer total mentions are dropped before the other filters.
    #[arg(long, default_value_t = 0)]
    min_total_count: u64,
}

#[derive(Args)]
struct TopicsCli {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    period: PeriodCli,
    #[arg(long, value_enum, default_value = "hourly")]
    interval: IntervalArg,
    #[arg(long, default_value_t = 0.7)]
    edge_threshold: f64,
    #[command(flatten)]
    filter: FilterCli,
    #[command(flatten)]
    louvain: LouvainCli,
    #[arg(long)]
    out: PathBuf,
    /// `id,label` CSV of planted concept topics to score against.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write every concept signal to signals.csv.
    #[arg(long)]
    dump_signals: bool,
}

impl TopicsCli {
    fn stage(&self) -> TopicStage {
        TopicStage {
            interval: self.interval.into(),
            edge_threshold: self.edge_threshold,
            rho: self.filter.rho,
            psd_peak_z: self.filter.psd_peak_z,
            min_total_count: self.filter.min_total_count,
            resolution: self.louvain.resolution,
            seed: self.louvain.seed,
        }
    }
}

#[derive(Args)]
struct CommunitiesCli {
    #[arg(long)]
    input: PathBuf,
    /// topics.json written by the topics command.
    #[arg(long)]
    topics: PathBuf,
    #[command(flatten)]
    period: PeriodCli,
    #[arg(long, value_enum, default_value = "daily")]
    interval: IntervalArg,
    #[arg(long, default_value_t = 0.6)]
    edge_threshold: f64,
    #[command(flatten)]
    louvain: LouvainCli,
    #[arg(long)]
    out: PathBuf,
    /// `id,label` CSV of planted user communities to score against.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Also write per-user topic x interval counts to heatmaps.csv.
    #[arg(long)]
    dump_heatmaps: bool,
}

#[derive(Args)]
struct SweepCli {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    stage: StageArg,
    /// Required for the communities stage.
    #[arg(long)]
    topics: Option<PathBuf>,
    #[command(flatten)]
    period: PeriodCli,
    /// Comma list of intervals.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "hourly,daily")]
    interval: Vec<IntervalArg>,
    /// Comma list of edge thresholds.
    #[arg(long, value_delimiter = ',', required = true)]
    thresholds: Vec<f64>,
    #[command(flatten)]
    filter: FilterCli,
    #[command(flatten)]
    louvain: LouvainCli,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineCli {
    #[arg(long)]
    follow_edges: PathBuf,
    #[command(flatten)]
    louvain: LouvainCli,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareCli {
    /// Two or more `id,label` partition CSVs.
    #[arg(required = true, num_args = 2..)]
    partitions: Vec<PathBuf>,
    /// Comma list of method names, one per file. Defaults to file stems.
    #[arg(long, value_delimiter = ',')]
    names: Option<Vec<String>>,
    /// Compare over common items only instead of filling gaps with an unclustered label.
    #[arg(long)]
    intersection: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Topics,
    Communities,
}

#[derive(Args)]
struct SynthCli {
    /// JSON planted spec. Overrides --preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "communities")]
    preset: PresetArg,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Topics(a) => {
            let out = cmd_topics(&TopicsArgs {
                input: a.input.clone(),
                from: a.period.from,
                to: a.period.to,
                stage: a.stage(),
                out: a.out.clone(),
                truth: a.truth.clone(),
                dump_signals: a.dump_signals,
            })?;
            if let Some(w) = &out.warning {
                eprintln!("warning: {w}");
            }
            println!("{} topics, modularity {}", out.topics, fmt_q(out.modularity));
            if let Some(e) = &out.evaluation {
                println!("vs truth: ARI {} AMI {}", e["ari"], e["ami"]);
            }
        }
        Command::Communities(a) => {
            let out = cmd_communities(&CommunitiesArgs {
                input: a.input,
                topics: a.topics,
                from: a.period.from,
                to: a.period.to,
                stage: CommunityStage {
                    interval: a.interval.into(),
                    edge_threshold: a.edge_threshold,
                    resolution: a.louvain.resolution,
                    seed: a.louvain.seed,
                },
                out: a.out,
                truth: a.truth,
                dump_heatmaps: a.dump_heatmaps,
            })?;
            if let Some(w) = &out.warning {
                eprintln!("warning: {w}");
            }
            println!(
                "{} communities, modularity {}, {} users excluded",
                out.communities,
                fmt_q(out.modularity),
                out.excluded
            );
            if let Some(e) = &out.evaluation {
                println!("vs truth: ARI {} AMI {}", e["ari"], e["ami"]);
            }
        }
        Command::Sweep(a) => {
            let topic_stage = TopicStage {
                rho: a.filter.rho,
                psd_peak_z: a.filter.psd_peak_z,
                min_total_count: a.filter.min_total_count,
                resolution: a.louvain.resolution,
                seed: a.louvain.seed,
                ..TopicStage::default()
            };
            let community_stage =
                CommunityStage { resolution: a.louvain.resolution, seed: a.louvain.seed, ..CommunityStage::default() };
            let rows = cmd_sweep(&SweepArgs {
                input: a.input,
                stage: match a.stage {
                    StageArg::Topics => SweepStage::Topics,
                    StageArg::Communities => SweepStage::Communities,
                },
                topics: a.topics,
                from: a.period.from,
                to: a.period.to,
                intervals: a.interval.into_iter().map(Interval::from).collect(),
                thresholds: a.thresholds,
                topic_stage,
                community_stage,
                out: a.out,
            })?;
            println!("{} sweep rows", rows.len());
        }
        Command::BaselineTopology(a) => {
            let (p, q) = cmd_baseline_topology(&BaselineArgs {
                follow_edges: a.follow_edges,
                resolution: a.louvain.resolution,
                seed: a.louvain.seed,
                out: a.out,
            })?;
            println!("{} communities over {} users, modularity {q:.4}", p.cluster_count(), p.len());
        }
        Command::Compare(a) => {
            let c = cmd_compare(&CompareArgs {
                partitions: a.partitions,
                names: a.names,
                intersection: a.intersection,
                out: a.out,
            })?;
            println!("compared over {} items ({} dropped or filled)", c.items, c.dropped);
        }
        Command::Synth(a) => {
            let corpus = cmd_synth(&SynthArgs {
                spec: a.spec,
                preset: match a.preset {
                    PresetArg::Topics => Preset::Topics,
                    PresetArg::Communities => Preset::Communities,
                },
                seed: a.seed,
                out: a.out,
            })?;
            println!("{} posts, {} users", corpus.records.len(), corpus.truth.user_community.len());
        }
    }
    Ok(())
}

fn fmt_q(q: Option<f64>) -> String {
    q.map_or_else(|| "undefined".into(), |q| format!("{q:.4}"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
