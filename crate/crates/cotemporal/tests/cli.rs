use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cotemporal::commands::{
    cmd_communities, cmd_compare, cmd_synth, cmd_topics, CommunitiesArgs, CompareArgs, Preset, SynthArgs, TopicsArgs,
};
use cotemporal::pipeline::{CommunityStage, TopicStage};
use cotemporal_core::eval::{ami, ari};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cotemporal"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into(),
        String::from_utf8_lossy(&out.stderr).into(),
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, preset: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("synth_{preset}_{seed}"));
    let (code, _, err) = run(&["synth", "--preset", preset, "--seed", seed, "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    out
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn synthetic_topics_scored_against_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let syn = synth(tmp.path(), "topics", "7");
    let out = tmp.path().join("topics");
    let (code, stdout, err) = run(&[
        "topics",
        "--input",
        s(&syn.join("posts.jsonl")),
        "--truth",
        s(&syn.join("concept_topics.csv")),
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("5 topics"), "{stdout}");
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["evaluation"]["ari"].as_f64().unwrap() >= 0.9);
    assert_eq!(manifest["counts"]["kept"], 30);
    for f in [
        "topics.json",
        "topics_summary.txt",
        "concept_partition.csv",
        "concept_graph.csv",
        "filter_report.csv",
        "diagnostics.csv",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let syn = synth(tmp.path(), "communities", "3");
    let syn2 = synth(&tmp.path().join("again"), "communities", "3");
    assert_eq!(fs::read(syn.join("posts.jsonl")).unwrap(), fs::read(syn2.join("posts.jsonl")).unwrap());
    let posts = syn.join("posts.jsonl");
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let t = tmp.path().join(format!("t{name}"));
        let c = tmp.path().join(format!("c{name}"));
        assert_eq!(run(&["topics", "--input", s(&posts), "--out", s(&t), "--seed", "9", "--dump-signals"]).0, 0);
        let topics = t.join("topics.json");
        assert_eq!(
            run(&[
                "communities",
                "--input",
                s(&posts),
                "--topics",
                s(&topics),
                "--out",
                s(&c),
                "--seed",
                "9",
                "--dump-heatmaps"
            ])
            .0,
            0
        );
        let mut both = read_dir_bytes(&t);
        both.extend(read_dir_bytes(&c));
        runs.push(both);
    }
    // Manifests echo the topics path, which differs between the two runs.
    let strip =
        |v: &Vec<(String, Vec<u8>)>| v.iter().filter(|(n, _)| n != "manifest.json").cloned().collect::<Vec<_>>();
    assert_eq!(strip(&runs[0]), strip(&runs[1]));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    let (code, _, err) = run(&["topics", "--input", s(&empty), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(code, 2);
    assert!(err.contains("no records"), "{err}");

    let garbage = tmp.path().join("garbage.jsonl");
    fs::write(&garbage, "a\nb\n{}\n").unwrap();
    assert_eq!(run(&["topics", "--input", s(&garbage), "--out", s(&tmp.path().join("x"))]).0, 2);

    let syn = synth(tmp.path(), "topics", "1");
    let posts = syn.join("posts.jsonl");
    let (code, stdout, err) =
        run(&["topics", "--input", s(&posts), "--edge-threshold", "1.0", "--out", s(&tmp.path().join("t1"))]);
    assert_eq!(code, 0);
    assert!(stdout.starts_with("0 topics"));
    assert!(err.contains("warning"));

    assert_eq!(
        run(&["topics", "--input", s(&posts), "--edge-threshold", "1.5", "--out", s(&tmp.path().join("x"))]).0,
        1
    );
    assert_eq!(run(&["topics", "--input", s(&posts), "--interval", "weekly", "--out", s(&tmp.path().join("x"))]).0, 1);
    assert_eq!(run(&["topics", "--out", "x"]).0, 1);
    assert_eq!(run(&["topics", "--input", s(&tmp.path().join("missing.jsonl")), "--out", "x"]).0, 2);
    let missing_topics = tmp.path().join("none.json");
    assert_eq!(run(&["communities", "--input", s(&posts), "--topics", s(&missing_topics), "--out", "x"]).0, 2);
    assert_eq!(
        run(&["sweep", "--input", s(&posts), "--stage", "communities", "--thresholds", "0.5", "--out", "x"]).0,
        1
    );
    assert_eq!(run(&["--help"]).0, 0);
}

#[test]
fn sweep_rows_per_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let syn = synth(tmp.path(), "topics", "2");
    let out = tmp.path().join("sweep");
    let (code, _, err) = run(&[
        "sweep",
        "--input",
        s(&syn.join("posts.jsonl")),
        "--stage",
        "topics",
        "--thresholds",
        "0.0,0.5,1.0",
        "--out",
        s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let mut rdr = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().skip(1).take(4).collect::<Vec<_>>(),
        ["interval", "threshold", "modularity", "cluster_count"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for chunk in rows.chunks(3) {
        let edges: Vec<usize> = chunk.iter().map(|r| r[6].parse().unwrap()).collect();
        assert!(edges.windows(2).all(|w| w[0] >= w[1]), "{edges:?}");
    }
}

#[test]
fn baseline_and_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let edges = tmp.path().join("edges.tsv");
    fs::write(&edges, "a\tb\nb\tc\nc\ta\nd\te\ne\tf\nf\td\n").unwrap();
    let out = tmp.path().join("base");
    let (code, stdout, _) = run(&["baseline-topology", "--follow-edges", s(&edges), "--out", s(&out)]);
    assert_eq!(code, 0);
    assert!(stdout.contains("2 communities") && stdout.contains("0.5000"), "{stdout}");
    let empty = tmp.path().join("none.tsv");
    fs::write(&empty, "a\ta\n").unwrap();
    assert_eq!(run(&["baseline-topology", "--follow-edges", s(&empty), "--out", s(&out)]).0, 2);

    let part = out.join("baseline_partition.csv");
    let cmp = tmp.path().join("cmp");
    assert_eq!(run(&["compare", s(&part), s(&part), "--out", s(&cmp)]).0, 0);
    let matrix = fs::read_to_string(cmp.join("ami_matrix.csv")).unwrap();
    assert_eq!(matrix.lines().nth(1).unwrap(), "baseline_partition,1,1");
    assert_eq!(run(&["compare", s(&part), "--out", s(&cmp)]).0, 1);
}

#[test]
fn library_commands_compose() {
    let tmp = tempfile::tempdir().unwrap();
    let syn = tmp.path().join("syn");
    let corpus =
        cmd_synth(&SynthArgs { spec: None, preset: Preset::Communities, seed: Some(5), out: syn.clone() }).unwrap();
    let posts = syn.join("posts.jsonl");
    let topics = cmd_topics(&TopicsArgs {
        input: posts.clone(),
        from: None,
        to: None,
        stage: TopicStage::default(),
        out: tmp.path().join("t"),
        truth: None,
        dump_signals: false,
    })
    .unwrap();
    assert_eq!(topics.topics, 5);
    let com = cmd_communities(&CommunitiesArgs {
        input: posts,
        topics: tmp.path().join("t/topics.json"),
        from: None,
        to: None,
        stage: CommunityStage::default(),
        out: tmp.path().join("c"),
        truth: Some(syn.join("user_communities.csv")),
        dump_heatmaps: false,
    })
    .unwrap();
    assert!(com.communities >= 4);
    assert_eq!(com.excluded, 0);
    assert_eq!(corpus.truth.user_community.len(), 200);

    let files = vec![tmp.path().join("c/user_partition.csv"), syn.join("user_communities.csv")];
    let cmp = cmd_compare(&CompareArgs {
        partitions: files.clone(),
        names: None,
        intersection: false,
        out: tmp.path().join("cmp"),
    })
    .unwrap();
    let read = |p: &Path| cotemporal::io::read_partition_csv(fs::File::open(p).unwrap()).unwrap();
    let (a, b) = (read(&files[0]), read(&files[1]));
    assert_eq!(cmp.ami[0][1], ami(&a, &b).unwrap());
    assert_eq!(cmp.ari[1][0], ari(&a, &b).unwrap());
    let eval = com.evaluation.unwrap();
    assert_eq!(eval["ami"].as_f64().unwrap(), cmp.ami[0][1]);
}

#[test]
fn zero_contribution_users_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let posts = tmp.path().join("posts.jsonl");
    let mut lines = Vec::new();
    let day = 1_288_569_600i64;
    for (i, (u, c, t)) in
        [("u1", "a", 0), ("u2", "a", 0), ("u1", "b", 1), ("u2", "b", 1), ("u3", "z", 2)].iter().enumerate()
    {
        lines.push(format!(
            r#"{{"post_id":"{i}","user_id":"{u}","timestamp":{},"concepts":["{c}"]}}"#,
            day + t * 86_400
        ));
    }
    fs::write(&posts, lines.join("\n")).unwrap();
    let topics = tmp.path().join("topics.json");
    fs::write(&topics, r#"{"topics":[{"topic_id":0,"size":2,"mean_edge_weight":1.0,"concepts":["a","b"]}]}"#).unwrap();
    let out = tmp.path().join("c");
    let (code, stdout, err) = run(&["communities", "--input", s(&posts), "--topics", s(&topics), "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("1 communities") && stdout.contains("1 users excluded"), "{stdout}");
    let file: serde_json::Value = serde_json::from_slice(&fs::read(out.join("communities.json")).unwrap()).unwrap();
    assert_eq!(file["communities"][0]["members"], serde_json::json!(["u1", "u2"]));
    assert_eq!(file["excluded_zero_users"], serde_json::json!(["u3"]));
}
