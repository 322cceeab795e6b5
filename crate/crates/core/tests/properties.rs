#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;

use cotemporal_core::eval::{ami_labels, ari_labels};
use cotemporal_core::filter::{apply_filters, FilterConfig};
use cotemporal_core::graph::{build_graph, louvain, modularity, LouvainConfig, WeightedGraph};
use cotemporal_core::ingest::{bucketize, Interval, PostRecord, TimeGrid};
use cotemporal_core::signal::{build_alltweets, build_concept_signals, ccm, ConceptSignal};
use cotemporal_core::users::{usd, CountMatrix};
use cotemporal_core::Partition;
use proptest::prelude::*;

fn pair(max_len: usize) -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
    (1..=max_len).prop_flat_map(|n| (prop::collection::vec(0u64..40, n), prop::collection::vec(0u64..40, n)))
}

fn matrices() -> impl Strategy<Value = (CountMatrix, CountMatrix)> {
    (1usize..5, 1usize..10).prop_flat_map(|(k, l)| {
        let m = prop::collection::vec(prop::collection::vec(0u64..6, l), k);
        (m.clone(), m).prop_map(|(a, b)| (CountMatrix::from_rows(&a).unwrap(), CountMatrix::from_rows(&b).unwrap()))
    })
}

/// Edge list over `n` nodes with weights in (0, 1].
fn weighted_graph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (Just(n), prop::collection::vec(prop::option::weighted(0.5, 0.01f64..1.0), m)).prop_map(move |(n, ws)| {
            let edges = pairs.iter().zip(ws).filter_map(|(&(i, j), w)| w.map(|w| (i, j, w))).collect();
            (n, edges)
        })
    })
}

fn graph_of(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
    let ids = (0..n).map(|i| format!("v{i}")).collect();
    WeightedGraph::from_edges(ids, edges.to_vec()).unwrap()
}

proptest! {
    #[test]
    fn ccm_symmetric_bounded_scale_invariant((a, b) in pair(48), alpha in 1u64..50) {
        let ab = ccm(&a, &b).unwrap();
        prop_assert_eq!(ab.to_bits(), ccm(&b, &a).unwrap().to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
        let scaled: Vec<u64> = a.iter().map(|v| v * alpha).collect();
        prop_assert!((ccm(&scaled, &b).unwrap() - ab).abs() <= 1e-12);
        let fa: Vec<f64> = a.iter().map(|&v| v as f64 * 0.37).collect();
        prop_assert!((ccm(&fa, &b).unwrap() - ab).abs() <= 1e-12);
        if a.iter().any(|&v| v > 0) {
            prop_assert!((ccm(&a, &a).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn usd_is_flattened_ccm((m, n) in matrices()) {
        let v = usd(&m, &n).unwrap();
        prop_assert!((v - ccm(m.as_flat(), n.as_flat()).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(v.to_bits(), usd(&n, &m).unwrap().to_bits());
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn time_shifted_one_hot_is_dissimilar(k in 1usize..5, l in 2usize..20, j in 0usize..5, t in 0usize..20, dt in 1usize..20) {
        let (j, t) = (j % k, t % l);
        let t2 = (t + dt % (l - 1) + 1) % l;
        let mut m = CountMatrix::zeros(k, l);
        let mut n = CountMatrix::zeros(k, l);
        m.add(j, t, 3);
        n.add(j, t2, 3);
        prop_assert_eq!(usd(&m, &n).unwrap(), 0.0);
    }

    #[test]
    fn modularity_relabel_invariant((n, edges) in weighted_graph(8), labels in prop::collection::vec(0usize..4, 8), shift in 1usize..10) {
        prop_assume!(!edges.is_empty());
        let g = graph_of(n, &edges);
        let labels = &labels[..n];
        let relabeled: Vec<usize> = labels.iter().map(|l| (l + shift) * 7).collect();
        let p = Partition::from_labels(g.ids(), labels).unwrap();
        let q = Partition::from_labels(g.ids(), &relabeled).unwrap();
        let (a, b) = (modularity(&g, &p).unwrap(), modularity(&g, &q).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
        prop_assert!((-0.5..=1.0).contains(&a));
        let one = Partition::from_labels(g.ids(), &vec![0; n]).unwrap();
        prop_assert!(modularity(&g, &one).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn louvain_deterministic_and_merge_optimal((n, edges) in weighted_graph(12), seed in 0u64..1000) {
        let g = graph_of(n, &edges);
        let cfg = LouvainConfig::with_seed(seed);
        let p = louvain(&g, &cfg).unwrap();
        prop_assert_eq!(&p, &louvain(&g, &cfg).unwrap());
        if edges.is_empty() {
            prop_assert_eq!(p.cluster_count(), n);
            return Ok(());
        }
        let q = modularity(&g, &p).unwrap();
        let singletons = Partition::from_labels(g.ids(), &(0..n).collect::<Vec<_>>()).unwrap();
        prop_assert!(q >= modularity(&g, &singletons).unwrap() - 1e-12);
        let labels: Vec<usize> = g.ids().iter().map(|id| p.label(id).unwrap()).collect();
        for a in 0..p.cluster_count() {
            for b in a + 1..p.cluster_count() {
                let merged: Vec<usize> = labels.iter().map(|&l| if l == b { a } else { l }).collect();
                let m = Partition::from_labels(g.ids(), &merged).unwrap();
                prop_assert!(modularity(&g, &m).unwrap() <= q + 1e-12);
            }
        }
    }

    #[test]
    fn raising_threshold_only_removes_edges(ws in prop::collection::vec(0.0f64..1.0, 45), t1 in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let n = 10;
        let mut w = vec![vec![0.0; n]; n];
        let mut it = ws.iter();
        for i in 0..n {
            for j in i + 1..n {
                let x = *it.next().unwrap();
                w[i][j] = x;
                w[j][i] = x;
            }
        }
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let low = build_graph(ids.clone(), |i, j| w[i][j], t1);
        let high = build_graph(ids, |i, j| w[i][j], (t1 + dt).min(1.0));
        for (i, j, x) in high.edges() {
            prop_assert_eq!(low.weight(i, j), Some(x));
        }
        prop_assert_eq!(high.edges().count(), low.above_threshold((t1 + dt).min(1.0)).edges().count());
    }

    #[test]
    fn metrics_symmetric_and_label_invariant(a in prop::collection::vec(0usize..4, 2..40), seed in any::<u64>()) {
        let b: Vec<usize> = a.iter().enumerate().map(|(i, &x)| if (seed >> (i % 64)) & 1 == 1 { (x + 1) % 4 } else { x }).collect();
        let perm = |v: &[usize]| v.iter().map(|x| [2, 0, 3, 1][*x]).collect::<Vec<_>>();
        let r = ari_labels(&a, &b).unwrap();
        prop_assert!((r - ari_labels(&b, &a).unwrap()).abs() <= 1e-12);
        prop_assert!((r - ari_labels(&perm(&a), &b).unwrap()).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&r));
        let m = ami_labels(&a, &b).unwrap();
        prop_assert!((m - ami_labels(&b, &a).unwrap()).abs() <= 1e-9);
        prop_assert!((m - ami_labels(&perm(&a), &b).unwrap()).abs() <= 1e-9);
        prop_assert!(m <= 1.0 + 1e-12);
        prop_assert_eq!(ari_labels(&a, &perm(&a)).unwrap(), 1.0);
    }

    #[test]
    fn filter_report_is_exhaustive(raw in prop::collection::vec(prop::collection::vec(0u64..20, 24), 1..12), rho in 0.5f64..1.0) {
        let signals: BTreeMap<String, ConceptSignal> = raw
            .into_iter()
            .enumerate()
            .filter(|(_, v)| v.iter().any(|&x| x > 0))
            .map(|(i, values)| (format!("c{i}"), ConceptSignal { concept_id: format!("c{i}"), values }))
            .collect();
        prop_assume!(!signals.is_empty());
        let all = build_alltweets(signals.values()).unwrap();
        let cfg = FilterConfig { rho, ..FilterConfig::default() };
        let (survivors, report) = apply_filters(&signals, &all, &cfg).unwrap();
        prop_assert_eq!(report.removed() + report.kept, signals.len());
        prop_assert_eq!(report.entries.len(), signals.len());
        prop_assert_eq!(survivors.len(), report.kept);
        let again = apply_filters(&signals, &all, &cfg).unwrap();
        prop_assert_eq!(&again.1, &report);
    }

    #[test]
    fn bucketize_permutation_invariant(posts in prop::collection::vec((0i64..100_000, 0usize..5, prop::collection::btree_set(0usize..6, 0..4)), 1..60)) {
        let records: Vec<PostRecord> = posts
            .iter()
            .enumerate()
            .map(|(i, (t, u, cs))| PostRecord::new(i.to_string(), format!("u{u}"), *t, cs.iter().map(|c| format!("c{c}"))))
            .collect();
        let grid = TimeGrid::new(0, Interval::Hourly, 24).unwrap();
        let mut rev = records.clone();
        rev.reverse();
        let a = bucketize(&records, grid).unwrap();
        let b = bucketize(&rev, grid).unwrap();
        prop_assert_eq!(build_concept_signals(&a), build_concept_signals(&b));
        prop_assert_eq!(a.users(), b.users());
        prop_assert_eq!(a.post_count() + a.dropped_out_of_range(), records.len());
    }
}
