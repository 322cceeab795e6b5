//! Seeded synthetic corpora with planted topics and planted, temporally
//! separated user communities.
//!
//! Each concept of topic `j` receives `Poisson(burst_rate)` mentions in every
//! interval of `j`'s burst windows and `Poisson(noise_rate)` elsewhere. The
//! mentions of one topic in one interval are packed into posts carrying 1-3
//! distinct concepts of that topic, so a concept's count equals the number of
//! posts mentioning it. Burst posts are authored by members of communities
//! that follow the topic and are active in that interval; all remaining posts
//! come from a pool of unaffiliated crowd users.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::ingest::{FollowEdgeList, Interval, PostRecord, TimeGrid};

/// Half-open range of grid intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

impl Window {
    pub const fn new(start: usize, end: usize) -> Self {
        Window { start, end }
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t < self.end
    }

    fn overlaps(&self, other: &Window) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlantedCommunity {
    pub topics: Vec<usize>,
    pub active: Window,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PlantedSpec {
    pub n_topics: usize,
    pub concepts_per_topic: usize,
    pub grid: TimeGrid,
    /// One list of windows per topic.
    pub burst_windows: Vec<Vec<Window>>,
    pub communities: Vec<PlantedCommunity>,
    pub users_per_community: usize,
    pub crowd_users: usize,
    pub burst_rate: f64,
    pub noise_rate: f64,
    /// Random follower edges drawn per user; 0 disables the follower graph.
    pub follow_edges_per_user: usize,
    pub seed: u64,
}

/// Two weeks of hourly intervals.
const TWO_WEEKS_HOURLY: usize = 336;
const WEEK_HOURS: usize = 168;
/// 2010-11-01T00:00:00Z.
const DEFAULT_START: i64 = 1_288_569_600;

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec::planted_topics(0)
    }
}

impl PlantedSpec {
    /// Five topics of six concepts over two hourly weeks. Each topic bursts
    /// for eight hours once per week, at a slot no other topic uses.
    pub fn planted_topics(seed: u64) -> Self {
        let n_topics = 5;
        let burst_windows = (0..n_topics)
            .map(|j| {
                (0..2)
                    .map(|week| {
                        let start = week * WEEK_HOURS + 12 + 30 * j;
                        Window::new(start, start + 8)
                    })
                    .collect()
            })
            .collect();
        PlantedSpec {
            n_topics,
            concepts_per_topic: 6,
            grid: TimeGrid { start: DEFAULT_START, interval: Interval::Hourly, len: TWO_WEEKS_HOURLY },
            burst_windows,
            communities: Vec::new(),
            users_per_community: 25,
            crowd_users: 100,
            burst_rate: 20.0,
            noise_rate: 0.2,
            follow_edges_per_user: 0,
            seed,
        }
    }

    /// [`PlantedSpec::planted_topics`] plus four communities of 25 users.
    /// Communities 2 and 3 follow the same topics in different weeks.
    pub fn planted_communities(seed: u64) -> Self {
        let week = |w: usize| Window::new(w * WEEK_HOURS, (w + 1) * WEEK_HOURS);
        PlantedSpec {
            communities: alloc::vec![
                PlantedCommunity { topics: alloc::vec![0, 1], active: week(0) },
                PlantedCommunity { topics: alloc::vec![1, 2], active: week(1) },
                PlantedCommunity { topics: alloc::vec![3, 4], active: week(0) },
                PlantedCommunity { topics: alloc::vec![3, 4], active: week(1) },
            ],
            ..PlantedSpec::planted_topics(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_topics == 0 || self.concepts_per_topic == 0 {
            return bad("need at least one topic with at least one concept".into());
        }
        if self.grid.len < 2 {
            return bad(format!("grid needs at least 2 intervals, got {}", self.grid.len));
        }
        if self.burst_windows.len() != self.n_topics {
            return bad(format!("{} burst window lists for {} topics", self.burst_windows.len(), self.n_topics));
        }
        let in_grid = |w: &Window| w.start < w.end && w.end <= self.grid.len;
        if let Some(w) = self.burst_windows.iter().flatten().find(|w| !in_grid(w)) {
            return bad(format!("burst window {}..{} outside grid of {}", w.start, w.end, self.grid.len));
        }
        if !(self.noise_rate >= 0.0 && self.noise_rate.is_finite())
            || !(self.burst_rate > 0.0 && self.burst_rate.is_finite())
        {
            return bad("rates must be finite, burst_rate > 0 and noise_rate >= 0".into());
        }
        if !self.communities.is_empty() && self.users_per_community == 0 {
            return bad("communities need at least one user".into());
        }
        for (k, c) in self.communities.iter().enumerate() {
            if !in_grid(&c.active) {
                return bad(format!("community {k} active window outside grid"));
            }
            for &j in &c.topics {
                if j >= self.n_topics {
                    return bad(format!("community {k} references missing topic {j}"));
                }
                if !self.burst_windows[j].iter().any(|w| w.overlaps(&c.active)) {
                    return bad(format!("community {k} is never active during a burst of topic {j}"));
                }
            }
        }
        if self.crowd_users == 0 {
            let uncovered = self.noise_rate > 0.0
                || (0..self.n_topics).any(|j| {
                    self.burst_windows[j].iter().flat_map(|w| w.start..w.end).any(|t| self.authors_for(j, t).is_none())
                });
            if uncovered {
                return bad("crowd_users = 0 leaves posts without authors".into());
            }
        }
        Ok(())
    }

    /// Communities that author topic `j`'s burst posts at interval `t`.
    fn authors_for(&self, j: usize, t: usize) -> Option<Vec<usize>> {
        let ks: Vec<usize> = self
            .communities
            .iter()
            .enumerate()
            .filter(|(_, c)| c.active.contains(t) && c.topics.contains(&j))
            .map(|(k, _)| k)
            .collect();
        (!ks.is_empty()).then_some(ks)
    }

    pub fn concept_id(topic: usize, k: usize) -> String {
        format!("t{topic}_c{k}")
    }

    pub fn community_user_id(community: usize, i: usize) -> String {
        format!("k{community}_u{i:03}")
    }

    pub fn crowd_user_id(i: usize) -> String {
        format!("crowd_{i:04}")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub concept_topic: BTreeMap<String, usize>,
    /// `None` for crowd users.
    pub user_community: BTreeMap<String, Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub records: Vec<PostRecord>,
    pub truth: GroundTruth,
    pub follow_edges: FollowEdgeList,
}

fn sampler(rate: f64) -> Option<Poisson<f64>> {
    (rate > 0.0).then(|| Poisson::new(rate).expect("validated rate"))
}

pub fn generate(spec: &PlantedSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let burst = sampler(spec.burst_rate);
    let noise = sampler(spec.noise_rate);

    let mut truth = GroundTruth::default();
    let concepts: Vec<Vec<String>> = (0..spec.n_topics)
        .map(|j| (0..spec.concepts_per_topic).map(|k| PlantedSpec::concept_id(j, k)).collect())
        .collect();
    for (j, cs) in concepts.iter().enumerate() {
        for c in cs {
            truth.concept_topic.insert(c.clone(), j);
        }
    }
    let members: Vec<Vec<String>> = (0..spec.communities.len())
        .map(|k| (0..spec.users_per_community).map(|i| PlantedSpec::community_user_id(k, i)).collect())
        .collect();
    let crowd: Vec<String> = (0..spec.crowd_users).map(PlantedSpec::crowd_user_id).collect();
    for (k, users) in members.iter().enumerate() {
        for u in users {
            truth.user_community.insert(u.clone(), Some(k));
        }
    }
    for u in &crowd {
        truth.user_community.insert(u.clone(), None);
    }

    let step = spec.grid.interval.seconds();
    let mut records = Vec::new();
    let mut remaining = alloc::vec![0u64; spec.concepts_per_topic];
    let mut available: Vec<usize> = Vec::with_capacity(spec.concepts_per_topic);
    for t in 0..spec.grid.len {
        for (j, topic_concepts) in concepts.iter().enumerate() {
            let bursting = spec.burst_windows[j].iter().any(|w| w.contains(t));
            let dist = if bursting { burst.as_ref() } else { noise.as_ref() };
            let Some(dist) = dist else { continue };
            for r in remaining.iter_mut() {
                *r = dist.sample(&mut rng) as u64;
            }
            let pool: Vec<&String> = match (bursting, spec.authors_for(j, t)) {
                (true, Some(ks)) => ks.iter().flat_map(|&k| members[k].iter()).collect(),
                _ => crowd.iter().collect(),
            };
            while remaining.iter().any(|&r| r > 0) {
                available.clear();
                available.extend((0..remaining.len()).filter(|&k| remaining[k] > 0));
                available.shuffle(&mut rng);
                let size = rng.random_range(1..=3usize).min(available.len());
                let chosen = &available[..size];
                for &k in chosen {
                    remaining[k] -= 1;
                }
                let author = pool[rng.random_range(0..pool.len())];
                let offset = rng.random_range(0..step);
                records.push(PostRecord {
                    post_id: format!("p{}", records.len()),
                    user_id: author.clone(),
                    timestamp: spec.grid.start + t as i64 * step + offset,
                    concepts: chosen.iter().map(|&k| topic_concepts[k].clone()).collect(),
                });
            }
        }
    }

    let mut follow_edges = FollowEdgeList::default();
    if spec.follow_edges_per_user > 0 {
        let everyone: Vec<&String> = truth.user_community.keys().collect();
        if everyone.len() > 1 {
            for (i, u) in everyone.iter().enumerate() {
                for _ in 0..spec.follow_edges_per_user {
                    let mut v = rng.random_range(0..everyone.len() - 1);
                    if v >= i {
                        v += 1;
                    }
                    follow_edges.insert((*u).clone(), everyone[v].clone());
                }
            }
        }
    }

    Ok(SyntheticCorpus { records, truth, follow_edges })
}
