//! Topic and latent user community detection over annotated post streams.
//!
//! Topics are clusters of semantic concepts whose per-interval occurrence
//! signals are correlated without time lag. Latent communities are clusters
//! of users whose per-topic, per-interval contribution matrices are
//! correlated the same way. Both stages share one weighted-graph and Louvain
//! implementation.
//!
//! The crate is `no_std` (with `alloc`). Enabling the `std` feature turns on
//! rayon-parallel pairwise correlation and an FFT-backed power spectrum;
//! results are identical either way, up to floating-point rounding of the
//! spectrum.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod eval;
pub mod filter;
pub mod graph;
pub mod ingest;
pub mod partition;
pub mod seed;
pub mod signal;
pub mod spectrum;
pub mod synth;
pub mod topics;
pub mod users;

pub use error::{Error, Result};
pub use graph::{LouvainConfig, WeightedGraph};
pub use ingest::{BucketedCorpus, FollowEdgeList, Interval, PostRecord, TimeGrid};
pub use partition::Partition;
pub use signal::{AllTweetsSignal, ConceptSignal};
