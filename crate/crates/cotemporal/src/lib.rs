//! File formats, IO and the batch commands around `cotemporal-core`.

pub mod commands;
pub mod formats;
pub mod io;
pub mod pipeline;
