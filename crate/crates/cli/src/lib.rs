//! File-format helpers shared between the `pathprox` binary and its
//! integration tests: CSV dataset ingestion with min-max scaling sidecars,
//! and the flat binary weight format.

pub mod dataset;
pub mod weights;
