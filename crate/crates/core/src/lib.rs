//! Expanding search: patterns, latency evaluation, and approximation
//! algorithms built on rooted tree oracles.

pub mod bench;
pub mod error;
pub mod euclidean;
pub mod hardness;
pub mod instance;
pub mod oracles;
pub mod pattern;
pub mod phases;
pub mod rational;
pub mod unweighted;
pub mod weighted;

pub use error::{EspError, Result};
pub use instance::{Edge, EdgeId, Instance, VertexId};
pub use pattern::{
    concat_patterns, total_latency, validate_pattern, LatencyReport, PatternError, SearchPattern,
    Violation,
};
