//! Extraction of large complete minors from graphs with good edge expansion.
//!
//! The crate is organized bottom-up: [`graph`] holds the immutable graph and
//! its combinatorial primitives, [`spectral`] the expansion metrics,
//! [`walks`] the lazy random walk and covering-set machinery, [`engine`] the
//! partition-refinement minor finder and witness verification,
//! [`generators`] instance construction, and [`harness`] reproducible
//! experiment sweeps.

pub mod engine;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod rng;
pub mod spectral;
pub mod walks;

pub use graph::{build_graph, Graph, GraphError, Path, Vertex, VertexSet};
pub use rng::RngStream;
