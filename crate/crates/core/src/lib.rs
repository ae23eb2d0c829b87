//! Constructive machinery for embedding 2-CSP instances into cubic
//! bipartite expanders: expander construction with Cheeger certificates,
//! congestion-aware routing, connected embeddings of bounded depth, and the
//! satisfiability- and count-preserving instance compiler.

pub mod compile;
pub mod config;
pub mod csp;
pub mod embedding;
pub mod expander;
pub mod families;
pub mod graph;
pub mod routing;

pub use compile::{compile, pipeline, CompiledInstance};
pub use config::Config;
pub use csp::{Assignment, CspInstance, Relation};
pub use graph::{Bipartition, Graph, Multigraph, Path};
