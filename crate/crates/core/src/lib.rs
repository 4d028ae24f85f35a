//! Walk-based graph embeddings with Nyström-approximated kernels.
//!
//! Nodes are embedded by summing Nyström projections of the walks that leave
//! them, once over attribute sequences and once over anonymous walks; graphs
//! are embedded by summing their nodes. The `oracle` module holds the exact
//! kernels those embeddings approximate.

pub mod classify;
pub mod export;
pub mod graph;
pub mod landmarks;
pub mod linalg;
pub mod model;
pub mod nystrom;
pub mod oracle;
pub mod properties;
pub mod rng;
pub mod synthgen;
pub mod tu;
pub mod walks;

pub use graph::{AttributeKind, Graph, GraphCollection, GraphError};
pub use model::{BranchSelection, EmbeddingConfig, EmbeddingMatrix, EmbeddingModel};
pub use nystrom::{FeatureError, LandmarkSet};
