//! Overlapping community detection in two steps: a disjoint clustering
//! (Louvain or spectral), followed by threshold-gated membership expansion
//! driven by θ-modularity gains or by cosine similarity to cluster centers.
//!
//! Covers are scored with overlapping modularity and overlapping NMI.

pub mod benchmark;
pub mod cover;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod overlap;
pub mod partition;
pub mod walks;

pub use cover::{load_cover, read_cover, write_cover, Cover, Partition};
pub use error::{Error, Result};
pub use graph::{load_edge_list, strongly_connected, Graph, IdMap};
pub use metrics::{onmi, overlap_modularity_avg, overlap_modularity_q0, theta_modularity, ThetaVariant};
pub use overlap::{Algorithm, OverlapOutcome, OverlapParams};
pub use partition::{louvain, modularity, spectral_partition, ClusteringConfig};
pub use walks::{Embedding, StationaryDistribution, StationaryOptions};
