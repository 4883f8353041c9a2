//! Proximity-graph approximate nearest neighbor index whose per-node pruning
//! strength is calibrated from estimated Local Intrinsic Dimensionality (LID),
//! with a query-time beam budget that grows with the LID seen around the query.
//!
//! The crate is organized bottom-up:
//!
//! - [`dataset`]: `.fvecs` / `.bvecs` / `.ivecs` IO and exact ground truth
//! - [`synthetic`]: seeded generators with a controlled intrinsic dimension
//! - [`geometry`]: brute-force L2 kNN, EMST and RNG oracles
//! - [`lid`]: MLE LID estimation, population statistics and the α mapping
//! - [`graph`]: random init, adaptive occlusion pruning and iterative refinement
//! - [`search`]: static and LID-adaptive beam search with instrumentation
//! - [`storage`]: block-aligned index files and the disk-resident read path
//! - [`experiments`]: recall/QPS sweeps, connectivity verification and the
//!   routing-difficulty measurement

pub mod dataset;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod lid;
pub mod search;
pub mod storage;
pub mod synthetic;

pub use dataset::{ElementKind, GroundTruth, VectorDataset};
pub use error::{Error, Result};
pub use graph::{BuildMode, BuildParams, Graph};
pub use lid::{LidProfile, MappedAlphas, MappingConfig};
pub use search::{SearchParams, SearchResult, SearchStats};
