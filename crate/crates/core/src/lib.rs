//! Truth discovery over conflicting multi-source claims.
//!
//! Thirteen methods share one data model ([`IndexedDataset`]) and one run
//! interface ([`Algorithm`]). The [`generator`] builds seeded synthetic
//! scenarios and the [`harness`] runs algorithm × dataset matrices.

pub mod agreement;
pub mod algorithm;
pub mod convergence;
pub mod dependence;
pub mod error;
pub mod generator;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod probabilistic;
pub mod similarity;
pub mod state;

pub use algorithm::{Algorithm, AlgorithmId, Outcome};
pub use convergence::{converged, cosine_similarity, DEFAULT_DELTA, MAX_ITERATIONS};
pub use error::{Error, Result};
pub use metrics::{compute_metrics, GroundTruth, MetricScope, MetricsReport};
pub use model::{canonical_value, index_dataset, Claim, IndexedDataset};
pub use similarity::Similarity;
pub use state::{select_true_values, Selection, SelectionMode, TrustState};
