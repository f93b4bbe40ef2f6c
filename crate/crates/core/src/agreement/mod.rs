//! Majority voting and the iterative agreement-based methods.

mod cosine;
mod estimates;
mod normalize;
mod truthfinder;
mod voting;

pub use cosine::{run_cosine, CosineParams};
pub use estimates::{
    run_2estimates, run_3estimates, EstimatesParams, Polarity, THREE_ESTIMATES_POLARITY,
    TWO_ESTIMATES_POLARITY,
};
pub use normalize::normalize;
pub use truthfinder::{run_truthfinder, TruthFinderParams};
pub use voting::run_voting;
