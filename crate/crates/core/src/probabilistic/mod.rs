//! Generative-model methods: LTM, MLE and the LCA pair.

pub mod lca;
pub mod ltm;
pub mod mle;

pub use lca::{run_guess_lca, run_simple_lca, LcaParams};
pub use ltm::{run_ltm, run_ltm_repeated, LtmParams, LtmSampler};
pub use mle::{run_mle, MleParams, MAX_DIRECT_SOURCES};
