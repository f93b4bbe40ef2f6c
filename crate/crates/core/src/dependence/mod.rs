//! Copy-aware voting: Depen and the Accu variants.

mod copy;
mod depen;

pub use copy::{comp_depen, DependenceMatrix, Overlap};
pub use depen::{
    initial_dependence, order_sources, run_depen_family, run_with_fixed_dependence, vote_count,
    DepenParams, DepenVariant, SourceOrder,
};
