//! Problem-domain types and the exact regret oracle.

mod comparator;
pub(crate) mod distribution;
mod loss;
mod trace;

pub use comparator::{
    dynamic_comparator, dynamic_comparator_prefix, static_comparator, ComparatorPath,
};
pub use distribution::{ClippedDistribution, ExpertDistribution};
pub use loss::{LossMatrix, LossVector};
pub use trace::{regret_finalize, RegretTrace, TraceRow};
