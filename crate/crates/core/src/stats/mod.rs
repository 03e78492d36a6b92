//! Rank-sum comparisons and result aggregation.

mod summary;
mod wilcoxon;

pub use summary::*;
pub use wilcoxon::*;
