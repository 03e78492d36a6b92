//! Differential evolution with individuals redistribution.
//!
//! The crate bundles three things:
//!
//! * DE engines ([`variants`]): classic `rand/1` and an adaptive
//!   `current-to-pbest/1` engine with success-history memory, an external
//!   archive and linear population size reduction.
//! * Run drivers: the original loop and a complete-restart baseline
//!   ([`restart`]), and the redistribution controller ([`redistribution`]),
//!   which, once progress stalls, diversifies the population with
//!   fitness-free operators and then maps part of it to opposite points.
//! * A desk-scale benchmark harness ([`benchmarks`], [`stats`],
//!   [`harness`]) that runs the three versions side by side and compares
//!   them with the Wilcoxon rank-sum test.

pub mod benchmarks;
mod driver;
pub mod error;
pub mod harness;
pub mod population;
pub mod record;
pub mod redistribution;
pub mod restart;
pub mod rng;
pub mod selftest;
pub mod stats;
pub mod variants;

pub use benchmarks::{ObjectiveFunction, Suite};
pub use error::{Error, Result};
pub use population::{Bounds, Individual, Population};
pub use record::{Event, EventKind, RunRecord};
pub use redistribution::{RedistParams, RedistState};
pub use restart::{Driver, RunMode, StepOutcome};
pub use rng::RngStream;
pub use variants::{EngineConfig, EngineState};
