//! Baseline versions: the host engine alone, and complete restart on the
//! same stagnation criterion that triggers redistribution.
//!
//! A complete restart draws a fresh uniform population of the initial size,
//! evaluates it, and resets the engine's memory, archive and LPSR schedule.
//! Only the run-best value survives.

use crate::benchmarks::ObjectiveFunction;
use crate::error::Result;
use crate::record::RunRecord;
use crate::redistribution::RedistParams;
use crate::variants::EngineConfig;

pub use crate::driver::{run, Driver, RunMode, StepOutcome};

pub fn run_ov(engine: EngineConfig, objective: &ObjectiveFunction, max_evaluations: u64, seed: u64) -> Result<RunRecord> {
    run(RunMode::Original, engine, objective, RedistParams::default(), max_evaluations, seed)
}

pub fn run_crv(
    engine: EngineConfig,
    objective: &ObjectiveFunction,
    params: RedistParams,
    max_evaluations: u64,
    seed: u64,
) -> Result<RunRecord> {
    run(RunMode::CompleteRestart, engine, objective, params, max_evaluations, seed)
}
