//! The generation loop shared by the three run versions.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchmarks::ObjectiveFunction;
use crate::error::{Error, Result};
use crate::population::{diversity, Population};
use crate::record::{Event, EventKind, Recorder, RunRecord};
use crate::redistribution::{
    changed_generation, lpsr_recovery_step, opposition_replacement, should_exit, update_stagnation,
    RedistParams, RedistState,
};
use crate::rng::RngStream;
use crate::variants::{evaluate_all, initial_population, EngineConfig, EngineState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RunMode {
    /// The host engine alone.
    #[serde(rename = "OV")]
    Original,
    /// Complete restart when stagnation is detected.
    #[serde(rename = "CRV")]
    CompleteRestart,
    /// Individuals redistribution when stagnation is detected.
    #[serde(rename = "IRV")]
    Redistribution,
}

impl RunMode {
    pub const ALL: [RunMode; 3] = [RunMode::Original, RunMode::CompleteRestart, RunMode::Redistribution];

    pub fn tag(self) -> &'static str {
        match self {
            RunMode::Original => "OV",
            RunMode::CompleteRestart => "CRV",
            RunMode::Redistribution => "IRV",
        }
    }
}

impl fmt::Display for RunMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::usage(format!("unknown run mode `{s}` (expected OV, CRV or IRV)")))
    }
}

/// What a single call to [`Driver::step`] did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// An ordinary engine generation.
    Generation { fes_delta: u64 },
    /// A changed-operator generation; no evaluations.
    Changed { np: usize },
    /// The last changed generation: replacement and one full evaluation.
    RedistributionEnd { fes_delta: u64, np: usize },
    /// A complete restart.
    Restart { fes_delta: u64, np: usize },
    /// The budget was already spent.
    Done,
}

/// One run in progress. Construct, [`step`](Self::step) until `Done`, then
/// [`finish`](Self::finish).
#[derive(Debug)]
pub struct Driver {
    mode: RunMode,
    engine: EngineState,
    objective: ObjectiveFunction,
    params: RedistParams,
    max_evaluations: u64,
    rng: RngStream,
    pop: Population,
    state: RedistState,
    recorder: Recorder,
    reset_lpsr_on_restart: bool,
    failure: Option<String>,
    started: Instant,
}

impl Driver {
    pub fn new(
        mode: RunMode,
        engine: EngineConfig,
        objective: &ObjectiveFunction,
        params: RedistParams,
        max_evaluations: u64,
        seed: u64,
    ) -> Result<Self> {
        if mode != RunMode::Original {
            params.validate()?;
        }
        let engine = EngineState::new(engine, max_evaluations)?;
        let mut objective = objective.fresh();
        let mut rng = RngStream::new(seed);
        let started = Instant::now();
        let mut recorder = Recorder::new(objective.f_star(), max_evaluations);
        let pop = initial_population(engine.initial_np(), &mut objective, &mut rng)?;
        recorder.observe(objective.evaluations(), pop.best().expect("non-empty").1);
        Ok(Self {
            mode,
            engine,
            objective,
            params,
            max_evaluations,
            rng,
            pop,
            state: RedistState::default(),
            recorder,
            reset_lpsr_on_restart: true,
            failure: None,
            started,
        })
    }

    /// Keep the LPSR schedule running across complete restarts instead of restarting it.
    pub fn keep_lpsr_on_restart(mut self) -> Self {
        self.reset_lpsr_on_restart = false;
        self
    }

    pub fn fes(&self) -> u64 {
        self.objective.evaluations()
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn state(&self) -> &RedistState {
        &self.state
    }

    pub fn engine(&self) -> &EngineState {
        &self.engine
    }

    pub fn events(&self) -> &[Event] {
        self.recorder.events()
    }

    pub fn run_best(&self) -> f64 {
        self.recorder.best()
    }

    pub fn is_done(&self) -> bool {
        self.failure.is_some() || self.fes() > self.max_evaluations
    }

    fn event(&mut self, kind: EventKind, div: f64) {
        let e = Event {
            fes: self.fes(),
            kind,
            diversity: div,
            np: self.pop.len(),
        };
        self.recorder.event(e);
    }

    fn current_diversity(&self) -> f64 {
        diversity(&self.pop).expect("non-empty population")
    }

    fn note_diversity(&mut self, div: f64) {
        if self.engine.has_lpsr() && self.state.recorded_np.is_none() && div < self.params.t_div {
            self.state.recorded_np = Some(self.pop.len());
        }
    }

    /// Enters redistribution (IRV) or restarts (CRV) as if stagnation had fired now.
    pub fn force_trigger(&mut self) -> Result<StepOutcome> {
        match self.mode {
            RunMode::Original => Err(Error::usage("the original version never triggers")),
            RunMode::Redistribution => {
                self.state.f_run_best = self.state.f_run_best.min(self.recorder.best());
                self.state.enter_redistribution();
                let div = self.current_diversity();
                self.event(EventKind::Trigger, div);
                Ok(StepOutcome::Changed { np: self.pop.len() })
            }
            RunMode::CompleteRestart => {
                let div = self.current_diversity();
                self.event(EventKind::Trigger, div);
                self.restart()
            }
        }
    }

    /// One pass of the main loop.
    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.is_done() {
            return Ok(StepOutcome::Done);
        }
        match self.try_step() {
            Err(e @ Error::Objective { .. }) => {
                self.failure = Some(e.to_string());
                Err(e)
            }
            other => other,
        }
    }

    fn try_step(&mut self) -> Result<StepOutcome> {
        if self.mode != RunMode::Original && !self.state.triggered() {
            let best = self.pop.best().expect("evaluated").1;
            self.state = update_stagnation(&self.state, best, &self.params)?;
            if self.state.triggered() {
                let div = self.current_diversity();
                self.event(EventKind::Trigger, div);
                if self.mode == RunMode::CompleteRestart {
                    return self.restart();
                }
            }
        }
        if self.state.triggered() {
            return self.changed_step();
        }
        let report = self.engine.step_generation(&mut self.pop, &mut self.objective, &mut self.rng)?;
        if self.mode == RunMode::Redistribution && self.engine.has_lpsr() && self.state.recorded_np.is_none() {
            let div = self.current_diversity();
            self.note_diversity(div);
        }
        self.recorder.observe(self.fes(), report.best_fitness);
        Ok(StepOutcome::Generation {
            fes_delta: report.fes_delta,
        })
    }

    fn restart(&mut self) -> Result<StepOutcome> {
        let before = self.fes();
        let np = self.engine.initial_np();
        self.pop = initial_population(np, &mut self.objective, &mut self.rng)?;
        if self.reset_lpsr_on_restart {
            self.engine.reset(self.fes());
        } else {
            let lpsr = self.engine.lpsr().copied();
            self.engine.reset(self.fes());
            if let Some(s) = lpsr {
                self.engine.rebase_lpsr(s.origin_fes, s.origin_np);
            }
        }
        self.state.leave_redistribution();
        self.state.g_n = 0;
        self.state.f_eb = f64::INFINITY;
        let div = self.current_diversity();
        self.event(EventKind::Restart, div);
        self.recorder.observe(self.fes(), self.pop.best().expect("evaluated").1);
        Ok(StepOutcome::Restart {
            fes_delta: self.fes() - before,
            np,
        })
    }

    fn changed_step(&mut self) -> Result<StepOutcome> {
        let div = self.current_diversity();
        self.note_diversity(div);
        self.state.g_c += 1;
        let trials = changed_generation(&self.pop, &mut self.rng)?;
        let mut next = if self.engine.has_lpsr() {
            lpsr_recovery_step(&self.pop, trials, self.state.recorded_np)?
        } else {
            trials
        };
        if !should_exit(div, self.state.g_c, &self.params) {
            self.pop = next;
            return Ok(StepOutcome::Changed { np: self.pop.len() });
        }

        let kind = if div > self.params.t_div {
            EventKind::ExitDiv
        } else {
            EventKind::ExitGen
        };
        self.event(kind, div);
        opposition_replacement(&mut next, self.params.r, &mut self.rng)?;
        let before = self.fes();
        let grown = next.len() > self.pop.len();
        self.pop = next;
        evaluate_all(&mut self.pop, &mut self.objective)?;
        let np = self.pop.len();
        self.state.leave_redistribution();
        if grown {
            self.engine.rebase_lpsr(self.fes(), np);
        }
        if self.params.reset_adaptive {
            let lpsr = self.engine.lpsr().copied();
            self.engine.reset(self.fes());
            if let Some(s) = lpsr {
                self.engine.rebase_lpsr(s.origin_fes, s.origin_np);
            }
        }
        let div_after = self.current_diversity();
        self.event(EventKind::Replace, div_after);
        self.recorder.observe(self.fes(), self.pop.best().expect("evaluated").1);
        Ok(StepOutcome::RedistributionEnd {
            fes_delta: self.fes() - before,
            np,
        })
    }

    /// Steps until the budget is spent or the objective fails.
    pub fn run_to_end(&mut self) -> Result<()> {
        loop {
            match self.step() {
                Ok(StepOutcome::Done) => return Ok(()),
                Ok(_) => {}
                Err(Error::Objective { .. }) => return Ok(()),
                Err(e) => return Err(e),
            }
        }
    }

    pub fn finish(self, function: &str, fingerprint: &str) -> RunRecord {
        let fes = self.fes();
        let f_star = self.objective.f_star();
        let seed = self.rng.seed();
        let wall = self.started.elapsed().as_secs_f64();
        let (samples, events, best) = self.recorder.finish(fes);
        RunRecord {
            function: function.to_string(),
            mode: self.mode.tag().to_string(),
            seed,
            fingerprint: fingerprint.to_string(),
            events,
            samples,
            final_best_error: best - f_star,
            best_fitness: best,
            evaluations: fes,
            failure: self.failure,
            wall_time_secs: wall,
        }
    }
}

/// Runs one complete version of the algorithm.
pub fn run(
    mode: RunMode,
    engine: EngineConfig,
    objective: &ObjectiveFunction,
    params: RedistParams,
    max_evaluations: u64,
    seed: u64,
) -> Result<RunRecord> {
    let mut driver = Driver::new(mode, engine, objective, params, max_evaluations, seed)?;
    driver.run_to_end()?;
    Ok(driver.finish(objective.name(), ""))
}
