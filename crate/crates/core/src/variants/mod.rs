//! DE engines: trial-vector strategies, success-history adaptation with an
//! archive, and linear population size reduction (LPSR).

mod lpsr;
mod memory;
mod operators;

use serde::{Deserialize, Serialize};

pub use lpsr::{lpsr_target_size, LpsrSchedule};
pub use memory::{AdaptationMemory, Success};
pub use operators::{
    crossover_binomial, crossover_binomial_unforced, crossover_exponential,
    current_to_pbest_mutant, difference_mutant, mutate_current_to_pbest, mutate_rand1,
    mutate_rand1_random_base, pbest_pool, select_greedy, Mutant,
};

use crate::benchmarks::ObjectiveFunction;
use crate::error::{Error, Result};
use crate::population::Population;
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `x_r0 + F (x_r1 - x_r2)`.
    Rand1,
    /// `x_i + F (x_pbest - x_i) + F (x_r1 - x̃_r2)`, `x̃_r2` possibly from the archive.
    CurrentToPbest1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    Binomial,
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub strategy: Strategy,
    pub crossover: CrossoverKind,
    /// Scale factor; ignored when `adaptive` is set.
    pub f: f64,
    /// Crossover rate; ignored when `adaptive` is set.
    pub cr: f64,
    pub adaptive: bool,
    /// Greediness of `current-to-pbest`.
    pub p: f64,
    pub archive_cap: usize,
    pub memory_size: usize,
    /// Initial population size.
    pub np: usize,
    /// Final population size under LPSR; `None` keeps the size fixed.
    pub np_min: Option<usize>,
}

impl EngineConfig {
    pub const DEFAULT_MEMORY_SIZE: usize = 6;
    pub const DEFAULT_P: f64 = 0.11;
    pub const ARCHIVE_RATE: f64 = 2.6;

    /// `rand/1/bin` with F = 0.5, CR = 0.9.
    pub fn classic(np: usize) -> Self {
        Self {
            strategy: Strategy::Rand1,
            crossover: CrossoverKind::Binomial,
            f: 0.5,
            cr: 0.9,
            adaptive: false,
            p: Self::DEFAULT_P,
            archive_cap: 0,
            memory_size: Self::DEFAULT_MEMORY_SIZE,
            np,
            np_min: None,
        }
    }

    /// `current-to-pbest/1/bin` with success-history memory and an archive.
    pub fn adaptive(np: usize) -> Self {
        Self {
            strategy: Strategy::CurrentToPbest1,
            adaptive: true,
            archive_cap: (Self::ARCHIVE_RATE * np as f64).round() as usize,
            ..Self::classic(np)
        }
    }

    pub fn with_lpsr(mut self, np_min: usize) -> Self {
        self.np_min = Some(np_min);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.np < 4 {
            problems.push(format!("np = {} (need at least 4)", self.np));
        }
        if !(0.0..=1.2).contains(&self.f) {
            problems.push(format!("f = {} outside [0, 1.2]", self.f));
        }
        if !(0.0..=1.0).contains(&self.cr) {
            problems.push(format!("cr = {} outside [0, 1]", self.cr));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            problems.push(format!("p = {} outside (0, 1]", self.p));
        }
        if self.memory_size == 0 {
            problems.push("memory_size must be positive".into());
        }
        if let Some(min) = self.np_min {
            if min < 4 {
                problems.push(format!("np_min = {min} (need at least 4)"));
            }
            if min > self.np {
                problems.push(format!("np_min = {min} exceeds np = {}", self.np));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::config(problems.join("; ")))
        }
    }
}

/// What one generation did.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub best_fitness: f64,
    pub fes_delta: u64,
    pub successes: Vec<Success>,
    /// Members dropped by LPSR at the end of the generation.
    pub removed: usize,
}

/// A configured engine together with its adaptive state.
#[derive(Debug, Clone)]
pub struct EngineState {
    config: EngineConfig,
    memory: AdaptationMemory,
    lpsr: Option<LpsrSchedule>,
}

impl EngineState {
    pub fn new(config: EngineConfig, max_evaluations: u64) -> Result<Self> {
        config.validate()?;
        let memory = AdaptationMemory::new(config.memory_size, config.archive_cap);
        let lpsr = config.np_min.map(|np_min| LpsrSchedule {
            origin_fes: 0,
            origin_np: config.np,
            np_min,
            max_evaluations,
        });
        Ok(Self {
            config,
            memory,
            lpsr,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn memory(&self) -> &AdaptationMemory {
        &self.memory
    }

    pub fn lpsr(&self) -> Option<&LpsrSchedule> {
        self.lpsr.as_ref()
    }

    pub fn has_lpsr(&self) -> bool {
        self.lpsr.is_some()
    }

    pub fn initial_np(&self) -> usize {
        self.config.np
    }

    /// Back to the freshly constructed state, with the LPSR schedule starting at `fes`.
    pub fn reset(&mut self, fes: u64) {
        self.memory = AdaptationMemory::new(self.config.memory_size, self.config.archive_cap);
        if let Some(s) = &mut self.lpsr {
            s.origin_fes = fes;
            s.origin_np = self.config.np;
        }
    }

    /// Restarts the linear reduction from population size `np` at `fes`.
    pub fn rebase_lpsr(&mut self, fes: u64, np: usize) {
        if let Some(s) = &mut self.lpsr {
            s.origin_fes = fes;
            s.origin_np = np;
        }
    }

    fn trial(&self, pop: &Population, i: usize, rng: &mut RngStream) -> Result<(Vec<f64>, f64, f64)> {
        let (f, cr) = if self.config.adaptive {
            self.memory.sample_parameters(rng)
        } else {
            (self.config.f, self.config.cr)
        };
        let mutant = match self.config.strategy {
            Strategy::Rand1 => mutate_rand1_random_base(pop, i, f, rng)?,
            Strategy::CurrentToPbest1 => {
                mutate_current_to_pbest(pop, self.memory.archive(), i, f, self.config.p, rng)?
            }
        };
        let trial = match self.config.crossover {
            CrossoverKind::Binomial => crossover_binomial(pop.genome(i), &mutant.vector, cr, rng),
            CrossoverKind::Exponential => crossover_exponential(pop.genome(i), &mutant.vector, cr, rng),
        };
        Ok((trial, f, cr))
    }

    /// One generation: NP trials, NP evaluations, per-slot greedy selection,
    /// memory/archive update, then LPSR truncation.
    pub fn step_generation(
        &mut self,
        pop: &mut Population,
        objective: &mut ObjectiveFunction,
        rng: &mut RngStream,
    ) -> Result<GenerationReport> {
        if !pop.is_evaluated() {
            return Err(Error::usage("step_generation needs an evaluated population"));
        }
        let np = pop.len();
        let trials = (0..np)
            .map(|i| self.trial(pop, i, rng))
            .collect::<Result<Vec<_>>>()?;

        let mut successes = Vec::new();
        for (i, (genome, f, cr)) in trials.into_iter().enumerate() {
            let value = objective.evaluate(&genome)?;
            let target_fitness = pop.members[i].fitness.expect("evaluated");
            if value <= target_fitness {
                if value < target_fitness {
                    successes.push(Success {
                        f,
                        cr,
                        improvement: target_fitness - value,
                    });
                    let parent = std::mem::replace(&mut pop.members[i].genome, genome);
                    self.memory.archive_insert(parent, rng);
                } else {
                    pop.members[i].genome = genome;
                }
                pop.members[i].fitness = Some(value);
            }
        }
        if self.config.adaptive {
            self.memory.update(&successes);
        }
        let removed = match self.lpsr {
            Some(schedule) => truncate_worst(pop, schedule.target(objective.evaluations())),
            None => 0,
        };
        pop.generation += 1;
        Ok(GenerationReport {
            best_fitness: pop.best().expect("non-empty").1,
            fes_delta: np as u64,
            successes,
            removed,
        })
    }
}

/// Drops the worst members until `target` remain (higher slot first among
/// equal fitness); survivors keep their relative order.
pub fn truncate_worst(pop: &mut Population, target: usize) -> usize {
    let n = pop.len();
    if target >= n {
        return 0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (pop.members[a].fitness.unwrap_or(f64::INFINITY), pop.members[b].fitness.unwrap_or(f64::INFINITY));
        fb.total_cmp(&fa).then(b.cmp(&a))
    });
    let mut drop = vec![false; n];
    for &k in &order[..n - target] {
        drop[k] = true;
    }
    let mut k = 0;
    pop.members.retain(|_| {
        let keep = !drop[k];
        k += 1;
        keep
    });
    n - target
}

/// Evaluates every member, `pop.len()` evaluations.
pub fn evaluate_all(pop: &mut Population, objective: &mut ObjectiveFunction) -> Result<()> {
    for m in &mut pop.members {
        m.fitness = Some(objective.evaluate(&m.genome)?);
    }
    Ok(())
}

/// A random population of `np` inside the objective's box, evaluated.
pub fn initial_population(np: usize, objective: &mut ObjectiveFunction, rng: &mut RngStream) -> Result<Population> {
    let mut pop = Population::random(np, objective.bounds().clone(), rng)?;
    evaluate_all(&mut pop, objective)?;
    Ok(pop)
}
