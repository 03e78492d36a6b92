//! Per-run traces: best-error samples and the event log.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// Stagnation criterion fired.
    Trigger,
    /// Changed operators stopped because diversity passed the threshold.
    ExitDiv,
    /// Changed operators stopped on the generation cap.
    ExitGen,
    /// Opposition replacement applied and the population re-evaluated.
    Replace,
    /// Complete restart.
    Restart,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Trigger => "TRIGGER",
            EventKind::ExitDiv => "EXIT_DIV",
            EventKind::ExitGen => "EXIT_GEN",
            EventKind::Replace => "REPLACE",
            EventKind::Restart => "RESTART",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        [
            EventKind::Trigger,
            EventKind::ExitDiv,
            EventKind::ExitGen,
            EventKind::Replace,
            EventKind::Restart,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
        .ok_or_else(|| Error::usage(format!("unknown event `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub fes: u64,
    pub kind: EventKind,
    pub diversity: f64,
    pub np: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub fes: u64,
    pub best_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub function: String,
    pub mode: String,
    pub seed: u64,
    pub fingerprint: String,
    pub events: Vec<Event>,
    /// Sorted by FES; the error of the best fitness seen so far in the run.
    pub samples: Vec<Sample>,
    pub final_best_error: f64,
    pub best_fitness: f64,
    pub evaluations: u64,
    /// Set when the objective failed and the run was cut short.
    pub failure: Option<String>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl RunRecord {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Best error at `fes`: the last sample at or before it.
    pub fn best_error_at(&self, fes: u64) -> Option<f64> {
        self.samples
            .iter()
            .take_while(|s| s.fes <= fes)
            .last()
            .map(|s| s.best_error)
    }
}

/// Samples on improvement at generation boundaries, plus one sample each
/// time FES passes a multiple of `MFES / 100`.
#[derive(Debug, Clone)]
pub(crate) struct Recorder {
    f_star: f64,
    step: u64,
    next_checkpoint: u64,
    best: f64,
    samples: Vec<Sample>,
    events: Vec<Event>,
}

impl Recorder {
    pub const CHECKPOINTS: u64 = 100;

    pub fn new(f_star: f64, mfes: u64) -> Self {
        let step = (mfes / Self::CHECKPOINTS).max(1);
        Self {
            f_star,
            step,
            next_checkpoint: step,
            best: f64::INFINITY,
            samples: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    fn push(&mut self, fes: u64) {
        let s = Sample {
            fes,
            best_error: self.best - self.f_star,
        };
        match self.samples.last_mut() {
            Some(last) if last.fes == fes => *last = s,
            _ => self.samples.push(s),
        }
    }

    pub fn observe(&mut self, fes: u64, current_best: f64) {
        let improved = current_best < self.best;
        if improved {
            self.best = current_best;
            self.push(fes);
        }
        if fes >= self.next_checkpoint {
            self.push(fes);
            while self.next_checkpoint <= fes {
                self.next_checkpoint += self.step;
            }
        }
    }

    pub fn event(&mut self, event: Event) {
        self.events.push(event);
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn finish(mut self, fes: u64) -> (Vec<Sample>, Vec<Event>, f64) {
        if self.best.is_finite() && self.samples.last().is_none_or(|s| s.fes < fes) {
            self.push(fes);
        }
        (self.samples, self.events, self.best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_on_improvement_and_checkpoints() {
        let mut r = Recorder::new(1.0, 5000);
        r.observe(10, 5.0);
        r.observe(20, 6.0);
        r.observe(30, 4.0);
        r.observe(40, 4.0);
        r.observe(50, 4.0);
        r.observe(55, 4.0);
        let (samples, _, best) = r.finish(60);
        let fes: Vec<u64> = samples.iter().map(|s| s.fes).collect();
        assert_eq!(fes, vec![10, 30, 50, 60]);
        assert_eq!(best, 4.0);
        assert_eq!(samples[0].best_error, 4.0);
        assert!(samples.windows(2).all(|w| w[1].best_error <= w[0].best_error));
    }

    #[test]
    fn event_names_round_trip() {
        for k in ["TRIGGER", "EXIT_DIV", "EXIT_GEN", "REPLACE", "RESTART"] {
            assert_eq!(k.parse::<EventKind>().unwrap().as_str(), k);
        }
    }
}
