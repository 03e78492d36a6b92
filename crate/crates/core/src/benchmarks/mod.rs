//! Objective functions: textbook base functions, shift/rotate and
//! composition builders, and a seeded suite with a manifest format.

mod composition;
mod functions;
mod suite;
mod transform;

use std::fmt;
use std::sync::Arc;

pub use composition::{make_composition, CompositionComponent};
pub use functions::BaseFunction;
pub use suite::{manifest_to_string, parse_manifest, write_manifest, ManifestRecord, Suite, SuiteEntry};
pub use transform::{make_shifted_rotated, random_rotation, Transform};

use crate::error::{Error, Result};
use crate::population::Bounds;

/// The pure part of an objective: genome in, value out.
///
/// An `Err` carries a message describing why the value could not be
/// produced; it aborts the run that requested it.
pub trait Landscape: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> Result<f64, String>;
}

/// A named, bounded landscape with a known optimum and an evaluation counter.
///
/// The counter belongs to whichever run owns this value. [`fresh`](Self::fresh)
/// gives an independent copy with the counter at zero.
#[derive(Clone)]
pub struct ObjectiveFunction {
    name: String,
    bounds: Bounds,
    f_star: f64,
    x_star: Option<Vec<f64>>,
    landscape: Arc<dyn Landscape>,
    evaluations: u64,
}

impl fmt::Debug for ObjectiveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveFunction")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("f_star", &self.f_star)
            .field("evaluations", &self.evaluations)
            .finish()
    }
}

impl ObjectiveFunction {
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        f_star: f64,
        x_star: Option<Vec<f64>>,
        landscape: Arc<dyn Landscape>,
    ) -> Result<Self> {
        if let Some(x) = &x_star {
            if x.len() != bounds.dim() {
                return Err(Error::config("optimum location has the wrong dimension"));
            }
        }
        Ok(Self {
            name: name.into(),
            bounds,
            f_star,
            x_star,
            landscape,
            evaluations: 0,
        })
    }

    /// One of the textbook functions on its canonical box.
    pub fn base(function: BaseFunction, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::usage("dimension must be positive"));
        }
        let half = function.canonical_half_width();
        Self::new(
            function.name(),
            Bounds::uniform(dim, -half, half)?,
            0.0,
            Some(function.optimum(dim)),
            Arc::new(function),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn landscape(&self) -> &Arc<dyn Landscape> {
        &self.landscape
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn fresh(&self) -> Self {
        Self {
            evaluations: 0,
            ..self.clone()
        }
    }

    /// Evaluates `x` and counts it, whether or not it succeeds.
    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.evaluations += 1;
        if x.len() != self.dim() {
            return Err(Error::usage(format!(
                "`{}` expects {} dimensions, got {}",
                self.name,
                self.dim(),
                x.len()
            )));
        }
        let value = self.landscape.value(x).map_err(|message| Error::Objective {
            name: self.name.clone(),
            message,
        })?;
        if !value.is_finite() {
            return Err(Error::Objective {
                name: self.name.clone(),
                message: format!("non-finite value {value}"),
            });
        }
        Ok(value)
    }

    /// Uncounted evaluation, for checks and reporting.
    pub fn peek(&self, x: &[f64]) -> Result<f64> {
        let mut probe = self.fresh();
        probe.evaluate(x)
    }
}

/// Adapter turning a closure into a [`Landscape`].
pub struct FnLandscape<F>(pub F);

impl<F> fmt::Debug for FnLandscape<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnLandscape")
    }
}

impl<F> Landscape for FnLandscape<F>
where
    F: Fn(&[f64]) -> Result<f64, String> + Send + Sync,
{
    fn value(&self, x: &[f64]) -> Result<f64, String> {
        (self.0)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_counts_every_call() {
        let mut f = ObjectiveFunction::base(BaseFunction::Sphere, 3).unwrap();
        for k in 1..=5 {
            f.evaluate(&[1.0, 2.0, 3.0]).unwrap();
            assert_eq!(f.evaluations(), k);
        }
        assert_eq!(f.fresh().evaluations(), 0);
        f.peek(&[0.0; 3]).unwrap();
        assert_eq!(f.evaluations(), 5);
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let mut f = ObjectiveFunction::base(BaseFunction::Rastrigin, 3).unwrap();
        assert!(matches!(f.evaluate(&[0.0, 0.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn failing_landscape_reports_objective_error() {
        let land = FnLandscape(|x: &[f64]| {
            if x[0] > 0.0 {
                Err("boom".to_string())
            } else {
                Ok(f64::NAN)
            }
        });
        let mut f = ObjectiveFunction::new("bad", Bounds::uniform(1, -1.0, 1.0).unwrap(), 0.0, None, Arc::new(land)).unwrap();
        assert!(matches!(f.evaluate(&[0.5]), Err(Error::Objective { .. })));
        assert!(matches!(f.evaluate(&[-0.5]), Err(Error::Objective { .. })));
    }
}
