use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use super::Landscape;
use crate::error::Error;

/// Location of the Schwefel minimum in each coordinate.
const SCHWEFEL_ARGMIN: f64 = 420.968_746_359_982;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseFunction {
    Sphere,
    Rosenbrock,
    Rastrigin,
    Ackley,
    Griewank,
    Schwefel,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 6] = [
        BaseFunction::Sphere,
        BaseFunction::Rosenbrock,
        BaseFunction::Rastrigin,
        BaseFunction::Ackley,
        BaseFunction::Griewank,
        BaseFunction::Schwefel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Schwefel => "schwefel",
        }
    }

    pub fn canonical_half_width(self) -> f64 {
        match self {
            BaseFunction::Schwefel => 500.0,
            _ => 100.0,
        }
    }

    /// Global minimizer; every base function has minimum value 0.
    pub fn optimum(self, dim: usize) -> Vec<f64> {
        match self {
            BaseFunction::Rosenbrock => vec![1.0; dim],
            BaseFunction::Schwefel => vec![SCHWEFEL_ARGMIN; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn eval(self, x: &[f64]) -> f64 {
        let n = x.len() as f64;
        match self {
            BaseFunction::Sphere => x.iter().map(|v| v * v).sum(),
            BaseFunction::Rosenbrock => x
                .windows(2)
                .map(|w| 100.0 * (w[0] * w[0] - w[1]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            BaseFunction::Rastrigin => {
                10.0 * n + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            BaseFunction::Ackley => {
                let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
                let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
            }
            BaseFunction::Griewank => {
                let s = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
                let p = x
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
                    .product::<f64>();
                s - p + 1.0
            }
            BaseFunction::Schwefel => {
                let offset = SCHWEFEL_ARGMIN * SCHWEFEL_ARGMIN.sqrt().sin();
                x.iter().map(|v| offset - v * v.abs().sqrt().sin()).sum()
            }
        }
    }
}

impl Landscape for BaseFunction {
    fn value(&self, x: &[f64]) -> Result<f64, String> {
        Ok(self.eval(x))
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseFunction::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown base function `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimum_values_are_zero() {
        for b in BaseFunction::ALL {
            for dim in [1, 2, 10, 30] {
                let v = b.eval(&b.optimum(dim));
                assert!(v.abs() <= 1e-9, "{b} in {dim}-D: {v}");
            }
        }
    }

    #[test]
    fn rastrigin_hand_value() {
        assert!((BaseFunction::Rastrigin.eval(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert_eq!(BaseFunction::Sphere.eval(&[0.0; 4]), 0.0);
    }

    #[test]
    fn round_trip_names() {
        for b in BaseFunction::ALL {
            assert_eq!(b.name().parse::<BaseFunction>().unwrap(), b);
        }
        assert!("nope".parse::<BaseFunction>().is_err());
    }
}
