use std::sync::Arc;

use rand_distr::StandardNormal;

use super::{Landscape, ObjectiveFunction};
use crate::error::{Error, Result};
use crate::rng::RngStream;

const ORTHOGONALITY_TOL: f64 = 1e-9;

/// `x -> M (x - o)` with an optional orthogonal `M` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub shift: Vec<f64>,
    pub rotation: Option<Vec<f64>>,
}

impl Transform {
    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            rotation: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(&self.shift).map(|(a, o)| a - o).collect();
        match &self.rotation {
            None => z,
            Some(m) => {
                let n = z.len();
                (0..n)
                    .map(|r| m[r * n..(r + 1) * n].iter().zip(&z).map(|(a, b)| a * b).sum())
                    .collect()
            }
        }
    }

    /// Preimage of `z`: `o + Mᵀ z`.
    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let back: Vec<f64> = match &self.rotation {
            None => z.to_vec(),
            Some(m) => (0..n)
                .map(|c| (0..n).map(|r| m[r * n + c] * z[r]).sum())
                .collect(),
        };
        back.iter().zip(&self.shift).map(|(a, o)| a + o).collect()
    }

    fn validate(&self) -> Result<()> {
        let Some(m) = &self.rotation else {
            return Ok(());
        };
        let n = self.dim();
        if m.len() != n * n {
            return Err(Error::config(format!(
                "rotation has {} entries, expected {}",
                m.len(),
                n * n
            )));
        }
        for a in 0..n {
            for b in a..n {
                let dot: f64 = (0..n).map(|r| m[r * n + a] * m[r * n + b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot - want).abs() > ORTHOGONALITY_TOL {
                    return Err(Error::config(format!(
                        "rotation is not orthogonal: (MᵀM)[{a}][{b}] = {dot}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Orthonormalizes the rows of a seeded Gaussian matrix (modified Gram-Schmidt).
pub fn random_rotation(dim: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let mut m: Vec<f64> = (0..dim * dim).map(|_| rng.sample::<f64, _>(&StandardNormal)).collect();
        let mut ok = true;
        for r in 0..dim {
            for q in 0..r {
                let dot: f64 = (0..dim).map(|c| m[r * dim + c] * m[q * dim + c]).sum();
                for c in 0..dim {
                    m[r * dim + c] -= dot * m[q * dim + c];
                }
            }
            let norm = (0..dim).map(|c| m[r * dim + c].powi(2)).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for c in 0..dim {
                m[r * dim + c] /= norm;
            }
        }
        if ok {
            return m;
        }
    }
}

#[derive(Debug)]
struct ShiftedRotated {
    base: Arc<dyn Landscape>,
    transform: Transform,
}

impl Landscape for ShiftedRotated {
    fn value(&self, x: &[f64]) -> Result<f64, String> {
        self.base.value(&self.transform.apply(x))
    }
}

/// `x -> base(M (x - o))` on the base's box; the optimum moves to `o + Mᵀ x*`.
pub fn make_shifted_rotated(
    base: &ObjectiveFunction,
    transform: Transform,
    name: impl Into<String>,
) -> Result<ObjectiveFunction> {
    if transform.dim() != base.dim() {
        return Err(Error::config(format!(
            "transform has {} dimensions, base `{}` has {}",
            transform.dim(),
            base.name(),
            base.dim()
        )));
    }
    transform.validate()?;
    let x_star = base.x_star().map(|x| transform.invert(x));
    ObjectiveFunction::new(
        name,
        base.bounds().clone(),
        base.f_star(),
        x_star,
        Arc::new(ShiftedRotated {
            base: base.landscape().clone(),
            transform,
        }),
    )
}
