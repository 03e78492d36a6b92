use std::sync::Arc;

use super::{Landscape, ObjectiveFunction};
use crate::error::{Error, Result};

/// Below this distance to a component optimum, that component takes all the weight.
const SINGULAR_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CompositionComponent {
    pub function: ObjectiveFunction,
    pub sigma: f64,
    pub bias: f64,
}

#[derive(Debug)]
struct Part {
    landscape: Arc<dyn Landscape>,
    center: Vec<f64>,
    sigma: f64,
    bias: f64,
}

#[derive(Debug)]
struct Composition {
    parts: Vec<Part>,
}

impl Composition {
    fn weights(&self, x: &[f64]) -> Vec<f64> {
        let dim = x.len() as f64;
        let dist2: Vec<f64> = self
            .parts
            .iter()
            .map(|p| p.center.iter().zip(x).map(|(o, v)| (v - o).powi(2)).sum())
            .collect();
        if let Some(k) = dist2.iter().position(|d| d.sqrt() < SINGULAR_DISTANCE) {
            let mut w = vec![0.0; self.parts.len()];
            w[k] = 1.0;
            return w;
        }
        let raw: Vec<f64> = self
            .parts
            .iter()
            .zip(&dist2)
            .map(|(p, &d2)| (-d2 / (2.0 * dim * p.sigma * p.sigma)).exp() / d2.sqrt())
            .collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter().map(|w| w / total).collect()
        } else {
            // every weight underflowed: far from all optima
            vec![1.0 / raw.len() as f64; raw.len()]
        }
    }
}

impl Landscape for Composition {
    fn value(&self, x: &[f64]) -> Result<f64, String> {
        let w = self.weights(x);
        let mut total = 0.0;
        for (p, wi) in self.parts.iter().zip(w) {
            if wi != 0.0 {
                total += wi * (p.landscape.value(x)? + p.bias);
            }
        }
        Ok(total)
    }
}

/// Distance-weighted blend of components, each centered on its own optimum.
///
/// The weight of component `i` is proportional to
/// `exp(-|x - o_i|² / (2 n σ_i²)) / |x - o_i|`. The optimum of the blend is
/// the component optimum with the lowest `f_i* + bias_i`.
pub fn make_composition(
    components: Vec<CompositionComponent>,
    name: impl Into<String>,
) -> Result<ObjectiveFunction> {
    if components.len() < 2 {
        return Err(Error::config("a composition needs at least two components"));
    }
    let dim = components[0].function.dim();
    let mut parts = Vec::with_capacity(components.len());
    for (i, c) in components.iter().enumerate() {
        if c.function.dim() != dim {
            return Err(Error::config(format!(
                "component {i} has {} dimensions, expected {dim}",
                c.function.dim()
            )));
        }
        if !(c.sigma > 0.0) {
            return Err(Error::config(format!("component {i}: sigma must be positive")));
        }
        let center = c
            .function
            .x_star()
            .ok_or_else(|| Error::config(format!("component {i} has no known optimum")))?
            .to_vec();
        parts.push(Part {
            landscape: c.function.landscape().clone(),
            center,
            sigma: c.sigma,
            bias: c.bias,
        });
    }
    let best = components
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.function.f_star() + a.1.bias).total_cmp(&(b.1.function.f_star() + b.1.bias))
        })
        .map(|(i, _)| i)
        .expect("non-empty");
    let f_star = components[best].function.f_star() + components[best].bias;
    let x_star = parts[best].center.clone();
    ObjectiveFunction::new(
        name,
        components[0].function.bounds().clone(),
        f_star,
        Some(x_star),
        Arc::new(Composition { parts }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_shifted_rotated, BaseFunction, Transform};

    fn shifted(base: BaseFunction, shift: Vec<f64>) -> ObjectiveFunction {
        let b = ObjectiveFunction::base(base, shift.len()).unwrap();
        make_shifted_rotated(&b, Transform { shift, rotation: None }, base.name()).unwrap()
    }

    #[test]
    fn dominant_component_at_its_optimum() {
        let f = make_composition(
            vec![
                CompositionComponent { function: shifted(BaseFunction::Sphere, vec![1.0, 2.0]), sigma: 10.0, bias: 0.0 },
                CompositionComponent { function: shifted(BaseFunction::Rastrigin, vec![-5.0, 5.0]), sigma: 20.0, bias: 100.0 },
            ],
            "c",
        )
        .unwrap();
        assert_eq!(f.peek(&[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(f.f_star(), 0.0);
        assert_eq!(f.x_star().unwrap(), &[1.0, 2.0]);
    }

    #[test]
    fn identical_components_add_bias() {
        let g = shifted(BaseFunction::Ackley, vec![3.0, -4.0, 1.0]);
        let f = make_composition(
            vec![
                CompositionComponent { function: g.clone(), sigma: 10.0, bias: 7.0 },
                CompositionComponent { function: g.clone(), sigma: 10.0, bias: 7.0 },
            ],
            "c",
        )
        .unwrap();
        for x in [[0.0, 0.0, 0.0], [10.0, -20.0, 30.0], [3.0, -4.0, 1.5]] {
            let want = g.peek(&x).unwrap() + 7.0;
            assert!((f.peek(&x).unwrap() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn hand_evaluated_grid_point() {
        // o1 = (0,0) sphere sigma 1 bias 0; o2 = (2,0) sphere sigma 2 bias 10; x = (1,1)
        // |x-o1|² = 2, |x-o2|² = 2 ; n = 2
        // w1 = exp(-2/4)/√2, w2 = exp(-2/16)/√2
        // f1 = 2, f2 = 2 ; f = (w1*2 + w2*12)/(w1+w2)
        let f = make_composition(
            vec![
                CompositionComponent { function: shifted(BaseFunction::Sphere, vec![0.0, 0.0]), sigma: 1.0, bias: 0.0 },
                CompositionComponent { function: shifted(BaseFunction::Sphere, vec![2.0, 0.0]), sigma: 2.0, bias: 10.0 },
            ],
            "c",
        )
        .unwrap();
        let w1 = (-0.5f64).exp();
        let w2 = (-0.125f64).exp();
        let want = (w1 * 2.0 + w2 * 12.0) / (w1 + w2);
        assert!((f.peek(&[1.0, 1.0]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_components() {
        let a = shifted(BaseFunction::Sphere, vec![0.0, 0.0]);
        let b = shifted(BaseFunction::Sphere, vec![0.0, 0.0, 0.0]);
        let one = vec![CompositionComponent { function: a.clone(), sigma: 1.0, bias: 0.0 }];
        assert!(make_composition(one, "c").is_err());
        let mismatched = vec![
            CompositionComponent { function: a, sigma: 1.0, bias: 0.0 },
            CompositionComponent { function: b, sigma: 1.0, bias: 0.0 },
        ];
        assert!(matches!(make_composition(mismatched, "c"), Err(Error::Config(_))));
    }
}
