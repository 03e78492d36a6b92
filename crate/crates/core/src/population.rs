//! Vectors, bounds and population geometry: center, diversity, opposition
//! and boundary repair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Per-dimension box constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    low: Vec<f64>,
    up: Vec<f64>,
}

impl Bounds {
    pub fn new(low: Vec<f64>, up: Vec<f64>) -> Result<Self> {
        if low.is_empty() {
            return Err(Error::usage("bounds need at least one dimension"));
        }
        if low.len() != up.len() {
            return Err(Error::usage(format!(
                "lower limits have {} dimensions, upper limits {}",
                low.len(),
                up.len()
            )));
        }
        if let Some(j) = (0..low.len()).find(|&j| !(low[j] < up[j]) || !low[j].is_finite() || !up[j].is_finite()) {
            return Err(Error::usage(format!(
                "dimension {j}: need finite low < up, got [{}, {}]",
                low[j], up[j]
            )));
        }
        Ok(Self { low, up })
    }

    /// The same interval `[low, up]` in every one of `dim` dimensions.
    pub fn uniform(dim: usize, low: f64, up: f64) -> Result<Self> {
        Self::new(vec![low; dim], vec![up; dim])
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }

    pub fn low(&self) -> &[f64] {
        &self.low
    }

    pub fn up(&self) -> &[f64] {
        &self.up
    }

    pub fn width(&self, j: usize) -> f64 {
        self.up[j] - self.low[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.low.iter().zip(&self.up))
                .all(|(&v, (&lo, &hi))| lo <= v && v <= hi)
    }

    pub fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        self.low
            .iter()
            .zip(&self.up)
            .map(|(&lo, &hi)| rng.uniform_in(lo, hi))
            .collect()
    }

    /// Box shifted by `delta` in every dimension.
    pub fn translated(&self, delta: &[f64]) -> Result<Self> {
        if delta.len() != self.dim() {
            return Err(Error::usage("translation has wrong dimension"));
        }
        Self::new(
            self.low.iter().zip(delta).map(|(a, d)| a + d).collect(),
            self.up.iter().zip(delta).map(|(a, d)| a + d).collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genome: Vec<f64>) -> Self {
        Self {
            genome,
            fitness: None,
        }
    }

    pub fn evaluated(genome: Vec<f64>, fitness: f64) -> Self {
        Self {
            genome,
            fitness: Some(fitness),
        }
    }

    pub fn fitness_or_err(&self) -> Result<f64> {
        self.fitness
            .ok_or_else(|| Error::usage("individual has not been evaluated"))
    }
}

/// An ordered multiset of individuals sharing one box.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Individual>,
    pub bounds: Bounds,
    pub generation: u64,
}

impl Population {
    pub fn new(members: Vec<Individual>, bounds: Bounds) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::usage("population must not be empty"));
        }
        if let Some(i) = members.iter().position(|m| m.genome.len() != bounds.dim()) {
            return Err(Error::usage(format!(
                "member {i} has {} genes, bounds have {}",
                members[i].genome.len(),
                bounds.dim()
            )));
        }
        Ok(Self {
            members,
            bounds,
            generation: 0,
        })
    }

    pub fn from_genomes(genomes: Vec<Vec<f64>>, bounds: Bounds) -> Result<Self> {
        Self::new(genomes.into_iter().map(Individual::new).collect(), bounds)
    }

    /// `np` members drawn uniformly inside `bounds`, unevaluated.
    pub fn random(np: usize, bounds: Bounds, rng: &mut RngStream) -> Result<Self> {
        let genomes = (0..np).map(|_| bounds.sample(rng)).collect();
        Self::from_genomes(genomes, bounds)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn genome(&self, i: usize) -> &[f64] {
        &self.members[i].genome
    }

    pub fn is_evaluated(&self) -> bool {
        self.members.iter().all(|m| m.fitness.is_some())
    }

    /// Index and fitness of the best evaluated member (lowest index on ties).
    pub fn best(&self) -> Option<(usize, f64)> {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.fitness.map(|f| (i, f)))
            .fold(None, |acc, (i, f)| match acc {
                Some((_, bf)) if bf <= f => acc,
                _ => Some((i, f)),
            })
    }

    pub fn invalidate_fitness(&mut self) {
        for m in &mut self.members {
            m.fitness = None;
        }
    }
}

/// Midpoint of the two central order statistics for even length.
fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    values.sort_unstable_by(f64::total_cmp);
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-dimension median of the member genomes.
pub fn population_center(pop: &Population) -> Result<Vec<f64>> {
    if pop.is_empty() {
        return Err(Error::usage("center of an empty population"));
    }
    let mut column = vec![0.0; pop.len()];
    Ok((0..pop.dim())
        .map(|j| {
            for (slot, m) in column.iter_mut().zip(&pop.members) {
                *slot = m.genome[j];
            }
            median_in_place(&mut column)
        })
        .collect())
}

/// Mean normalized Manhattan distance from each member to the population
/// center. Zero exactly when all genomes coincide; never above `dim / 2`.
pub fn diversity(pop: &Population) -> Result<f64> {
    let center = population_center(pop)?;
    let total: f64 = pop
        .members
        .iter()
        .map(|m| {
            m.genome
                .iter()
                .zip(&center)
                .enumerate()
                .map(|(j, (x, c))| (x - c).abs() / pop.bounds.width(j))
                .sum::<f64>()
        })
        .sum();
    Ok(total / pop.len() as f64)
}

/// Component-wise reflection `up + low - x` through the box center.
pub fn opposite_vector(x: &[f64], bounds: &Bounds) -> Result<Vec<f64>> {
    if !bounds.contains(x) {
        return Err(Error::usage("opposite of a vector outside the bounds"));
    }
    Ok(x.iter()
        .zip(bounds.low().iter().zip(bounds.up()))
        .map(|(&v, (&lo, &hi))| hi + lo - v)
        .collect())
}

/// Pulls each violated component back to the midpoint between the parent's
/// value and the violated limit. Feasible components pass through unchanged.
pub fn repair_bounds(child: &mut [f64], parent: &[f64], bounds: &Bounds) {
    for (j, (c, &p)) in child.iter_mut().zip(parent).enumerate() {
        let (lo, hi) = (bounds.low()[j], bounds.up()[j]);
        if *c < lo {
            *c = 0.5 * (p + lo);
        } else if *c > hi {
            *c = 0.5 * (p + hi);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pop_1d(values: &[f64], lo: f64, hi: f64) -> Population {
        Population::from_genomes(
            values.iter().map(|&v| vec![v]).collect(),
            Bounds::uniform(1, lo, hi).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bounds_reject_inverted_limits() {
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![0.0, 0.0], vec![1.0]).is_err());
        assert!(Bounds::new(vec![], vec![]).is_err());
    }

    #[test]
    fn center_odd_and_even() {
        assert_eq!(population_center(&pop_1d(&[9.0, 2.0, 4.0], 0.0, 10.0)).unwrap(), vec![4.0]);
        assert_eq!(population_center(&pop_1d(&[1.0, 3.0], 0.0, 10.0)).unwrap(), vec![2.0]);
    }

    #[test]
    fn center_of_identical_genomes() {
        let v = vec![0.25, -3.0, 7.5];
        let pop = Population::from_genomes(vec![v.clone(); 6], Bounds::uniform(3, -10.0, 10.0).unwrap()).unwrap();
        assert_eq!(population_center(&pop).unwrap(), v);
        assert_eq!(diversity(&pop).unwrap(), 0.0);
    }

    #[test]
    fn diversity_hand_values() {
        let d = diversity(&pop_1d(&[2.0, 4.0, 9.0], 0.0, 10.0)).unwrap();
        assert!((d - 0.7 / 3.0).abs() < 1e-15);

        let pop = Population::from_genomes(
            vec![vec![0.0, 0.0], vec![1.0, 1.0]],
            Bounds::uniform(2, 0.0, 1.0).unwrap(),
        )
        .unwrap();
        assert!((diversity(&pop).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_examples() {
        let b = Bounds::uniform(1, -100.0, 100.0).unwrap();
        assert_eq!(opposite_vector(&[30.0], &b).unwrap(), vec![-30.0]);
        assert_eq!(opposite_vector(&[-100.0], &b).unwrap(), vec![100.0]);
        assert_eq!(opposite_vector(&[0.0], &b).unwrap(), vec![0.0]);
        assert!(opposite_vector(&[100.5], &b).is_err());
    }

    #[test]
    fn repair_examples() {
        let b = Bounds::uniform(1, 0.0, 10.0).unwrap();
        let mut c = [12.0];
        repair_bounds(&mut c, &[8.0], &b);
        assert_eq!(c, [9.0]);
        let mut c = [-4.0];
        repair_bounds(&mut c, &[1.0], &b);
        assert_eq!(c, [0.5]);
        let mut c = [3.0];
        repair_bounds(&mut c, &[1.0], &b);
        assert_eq!(c, [3.0]);
    }

    #[test]
    fn empty_population_rejected() {
        assert!(Population::new(vec![], Bounds::uniform(1, 0.0, 1.0).unwrap()).is_err());
    }

    fn arb_population() -> impl Strategy<Value = Population> {
        (1usize..5, 1usize..13).prop_flat_map(|(dim, np)| {
            prop::collection::vec(prop::collection::vec(-50.0f64..50.0, dim), np).prop_map(move |g| {
                Population::from_genomes(g, Bounds::uniform(dim, -50.0, 50.0).unwrap()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn diversity_zero_iff_identical(pop in arb_population()) {
            let d = diversity(&pop).unwrap();
            let identical = pop.members.iter().all(|m| m.genome == pop.members[0].genome);
            prop_assert_eq!(d == 0.0, identical);
            prop_assert!(d >= 0.0 && d <= pop.dim() as f64 / 2.0 + 1e-12);
        }

        #[test]
        fn diversity_translation_invariant(pop in arb_population(), shift in -20.0f64..20.0) {
            let delta = vec![shift; pop.dim()];
            let moved = Population::from_genomes(
                pop.members.iter().map(|m| m.genome.iter().map(|x| x + shift).collect()).collect(),
                pop.bounds.translated(&delta).unwrap(),
            ).unwrap();
            let (a, b) = (diversity(&pop).unwrap(), diversity(&moved).unwrap());
            prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }

        #[test]
        fn opposite_is_involution(x in prop::collection::vec(-100.0f64..100.0, 1..8)) {
            let b = Bounds::uniform(x.len(), -100.0, 100.0).unwrap();
            let back = opposite_vector(&opposite_vector(&x, &b).unwrap(), &b).unwrap();
            for (u, v) in back.iter().zip(&x) {
                prop_assert!((u - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
        }

        #[test]
        fn repair_lands_inside(
            child in prop::collection::vec(-300.0f64..300.0, 1..8),
            seed in any::<u64>(),
        ) {
            let b = Bounds::uniform(child.len(), -100.0, 100.0).unwrap();
            let parent = b.sample(&mut RngStream::new(seed));
            let mut c = child.clone();
            repair_bounds(&mut c, &parent, &b);
            prop_assert!(b.contains(&c));
            let mut again = c.clone();
            repair_bounds(&mut again, &parent, &b);
            prop_assert_eq!(again, c);
        }
    }
}
