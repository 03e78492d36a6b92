//! Randomized self-checks of the core formulas against brute-force
//! recomputations, run by the `selftest` subcommand.

use crate::population::{diversity, opposite_vector, population_center, Bounds, Population};
use crate::rng::RngStream;
use crate::stats::{midranks, wilcoxon_rank_sum};
use crate::variants::{lpsr_target_size, mutate_rand1};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

const REL_TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

fn check(name: &'static str, instances: usize, mut one: impl FnMut(usize) -> Option<String>) -> CheckResult {
    let mut failures = 0;
    let mut first_failure = None;
    for k in 0..instances {
        if let Some(msg) = one(k) {
            failures += 1;
            first_failure.get_or_insert(format!("instance {k}: {msg}"));
        }
    }
    CheckResult {
        name,
        instances,
        failures,
        first_failure,
    }
}

fn random_population(rng: &mut RngStream, min_np: usize) -> Population {
    let np = min_np + rng.index(12);
    let dim = 1 + rng.index(6);
    let half = 10f64.powf(rng.uniform_in(-2.0, 3.0));
    let bounds = Bounds::uniform(dim, -half, half).expect("valid bounds");
    Population::random(np, bounds, rng).expect("valid population")
}

fn sorted_median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Two-sided p-value by listing every way to pick `|a|` of the pooled ranks.
fn enumerated_p_value(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let n = a.len();
    let big_n = pooled.len();
    let observed: f64 = ranks[..n].iter().sum();
    let mean = n as f64 * (big_n as f64 + 1.0) / 2.0;
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << big_n) {
        if mask.count_ones() as usize != n {
            continue;
        }
        total += 1;
        let s: f64 = (0..big_n).filter(|j| mask >> j & 1 == 1).map(|j| ranks[j]).sum();
        if (s - mean).abs() >= (observed - mean).abs() - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

/// Runs every check with `instances` random cases each.
pub fn run_all(instances: usize, seed: u64) -> Vec<CheckResult> {
    let mut rng = RngStream::new(seed);
    let mut out = Vec::new();

    out.push(check("population_center", instances, |_| {
        let pop = random_population(&mut rng, 1);
        let center = population_center(&pop).ok()?;
        (0..pop.dim()).find_map(|j| {
            let want = sorted_median(pop.members.iter().map(|m| m.genome[j]).collect());
            (!close(center[j], want)).then(|| format!("dim {j}: {} vs {want}", center[j]))
        })
    }));

    out.push(check("diversity", instances, |_| {
        let pop = random_population(&mut rng, 1);
        let got = diversity(&pop).ok()?;
        let mut sum = 0.0;
        for m in &pop.members {
            for j in 0..pop.dim() {
                let med = sorted_median(pop.members.iter().map(|o| o.genome[j]).collect());
                sum += (m.genome[j] - med).abs() / (pop.bounds.up()[j] - pop.bounds.low()[j]);
            }
        }
        let want = sum / pop.len() as f64;
        (!close(got, want)).then(|| format!("{got} vs {want}"))
    }));

    out.push(check("opposite_vector", instances, |_| {
        let pop = random_population(&mut rng, 1);
        let x = pop.genome(0);
        let got = opposite_vector(x, &pop.bounds).ok()?;
        (0..x.len()).find_map(|j| {
            let want = pop.bounds.up()[j] + pop.bounds.low()[j] - x[j];
            (!close(got[j], want)).then(|| format!("dim {j}: {} vs {want}", got[j]))
        })
    }));

    out.push(check("mutate_rand1", instances, |_| {
        let pop = random_population(&mut rng, 4);
        let i = rng.index(pop.len());
        let f = rng.uniform_in(0.1, 1.0);
        let m = match mutate_rand1(&pop, i, f, &mut rng) {
            Ok(m) => m,
            Err(e) => return Some(e.to_string()),
        };
        let (r1, r2) = (m.donors[0], m.donors[1]);
        if r1 == i || r2 == i || r1 == r2 {
            return Some(format!("donors {r1}, {r2} not distinct from {i}"));
        }
        (0..pop.dim()).find_map(|j| {
            let x = pop.genome(i)[j];
            let mut want = x + f * (pop.genome(r1)[j] - pop.genome(r2)[j]);
            if want < pop.bounds.low()[j] {
                want = (x + pop.bounds.low()[j]) / 2.0;
            } else if want > pop.bounds.up()[j] {
                want = (x + pop.bounds.up()[j]) / 2.0;
            }
            (!close(m.vector[j], want)).then(|| format!("dim {j}: {} vs {want}", m.vector[j]))
        })
    }));

    out.push(check("lpsr_target_size", instances, |_| {
        let np_min = 4 + rng.index(10);
        let np_init = np_min + rng.index(200);
        let mfes = 1 + rng.index(1_000_000) as u64;
        let fes = rng.index(mfes as usize + 1) as u64;
        let got = lpsr_target_size(fes, mfes, np_init, np_min);
        let exact = np_init as f64 - (np_init - np_min) as f64 * fes as f64 / mfes as f64;
        // nearest size; a half-way value may go either way
        let ok = (got as f64 - exact).abs() <= 0.5 + 1e-9 && (np_min..=np_init).contains(&got);
        (!ok).then(|| format!("{got} for exact {exact}"))
    }));

    out.push(check("wilcoxon_exact_p", instances, |_| {
        let na = 3 + rng.index(4);
        let nb = 3 + rng.index(10 - na);
        let levels = 2 + rng.index(12) as u32;
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| f64::from(rng.index(levels as usize) as u32)).collect() };
        let (a, b) = (draw(na), draw(nb));
        let got = wilcoxon_rank_sum(&a, &b, 0.05).ok()?;
        let want = if a.iter().chain(&b).all(|&v| v == a[0]) {
            1.0
        } else {
            enumerated_p_value(&a, &b)
        };
        (got.p_value != want).then(|| format!("{a:?} vs {b:?}: {} vs {want}", got.p_value))
    }));

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run_all(200, 7) {
            assert!(c.passed(), "{}: {:?}", c.name, c.first_failure);
            assert_eq!(c.instances, 200);
        }
    }
}
