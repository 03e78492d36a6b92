use rand_distr::{Cauchy, Normal};

use crate::rng::RngStream;

/// Spread of the Cauchy (F) and normal (CR) sampling around a memory entry.
const SAMPLING_SCALE: f64 = 0.1;

/// Parameters of one trial that beat its target, and by how much.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Success {
    pub f: f64,
    pub cr: f64,
    pub improvement: f64,
}

/// Success-history parameter memory plus the external archive of replaced parents.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationMemory {
    m_f: Vec<f64>,
    m_cr: Vec<f64>,
    cursor: usize,
    archive: Vec<Vec<f64>>,
    archive_cap: usize,
}

impl AdaptationMemory {
    pub const INITIAL_ENTRY: f64 = 0.5;

    pub fn new(history: usize, archive_cap: usize) -> Self {
        let h = history.max(1);
        Self {
            m_f: vec![Self::INITIAL_ENTRY; h],
            m_cr: vec![Self::INITIAL_ENTRY; h],
            cursor: 0,
            archive: Vec::new(),
            archive_cap,
        }
    }

    pub fn m_f(&self) -> &[f64] {
        &self.m_f
    }

    pub fn m_cr(&self) -> &[f64] {
        &self.m_cr
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn archive(&self) -> &[Vec<f64>] {
        &self.archive
    }

    pub fn archive_cap(&self) -> usize {
        self.archive_cap
    }

    /// Draws `(F, CR)` around a uniformly chosen memory slot.
    ///
    /// F is Cauchy-distributed, redrawn while non-positive and capped at 1;
    /// CR is normal and clamped to `[0, 1]`.
    pub fn sample_parameters(&self, rng: &mut RngStream) -> (f64, f64) {
        let r = rng.index(self.m_f.len());
        let cauchy = Cauchy::new(self.m_f[r], SAMPLING_SCALE).expect("positive scale");
        let f = loop {
            let f: f64 = rng.sample(&cauchy);
            if f > 0.0 {
                break f.min(1.0);
            }
        };
        let normal = Normal::new(self.m_cr[r], SAMPLING_SCALE).expect("positive scale");
        let cr = rng.sample::<f64, _>(&normal).clamp(0.0, 1.0);
        (f, cr)
    }

    /// Writes the improvement-weighted Lehmer mean of F and arithmetic mean of
    /// CR at the cursor, then advances it. No successes, no change.
    pub fn update(&mut self, successes: &[Success]) {
        if successes.is_empty() {
            return;
        }
        let total: f64 = successes.iter().map(|s| s.improvement).sum();
        let weight = |s: &Success| {
            if total > 0.0 {
                s.improvement / total
            } else {
                1.0 / successes.len() as f64
            }
        };
        let num: f64 = successes.iter().map(|s| weight(s) * s.f * s.f).sum();
        let den: f64 = successes.iter().map(|s| weight(s) * s.f).sum();
        let cr: f64 = successes.iter().map(|s| weight(s) * s.cr).sum();
        if den > 0.0 {
            self.m_f[self.cursor] = (num / den).clamp(f64::MIN_POSITIVE, 1.0);
        }
        self.m_cr[self.cursor] = cr.clamp(0.0, 1.0);
        self.cursor = (self.cursor + 1) % self.m_f.len();
    }

    /// Stores a replaced parent; over capacity, a uniformly chosen entry is evicted.
    pub fn archive_insert(&mut self, genome: Vec<f64>, rng: &mut RngStream) {
        if self.archive_cap == 0 {
            return;
        }
        self.archive.push(genome);
        if self.archive.len() > self.archive_cap {
            let k = rng.index(self.archive.len());
            self.archive.swap_remove(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_update_is_noop() {
        let mut m = AdaptationMemory::new(6, 10);
        let before = m.clone();
        m.update(&[]);
        assert_eq!(m, before);
    }

    #[test]
    fn single_success_is_written() {
        let mut m = AdaptationMemory::new(3, 10);
        m.update(&[Success { f: 0.5, cr: 0.5, improvement: 42.0 }]);
        assert_eq!((m.m_f()[0], m.m_cr()[0], m.cursor()), (0.5, 0.5, 1));
    }

    #[test]
    fn lehmer_mean_hand_value() {
        let mut m = AdaptationMemory::new(2, 0);
        m.update(&[
            Success { f: 0.2, cr: 0.1, improvement: 1.0 },
            Success { f: 0.8, cr: 0.9, improvement: 1.0 },
        ]);
        assert!((m.m_f()[0] - 0.68).abs() < 1e-12);
        assert!((m.m_cr()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cursor_wraps() {
        let mut m = AdaptationMemory::new(2, 0);
        let s = [Success { f: 0.3, cr: 0.3, improvement: 1.0 }];
        m.update(&s);
        m.update(&s);
        assert_eq!(m.cursor(), 0);
        m.update(&[Success { f: 0.9, cr: 0.2, improvement: 1.0 }]);
        assert_eq!(m.m_f(), &[0.9, 0.3]);
    }

    #[test]
    fn sampled_parameters_in_range() {
        let m = AdaptationMemory::new(6, 0);
        let mut rng = RngStream::new(8);
        for _ in 0..2000 {
            let (f, cr) = m.sample_parameters(&mut rng);
            assert!(f > 0.0 && f <= 1.0);
            assert!((0.0..=1.0).contains(&cr));
        }
    }

    #[test]
    fn archive_respects_cap() {
        let mut m = AdaptationMemory::new(1, 5);
        let mut rng = RngStream::new(2);
        for k in 0..50 {
            m.archive_insert(vec![k as f64], &mut rng);
            assert!(m.archive().len() <= 5);
        }
        let mut none = AdaptationMemory::new(1, 0);
        none.archive_insert(vec![1.0], &mut rng);
        assert!(none.archive().is_empty());
    }
}
