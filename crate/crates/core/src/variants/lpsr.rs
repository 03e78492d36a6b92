/// Linearly interpolated population size after `fes` of `mfes` evaluations:
/// `round((np_min - np_init) / mfes * fes + np_init)`.
///
/// `fes` beyond `mfes` is clamped, so the size never drops below `np_min`.
pub fn lpsr_target_size(fes: u64, mfes: u64, np_init: usize, np_min: usize) -> usize {
    if mfes == 0 {
        return np_min;
    }
    // exact rational arithmetic, halves rounded away from zero like f64::round
    let (fes, mfes) = (fes.min(mfes) as i128, mfes as i128);
    let num = np_init as i128 * mfes + (np_min as i128 - np_init as i128) * fes;
    ((2 * num + mfes) / (2 * mfes)) as usize
}

/// Where a linear reduction started; redistribution and restarts move the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpsrSchedule {
    pub origin_fes: u64,
    pub origin_np: usize,
    pub np_min: usize,
    pub max_evaluations: u64,
}

impl LpsrSchedule {
    pub fn target(&self, fes: u64) -> usize {
        if self.origin_np <= self.np_min {
            return self.origin_np;
        }
        let span = self.max_evaluations.saturating_sub(self.origin_fes);
        lpsr_target_size(
            fes.saturating_sub(self.origin_fes),
            span,
            self.origin_np,
            self.np_min,
        )
    }
}
