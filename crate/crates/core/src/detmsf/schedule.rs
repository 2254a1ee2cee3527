use serde::Serialize;

use crate::math::{ceil_cbrt, id_bits};

/// How many edges each fragment announces per phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MuSchedule {
    /// `μ₁ = 1`, `μᵢ = min(⌈n^{1/3}⌉, μᵢ₋₁(μᵢ₋₁ + 1))`.
    Rcast2,
    /// `μᵢ = 1` for `i ≤ ⌊2 log₂ log₂ n⌋`, then
    /// `max(1, min(⌊sᵢ / ⌈log₂ n⌉⌋, ⌈n^{1/3}⌉))` with `sᵢ` the smallest
    /// growable fragment size.
    CapacityOptimal,
    /// `μ₁ = 1`, `μᵢ = μᵢ₋₁(μᵢ₋₁ + 1)` without a cap.
    Uncapped,
}

impl MuSchedule {
    /// `μᵢ` for the 1-based phase `i`, given `μᵢ₋₁` (ignored for `i = 1`) and
    /// the smallest growable fragment size `s`.
    pub fn mu(self, i: usize, n: usize, prev: usize, s: usize) -> usize {
        let cap = ceil_cbrt(n as u64) as usize;
        match self {
            MuSchedule::Rcast2 if i <= 1 => 1,
            MuSchedule::Rcast2 => cap.min(prev.saturating_mul(prev + 1)).max(1),
            MuSchedule::Uncapped if i <= 1 => 1,
            MuSchedule::Uncapped => prev.saturating_mul(prev + 1),
            MuSchedule::CapacityOptimal if i <= Self::stage_one_phases(n) => 1,
            MuSchedule::CapacityOptimal => (s / id_bits(n)).min(cap).max(1),
        }
    }

    /// Budget actually used in a phase: `min(⌈n^{1/3}⌉, μ)` for the capped
    /// schedules.
    pub fn effective(self, n: usize, mu: usize) -> usize {
        match self {
            MuSchedule::Uncapped => mu,
            _ => mu.min(ceil_cbrt(n as u64) as usize),
        }
    }

    /// Phases with `μ = 1` in the capacity-optimal schedule:
    /// `⌊2 log₂ log₂ n⌋`.
    pub fn stage_one_phases(n: usize) -> usize {
        if n < 4 {
            return 0;
        }
        (2.0 * (n as f64).log2().log2()).floor() as usize
    }

    /// The textbook stage-two recurrence `min(μᵢ₋₁² / ⌈log₂ n⌉, ⌈n^{1/3}⌉)`,
    /// at least 1. Only logged next to the size-based value.
    pub fn recurrence(n: usize, prev: usize) -> usize {
        (prev.saturating_mul(prev) / id_bits(n)).min(ceil_cbrt(n as u64) as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rcast2_sequence() {
        // n = 4096: cap 16; 1, 2, 6, 16, 16
        let mut prev = 0;
        let got: Vec<usize> = (1..=5)
            .map(|i| {
                prev = MuSchedule::Rcast2.mu(i, 4096, prev, 0);
                prev
            })
            .collect();
        assert_eq!(got, vec![1, 2, 6, 16, 16]);
    }

    #[test]
    fn capacity_optimal_stages() {
        // n = 256: log log n = 3, stage one has 6 phases; log n = 8, cap 7
        assert_eq!(MuSchedule::stage_one_phases(256), 6);
        assert_eq!(MuSchedule::CapacityOptimal.mu(6, 256, 1, 200), 1);
        assert_eq!(MuSchedule::CapacityOptimal.mu(7, 256, 1, 40), 5);
        assert_eq!(MuSchedule::CapacityOptimal.mu(7, 256, 1, 200), 7);
        assert_eq!(MuSchedule::CapacityOptimal.mu(7, 256, 1, 3), 1);
        assert_eq!(MuSchedule::stage_one_phases(2), 0);
    }

    #[test]
    fn recurrence_is_floored_at_one() {
        assert_eq!(MuSchedule::recurrence(256, 1), 1);
        assert_eq!(MuSchedule::recurrence(256, 6), 4);
        assert_eq!(MuSchedule::recurrence(256, 100), 7);
    }
}
