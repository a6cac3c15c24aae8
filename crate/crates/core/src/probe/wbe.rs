//! Weighted Backtrack Estimator over the multiset D of visited branch
//! lengths: estimate = Σ_{d∈D} prob(d)·(2^{d+1}−1) / Σ_{d∈D} prob(d) with
//! prob(d) = 2^{−d}.
//!
//! Both sums are kept in natural-log space and updated incrementally with a
//! max-shifted log-sum-exp, so one branch record costs O(1) and depths up to
//! 10^6 neither overflow nor underflow. Branch length here is the decision
//! level at the conflict (`wbe_plain` variant).

use thiserror::Error;

/// Identifier stamped into datasets so differently-defined estimator
/// variants can never be merged.
pub const WBE_VARIANT: &str = "wbe_plain";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WbeError {
    #[error("WBE estimate queried before any branch was recorded")]
    Empty,
}

/// log(a + b) given ln a and ln b, shifted by the max for stability.
fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WbeState {
    log_numerator: f64,
    log_denominator: f64,
    branch_count: u64,
    /// log-sum-exp update count, exposed so tests can verify O(1) cost
    /// per recorded branch.
    update_ops: u64,
}

impl Default for WbeState {
    fn default() -> Self {
        WbeState::new()
    }
}

impl WbeState {
    pub fn new() -> Self {
        WbeState {
            log_numerator: f64::NEG_INFINITY,
            log_denominator: f64::NEG_INFINITY,
            branch_count: 0,
            update_ops: 0,
        }
    }

    /// Adds one branch of length `depth` to D.
    ///
    /// The numerator term 2^{−d}(2^{d+1}−1) simplifies to 2 − 2^{−d}, whose
    /// log is computed directly to keep each update at one rounding step.
    pub fn record_branch(&mut self, depth: u64) {
        let d = depth as f64;
        // ln(2 - 2^{-d}) = ln 2 + ln(1 - 2^{-(d+1)})
        let log_num_term = if depth < 1060 {
            std::f64::consts::LN_2 + (-(2f64.powi(-(depth as i32 + 1)))).ln_1p()
        } else {
            std::f64::consts::LN_2 // 2^{-(d+1)} underflows to zero here anyway
        };
        let log_den_term = -d * std::f64::consts::LN_2;
        self.log_numerator = log_add_exp(self.log_numerator, log_num_term);
        self.log_denominator = log_add_exp(self.log_denominator, log_den_term);
        self.branch_count += 1;
        self.update_ops += 2;
    }

    pub fn branch_count(&self) -> u64 {
        self.branch_count
    }

    pub fn update_ops(&self) -> u64 {
        self.update_ops
    }

    /// Natural log of the current estimate.
    pub fn log_estimate(&self) -> Result<f64, WbeError> {
        if self.branch_count == 0 {
            return Err(WbeError::Empty);
        }
        Ok(self.log_numerator - self.log_denominator)
    }

    /// The estimate itself; may round to infinity for extreme depths even
    /// though the log stays finite.
    pub fn estimate(&self) -> Result<f64, WbeError> {
        self.log_estimate().map(f64::exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Batch recomputation over the whole multiset: sort terms and reduce
    /// with the same primitive, but in one pass over all of D.
    fn batch_log_estimate(depths: &[u64]) -> f64 {
        let mut state = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut sorted = depths.to_vec();
        sorted.sort_unstable();
        for &depth in &sorted {
            let d = depth as f64;
            let log_num_term =
                std::f64::consts::LN_2 + (-(2f64.powf(-(d + 1.0)))).ln_1p();
            state.0 = log_add_exp(state.0, log_num_term);
            state.1 = log_add_exp(state.1, -d * std::f64::consts::LN_2);
        }
        state.0 - state.1
    }

    #[test]
    fn single_depth_one() {
        let mut state = WbeState::new();
        state.record_branch(1);
        // (2^{-1}(2^2-1)) / 2^{-1} = 3
        assert!((state.estimate().unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_depth_two() {
        let mut state = WbeState::new();
        state.record_branch(2);
        assert!((state.estimate().unwrap() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn two_depths() {
        let mut state = WbeState::new();
        state.record_branch(1);
        state.record_branch(2);
        // (0.5*3 + 0.25*7) / 0.75 = 13/3
        assert!((state.estimate().unwrap() - 13.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_branch_closed_form() {
        for d in 1..=30u64 {
            let mut state = WbeState::new();
            state.record_branch(d);
            let expected = 2f64.powi(d as i32 + 1) - 1.0;
            let diff = (state.log_estimate().unwrap() - expected.ln()).abs();
            assert!(diff < 1e-12, "d={d} log diff {diff}");
        }
    }

    #[test]
    fn complete_tree_exactness() {
        for k in 1..=16u32 {
            let mut state = WbeState::new();
            for _ in 0..(1u64 << k) {
                state.record_branch(k as u64);
            }
            let expected = (2f64.powi(k as i32 + 1) - 1.0).ln();
            let diff = (state.log_estimate().unwrap() - expected).abs();
            assert!(diff < 1e-9, "k={k} log diff {diff}");
        }
    }

    #[test]
    fn incremental_equals_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let depths: Vec<u64> = (0..100_000).map(|_| rng.gen_range(0..=10_000)).collect();
        let mut state = WbeState::new();
        for &d in &depths {
            state.record_branch(d);
        }
        let batch = batch_log_estimate(&depths);
        let diff = (state.log_estimate().unwrap() - batch).abs();
        assert!(diff < 1e-9, "log diff {diff}");
        assert!(state.log_estimate().unwrap().is_finite());
    }

    #[test]
    fn extreme_depths_do_not_overflow() {
        let mut state = WbeState::new();
        state.record_branch(1_000_000);
        let log_est = state.log_estimate().unwrap();
        let expected = 1_000_001.0 * std::f64::consts::LN_2; // log(2^{d+1} - 1) ~ (d+1) ln 2
        assert!((log_est - expected).abs() < 1e-6);
        assert!(log_est.is_finite());
    }

    #[test]
    fn estimate_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state = WbeState::new();
        for _ in 0..1000 {
            state.record_branch(rng.gen_range(0..50));
            assert!(state.estimate().unwrap() >= 1.0);
        }
    }

    #[test]
    fn denominator_monotone() {
        let mut state = WbeState::new();
        let mut prev = f64::NEG_INFINITY;
        for d in [5u64, 3, 8, 1, 0, 12] {
            state.record_branch(d);
            assert!(state.log_denominator >= prev);
            prev = state.log_denominator;
        }
    }

    #[test]
    fn empty_query_is_an_error() {
        assert_eq!(WbeState::new().log_estimate(), Err(WbeError::Empty));
    }

    #[test]
    fn constant_ops_per_branch() {
        let mut state = WbeState::new();
        for d in 0..10_000 {
            state.record_branch(d % 97);
        }
        assert_eq!(state.update_ops(), 2 * 10_000);
    }
}
