//! One-pass running statistics (Welford's algorithm for mean and variance),
//! so window memory stays constant in window size.

use serde::{Deserialize, Serialize};

/// Streaming min / max / mean / SD / last over a series of samples.
///
/// SD uses the population convention (divide by n); the only requirement on
/// the convention is that training and prediction share it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    last: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        RunningStats::default()
    }

    pub fn push(&mut self, sample: f64) {
        self.count += 1;
        if self.count == 1 {
            self.min = sample;
            self.max = sample;
        } else {
            self.min = self.min.min(sample);
            self.max = self.max.max(sample);
        }
        let delta = sample - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (sample - self.mean);
        self.last = sample;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn min(&self) -> f64 {
        debug_assert!(self.count > 0);
        self.min
    }

    pub fn max(&self) -> f64 {
        debug_assert!(self.count > 0);
        self.max
    }

    pub fn mean(&self) -> f64 {
        debug_assert!(self.count > 0);
        self.mean
    }

    /// Population standard deviation, sqrt(m2 / n).
    pub fn sd(&self) -> f64 {
        debug_assert!(self.count > 0);
        (self.m2.max(0.0) / self.count as f64).sqrt()
    }

    pub fn last(&self) -> f64 {
        debug_assert!(self.count > 0);
        self.last
    }
}
