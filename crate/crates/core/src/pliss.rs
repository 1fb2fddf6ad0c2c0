//! Pliss times of a real sequence.
//!
//! Given `a_1..a_r` with `a_j ≤ B` and average at least `b2`, at least
//! `θ·r` indices `n_j` satisfy `Σ_{i=n+1}^{n_j} a_i ≥ b1·(n_j - n)` for every
//! `0 ≤ n < n_j`, where `θ = (b2 - b1)/(B - b1)`.
//!
//! With `Q(k) = Σ_{i≤k} (a_i - b1)` the condition reads `Q(n_j) ≥ max_{n<n_j} Q(n)`,
//! so one pass with a running maximum finds every such index.
//!
//! The count can equal `θ·r` exactly: `a = [B]` with `b2 = B` gives one index and `θ = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sum::NeumaierSum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlissInput {
    pub a: Vec<f64>,
    /// Upper bound `B` on every entry.
    pub bound: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlissError {
    #[error("need 0 < b1 < b2 <= B, got b1 = {b1}, b2 = {b2}, B = {bound}")]
    InvalidBounds { b1: f64, b2: f64, bound: f64 },
}

/// Why the counting guarantee does not apply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HypothesisViolation {
    /// `Σ a_j < b2·r`.
    AverageTooSmall { sum: f64, required: f64 },
    /// `a_j > B`.
    EntryExceedsBound { index: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlissTimes {
    /// 1-based indices, increasing.
    pub indices: Vec<usize>,
    pub theta: f64,
    /// `None` when the hypotheses hold; the indices are returned either way.
    pub violation: Option<HypothesisViolation>,
}

impl PlissTimes {
    /// `|indices| > θ·r`.
    pub fn exceeds_theta_fraction(&self, r: usize) -> bool {
        self.indices.len() as f64 > self.theta * r as f64
    }

    /// `|indices| ≥ θ·r`, allowing `tol` for rounding in `θ·r`.
    pub fn meets_theta_fraction(&self, r: usize, tol: f64) -> bool {
        self.indices.len() as f64 >= self.theta * r as f64 - tol
    }
}

impl PlissInput {
    pub fn new(a: Vec<f64>, bound: f64, b1: f64, b2: f64) -> Self {
        PlissInput { a, bound, b1, b2 }
    }

    fn check_bounds(&self) -> Result<(), PlissError> {
        let ok = self.b1.is_finite()
            && self.b2.is_finite()
            && self.bound.is_finite()
            && 0.0 < self.b1
            && self.b1 < self.b2
            && self.b2 <= self.bound;
        if ok {
            Ok(())
        } else {
            Err(PlissError::InvalidBounds { b1: self.b1, b2: self.b2, bound: self.bound })
        }
    }

    pub fn theta(&self) -> f64 {
        (self.b2 - self.b1) / (self.bound - self.b1)
    }

    pub fn hypothesis_violation(&self) -> Option<HypothesisViolation> {
        if let Some((i, &v)) = self.a.iter().enumerate().find(|(_, &v)| v > self.bound) {
            return Some(HypothesisViolation::EntryExceedsBound { index: i + 1, value: v });
        }
        let sum = self.a.iter().fold(NeumaierSum::new(), |s, &v| s + v).sum();
        let required = self.b2 * self.a.len() as f64;
        (sum < required).then_some(HypothesisViolation::AverageTooSmall { sum, required })
    }
}

pub fn pliss_times(input: &PlissInput) -> Result<PlissTimes, PlissError> {
    input.check_bounds()?;
    let mut q = NeumaierSum::new();
    let mut running_max = 0.0f64;
    let mut indices = Vec::new();
    for (i, &a) in input.a.iter().enumerate() {
        q += a - input.b1;
        let value = q.sum();
        if value >= running_max {
            indices.push(i + 1);
        }
        running_max = running_max.max(value);
    }
    Ok(PlissTimes { indices, theta: input.theta(), violation: input.hypothesis_violation() })
}
