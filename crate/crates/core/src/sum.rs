//! Compensated accumulation of log-derivatives.
//!
//! Orbit cocycles add up millions of terms of mixed sign, so plain `+=` drifts
//! by O(n·ε). [`NeumaierSum`] keeps a running correction term and handles
//! `-inf` terms explicitly: once a vanishing derivative enters the sum the
//! total is pinned at `-inf` for good.

use std::ops::{Add, AddAssign};

/// Kahan–Babuška–Neumaier summator with absorbing `-inf`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
    neg_inf: bool,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        if self.neg_inf {
            f64::NEG_INFINITY
        } else {
            self.s + self.c
        }
    }

    pub fn is_neg_infinite(&self) -> bool {
        self.neg_inf
    }
}

impl From<f64> for NeumaierSum {
    fn from(value: f64) -> Self {
        let mut s = Self::default();
        s += value;
        s
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, rhs: f64) {
        if self.neg_inf {
            return;
        }
        if rhs == f64::NEG_INFINITY {
            self.neg_inf = true;
            return;
        }
        let t = self.s + rhs;
        if self.s.abs() >= rhs.abs() {
            self.c += (self.s - t) + rhs;
        } else {
            self.c += (rhs - t) + self.s;
        }
        self.s = t;
    }
}

impl Add<f64> for NeumaierSum {
    type Output = Self;

    fn add(mut self, rhs: f64) -> Self {
        self += rhs;
        self
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().fold(NeumaierSum::new(), |acc, &v| acc + v).sum()
}

/// Compensated prefix sums: `out[k] = values[0] + … + values[k-1]`, `out[0] = 0`.
pub fn prefix_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(values.len() + 1);
    out.push(0.0);
    for &v in values {
        acc += v;
        out.push(acc.sum());
    }
    out
}
