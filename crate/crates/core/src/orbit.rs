//! Forward orbits together with the derivative cocycle `S_k = log|Df^k(z_0)|`.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::map::MapSpec;
use crate::sum::NeumaierSum;

/// A forward orbit `z_0, …, z_n` and its cumulative log-derivatives.
///
/// `cum_logderiv[k] = Σ_{i<k} log|Df(z_i)|`, so `cum_logderiv[0] = 0` and the
/// two vectors always have the same length. A value of `-inf` means some
/// earlier factor vanished; it stays `-inf` from then on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub start: Complex64,
    pub points: Vec<Complex64>,
    pub cum_logderiv: Vec<f64>,
    /// Index of the first point past the escape threshold, or the last finite
    /// index if the next iterate overflowed.
    pub escaped_at: Option<usize>,
    /// First index `k` with `Df(z_k) = 0`.
    pub hit_critical_at: Option<usize>,
}

impl OrbitTrace {
    /// Number of stored points (horizon + 1).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest `n` for which `z_n` and `S_n` are available.
    pub fn horizon(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// `S_k = log|Df^k(z_0)|`.
    pub fn log_derivative(&self, k: usize) -> f64 {
        self.cum_logderiv[k]
    }

    /// `S_n / n` for `n ≥ 1`.
    pub fn chi(&self, n: usize) -> f64 {
        self.cum_logderiv[n] / n as f64
    }

    /// `log|Df(z_k)|` recovered from the stored orbit point.
    pub fn step_log_derivative(&self, map: &MapSpec, k: usize) -> f64 {
        map.log_abs_derivative(self.points[k])
    }

    /// Writes `k,re,im,log_deriv_sum` rows with a header line.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "re", "im", "log_deriv_sum"])?;
        for (k, (z, s)) in self.points.iter().zip(&self.cum_logderiv).enumerate() {
            w.write_record(&[k.to_string(), z.re.to_string(), z.im.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Iterates `map` from `z0` for up to `n` steps.
///
/// Stops early once the orbit leaves the escape region; the escaping point is
/// kept as the last entry. If an iterate overflows before formally escaping,
/// the trace ends at the last finite point and `escaped_at` marks it.
pub fn iterate(map: &MapSpec, z0: Complex64, n: usize) -> OrbitTrace {
    let mut points = Vec::with_capacity(n.min(1 << 20) + 1);
    let mut cum = Vec::with_capacity(n.min(1 << 20) + 1);
    points.push(z0);
    cum.push(0.0);
    let mut trace = OrbitTrace {
        start: z0,
        points,
        cum_logderiv: cum,
        escaped_at: None,
        hit_critical_at: None,
    };
    if map.has_escaped(z0) {
        trace.escaped_at = Some(0);
        return trace;
    }

    let mut acc = NeumaierSum::new();
    let mut z = z0;
    for k in 0..n {
        let ld = map.log_abs_derivative(z);
        if ld == f64::NEG_INFINITY && trace.hit_critical_at.is_none() {
            trace.hit_critical_at = Some(k);
        }
        let next = map.eval(z);
        if !next.is_finite() {
            trace.escaped_at = Some(k);
            break;
        }
        acc += ld;
        trace.points.push(next);
        trace.cum_logderiv.push(acc.sum());
        if map.has_escaped(next) {
            trace.escaped_at = Some(k + 1);
            break;
        }
        z = next;
    }
    trace
}
