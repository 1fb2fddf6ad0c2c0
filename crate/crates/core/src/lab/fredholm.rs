//! `F(t) = 1 + Σ_{n≥1} t^n / Df^n(c)` with a fitted geometric tail bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LabError;
use crate::map::MapSpec;

/// `|u_n| ≤ amplitude · ratio^n` on the fitted range.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub amplitude: f64,
    pub ratio: f64,
    /// First index of the fitted range.
    pub from: usize,
}

/// Coefficients `u_0 = 1`, `u_n = 1/Df^n(c)` up to `n_cut`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredholmSeries {
    pub map: MapSpec,
    pub coeffs: Vec<Complex64>,
    pub envelope: Option<Envelope>,
    /// Index after which the critical orbit overflowed; later coefficients are 0.
    pub escaped_at: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FredholmValue {
    pub t: Complex64,
    pub value: Complex64,
    /// `None` when no envelope fits or `|t|·ratio ≥ 1`.
    pub tail_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroScan {
    pub radius: f64,
    pub points: usize,
    pub min_abs: f64,
    pub argmin: Complex64,
    /// Largest tail bound over the grid, `None` if any point lacked one.
    pub max_tail_bound: Option<f64>,
}

impl ZeroScan {
    /// `min|F| - max tail > 0`: no zero of `F` at the grid points.
    pub fn certified_nonzero(&self) -> bool {
        self.max_tail_bound.is_some_and(|tail| self.min_abs - tail > 0.0)
    }
}

/// Fits `A·q^n` over the second half of the nonzero coefficients: `q` from
/// the end-to-end ratio, `A` as the smallest amplitude covering every term.
fn fit_envelope(coeffs: &[Complex64]) -> Option<Envelope> {
    let last = coeffs.iter().rposition(|u| u.norm() > 0.0)?;
    if last + 1 < coeffs.len() {
        return Some(Envelope { amplitude: 0.0, ratio: 0.0, from: last + 1 });
    }
    let from = last / 2;
    if from == last {
        return None;
    }
    let (a, b) = (coeffs[from].norm(), coeffs[last].norm());
    let log_q = (b.ln() - a.ln()) / (last - from) as f64;
    let log_amp = (from..=last)
        .map(|k| coeffs[k].norm().ln() - k as f64 * log_q)
        .fold(f64::NEG_INFINITY, f64::max);
    let (amplitude, ratio) = (log_amp.exp(), log_q.exp());
    (amplitude.is_finite() && ratio.is_finite()).then_some(Envelope { amplitude, ratio, from })
}

/// Coefficients of `F` for a polynomial map.
pub fn fredholm_series(map: &MapSpec, n_cut: usize) -> Result<FredholmSeries, LabError> {
    if !map.is_polynomial() {
        return Err(LabError::UnsupportedFamily);
    }
    let mut coeffs = Vec::with_capacity(n_cut + 1);
    coeffs.push(Complex64::new(1.0, 0.0));
    let mut escaped_at = None;
    let mut z = map.marked_point();
    let mut u = Complex64::new(1.0, 0.0);
    for n in 1..=n_cut {
        if escaped_at.is_none() {
            let df = map.derivative_at(z);
            if df == Complex64::new(0.0, 0.0) {
                return Err(LabError::CoefficientBlowup { index: n });
            }
            if !df.is_finite() {
                escaped_at = Some(n - 1);
                u = Complex64::new(0.0, 0.0);
            } else {
                u /= df;
                if !u.is_finite() {
                    u = Complex64::new(0.0, 0.0);
                }
                z = map.eval(z);
            }
        }
        coeffs.push(u);
    }
    let envelope = fit_envelope(&coeffs);
    Ok(FredholmSeries { map: map.clone(), coeffs, envelope, escaped_at })
}

impl FredholmSeries {
    pub fn n_cut(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `A (|t|q)^{n+1} / (1 - |t|q)` for the terms beyond `n_cut`.
    pub fn tail_bound(&self, t_abs: f64) -> Option<f64> {
        let env = self.envelope?;
        let x = t_abs * env.ratio;
        if x >= 1.0 {
            return None;
        }
        Some(env.amplitude * x.powi(self.n_cut() as i32 + 1) / (1.0 - x))
    }

    pub fn eval(&self, t: Complex64) -> FredholmValue {
        let value = self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &u| acc * t + u);
        FredholmValue { t, value, tail_bound: self.tail_bound(t.norm()) }
    }

    /// Evaluates `F` on a polar grid of about `points` nodes in `|t| ≤ radius`.
    pub fn zero_scan(&self, radius: f64, points: usize) -> ZeroScan {
        let rings = ((points as f64).sqrt().ceil() as usize).max(1);
        let angles = points.div_ceil(rings).max(1);
        let mut scan = ZeroScan {
            radius,
            points: 0,
            min_abs: f64::INFINITY,
            argmin: Complex64::new(0.0, 0.0),
            max_tail_bound: Some(0.0),
        };
        for i in 1..=rings {
            let r = radius * i as f64 / rings as f64;
            for k in 0..angles {
                let t = Complex64::from_polar(r, std::f64::consts::TAU * k as f64 / angles as f64);
                let v = self.eval(t);
                scan.points += 1;
                if v.value.norm() < scan.min_abs {
                    scan.min_abs = v.value.norm();
                    scan.argmin = t;
                }
                scan.max_tail_bound = match (scan.max_tail_bound, v.tail_bound) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
        }
        scan
    }
}

/// `F(t)` truncated at `n_cut` together with its tail bound.
pub fn fredholm_eval(map: &MapSpec, t: Complex64, n_cut: usize) -> Result<FredholmValue, LabError> {
    if !(t.norm() < 1.0) {
        return Err(LabError::InvalidParameter("|t| must be below 1"));
    }
    Ok(fredholm_series(map, n_cut)?.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn closed_form(t: Complex64) -> Complex64 {
        (1.0 - t / 2.0) / (1.0 - t / 4.0)
    }

    #[test]
    fn chebyshev_values() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        assert_eq!(fredholm_eval(&map, c(0.0, 0.0), 100).unwrap().value, c(1.0, 0.0));
        let v = fredholm_eval(&map, c(0.5, 0.0), 100).unwrap();
        assert!((v.value - c(6.0 / 7.0, 0.0)).norm() < 1e-12);
        assert!(v.tail_bound.unwrap() < 1e-9);
        let series = fredholm_series(&map, 60).unwrap();
        assert_eq!(series.coeffs[3], c(-1.0 / 64.0, 0.0));
        let env = series.envelope.unwrap();
        assert!((env.ratio - 0.25).abs() < 1e-12 && (env.amplitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn chebyshev_zero_scan() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let scan = fredholm_series(&map, 200).unwrap().zero_scan(0.95, 1000);
        assert!(scan.points >= 1000);
        let oracle = (1.0 - 0.95 / 2.0) / (1.0 + 0.95 / 4.0);
        assert!(scan.min_abs >= oracle - 1e-9);
        assert!(scan.certified_nonzero());
    }

    #[test]
    fn tail_bound_self_consistency() {
        for (cre, cim) in [(-2.0, 0.0), (0.0, 1.0)] {
            let map = MapSpec::quadratic(c(cre, cim));
            let short = fredholm_series(&map, 40).unwrap();
            let long = fredholm_series(&map, 80).unwrap();
            for t in [c(0.3, 0.1), c(-0.6, 0.0), c(0.0, 0.8)] {
                let v = short.eval(t);
                if let Some(tail) = v.tail_bound {
                    assert!((long.eval(t).value - v.value).norm() <= tail + 1e-12, "c = {cre}+{cim}i, t = {t}");
                }
            }
        }
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let s = fredholm_series(&map, 100).unwrap();
        let t = c(0.7, 0.2);
        assert!((s.eval(t).value - closed_form(t)).norm() <= s.eval(t).tail_bound.unwrap() + 1e-12);
    }

    #[test]
    fn superattracting_blows_up() {
        let map = MapSpec::quadratic(c(-1.0, 0.0));
        assert_eq!(fredholm_series(&map, 10), Err(LabError::CoefficientBlowup { index: 2 }));
    }

    #[test]
    fn escaping_critical_orbit() {
        let map = MapSpec::quadratic(c(1.0, 0.0));
        let s = fredholm_series(&map, 50).unwrap();
        assert!(s.escaped_at.is_some());
        assert_eq!(s.tail_bound(0.9), Some(0.0));
    }
}
