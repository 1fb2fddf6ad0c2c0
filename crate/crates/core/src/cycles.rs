//! Attracting cycles: detection along the marked orbit, Newton refinement of
//! `f^p(z) = z`, and basin membership.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::MapSpec;

/// Cauchy threshold for the near-periodicity scan.
pub const CAUCHY_TOL: f64 = 1e-8;
/// Default indifference margin around `|multiplier| = 1`.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Newton iteration cap in [`refine_cycle`].
pub const NEWTON_CAP: usize = 200;
/// Below this `|Df^p - 1|` a Newton step is refused.
pub const SINGULAR_DERIVATIVE: f64 = 1e-30;

/// Near a multiple root of `f^p(z) - z` the refined point is only accurate
/// to about `sqrt(ε)`, and so is the multiplier.
fn multiplier_resolution() -> f64 {
    4.0 * f64::EPSILON.sqrt()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CycleError {
    #[error("orbit is near-periodic with period {period} but |multiplier| = {modulus} is indistinguishable from 1")]
    AmbiguousConvergence { period: usize, modulus: f64 },
    #[error("refinement did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("|Df^p - 1| vanished at {at}")]
    DerivativeSingular { at: Complex64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// A refined periodic cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub period: usize,
    pub points: Vec<Complex64>,
    pub multiplier: Complex64,
    /// `max_i |f^p(z_i) - z_i|`.
    pub residual: f64,
}

impl CycleRecord {
    /// `log|multiplier| / p`, the exponent of every orbit attracted to the cycle.
    pub fn exponent(&self) -> f64 {
        self.multiplier.norm().ln() / self.period as f64
    }

    pub fn is_attracting(&self) -> bool {
        self.multiplier.norm() < 1.0
    }

    fn min_gap(&self) -> Option<f64> {
        let mut gap: Option<f64> = None;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let d = (a - b).norm();
                gap = Some(gap.map_or(d, |g| g.min(d)));
            }
        }
        gap
    }
}

/// `(f^p(z), Df^p(z))`.
fn iterate_with_derivative(map: &MapSpec, z: Complex64, p: usize) -> (Complex64, Complex64) {
    let mut w = z;
    let mut der = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        der *= map.derivative_at(w);
        w = map.eval(w);
    }
    (w, der)
}

fn iterate_n(map: &MapSpec, z: Complex64, p: usize) -> Complex64 {
    (0..p).fold(z, |w, _| map.eval(w))
}

/// Newton's method on `g(z) = f^p(z) - z` starting from `guess`.
///
/// Converges once the Newton step is at rounding level; the best iterate seen
/// is kept, so slowly converging multiple roots still return when their
/// residual is below `tol`.
pub fn refine_cycle(map: &MapSpec, guess: Complex64, p: usize, tol: f64) -> Result<CycleRecord, CycleError> {
    if p == 0 {
        return Err(CycleError::InvalidParameter("period must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(CycleError::InvalidParameter("tol must be positive"));
    }
    let mut z = guess;
    let mut best = (f64::INFINITY, guess);
    let mut done = false;
    let mut iterations = 0;
    while iterations < NEWTON_CAP {
        iterations += 1;
        let (fp, dfp) = iterate_with_derivative(map, z, p);
        if !fp.is_finite() || !dfp.is_finite() {
            break;
        }
        let g = fp - z;
        let res = g.norm();
        if res < best.0 {
            best = (res, z);
        }
        if res == 0.0 || done {
            break;
        }
        let slope = dfp - 1.0;
        if slope.norm() < SINGULAR_DERIVATIVE {
            if res < tol {
                break;
            }
            return Err(CycleError::DerivativeSingular { at: z });
        }
        let step = g / slope;
        z -= step;
        if !z.is_finite() {
            break;
        }
        done = step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0);
    }
    if !(best.0 < tol) {
        return Err(CycleError::NoConvergence { iterations, residual: best.0 });
    }
    let record = cycle_from_point(map, best.1, p);
    if !(record.residual < tol) {
        return Err(CycleError::NoConvergence { iterations, residual: record.residual });
    }
    Ok(record)
}

fn cycle_from_point(map: &MapSpec, z: Complex64, p: usize) -> CycleRecord {
    let mut points = Vec::with_capacity(p);
    let mut w = z;
    let mut multiplier = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        points.push(w);
        multiplier *= map.derivative_at(w);
        w = map.eval(w);
    }
    let residual = points
        .iter()
        .map(|&q| (iterate_n(map, q, p) - q).norm())
        .fold(0.0, f64::max);
    CycleRecord { period: p, points, multiplier, residual }
}

/// Looks for an attracting cycle attracting the marked point.
///
/// The orbit is scanned for a window of `2·max_period` consecutive points that
/// repeat with some period `p ≤ max_period` to within [`CAUCHY_TOL`]; the
/// smallest such `p` is refined and reduced to its minimal period. Returns
/// `Ok(None)` when the orbit escapes, never settles within `max_iter`, or
/// settles onto a repelling cycle. Cycles whose multiplier is within
/// `max(tol, 4·sqrt(ε))` of the unit circle are reported as
/// [`CycleError::AmbiguousConvergence`].
pub fn detect_attracting_cycle(
    map: &MapSpec,
    max_period: usize,
    max_iter: usize,
    tol: f64,
) -> Result<Option<CycleRecord>, CycleError> {
    if max_period == 0 {
        return Err(CycleError::InvalidParameter("max_period must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(CycleError::InvalidParameter("tol must be positive"));
    }
    let window = 2 * max_period;
    let keep = window + max_period;
    let mut history: Vec<Complex64> = Vec::with_capacity(keep * 2);
    let mut z = map.marked_point();
    for _ in 0..max_iter {
        if map.has_escaped(z) {
            return Ok(None);
        }
        history.push(z);
        if history.len() >= 2 * keep {
            history.drain(..history.len() - keep);
        }
        if history.len() >= keep {
            if let Some(p) = near_period(&history, max_period, window) {
                return classify(map, z, p, tol);
            }
        }
        z = map.eval(z);
    }
    Ok(None)
}

fn near_period(history: &[Complex64], max_period: usize, window: usize) -> Option<usize> {
    let n = history.len();
    let last = history[n - 1];
    (1..=max_period).find(|&p| {
        (last - history[n - 1 - p]).norm() < CAUCHY_TOL
            && (n - window..n).all(|k| (history[k] - history[k - p]).norm() < CAUCHY_TOL)
    })
}

fn classify(map: &MapSpec, z: Complex64, p: usize, tol: f64) -> Result<Option<CycleRecord>, CycleError> {
    let mut record = refine_cycle(map, z, p, tol)?;
    // reduce to the minimal period
    let same_tol = tol.max(CAUCHY_TOL);
    for q in 1..record.period {
        if record.period % q == 0 && (iterate_n(map, record.points[0], q) - record.points[0]).norm() <= same_tol {
            record = refine_cycle(map, record.points[0], q, tol)?;
            break;
        }
    }
    let modulus = record.multiplier.norm();
    let band = tol.max(multiplier_resolution());
    if modulus < 1.0 - band {
        Ok(Some(record))
    } else if modulus <= 1.0 + band {
        Err(CycleError::AmbiguousConvergence { period: record.period, modulus })
    } else {
        Ok(None)
    }
}

/// Outcome of [`in_basin`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasinVerdict {
    pub in_basin: bool,
    /// The iteration budget ran out before the orbit was captured or escaped.
    pub exhausted: bool,
    pub steps: usize,
}

/// Radius of the capture disk around each cycle point.
pub fn capture_radius(cycle: &CycleRecord) -> f64 {
    let base = 0.25 * cycle.min_gap().unwrap_or(1.0);
    (1.0 - cycle.multiplier.norm()).max(0.0) * base
}

/// Whether the orbit of `z` enters the capture disk of an attracting cycle
/// within `max_iter` steps.
pub fn in_basin(map: &MapSpec, z: Complex64, cycle: &CycleRecord, max_iter: usize) -> BasinVerdict {
    let radius = capture_radius(cycle);
    let mut w = z;
    for steps in 0..=max_iter {
        if cycle.points.iter().any(|&q| (w - q).norm() < radius) {
            return BasinVerdict { in_basin: true, exhausted: false, steps };
        }
        if map.has_escaped(w) {
            return BasinVerdict { in_basin: false, exhausted: false, steps };
        }
        w = map.eval(w);
    }
    BasinVerdict { in_basin: false, exhausted: true, steps: max_iter }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn detect(cre: f64, cim: f64) -> Result<Option<CycleRecord>, CycleError> {
        detect_attracting_cycle(&MapSpec::quadratic(c(cre, cim)), 16, 100_000, DEFAULT_TOL)
    }

    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (f(lo) < 0.0) == (f(mid) < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn superattracting_fixed_point() {
        let rec = detect(0.0, 0.0).unwrap().unwrap();
        assert_eq!(rec.period, 1);
        assert_eq!(rec.points, vec![c(0.0, 0.0)]);
        assert_eq!(rec.multiplier, c(0.0, 0.0));
        assert_eq!(rec.exponent(), f64::NEG_INFINITY);
    }

    #[test]
    fn superattracting_two_cycle() {
        let rec = detect(-1.0, 0.0).unwrap().unwrap();
        assert_eq!(rec.period, 2);
        let mut re: Vec<f64> = rec.points.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(re, vec![-1.0, 0.0]);
        assert_eq!(rec.multiplier.norm(), 0.0);
    }

    #[test]
    fn attracting_fixed_point_quadratic_formula() {
        let rec = detect(-0.6, 0.0).unwrap().unwrap();
        // oracle: smaller root of z^2 - z - 0.6
        let fixed = (1.0 - 3.4f64.sqrt()) / 2.0;
        assert_eq!(rec.period, 1);
        assert!((rec.points[0].re - fixed).abs() < 1e-12);
        assert!((rec.points[0].re + 0.421954).abs() < 1e-6);
        assert!((rec.multiplier.re - 2.0 * fixed).abs() < 1e-12);
        assert!(rec.multiplier.norm() < 1.0);
        assert!(rec.residual < DEFAULT_TOL);
    }

    #[test]
    fn misiurewicz_and_escaping_parameters_have_no_sink() {
        assert_eq!(detect(0.0, 1.0).unwrap(), None);
        assert_eq!(detect(-2.0, 0.0).unwrap(), None);
        assert_eq!(detect(1.0, 0.0).unwrap(), None);
    }

    #[test]
    fn parabolic_parameter_is_not_attracting() {
        match detect(0.25, 0.0) {
            Err(CycleError::AmbiguousConvergence { period: 1, .. }) | Ok(None) => {}
            other => panic!("parabolic c = 1/4 misclassified: {other:?}"),
        }
    }

    #[test]
    fn refine_two_cycle_near_zero() {
        let map = MapSpec::quadratic(c(-1.0, 0.0));
        let rec = refine_cycle(&map, c(0.01, 0.0), 2, 1e-12).unwrap();
        assert!(rec.points[0].norm() < 1e-12);
        assert!(rec.residual < 1e-12);
    }

    #[test]
    fn refine_fixed_point() {
        let map = MapSpec::quadratic(c(-0.6, 0.0));
        let rec = refine_cycle(&map, c(-0.4, 0.0), 1, 1e-12).unwrap();
        assert!((rec.points[0].re + 0.4219544457292887).abs() < 1e-12);
    }

    #[test]
    fn refine_exponential_fixed_point() {
        let map = MapSpec::exponential(c(0.3, 0.0)).unwrap();
        let rec = refine_cycle(&map, c(0.5, 0.0), 1, 1e-12).unwrap();
        let oracle = bisect(|x| 0.3 * x.exp() - x, 0.0, 1.0);
        assert!((rec.points[0].re - oracle).abs() < 1e-12);
        assert!((rec.points[0].re - 0.489).abs() < 1e-3);
        // DE = E, and E(z*) = z*
        assert!((rec.multiplier - rec.points[0]).norm() < 1e-12);
    }

    #[test]
    fn exponential_detection() {
        let map = MapSpec::exponential(c(0.3, 0.0)).unwrap();
        let rec = detect_attracting_cycle(&map, 8, 10_000, DEFAULT_TOL).unwrap().unwrap();
        assert_eq!(rec.period, 1);
        assert!((rec.points[0].re - 0.4894).abs() < 1e-3);
    }

    #[test]
    fn refine_reports_singular_derivative() {
        // z^2 + 1/4 at z = 1/2: f(z) - z has a double root with derivative 0,
        // but the residual there is exactly 0, so it converges.
        let map = MapSpec::quadratic(c(0.25, 0.0));
        assert!(refine_cycle(&map, c(0.5, 0.0), 1, 1e-12).is_ok());
        // z^2 + 1 from 1/2: Df - 1 = 0, residual 3/4.
        let map = MapSpec::quadratic(c(1.0, 0.0));
        assert!(matches!(
            refine_cycle(&map, c(0.5, 0.0), 1, 1e-12),
            Err(CycleError::DerivativeSingular { .. })
        ));
    }

    #[test]
    fn refine_without_root_fails() {
        let map = MapSpec::quadratic(c(5.0, 0.0));
        assert!(matches!(
            refine_cycle(&map, c(100.0, 0.0), 3, 1e-12),
            Err(CycleError::NoConvergence { .. })
        ));
    }

    #[test]
    fn invalid_parameters() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        assert!(detect_attracting_cycle(&map, 0, 10, 1e-9).is_err());
        assert!(detect_attracting_cycle(&map, 1, 10, 0.0).is_err());
        assert!(refine_cycle(&map, c(0.0, 0.0), 0, 1e-9).is_err());
    }

    #[test]
    fn basin_membership() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let sink = detect_attracting_cycle(&map, 4, 100, DEFAULT_TOL).unwrap().unwrap();
        assert!(in_basin(&map, c(0.5, 0.0), &sink, 100).in_basin);
        let out = in_basin(&map, c(3.0, 0.0), &sink, 100);
        assert!(!out.in_basin && !out.exhausted);

        let map = MapSpec::quadratic(c(-1.0, 0.0));
        let sink = detect_attracting_cycle(&map, 4, 100, DEFAULT_TOL).unwrap().unwrap();
        // oracle: direct iteration of -0.99 settles onto {0, -1}
        let mut w = c(-0.99, 0.0);
        for _ in 0..50 {
            w = map.eval(w);
        }
        assert!(w.norm() < 1e-12 || (w + 1.0).norm() < 1e-12);
        assert!(in_basin(&map, c(-0.99, 0.0), &sink, 1000).in_basin);
    }

    #[test]
    fn basin_budget_exhaustion_is_flagged() {
        let map = MapSpec::quadratic(c(-0.6, 0.0));
        let sink = detect(-0.6, 0.0).unwrap().unwrap();
        let v = in_basin(&map, c(1.2, 0.3), &sink, 0);
        assert!(v.exhausted && !v.in_basin);
    }

    #[test]
    fn emitted_records_are_sound() {
        for &(re, im) in &[(0.0, 0.0), (-1.0, 0.0), (-0.6, 0.0), (-0.1, 0.65), (-1.3, 0.0), (-0.12, 0.75)] {
            let map = MapSpec::quadratic(c(re, im));
            if let Some(rec) = detect_attracting_cycle(&map, 16, 200_000, DEFAULT_TOL).unwrap() {
                let again = cycle_from_point(&map, rec.points[0], rec.period);
                assert!(again.residual < DEFAULT_TOL);
                assert!(again.multiplier.norm() < 1.0);
                for q in 1..rec.period {
                    if rec.period % q == 0 {
                        assert!((iterate_n(&map, rec.points[0], q) - rec.points[0]).norm() > DEFAULT_TOL);
                    }
                }
            }
        }
    }
}
