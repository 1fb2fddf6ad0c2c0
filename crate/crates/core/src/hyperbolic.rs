//! Hyperbolic times, shadows, criticality counts and the density report.
//!
//! Shadows are only defined for the unicritical polynomials, whose single
//! critical point 0 lies in the plane. Everything here works on an
//! [`OrbitTrace`] and its cocycle `S_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disk::{preimage_hull, pullback_disk, Disk};
use crate::map::{DynamicsError, MapSpec};
use crate::orbit::{iterate, OrbitTrace};
use crate::pliss::PlissInput;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HyperbolicError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("trace has horizon {have}, need {need}")]
    TraceTooShort { have: usize, need: usize },
    #[error("log-derivative sum is -inf at index {index}")]
    MinusInfinityInWindow { index: usize },
    #[error("orbit hits the critical point at index {index}")]
    OrbitHitsCritical { index: usize },
    #[error("orbit escaped at index {at}")]
    Escaped { at: usize },
    #[error("hypothesis fails: χ_m = {chi} is not above {required}")]
    HypothesisFails { chi: f64, required: f64 },
    #[error("shadows need a critical point in the plane; exponential maps have none")]
    UnsupportedFamily,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// The `λ`-hyperbolic times `m ≤ m_max`: every tail `[i, m]` expands by at
/// least `λ^{m-i}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicTimeSet {
    pub lambda: f64,
    pub m_max: usize,
    pub times: Vec<usize>,
    pub density: f64,
}

/// Single pass: `m` is hyperbolic iff `S_m - m log λ ≥ max_{i<m} (S_i - i log λ)`.
pub fn hyperbolic_times(trace: &OrbitTrace, lambda: f64, m_max: usize) -> Result<HyperbolicTimeSet, HyperbolicError> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(HyperbolicError::InvalidParameter("lambda must be > 1"));
    }
    if trace.horizon() < m_max {
        return Err(HyperbolicError::TraceTooShort { have: trace.horizon(), need: m_max });
    }
    if let Some(index) = trace.cum_logderiv[..=m_max].iter().position(|&s| s == f64::NEG_INFINITY) {
        return Err(HyperbolicError::MinusInfinityInWindow { index });
    }
    let log_lambda = lambda.ln();
    let mut best = trace.cum_logderiv[0];
    let mut times = Vec::new();
    for m in 1..=m_max {
        let t = trace.cum_logderiv[m] - m as f64 * log_lambda;
        if t >= best {
            times.push(m);
        }
        best = best.max(t);
    }
    let density = if m_max == 0 { 0.0 } else { times.len() as f64 / m_max as f64 };
    Ok(HyperbolicTimeSet { lambda, m_max, times, density })
}

/// `φ(n) = -log|z_n|` for `0 ≤ n < m`.
pub fn phi_sequence(map: &MapSpec, trace: &OrbitTrace, m: usize) -> Result<Vec<f64>, HyperbolicError> {
    if !map.is_polynomial() {
        return Err(HyperbolicError::UnsupportedFamily);
    }
    if trace.len() < m {
        return Err(HyperbolicError::TraceTooShort { have: trace.horizon(), need: m });
    }
    trace.points[..m]
        .iter()
        .enumerate()
        .map(|(index, z)| {
            let d = z.norm();
            if d == 0.0 {
                Err(HyperbolicError::OrbitHitsCritical { index })
            } else {
                Ok(-d.ln())
            }
        })
        .collect()
}

/// Right end of the shadow `S(j, K) = (j, j + K·φ(j)]` as the last covered
/// integer, or `None` when it covers nothing.
fn shadow_last(j: usize, phi: f64, k: f64) -> Option<f64> {
    let end = j as f64 + k * phi;
    (phi > 0.0 && end >= (j + 1) as f64).then_some(end)
}

/// `counts[n]` = number of shadows `S(j, K)`, `0 ≤ j < phi.len()`, containing
/// `n`, for `0 ≤ n ≤ m`. Difference-array sweep, `O(m + #shadows)`.
pub fn shadow_cover_counts(phi: &[f64], k: f64, m: usize) -> Vec<u32> {
    let mut diff = vec![0i64; m + 2];
    for (j, &p) in phi.iter().enumerate() {
        if j >= m {
            break;
        }
        if let Some(end) = shadow_last(j, p, k) {
            let last = if end >= m as f64 { m } else { end.floor() as usize };
            diff[j + 1] += 1;
            diff[last + 1] -= 1;
        }
    }
    let mut counts = Vec::with_capacity(m + 1);
    let mut running = 0i64;
    for d in diff.iter().take(m + 1) {
        running += d;
        counts.push(running as u32);
    }
    counts
}

/// Least `C` with `Σ'_{k<n} max(φ(k), 0) ≤ C·n` for `1 ≤ n ≤ phi.len()`,
/// where `Σ'` drops the single largest term.
pub fn fit_cg(phi: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut largest = 0.0f64;
    let mut fit = 0.0f64;
    for (i, &p) in phi.iter().enumerate() {
        let pos = p.max(0.0);
        sum += pos;
        largest = largest.max(pos);
        fit = fit.max((sum - largest) / (i + 1) as f64);
    }
    fit
}

/// Shadows of one orbit up to horizon `m` and the set `A(N, K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowTable {
    pub phi: Vec<f64>,
    pub k: f64,
    pub n_cap: usize,
    /// `(j, j + K·φ(j))` for every nonempty shadow.
    pub shadows: Vec<(usize, f64)>,
    /// `cover[n]` for `0 ≤ n ≤ m`.
    pub cover: Vec<u32>,
    /// `in_a[n]`: `n` lies in at most `N` shadows (`in_a[0]` is unused).
    pub in_a: Vec<bool>,
    pub c_g_fit: f64,
    /// `#(A(N,K) ∩ [1, m]) / m`.
    pub a_density: f64,
    /// `1 - C_g·K/N`.
    pub density_bound: f64,
}

impl ShadowTable {
    pub fn from_phi(phi: Vec<f64>, k: f64, n_cap: usize) -> Self {
        let m = phi.len();
        let cover = shadow_cover_counts(&phi, k, m);
        let in_a: Vec<bool> = cover.iter().map(|&c| c as usize <= n_cap).collect();
        let shadows = phi
            .iter()
            .enumerate()
            .filter_map(|(j, &p)| shadow_last(j, p, k).map(|_| (j, j as f64 + k * p)))
            .collect();
        let c_g_fit = fit_cg(&phi);
        let a_count = in_a.iter().skip(1).filter(|&&b| b).count();
        let a_density = if m == 0 { 1.0 } else { a_count as f64 / m as f64 };
        let density_bound = if n_cap == 0 { f64::NEG_INFINITY } else { 1.0 - c_g_fit * k / n_cap as f64 };
        ShadowTable { phi, k, n_cap, shadows, cover, in_a, c_g_fit, a_density, density_bound }
    }

    pub fn horizon(&self) -> usize {
        self.phi.len()
    }

    /// Whether the shadow-counting density bound holds with the fitted constant.
    pub fn density_bound_holds(&self) -> bool {
        self.a_density >= self.density_bound
    }
}

/// Shadow table over the whole trace, `m = trace.horizon()`.
pub fn shadow_table(map: &MapSpec, trace: &OrbitTrace, k: f64, n_cap: usize) -> Result<ShadowTable, HyperbolicError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(HyperbolicError::InvalidParameter("K must be positive"));
    }
    let phi = phi_sequence(map, trace, trace.horizon())?;
    Ok(ShadowTable::from_phi(phi, k, n_cap))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalityMode {
    /// Count `j` with `|z_{n-j}| ≤ C·r·λ^{-j}`.
    ShadowProxy,
    /// Pull `B(z_n, r)` back with certified disks and count degenerate steps.
    CertifiedPullback,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityOptions {
    pub proxy_constant: f64,
    pub proxy_lambda: f64,
    /// Pullback radii beyond this lose certification.
    pub radius_cap: f64,
}

impl Default for CriticalityOptions {
    fn default() -> Self {
        CriticalityOptions { proxy_constant: 1.0, proxy_lambda: 1.0, radius_cap: 2.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub n: usize,
    pub r: f64,
    pub mode: CriticalityMode,
    pub count: u32,
    pub certified: bool,
    /// Pullback radii for steps `0..=n` (certified mode only).
    pub radii: Vec<f64>,
}

impl CriticalityReport {
    /// Least `C` with `radii[j] ≤ C·r·λ^{-j}`.
    pub fn telescope_constant(&self, lambda: f64) -> Option<f64> {
        if self.radii.is_empty() || self.r <= 0.0 {
            return None;
        }
        Some(
            self.radii
                .iter()
                .enumerate()
                .map(|(j, &rad)| rad / (self.r * lambda.powi(-(j as i32))))
                .fold(0.0, f64::max),
        )
    }
}

fn proxy_count(trace: &OrbitTrace, n: usize, r: f64, opts: &CriticalityOptions) -> u32 {
    (1..=n)
        .filter(|&j| trace.points[n - j].norm() <= opts.proxy_constant * r * opts.proxy_lambda.powi(-(j as i32)))
        .count() as u32
}

/// Upper estimate of how many critical points the branch of `f^n` from the
/// component around `z_0` onto `B(z_n, r)` passes through.
pub fn criticality_count(
    map: &MapSpec,
    trace: &OrbitTrace,
    n: usize,
    r: f64,
    mode: CriticalityMode,
    opts: &CriticalityOptions,
) -> Result<CriticalityReport, HyperbolicError> {
    if !map.is_polynomial() {
        return Err(HyperbolicError::UnsupportedFamily);
    }
    if trace.horizon() < n {
        return Err(HyperbolicError::TraceTooShort { have: trace.horizon(), need: n });
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(HyperbolicError::InvalidParameter("r must be positive"));
    }
    let mut report = CriticalityReport { n, r, mode, count: 0, certified: false, radii: Vec::new() };
    match mode {
        CriticalityMode::ShadowProxy => {
            report.count = proxy_count(trace, n, r, opts);
        }
        CriticalityMode::CertifiedPullback => {
            let mut disk = Disk::new(trace.points[n], r)?;
            report.radii.push(r);
            let mut count = 0;
            for j in 1..=n {
                disk = match pullback_disk(map, &disk, trace.points[n - j]) {
                    Ok(d) => d,
                    Err(DynamicsError::DegenerateBranch) => {
                        count += 1;
                        preimage_hull(map, &disk)?
                    }
                    Err(e) => return Err(e.into()),
                };
                report.radii.push(disk.radius);
                if disk.radius > opts.radius_cap {
                    report.count = proxy_count(trace, n, r, opts);
                    return Ok(report);
                }
            }
            report.count = count;
            report.certified = true;
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Radius of the target balls `B(z_n, ρ)`.
    pub rho: f64,
    /// Overrides `K_0 = 1/log(λ e^{ε0/4})`.
    pub k0: Option<f64>,
    /// Overrides `N = ⌊2 C_g K_0 / θ⌋ + 1`.
    pub n_cap: Option<usize>,
    pub mode: CriticalityMode,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { rho: 0.1, k0: None, n_cap: None, mode: CriticalityMode::ShadowProxy }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub chi_m: f64,
    pub required: f64,
    /// `λ e^{ε0/2}`, the rate of the hyperbolic times.
    pub rate: f64,
    pub theta: f64,
    pub hyperbolic_density: f64,
    pub k0: f64,
    pub n_cap: usize,
    pub c_g_fit: f64,
    pub a_density: f64,
    pub hyperbolic_times: Vec<usize>,
    /// `n ∈ A(N, K_0)` for `n` in `0..=m`.
    pub in_a: Vec<bool>,
    /// Shadow cover count of each `n` in `0..=m`.
    pub cover: Vec<u32>,
    /// `H_m = hyperbolic times ∩ A(N, K_0)`.
    pub h_times: Vec<usize>,
    pub density: f64,
    /// `(n, count)` for every `n ∈ H_m`.
    pub criticality: Vec<(usize, u32)>,
    /// `n ∈ H_m` whose criticality count exceeds `N`.
    pub violations: Vec<usize>,
    pub all_certified: bool,
}

/// Checks `(1/m) log|Df^m(z)| > ε0 + log λ`, then builds `H_m` from the
/// `λe^{ε0/2}`-hyperbolic times that lie in `A(N, K_0)` and counts
/// criticality at each of them.
pub fn hyperbolic_density_report(
    map: &MapSpec,
    z: num_complex::Complex64,
    lambda: f64,
    eps0: f64,
    m: usize,
    opts: &DensityOptions,
) -> Result<DensityReport, HyperbolicError> {
    if !(lambda > 1.0) || !(eps0 > 0.0) || m == 0 {
        return Err(HyperbolicError::InvalidParameter("need lambda > 1, eps0 > 0, m >= 1"));
    }
    let trace = iterate(map, z, m);
    if let Some(at) = trace.escaped_at {
        return Err(HyperbolicError::Escaped { at });
    }
    let chi_m = trace.chi(m);
    let required = eps0 + lambda.ln();
    if !(chi_m > required) {
        return Err(HyperbolicError::HypothesisFails { chi: chi_m, required });
    }
    let rate = lambda * (eps0 / 2.0).exp();
    let hyp = hyperbolic_times(&trace, rate, m)?;

    let steps: Vec<f64> = (1..=m).map(|j| trace.cum_logderiv[j] - trace.cum_logderiv[j - 1]).collect();
    let bound = steps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let theta = PlissInput::new(steps, bound, rate.ln(), chi_m).theta();

    let k0 = opts.k0.unwrap_or(1.0 / (lambda * (eps0 / 4.0).exp()).ln());
    let phi = phi_sequence(map, &trace, m)?;
    let c_g_fit = fit_cg(&phi);
    let n_cap = opts.n_cap.unwrap_or((2.0 * c_g_fit * k0 / theta).floor() as usize + 1);
    let table = ShadowTable::from_phi(phi, k0, n_cap);

    let h_times: Vec<usize> = hyp.times.iter().copied().filter(|&n| table.in_a[n]).collect();
    let in_a = table.in_a;
    let crit_opts = CriticalityOptions { proxy_lambda: lambda * (eps0 / 4.0).exp(), ..Default::default() };
    let counts: Vec<Result<CriticalityReport, HyperbolicError>> = h_times
        .par_iter()
        .map(|&n| criticality_count(map, &trace, n, opts.rho, opts.mode, &crit_opts))
        .collect();
    let mut criticality = Vec::with_capacity(counts.len());
    let mut all_certified = opts.mode == CriticalityMode::CertifiedPullback;
    for rep in counts {
        let rep = rep?;
        all_certified &= rep.certified;
        criticality.push((rep.n, rep.count));
    }
    let violations = criticality.iter().filter(|&&(_, c)| c as usize > n_cap).map(|&(n, _)| n).collect();
    Ok(DensityReport {
        chi_m,
        required,
        rate,
        theta,
        hyperbolic_density: hyp.density,
        k0,
        n_cap,
        c_g_fit,
        a_density: table.a_density,
        in_a,
        hyperbolic_times: hyp.times,
        cover: table.cover,
        density: h_times.len() as f64 / m as f64,
        h_times,
        criticality,
        violations,
        all_certified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `O(m²)` check straight from the definition, with the margin of each `m`.
    fn brute_force_times(trace: &OrbitTrace, lambda: f64, m_max: usize) -> Vec<(usize, bool, f64)> {
        let ll = lambda.ln();
        (1..=m_max)
            .map(|m| {
                let margin = (0..m)
                    .map(|i| trace.cum_logderiv[m] - trace.cum_logderiv[i] - (m - i) as f64 * ll)
                    .fold(f64::INFINITY, f64::min);
                (m, margin >= 0.0, margin)
            })
            .collect()
    }

    fn brute_force_cover(phi: &[f64], k: f64, m: usize) -> Vec<u32> {
        (0..=m)
            .map(|n| {
                (0..phi.len().min(m))
                    .filter(|&j| phi[j] > 0.0 && j < n && (n as f64) <= j as f64 + k * phi[j])
                    .count() as u32
            })
            .collect()
    }

    #[test]
    fn constant_expansion() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let trace = iterate(&map, c(2.0, 0.0), 100);
        let all = hyperbolic_times(&trace, 3.0, 100).unwrap();
        assert_eq!(all.times, (1..=100).collect::<Vec<_>>());
        assert_eq!(all.density, 1.0);
        let none = hyperbolic_times(&trace, 5.0, 100).unwrap();
        assert!(none.times.is_empty());
    }

    #[test]
    fn hyperbolic_time_errors() {
        let map = MapSpec::quadratic(c(-1.0, 0.0));
        let trace = iterate(&map, c(0.0, 0.0), 10);
        assert!(matches!(hyperbolic_times(&trace, 2.0, 10), Err(HyperbolicError::MinusInfinityInWindow { index: 1 })));
        assert!(matches!(hyperbolic_times(&trace, 2.0, 11), Err(HyperbolicError::TraceTooShort { .. })));
        assert!(hyperbolic_times(&trace, 1.0, 5).is_err());
    }

    #[test]
    fn misiurewicz_density_against_pliss() {
        let map = MapSpec::quadratic(c(0.0, 1.0));
        let trace = iterate(&map, c(0.0, 1.0), 1000);
        let set = hyperbolic_times(&trace, 2.0, 1000).unwrap();
        // preperiodic orbit: many margins are exact ties up to rounding
        for (t, member, margin) in brute_force_times(&trace, 2.0, 1000) {
            if margin.abs() > 1e-9 {
                assert_eq!(set.times.binary_search(&t).is_ok(), member, "m = {t}");
            }
        }
        // Pliss bound from the series' average
        let steps: Vec<f64> = (1..=1000).map(|j| trace.cum_logderiv[j] - trace.cum_logderiv[j - 1]).collect();
        let b = steps.iter().cloned().fold(f64::MIN, f64::max);
        let avg = trace.chi(1000);
        let theta = (avg - 2f64.ln()) / (b - 2f64.ln());
        assert!(set.density >= theta);
    }

    #[test]
    fn far_orbit_has_no_shadows() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let trace = iterate(&map, c(2.0, 0.0), 200);
        let table = shadow_table(&map, &trace, 3.0, 0).unwrap();
        assert!(table.phi.iter().all(|&p| p < 0.0));
        assert!(table.shadows.is_empty());
        assert!(table.in_a[1..].iter().all(|&b| b));
        assert_eq!(table.a_density, 1.0);
    }

    #[test]
    fn shadow_formula() {
        let mut phi = vec![-1.0; 12];
        phi[5] = 2.0;
        let counts = shadow_cover_counts(&phi, 1.0, 12);
        let covered: Vec<usize> = (0..=12).filter(|&n| counts[n] > 0).collect();
        assert_eq!(covered, vec![6, 7]);
    }

    #[test]
    fn shadow_truncates_at_horizon() {
        let phi = vec![100.0, -1.0, -1.0];
        let counts = shadow_cover_counts(&phi, 1.0, 3);
        assert_eq!(counts, vec![0, 1, 1, 1]);
    }

    #[test]
    fn misiurewicz_shadow_density() {
        let map = MapSpec::quadratic(c(0.0, 1.0));
        let trace = iterate(&map, c(0.0, 1.0), 1000);
        let table = shadow_table(&map, &trace, 1.0, 3).unwrap();
        assert_eq!(table.cover, brute_force_cover(&table.phi, 1.0, 1000));
        assert!(table.density_bound_holds());
        assert!(table.a_density >= 1.0 - table.c_g_fit / 3.0);
    }

    #[test]
    fn shadows_reject_exponential_and_critical_hits() {
        let e = MapSpec::exponential(c(1.0, 0.0)).unwrap();
        let trace = iterate(&e, c(0.0, 0.0), 3);
        assert_eq!(shadow_table(&e, &trace, 1.0, 1), Err(HyperbolicError::UnsupportedFamily));
        let map = MapSpec::quadratic(c(-1.0, 0.0));
        let trace = iterate(&map, c(-1.0, 0.0), 5);
        assert_eq!(shadow_table(&map, &trace, 1.0, 1), Err(HyperbolicError::OrbitHitsCritical { index: 1 }));
    }

    #[test]
    fn certified_pullback_along_fixed_point() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let trace = iterate(&map, c(2.0, 0.0), 20);
        let rep = criticality_count(&map, &trace, 20, 0.1, CriticalityMode::CertifiedPullback, &Default::default()).unwrap();
        assert_eq!(rep.count, 0);
        assert!(rep.certified);
        // oracle: branch tracking near the fixed point 2 contracts by ~1/4 per step
        for j in 1..rep.radii.len() {
            assert!(rep.radii[j] <= rep.radii[j - 1] * 0.27);
        }
        let fit = rep.telescope_constant(4f64.powf(0.95)).unwrap();
        assert!(fit <= 1.0, "telescope constant {fit}");
    }

    #[test]
    fn criticality_zero_steps() {
        let map = MapSpec::quadratic(c(0.0, 1.0));
        let trace = iterate(&map, c(0.0, 1.0), 5);
        for mode in [CriticalityMode::ShadowProxy, CriticalityMode::CertifiedPullback] {
            let rep = criticality_count(&map, &trace, 0, 0.1, mode, &Default::default()).unwrap();
            assert_eq!(rep.count, 0);
        }
    }

    #[test]
    fn degenerate_pullbacks_are_counted() {
        // orbit of z = 0.05 for c = -2 passes within 0.1 of the critical value;
        // the step that pulls a disk containing -2 back must be counted.
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let trace = iterate(&map, c(0.05, 0.0), 3);
        let rep = criticality_count(
            &map,
            &trace,
            2,
            0.5,
            CriticalityMode::CertifiedPullback,
            &CriticalityOptions { radius_cap: 100.0, ..Default::default() },
        )
        .unwrap();
        assert!(rep.count >= 1);
        let proxy = criticality_count(&map, &trace, 2, 0.5, CriticalityMode::ShadowProxy, &Default::default()).unwrap();
        assert!(proxy.count >= 1);
    }

    #[test]
    fn lost_certification_falls_back() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let trace = iterate(&map, c(0.05, 0.0), 3);
        let rep = criticality_count(
            &map,
            &trace,
            2,
            0.5,
            CriticalityMode::CertifiedPullback,
            &CriticalityOptions { radius_cap: 1e-3, ..Default::default() },
        )
        .unwrap();
        assert!(!rep.certified);
    }

    #[test]
    fn proxy_dominates_certified_on_misiurewicz_orbit() {
        let map = MapSpec::quadratic(c(0.0, 1.0));
        let trace = iterate(&map, c(0.0, 1.0), 50);
        let opts = CriticalityOptions::default();
        let proxy = criticality_count(&map, &trace, 50, 0.05, CriticalityMode::ShadowProxy, &opts).unwrap();
        let cert = criticality_count(&map, &trace, 50, 0.05, CriticalityMode::CertifiedPullback, &opts).unwrap();
        assert!(cert.certified);
        assert!(proxy.count >= cert.count);
    }

    #[test]
    fn density_report_constant_expansion() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let rep = hyperbolic_density_report(&map, c(2.0, 0.0), 1.5, 0.1, 1000, &Default::default()).unwrap();
        assert!((rep.chi_m - 4f64.ln()).abs() < 1e-12);
        assert_eq!(rep.density, 1.0);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn density_report_contracting_fails() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        // the orbit of 0.5 underflows onto the critical point, so χ_m = -inf
        let err = hyperbolic_density_report(&map, c(0.5, 0.0), 1.5, 0.1, 1000, &Default::default()).unwrap_err();
        assert!(matches!(err, HyperbolicError::HypothesisFails { .. }));
    }

    #[test]
    fn density_report_misiurewicz() {
        let map = MapSpec::quadratic(c(0.0, 1.0));
        let rep = hyperbolic_density_report(&map, c(0.0, 1.0), 1.2, 0.1, 10_000, &Default::default()).unwrap();
        assert!(rep.density >= rep.theta / 2.0);
        assert!(rep.hyperbolic_density > rep.theta);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn scan_equals_definition(re in -2.0f64..0.3, im in -1.2f64..1.2, zr in -1.0f64..1.0, zi in -1.0f64..1.0,
                                  lam in 1.01f64..3.0, m in 1usize..512) {
            let map = MapSpec::quadratic(c(re, im));
            let trace = iterate(&map, c(zr, zi), m);
            prop_assume!(trace.horizon() == m && trace.hit_critical_at.is_none());
            let set = hyperbolic_times(&trace, lam, m).unwrap();
            for (t, member, margin) in brute_force_times(&trace, lam, m) {
                if margin.abs() > 1e-9 {
                    prop_assert_eq!(set.times.binary_search(&t).is_ok(), member);
                }
            }
        }

        #[test]
        fn stabbing_equals_brute_force(phi in proptest::collection::vec(-3.0f64..6.0, 1..300), k in 0.1f64..4.0) {
            let m = phi.len();
            prop_assert_eq!(shadow_cover_counts(&phi, k, m), brute_force_cover(&phi, k, m));
        }

        #[test]
        fn a_sets_are_monotone(phi in proptest::collection::vec(-3.0f64..6.0, 1..200), k in 0.1f64..3.0,
                               dk in 0.0f64..2.0, n in 0usize..6) {
            let base = ShadowTable::from_phi(phi.clone(), k, n);
            let wider_n = ShadowTable::from_phi(phi.clone(), k, n + 1);
            let bigger_k = ShadowTable::from_phi(phi, k + dk, n);
            for i in 1..base.in_a.len() {
                prop_assert!(!base.in_a[i] || wider_n.in_a[i]);
                prop_assert!(!bigger_k.in_a[i] || base.in_a[i]);
            }
        }
    }
}
