//! First entries into `B(c, δ)` or `B(0, δ)` and the derivative bounds at them.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LabError;
use crate::cycles::{detect_attracting_cycle, DEFAULT_TOL};
use crate::disk::Disk;
use crate::map::MapSpec;
use crate::orbit::{iterate, OrbitTrace};
use crate::seeding::task_rng;

/// Log-scale tolerance of every bound check.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnTarget {
    /// Entries into `B(c, δ)`.
    CriticalValue,
    /// Entries into `B(0, δ)`; polynomials only.
    CriticalPoint,
}

impl ReturnTarget {
    pub fn point(self, map: &MapSpec) -> Option<Complex64> {
        match self {
            ReturnTarget::CriticalValue => Some(map.marked_point()),
            ReturnTarget::CriticalPoint => map.critical_point(),
        }
    }
}

/// `n` is the first time `n ≥ 1` with `|f^n(z) - target| ≤ δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnEvent {
    pub map: MapSpec,
    pub z: Complex64,
    pub delta: f64,
    pub target: ReturnTarget,
    pub n: usize,
    /// `z_0 … z_n`.
    pub orbit: OrbitTrace,
}

impl ReturnEvent {
    pub fn target_point(&self) -> Complex64 {
        self.target.point(&self.map).expect("event target exists")
    }

    pub fn entry_point(&self) -> Complex64 {
        self.orbit.points[self.n]
    }

    /// `log|Df^n(z)|`.
    pub fn log_derivative(&self) -> f64 {
        self.orbit.log_derivative(self.n)
    }
}

/// Scans `z_1 … z_{n_max}` for the first point in the closed ball
/// `B(target, δ)`. `None` on escape, exhausted budget, bad `δ` or a missing
/// target point.
pub fn first_entry(map: &MapSpec, z: Complex64, delta: f64, target: ReturnTarget, n_max: usize) -> Option<ReturnEvent> {
    let center = target.point(map)?;
    if !(delta > 0.0) {
        return None;
    }
    let mut w = z;
    for n in 1..=n_max {
        w = map.eval(w);
        if !w.is_finite() || map.has_escaped(w) {
            return None;
        }
        if (w - center).norm() <= delta {
            let orbit = iterate(map, z, n);
            return Some(ReturnEvent { map: map.clone(), z, delta, target, n, orbit });
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `|Df^n(z)| ≥ min(λ^{-n}|f^n(z)-c|/max(δ,|z-c|), |f^n(z)-c|/(12|z-c|))`,
    /// the second alternative only when `|z - c| > δ`.
    ReturnDisjunction,
    /// `|Df^n(z)| ≥ δ/(12|z|)·λ^{-n}`, or `λ^{-n}` when `|z| = δ`.
    ReturnPoly,
    /// `|Df^n(z)| ≥ min(δ₀/(12|z|), 1)·λ^{-n}`.
    CloseReturn,
}

/// Bounds are compared in log scale: `passed` iff `slack ≥ -BOUND_TOL`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub n: usize,
    pub lambda: f64,
    /// `log|Df^n(z)|`.
    pub log_lhs: f64,
    /// Log of the lower bound.
    pub log_rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(kind: BoundKind, n: usize, lambda: f64, log_lhs: f64, log_rhs: f64) -> Self {
        let slack = if log_rhs == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            log_lhs - log_rhs
        };
        BoundCheck { kind, n, lambda, log_lhs, log_rhs, slack, passed: slack >= -BOUND_TOL }
    }
}

/// Evaluates the bound that applies to the event's target.
pub fn check_return_bound(event: &ReturnEvent, lambda: f64) -> BoundCheck {
    let n = event.n;
    let decay = -(n as f64) * lambda.ln();
    let lhs = event.log_derivative();
    let target = event.target_point();
    match event.target {
        ReturnTarget::CriticalValue => {
            let reach = (event.entry_point() - target).norm().ln();
            let start = (event.z - target).norm();
            let mut rhs = decay + reach - start.max(event.delta).ln();
            if start > event.delta {
                rhs = rhs.min(reach - (12.0 * start).ln());
            }
            BoundCheck::new(BoundKind::ReturnDisjunction, n, lambda, lhs, rhs)
        }
        ReturnTarget::CriticalPoint => {
            let start = event.z.norm();
            let rhs = if start == event.delta {
                decay
            } else {
                event.delta.ln() - (12.0 * start).ln() + decay
            };
            BoundCheck::new(BoundKind::ReturnPoly, n, lambda, lhs, rhs)
        }
    }
}

/// Checks `|Df^n(z)| ≥ min(δ₀/(12|z|), 1)·λ^{-n}` at a closest return:
/// `|f^n(z)| ≤ δ₀` and `|f^n(z)| ≤ |f^j(z)|` for `0 ≤ j < n`.
pub fn check_close_return_bound(
    map: &MapSpec,
    z: Complex64,
    n: usize,
    lambda: f64,
    delta0: f64,
) -> Result<BoundCheck, LabError> {
    if !map.is_polynomial() {
        return Err(LabError::UnsupportedFamily);
    }
    if !(lambda > 1.0) || !(delta0 > 0.0) {
        return Err(LabError::InvalidParameter("need lambda > 1 and delta0 > 0"));
    }
    if n == 0 {
        return Err(LabError::PreconditionUnmet("n must be at least 1"));
    }
    if z == Complex64::new(0.0, 0.0) {
        return Err(LabError::PreconditionUnmet("z is the critical point"));
    }
    let orbit = iterate(map, z, n);
    if orbit.horizon() < n || orbit.escaped_at.is_some() {
        return Err(LabError::PreconditionUnmet("orbit escapes"));
    }
    let last = orbit.points[n].norm();
    if last > delta0 {
        return Err(LabError::PreconditionUnmet("|f^n(z)| exceeds delta0"));
    }
    if orbit.points[..n].iter().any(|w| w.norm() < last) {
        return Err(LabError::PreconditionUnmet("not a closest return"));
    }
    let rhs = (delta0 / (12.0 * z.norm())).min(1.0).ln() - n as f64 * lambda.ln();
    Ok(BoundCheck::new(BoundKind::CloseReturn, n, lambda, orbit.log_derivative(n), rhs))
}

/// Times `n ≤ n_max` with `|f^n(z)| ≤ δ₀` and `|f^n(z)| ≤ |f^j(z)|` for all `j < n`.
pub fn harvest_close_returns(map: &MapSpec, z: Complex64, n_max: usize, delta0: f64) -> Vec<usize> {
    let mut best = z.norm();
    let mut w = z;
    let mut out = Vec::new();
    for n in 1..=n_max {
        w = map.eval(w);
        if !w.is_finite() || map.has_escaped(w) {
            break;
        }
        let r = w.norm();
        if r <= best {
            best = r;
            if r <= delta0 {
                out.push(n);
            }
        }
    }
    out
}

/// Where campaign start points are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum SampleRegion {
    Segment { from: Complex64, to: Complex64 },
    Disk { center: Complex64, radius: f64 },
}

impl SampleRegion {
    pub fn from_disk(disk: &Disk) -> Self {
        SampleRegion::Disk { center: disk.center, radius: disk.radius }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Complex64 {
        match *self {
            SampleRegion::Segment { from, to } => from + (to - from) * rng.gen::<f64>(),
            SampleRegion::Disk { center, radius } => {
                let r = radius * rng.gen::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.gen::<f64>();
                center + Complex64::from_polar(r, theta)
            }
        }
    }
}

/// A failed check with everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub map: MapSpec,
    pub z: Complex64,
    pub delta: f64,
    pub lambda: f64,
    pub n: usize,
    pub seed: u64,
    pub task: u64,
    pub target: Option<ReturnTarget>,
    pub check: BoundCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub tasks: u64,
    pub events_critical_value: usize,
    pub events_critical_point: usize,
    pub failures: Vec<Counterexample>,
    pub min_slack: f64,
    /// Period of an attracting cycle found before the campaign, if any. The
    /// bounds assume there is none, so results are conditional on this.
    pub sink_period: Option<usize>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sink_period(map: &MapSpec) -> Option<usize> {
    match detect_attracting_cycle(map, 64, 100_000, DEFAULT_TOL) {
        Ok(Some(rec)) => Some(rec.period),
        _ => None,
    }
}

const BATCH: u64 = 1024;

/// Draws start points until `events` first entries have been harvested for
/// each applicable target (at most `max_tasks` draws) and checks each of them.
#[allow(clippy::too_many_arguments)]
pub fn return_bound_campaign(
    map: &MapSpec,
    region: SampleRegion,
    delta: f64,
    lambda: f64,
    events: usize,
    n_max: usize,
    seed: u64,
    max_tasks: u64,
) -> Result<CampaignReport, LabError> {
    if !(delta > 0.0) || !(lambda > 1.0) {
        return Err(LabError::InvalidParameter("need delta > 0 and lambda > 1"));
    }
    let targets: Vec<ReturnTarget> = [ReturnTarget::CriticalValue, ReturnTarget::CriticalPoint]
        .into_iter()
        .filter(|t| t.point(map).is_some())
        .collect();
    let mut report = CampaignReport {
        tasks: 0,
        events_critical_value: 0,
        events_critical_point: 0,
        failures: Vec::new(),
        min_slack: f64::INFINITY,
        sink_period: sink_period(map),
    };
    let mut counts = [0usize; 2];
    while report.tasks < max_tasks && targets.iter().any(|&t| counts[t as usize] < events) {
        let hi = (report.tasks + BATCH).min(max_tasks);
        let batch: Vec<(u64, Complex64, Vec<(ReturnTarget, BoundCheck)>)> = (report.tasks..hi)
            .into_par_iter()
            .map(|task| {
                let z = region.sample(&mut task_rng(seed, task));
                let checks = targets
                    .iter()
                    .filter(|&&t| t != ReturnTarget::CriticalPoint || z.norm() >= delta)
                    .filter_map(|&t| first_entry(map, z, delta, t, n_max).map(|ev| (t, check_return_bound(&ev, lambda))))
                    .collect();
                (task, z, checks)
            })
            .collect();
        for (task, z, checks) in batch {
            for (target, check) in checks {
                let slot = &mut counts[target as usize];
                if *slot >= events {
                    continue;
                }
                *slot += 1;
                report.min_slack = report.min_slack.min(check.slack);
                if !check.passed {
                    report.failures.push(Counterexample {
                        map: map.clone(),
                        z,
                        delta,
                        lambda,
                        n: check.n,
                        seed,
                        task,
                        target: Some(target),
                        check,
                    });
                }
            }
            report.tasks = task + 1;
            if targets.iter().all(|&t| counts[t as usize] >= events) {
                break;
            }
        }
    }
    report.events_critical_value = counts[ReturnTarget::CriticalValue as usize];
    report.events_critical_point = counts[ReturnTarget::CriticalPoint as usize];
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloseReturnReport {
    pub starts: u64,
    pub checks: usize,
    pub failures: Vec<Counterexample>,
    pub min_slack: f64,
    pub sink_period: Option<usize>,
}

/// Harvests closest returns from `starts` seeded orbits of length `n_max` and
/// checks each one.
#[allow(clippy::too_many_arguments)]
pub fn close_return_campaign(
    map: &MapSpec,
    region: SampleRegion,
    lambda: f64,
    delta0: f64,
    starts: u64,
    n_max: usize,
    seed: u64,
) -> Result<CloseReturnReport, LabError> {
    if !map.is_polynomial() {
        return Err(LabError::UnsupportedFamily);
    }
    if !(lambda > 1.0) || !(delta0 > 0.0) {
        return Err(LabError::InvalidParameter("need lambda > 1 and delta0 > 0"));
    }
    let per_task: Vec<(u64, Complex64, Vec<BoundCheck>)> = (0..starts)
        .into_par_iter()
        .map(|task| {
            let z = region.sample(&mut task_rng(seed, task));
            let checks = if z.norm() == 0.0 {
                Vec::new()
            } else {
                harvest_close_returns(map, z, n_max, delta0)
                    .into_iter()
                    .filter_map(|n| check_close_return_bound(map, z, n, lambda, delta0).ok())
                    .collect()
            };
            (task, z, checks)
        })
        .collect();
    let mut report =
        CloseReturnReport { starts, checks: 0, failures: Vec::new(), min_slack: f64::INFINITY, sink_period: sink_period(map) };
    for (task, z, checks) in per_task {
        for check in checks {
            report.checks += 1;
            report.min_slack = report.min_slack.min(check.slack);
            if !check.passed {
                report.failures.push(Counterexample {
                    map: map.clone(),
                    z,
                    delta: delta0,
                    lambda,
                    n: check.n,
                    seed,
                    task,
                    target: None,
                    check,
                });
            }
        }
    }
    Ok(report)
}
