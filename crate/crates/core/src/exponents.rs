//! Lyapunov exponent estimates along forward and backward orbits, and the
//! slow-recurrence classifier.
//!
//! Limits are not computable, so every `liminf`/`limsup` is replaced by a
//! finite-horizon tail statistic over an explicit window.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::MapSpec;
use crate::orbit::{iterate, OrbitTrace};
use crate::sum::NeumaierSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExponentError {
    #[error("window [{burn_in}, {n_max}] is empty")]
    InvalidWindow { burn_in: usize, n_max: usize },
    #[error("orbit escaped at step {at} before the end of the window")]
    Escaped { at: usize },
    #[error("backward orbit hit the critical value at step {step}")]
    BranchPointHit { step: usize },
    #[error("operation is only defined for unicritical polynomials")]
    UnsupportedFamily,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// What the finite series says about the exponent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    FiniteEstimate,
    /// Some factor `Df(z_k)` vanished, so `Df^n = 0` for all larger `n`.
    MinusInfinity,
    /// A polynomial orbit left the escape disk; the exponent is `+∞`.
    DivergesPlus,
    /// An exponential orbit crossed the real-part cutoff.
    Escaped,
}

/// The series `n ↦ χ_n = S_n / n` with suffix extrema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    /// `(n, χ_n)` for `n = 1..=horizon`.
    pub samples: Vec<(usize, f64)>,
    /// `running_inf_tail[i] = min_{j ≥ i} samples[j].1`; nondecreasing.
    pub running_inf_tail: Vec<f64>,
    /// `running_sup_tail[i] = max_{j ≥ i} samples[j].1`; nonincreasing.
    pub running_sup_tail: Vec<f64>,
    pub verdict: Verdict,
    pub escaped_at: Option<usize>,
}

impl ExponentEstimate {
    pub fn from_trace(map: &MapSpec, trace: &OrbitTrace) -> Self {
        let samples: Vec<(usize, f64)> = (1..trace.len()).map(|n| (n, trace.chi(n))).collect();
        let mut running_inf_tail = vec![0.0; samples.len()];
        let mut running_sup_tail = vec![0.0; samples.len()];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &(_, chi)) in samples.iter().enumerate().rev() {
            lo = lo.min(chi);
            hi = hi.max(chi);
            running_inf_tail[i] = lo;
            running_sup_tail[i] = hi;
        }
        let verdict = if trace.escaped_at.is_some() {
            if map.is_polynomial() {
                Verdict::DivergesPlus
            } else {
                Verdict::Escaped
            }
        } else if trace.hit_critical_at.is_some() {
            Verdict::MinusInfinity
        } else {
            Verdict::FiniteEstimate
        };
        ExponentEstimate { samples, running_inf_tail, running_sup_tail, verdict, escaped_at: trace.escaped_at }
    }

    pub fn horizon(&self) -> usize {
        self.samples.len()
    }

    /// `χ_n`, if `1 ≤ n ≤ horizon`.
    pub fn chi(&self, n: usize) -> Option<f64> {
        n.checked_sub(1).and_then(|i| self.samples.get(i)).map(|s| s.1)
    }

    pub fn last_chi(&self) -> Option<f64> {
        self.samples.last().map(|s| s.1)
    }

    /// `min χ_n` over `lo ≤ n ≤ hi` (clamped to `n ≥ 1` and the horizon).
    pub fn window_min(&self, lo: usize, hi: usize) -> Option<f64> {
        let lo = lo.max(1);
        let hi = hi.min(self.horizon());
        (lo <= hi).then(|| self.samples[lo - 1..hi].iter().map(|s| s.1).fold(f64::INFINITY, f64::min))
    }
}

/// `χ_n = (1/n) log|Df^n(z0)|` for `n = 1..=n_max`.
pub fn forward_exponent_series(map: &MapSpec, z0: Complex64, n_max: usize) -> ExponentEstimate {
    ExponentEstimate::from_trace(map, &iterate(map, z0, n_max))
}

/// Finite-horizon surrogate for `liminf χ_n`: the minimum of `χ_n` over
/// `burn_in ≤ n ≤ n_max`. This is a lower estimate, not a limit.
pub fn lower_exponent(map: &MapSpec, z0: Complex64, n_max: usize, burn_in: usize) -> Result<f64, ExponentError> {
    if burn_in >= n_max {
        return Err(ExponentError::InvalidWindow { burn_in, n_max });
    }
    let est = forward_exponent_series(map, z0, n_max);
    if let Some(at) = est.escaped_at {
        return Err(ExponentError::Escaped { at });
    }
    est.window_min(burn_in, n_max).ok_or(ExponentError::InvalidWindow { burn_in, n_max })
}

/// How a backward orbit picks among the `d` preimages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchPolicy {
    /// The root with argument `(arg(w) + 2πk)/d`, `arg` principal.
    FixedAngle(u32),
    /// A uniformly random root per step from a seeded ChaCha8 stream.
    RandomSeeded(u64),
    /// Greedy adversary: all roots share `|Df|`, so pick the one closest to
    /// the critical value, which makes the next factor as small as possible.
    MinDerivative,
}

/// Chooses a root index at each backward step. `roots[k]` has argument
/// `(arg(w) + 2πk)/d`.
pub trait BranchChooser {
    fn choose(&mut self, step: usize, roots: &[Complex64], critical_value: Complex64) -> usize;
}

impl<F> BranchChooser for F
where
    F: FnMut(usize, &[Complex64], Complex64) -> usize,
{
    fn choose(&mut self, step: usize, roots: &[Complex64], critical_value: Complex64) -> usize {
        self(step, roots, critical_value)
    }
}

/// Index of the root closest to the critical value (lowest index on ties).
pub fn min_derivative_choice(roots: &[Complex64], critical_value: Complex64) -> usize {
    let mut best = 0;
    for (k, r) in roots.iter().enumerate().skip(1) {
        if (r - critical_value).norm() < (roots[best] - critical_value).norm() {
            best = k;
        }
    }
    best
}

enum PolicyChooser {
    Fixed(u32),
    Random(ChaCha8Rng),
    MinDerivative,
}

impl BranchChooser for PolicyChooser {
    fn choose(&mut self, _step: usize, roots: &[Complex64], critical_value: Complex64) -> usize {
        match self {
            PolicyChooser::Fixed(k) => *k as usize % roots.len(),
            PolicyChooser::Random(rng) => rng.gen_range(0..roots.len()),
            PolicyChooser::MinDerivative => min_derivative_choice(roots, critical_value),
        }
    }
}

/// A backward orbit `x_0 = 0, x_{-1}, x_{-2}, …` of the critical point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackwardOrbit {
    pub branch_policy: Option<BranchPolicy>,
    /// `points[n] = x_{-n}`.
    pub points: Vec<Complex64>,
    /// `cum_logderiv[n] = log|Df^n(x_{-n})| = Σ_{k=1..n} log|Df(x_{-k})|`.
    pub cum_logderiv: Vec<f64>,
}

impl BackwardOrbit {
    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    /// `(1/n) log|Df^n(x_{-n})|`.
    pub fn chi(&self, n: usize) -> f64 {
        self.cum_logderiv[n] / n as f64
    }
}

pub fn backward_orbit(map: &MapSpec, policy: BranchPolicy, n_max: usize) -> Result<BackwardOrbit, ExponentError> {
    let mut chooser = match policy {
        BranchPolicy::FixedAngle(k) => PolicyChooser::Fixed(k),
        BranchPolicy::RandomSeeded(seed) => PolicyChooser::Random(ChaCha8Rng::seed_from_u64(seed)),
        BranchPolicy::MinDerivative => PolicyChooser::MinDerivative,
    };
    let mut orbit = backward_orbit_with(map, &mut chooser, n_max)?;
    orbit.branch_policy = Some(policy);
    Ok(orbit)
}

/// Backward orbit of 0 with a caller-supplied branch rule.
pub fn backward_orbit_with<C: BranchChooser + ?Sized>(
    map: &MapSpec,
    chooser: &mut C,
    n_max: usize,
) -> Result<BackwardOrbit, ExponentError> {
    let (d, c) = match *map {
        MapSpec::UnicriticalPoly { degree, c } => (degree, c),
        MapSpec::Exponential { .. } => return Err(ExponentError::UnsupportedFamily),
    };
    let df = d as f64;
    let mut points = vec![Complex64::new(0.0, 0.0)];
    let mut cum = vec![0.0];
    let mut acc = NeumaierSum::new();
    let mut roots = Vec::with_capacity(d as usize);
    for step in 1..=n_max {
        let w = points[step - 1] - c;
        if w.re == 0.0 && w.im == 0.0 {
            return Err(ExponentError::BranchPointHit { step });
        }
        let rho = w.norm().powf(1.0 / df);
        let theta = w.arg();
        roots.clear();
        roots.extend(
            (0..d).map(|k| Complex64::from_polar(rho, (theta + std::f64::consts::TAU * k as f64) / df)),
        );
        let k = chooser.choose(step, &roots, c).min(roots.len() - 1);
        let x = roots[k];
        acc += map.log_abs_derivative(x);
        points.push(x);
        cum.push(acc.sum());
    }
    Ok(BackwardOrbit { branch_policy: None, points, cum_logderiv: cum })
}

/// Which critical reference the recurrence distance is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecurrenceReference {
    /// Distance to the critical point 0.
    CriticalPoint,
    /// Distance to the marked point (`c`, or 0 for the exponential).
    CriticalValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport {
    pub alpha: f64,
    pub reference: RecurrenceReference,
    /// Times `1 ≤ n ≤ horizon` with `|f^n(z) - ref| < e^{-αn}`.
    pub violations: Vec<usize>,
    pub horizon: usize,
    pub burn_in: usize,
    /// The orbit escaped at this index; later times cannot violate.
    pub escaped_at: Option<usize>,
    /// No violation after `burn_in`.
    pub slowly_recurrent_up_to_horizon: bool,
}

/// Checks `|f^n(z0) - ref| ≥ e^{-αn}` for `1 ≤ n ≤ horizon`.
pub fn slow_recurrence_test(
    map: &MapSpec,
    z0: Complex64,
    alpha: f64,
    horizon: usize,
    reference: RecurrenceReference,
    burn_in: usize,
) -> Result<RecurrenceReport, ExponentError> {
    let trace = iterate(map, z0, horizon);
    slow_recurrence_on_trace(map, &trace, alpha, horizon, reference, burn_in)
}

/// Same as [`slow_recurrence_test`] on an existing trace.
pub fn slow_recurrence_on_trace(
    map: &MapSpec,
    trace: &OrbitTrace,
    alpha: f64,
    horizon: usize,
    reference: RecurrenceReference,
    burn_in: usize,
) -> Result<RecurrenceReport, ExponentError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(ExponentError::InvalidParameter("alpha must be positive"));
    }
    let target = match reference {
        RecurrenceReference::CriticalPoint => map.critical_point().ok_or(ExponentError::UnsupportedFamily)?,
        RecurrenceReference::CriticalValue => map.marked_point(),
    };
    let last = horizon.min(trace.horizon());
    // compare in log scale so exact hits (distance 0) always count
    let violations: Vec<usize> = (1..=last)
        .filter(|&n| (trace.points[n] - target).norm().ln() < -alpha * n as f64)
        .collect();
    let slowly = violations.iter().all(|&n| n <= burn_in);
    Ok(RecurrenceReport {
        alpha,
        reference,
        violations,
        horizon,
        burn_in,
        escaped_at: trace.escaped_at,
        slowly_recurrent_up_to_horizon: slowly,
    })
}
