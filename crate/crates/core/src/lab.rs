//! Empirical checkers: return-time derivative bounds, the series
//! `F(t) = 1 + Σ t^n / Df^n(c)`, area scans of `E_n` and a porosity probe.
//!
//! Campaigns split their work into tasks seeded by [`crate::seeding::task_rng`]
//! and merge results in task order, so the output depends only on the root seed.

use thiserror::Error;

use crate::map::DynamicsError;

mod area;
mod fredholm;
mod porosity;
mod returns;

pub use area::{area_scan, return_time_statistic, AreaScan, ReturnSampling, ReturnTimeStat};
pub use fredholm::{fredholm_eval, fredholm_series, Envelope, FredholmSeries, FredholmValue, ZeroScan};
pub use porosity::{porosity_probe, PorosityProbe, CANDIDATE_LATTICE};
pub use returns::{
    check_close_return_bound, check_return_bound, close_return_campaign, first_entry, harvest_close_returns,
    return_bound_campaign, BoundCheck, BoundKind, CampaignReport, CloseReturnReport, Counterexample, ReturnEvent,
    ReturnTarget, SampleRegion, BOUND_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(&'static str),
    #[error("Df^{index}(c) = 0: the critical orbit hits the critical point")]
    CoefficientBlowup { index: usize },
    #[error("threshold e^(-2αn) = {threshold} exceeds the window diameter {diameter} at n = {n}")]
    ThresholdExceedsWindow { n: usize, threshold: f64, diameter: f64 },
    #[error("only the polynomial family is supported here")]
    UnsupportedFamily,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}
