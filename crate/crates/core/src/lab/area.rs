//! Monte-Carlo area of `E_n = {z : |f^n(z)| < e^{-2αn}}` and short-return statistics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::returns::SampleRegion;
use super::LabError;
use crate::cycles::{detect_attracting_cycle, in_basin, DEFAULT_TOL};
use crate::disk::Disk;
use crate::map::MapSpec;
use crate::seeding::task_rng;

const CHUNK: u64 = 4096;
const BASIN_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaScan {
    pub alpha: f64,
    pub n_values: Vec<usize>,
    /// Fraction of window samples in `E_n`, per `n`.
    pub measures: Vec<f64>,
    pub hits: Vec<u64>,
    pub sample_count: u64,
    pub seed: u64,
    pub window: Disk,
    /// Samples in the basin of this sink were not counted.
    pub sink_period: Option<usize>,
}

impl AreaScan {
    pub fn is_nonincreasing(&self) -> bool {
        self.measures.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Splits `samples` into fixed chunks, each with its own seeded stream, and
/// sums per-chunk counts.
fn chunked<F>(samples: u64, seed: u64, width: usize, f: F) -> Vec<u64>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng, &mut [u64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, i);
            let mut counts = vec![0u64; width];
            let here = CHUNK.min(samples - i * CHUNK);
            for _ in 0..here {
                f(&mut rng, &mut counts);
            }
            counts
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

/// Fraction of uniform samples from `window` with `|f^n(z)| < e^{-2αn}` for
/// each `n` in `n_list`. Every `n` must satisfy `e^{-2αn} ≤ diam(window)`.
///
/// Julia membership is approximated by non-escape; when an attracting cycle
/// is detected, samples captured by its basin are not counted either.
pub fn area_scan(
    map: &MapSpec,
    alpha: f64,
    n_list: &[usize],
    window: Disk,
    samples: u64,
    seed: u64,
) -> Result<AreaScan, LabError> {
    if !(alpha > 0.0) {
        return Err(LabError::InvalidParameter("alpha must be positive"));
    }
    let diameter = 2.0 * window.radius;
    for &n in n_list {
        let threshold = (-2.0 * alpha * n as f64).exp();
        if threshold > diameter {
            return Err(LabError::ThresholdExceedsWindow { n, threshold, diameter });
        }
    }
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let region = SampleRegion::from_disk(&window);
    let radii: Vec<f64> = n_list.iter().map(|&n| (-2.0 * alpha * n as f64).exp()).collect();
    let sink = match detect_attracting_cycle(map, 64, 100_000, DEFAULT_TOL) {
        Ok(Some(rec)) => Some(rec),
        _ => None,
    };
    let hits = chunked(samples, seed, n_list.len(), |rng, counts| {
        let start = region.sample(rng);
        let mut z = start;
        let mut found = vec![false; n_list.len()];
        for step in 1..=n_max {
            z = map.eval(z);
            if !z.is_finite() || map.has_escaped(z) {
                return;
            }
            for (k, &n) in n_list.iter().enumerate() {
                if n == step && z.norm() < radii[k] {
                    found[k] = true;
                }
            }
        }
        if !found.iter().any(|&f| f) {
            return;
        }
        if let Some(rec) = &sink {
            if in_basin(map, start, rec, BASIN_BUDGET).in_basin {
                return;
            }
        }
        for (k, f) in found.into_iter().enumerate() {
            counts[k] += f as u64;
        }
    });
    let measures = hits
        .iter()
        .map(|&h| if samples == 0 { 0.0 } else { h as f64 / samples as f64 })
        .collect();
    Ok(AreaScan { alpha, n_values: n_list.to_vec(), measures, hits, sample_count: samples, seed, window, sink_period: sink.map(|r| r.period) })
}

/// Shortest observed return `s ≥ 1` with `|f^s(w)| < ε` among samples `|w| < ε`,
/// next to the `log(1/ε)` shape of the lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeStat {
    pub eps: f64,
    pub min_return: Option<usize>,
    pub log_inv_eps: f64,
    /// `min_return / log(1/ε)`, an empirical `K`.
    pub ratio: Option<f64>,
}

/// Where the start points `|w| < ε` of [`return_time_statistic`] are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnSampling {
    Disk,
    /// The real segment `(-ε, ε)`, for maps whose Julia set lies on the line.
    RealSegment,
}

pub fn return_time_statistic(
    map: &MapSpec,
    eps_list: &[f64],
    sampling: ReturnSampling,
    samples: u64,
    seed: u64,
    s_max: usize,
) -> Result<Vec<ReturnTimeStat>, LabError> {
    let center = map.critical_point().ok_or(LabError::UnsupportedFamily)?;
    let mut out = Vec::with_capacity(eps_list.len());
    for (i, &eps) in eps_list.iter().enumerate() {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LabError::InvalidParameter("eps must lie in (0, 1)"));
        }
        let region = match sampling {
            ReturnSampling::Disk => SampleRegion::Disk { center, radius: eps },
            ReturnSampling::RealSegment => SampleRegion::Segment { from: center - eps, to: center + eps },
        };
        let stream = seed.wrapping_add((i as u64) << 32);
        let first_return = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut z: Complex64 = region.sample(rng);
            for s in 1..=s_max {
                z = map.eval(z);
                if !z.is_finite() || map.has_escaped(z) {
                    return None;
                }
                if (z - center).norm() < eps {
                    return Some(s);
                }
            }
            None
        };
        let min_return = (0..samples.div_ceil(CHUNK))
            .into_par_iter()
            .filter_map(|c| {
                let mut rng = task_rng(stream, c);
                (0..CHUNK.min(samples - c * CHUNK)).filter_map(|_| first_return(&mut rng)).min()
            })
            .min();
        let log_inv_eps = -eps.ln();
        out.push(ReturnTimeStat { eps, min_return, log_inv_eps, ratio: min_return.map(|s| s as f64 / log_inv_eps) });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn chebyshev_fractions_decay() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let window = Disk::new(c(0.0, 0.0), 2.5).unwrap();
        let scan = area_scan(&map, 0.1, &[20, 30, 40, 50], window, 100_000, 7).unwrap();
        assert!(scan.measures.iter().all(|&m| (0.0..=1.0).contains(&m)));
        assert!(scan.measures[0] <= 0.1);
        assert!(scan.is_nonincreasing());
        let again = area_scan(&map, 0.1, &[20, 30, 40, 50], window, 100_000, 7).unwrap();
        assert_eq!(scan, again);
    }

    #[test]
    fn squaring_has_no_hits() {
        // points inside the unit disk shrink fast but lie in the basin of 0
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let window = Disk::new(c(0.0, 0.0), 2.0).unwrap();
        let scan = area_scan(&map, 0.1, &[30], window, 50_000, 1).unwrap();
        assert_eq!(scan.hits[0], 0);
        assert_eq!(scan.sink_period, Some(1));
    }

    #[test]
    fn threshold_precheck() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let window = Disk::new(c(0.0, 0.0), 0.01).unwrap();
        assert!(matches!(
            area_scan(&map, 0.1, &[5], window, 10, 1),
            Err(LabError::ThresholdExceedsWindow { n: 5, .. })
        ));
    }

    #[test]
    fn short_returns_grow_like_log() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let stats = return_time_statistic(&map, &[1e-1, 1e-2, 1e-3], ReturnSampling::RealSegment, 20_000, 5, 5_000).unwrap();
        let mins: Vec<usize> = stats.iter().map(|s| s.min_return.unwrap()).collect();
        assert!(mins.windows(2).all(|w| w[0] <= w[1]), "{mins:?}");
        assert!(stats.iter().all(|s| s.ratio.unwrap() > 0.1));
    }
}
