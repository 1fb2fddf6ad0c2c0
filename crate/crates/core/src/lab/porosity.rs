//! Holes of the escape-time Julia indicator inside `B(z, 2^{-j})`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::LabError;
use crate::map::MapSpec;

/// Candidate hole centers form a fixed `33 × 33` lattice over the bounding
/// square of each ball, independent of the sample grid.
pub const CANDIDATE_LATTICE: usize = 33;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PorosityProbe {
    pub z: Complex64,
    pub j_values: Vec<u32>,
    /// `ρ_j ∈ [0, 1]`: a ball of radius `ρ_j·2^{-j}` inside `B(z, 2^{-j})`
    /// holds no non-escaping sample.
    pub hole_radii: Vec<f64>,
    pub grid: usize,
    pub escape_budget: usize,
    /// Set when `grid < 2`: the only sample is `z`, so `ρ_j ∈ {0, 1}`.
    pub low_resolution: bool,
}

fn escapes(map: &MapSpec, mut w: Complex64, budget: usize) -> bool {
    for _ in 0..=budget {
        if !w.is_finite() || map.has_escaped(w) {
            return true;
        }
        w = map.eval(w);
    }
    false
}

/// Points `center + s·(x + iy)` with `x, y` evenly spaced over `[-1, 1]`.
fn lattice(center: Complex64, s: f64, k: usize) -> impl Iterator<Item = Complex64> {
    let step = 2.0 / (k - 1) as f64;
    (0..k).flat_map(move |a| {
        (0..k).map(move |b| center + s * Complex64::new(-1.0 + a as f64 * step, -1.0 + b as f64 * step))
    })
}

/// For each `j`, samples a `grid × grid` lattice over the square around
/// `B(z, 2^{-j})` and reports the largest hole free of non-escaping samples.
///
/// Sample lattices nest when `grid` goes to `2·grid - 1`, and refining then
/// never enlarges a hole.
pub fn porosity_probe(
    map: &MapSpec,
    z: Complex64,
    j_list: &[u32],
    grid: usize,
    escape_budget: usize,
) -> Result<PorosityProbe, LabError> {
    if grid == 0 {
        return Err(LabError::InvalidParameter("grid must be at least 1"));
    }
    let hole_radii = j_list
        .iter()
        .map(|&j| {
            let s = 0.5f64.powi(j as i32);
            if grid == 1 {
                return if escapes(map, z, escape_budget) { 1.0 } else { 0.0 };
            }
            let blockers: Vec<Complex64> = lattice(z, s, grid)
                .filter(|p| (p - z).norm() <= s && !escapes(map, *p, escape_budget))
                .collect();
            lattice(z, s, CANDIDATE_LATTICE)
                .filter_map(|w| {
                    let room = s - (w - z).norm();
                    (room >= 0.0).then(|| blockers.iter().fold(room, |r, p| r.min((p - w).norm())))
                })
                .fold(0.0, f64::max)
                / s
        })
        .collect();
    Ok(PorosityProbe {
        z,
        j_values: j_list.to_vec(),
        hole_radii,
        grid,
        escape_budget,
        low_resolution: grid < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn unit_circle_hole() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let probe = porosity_probe(&map, c(1.0, 0.0), &[3], 65, 200).unwrap();
        assert!((probe.hole_radii[0] - 0.5).abs() < 0.05, "{:?}", probe.hole_radii);
        assert!(!probe.low_resolution);
    }

    #[test]
    fn chebyshev_segment_hole() {
        let map = MapSpec::quadratic(c(-2.0, 0.0));
        let probe = porosity_probe(&map, c(0.5, 0.0), &[4], 65, 200).unwrap();
        assert!((probe.hole_radii[0] - 0.5).abs() < 0.05, "{:?}", probe.hole_radii);
    }

    #[test]
    fn single_sample_is_degenerate() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let inside = porosity_probe(&map, c(0.5, 0.0), &[2], 1, 200).unwrap();
        let outside = porosity_probe(&map, c(1.5, 0.0), &[2], 1, 200).unwrap();
        assert!(inside.low_resolution);
        assert_eq!((inside.hole_radii[0], outside.hole_radii[0]), (0.0, 1.0));
    }

    #[test]
    fn refinement_never_grows_holes() {
        let map = MapSpec::quadratic(c(-0.12, 0.75));
        let z = c(-0.1, 0.9);
        let mut grid = 3;
        let mut prev: Option<Vec<f64>> = None;
        while grid <= 65 {
            let probe = porosity_probe(&map, z, &[2, 4, 6], grid, 300).unwrap();
            assert!(probe.hole_radii.iter().all(|r| (0.0..=1.0).contains(r)));
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(&probe.hole_radii) {
                    assert!(b <= a);
                }
            }
            prev = Some(probe.hole_radii);
            grid = 2 * grid - 1;
        }
    }
}
