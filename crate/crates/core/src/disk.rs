//! Closed disks and certified inverse branches of `z^d + c`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::map::{DynamicsError, MapSpec};

/// Relative inflation applied to computed radii so rounding cannot shrink a
/// certified enclosure.
const RADIUS_INFLATION: f64 = 1e-12;

/// The closed disk `B(center, radius)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self, DynamicsError> {
        if !radius.is_finite() || radius < 0.0 || !center.is_finite() {
            return Err(DynamicsError::InvalidDisk(radius));
        }
        Ok(Disk { center, radius })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

fn split(map: &MapSpec) -> Result<(u32, Complex64), DynamicsError> {
    match *map {
        MapSpec::UnicriticalPoly { degree, c } => Ok((degree, c)),
        MapSpec::Exponential { .. } => Err(DynamicsError::UnsupportedFamily),
    }
}

/// Encloses the component of `f^{-1}(target)` that contains the branch
/// selected by `root_hint`.
///
/// The target's closure must avoid the critical value. Two enclosures are
/// computed and the smaller is returned: the mean-value bound
/// `r · max|g'|` for the branch `g(w) = (w - c)^{1/d}` over the disk, and the
/// covering disk of the annular sector of `d`-th roots.
pub fn pullback_disk(map: &MapSpec, target: &Disk, root_hint: Complex64) -> Result<Disk, DynamicsError> {
    let (d, c) = split(map)?;
    let u = target.center - c;
    let m = u.norm();
    let r = target.radius;
    if m <= r {
        return Err(DynamicsError::DegenerateBranch);
    }
    let df = d as f64;
    let center = nearest_branch_root(u, d, root_hint);
    if r == 0.0 {
        return Ok(Disk { center, radius: 0.0 });
    }

    let inner = (m - r).powf(1.0 / df);
    let outer = (m + r).powf(1.0 / df);
    let mid = center.norm();

    // |g'(w)| = |w - c|^{1/d - 1} / d is largest where |w - c| is smallest.
    let mean_value = r * (m - r).powf(1.0 / df - 1.0) / df;

    // Distance from a point on the central ray to the sector is maximised at a corner.
    let half_angle = (r / m).asin() / df;
    let corner = |rho: f64| (Complex64::from_polar(rho, half_angle) - mid).norm();
    let sector = corner(inner).max(corner(outer));

    let radius = mean_value.min(sector) * (1.0 + RADIUS_INFLATION);
    Ok(Disk { center, radius })
}

/// A disk containing the whole preimage `f^{-1}(target)`, valid even when the
/// target contains the critical value.
pub fn preimage_hull(map: &MapSpec, target: &Disk) -> Result<Disk, DynamicsError> {
    let (d, c) = split(map)?;
    let reach = (target.center - c).norm() + target.radius;
    let radius = reach.powf(1.0 / d as f64) * (1.0 + RADIUS_INFLATION);
    Ok(Disk { center: Complex64::new(0.0, 0.0), radius })
}

/// The `d`-th root of `w` whose argument is closest to `arg(hint)`.
pub(crate) fn nearest_branch_root(w: Complex64, d: u32, hint: Complex64) -> Complex64 {
    let df = d as f64;
    let base = w.arg() / df;
    let step = TAU / df;
    let k = ((hint.arg() - base) / step).round();
    Complex64::from_polar(w.norm().powf(1.0 / df), base + k * step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Follows the inverse branch from `start` along the segment to `w`,
    /// choosing the root nearest the previous one at every small step.
    fn track_branch(map_c: Complex64, d: u32, from: Complex64, start: Complex64, w: Complex64) -> Complex64 {
        let steps = 200;
        let mut cur = start;
        for s in 1..=steps {
            let p = from + (w - from) * (s as f64 / steps as f64);
            let u = p - map_c;
            let rho = u.norm().powf(1.0 / d as f64);
            let base = u.arg() / d as f64;
            cur = (0..d)
                .map(|k| Complex64::from_polar(rho, base + TAU * k as f64 / d as f64))
                .min_by(|a, b| (a - cur).norm().partial_cmp(&(b - cur).norm()).unwrap())
                .unwrap();
        }
        cur
    }

    #[test]
    fn square_root_of_disk_around_four() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let target = Disk::new(c(4.0, 0.0), 0.4).unwrap();
        let disk = pullback_disk(&map, &target, c(2.0, 0.0)).unwrap();
        assert!((disk.center - c(2.0, 0.0)).norm() < 1e-12);
        assert!(disk.radius <= 0.11 && disk.radius >= 0.10, "radius {}", disk.radius);
        // dense boundary sampling of the exact component
        let far = (0..20_000)
            .map(|k| {
                let w = target.center + Complex64::from_polar(0.4, TAU * k as f64 / 20_000.0);
                (w.sqrt() - disk.center).norm()
            })
            .fold(0.0, f64::max);
        assert!(far <= disk.radius);
    }

    #[test]
    fn zero_radius_target() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let disk = pullback_disk(&map, &Disk::new(c(1.0, 0.0), 0.0).unwrap(), c(1.0, 0.0)).unwrap();
        assert_eq!(disk, Disk { center: c(1.0, 0.0), radius: 0.0 });
    }

    #[test]
    fn critical_value_inside_is_degenerate() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let target = Disk::new(c(0.5, 0.0), 0.6).unwrap();
        assert_eq!(pullback_disk(&map, &target, c(0.7, 0.0)), Err(DynamicsError::DegenerateBranch));
        // boundary counts as closure
        let touching = Disk::new(c(0.5, 0.0), 0.5).unwrap();
        assert_eq!(pullback_disk(&map, &touching, c(0.7, 0.0)), Err(DynamicsError::DegenerateBranch));
    }

    #[test]
    fn branch_follows_hint() {
        let map = MapSpec::quadratic(c(0.0, 0.0));
        let target = Disk::new(c(4.0, 0.0), 0.1).unwrap();
        let neg = pullback_disk(&map, &target, c(-1.9, 0.1)).unwrap();
        assert!((neg.center - c(-2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn exponential_is_unsupported() {
        let map = MapSpec::exponential(c(1.0, 0.0)).unwrap();
        let target = Disk::new(c(4.0, 0.0), 0.1).unwrap();
        assert_eq!(pullback_disk(&map, &target, c(1.0, 0.0)), Err(DynamicsError::UnsupportedFamily));
    }

    #[test]
    fn rejects_negative_radius() {
        assert!(Disk::new(c(0.0, 0.0), -1.0).is_err());
        assert!(Disk::new(c(0.0, 0.0), f64::INFINITY).is_err());
    }

    #[test]
    fn hull_covers_all_preimages() {
        let map = MapSpec::unicritical(3, c(0.2, -0.1)).unwrap();
        let target = Disk::new(c(0.1, 0.0), 0.5).unwrap();
        let hull = preimage_hull(&map, &target).unwrap();
        for k in 0..500 {
            let w = target.center + Complex64::from_polar(0.5 * (k % 7) as f64 / 6.0, k as f64);
            let u = w - c(0.2, -0.1);
            for j in 0..3 {
                let z = Complex64::from_polar(u.norm().cbrt(), (u.arg() + TAU * j as f64) / 3.0);
                assert!(hull.contains(z));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pullback_is_sound(d in 2u32..6, cre in -2.0f64..2.0, cim in -2.0f64..2.0,
                             ure in -3.0f64..3.0, uim in -3.0f64..3.0,
                             frac in 0.0f64..0.95, branch in 0u32..6) {
            let map_c = c(cre, cim);
            let map = MapSpec::unicritical(d, map_c).unwrap();
            let u = c(ure, uim);
            prop_assume!(u.norm() > 1e-3);
            let target = Disk::new(map_c + u, frac * u.norm()).unwrap();
            let rho = u.norm().powf(1.0 / d as f64);
            let hint = Complex64::from_polar(rho, (u.arg() + TAU * (branch % d) as f64) / d as f64);
            let disk = pullback_disk(&map, &target, hint).unwrap();
            for k in 0..1000 {
                let w = target.center + Complex64::from_polar(target.radius, TAU * k as f64 / 1000.0);
                let z = track_branch(map_c, d, target.center, disk.center, w);
                prop_assert!((z - disk.center).norm() <= disk.radius * (1.0 + 1e-9) + 1e-12,
                    "sample {} outside: {} > {}", k, (z - disk.center).norm(), disk.radius);
            }
        }
    }
}
