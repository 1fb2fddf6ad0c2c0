//! The two map families: unicritical polynomials `z^d + c` and exponentials `a·e^z`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Real-part cutoff beyond which an exponential orbit is declared escaped.
/// `e^z` overflows binary64 a little past `Re z = 709`.
pub const EXP_ESCAPE_RE: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("exponential parameter a must be nonzero")]
    ZeroExponentialParameter,
    #[error("map parameter is not finite")]
    NonFiniteParameter,
    #[error("disk radius must be finite and nonnegative, got {0}")]
    InvalidDisk(f64),
    #[error("target disk closure contains the critical value; the inverse branch is not univalent")]
    DegenerateBranch,
    #[error("operation is only defined for unicritical polynomials")]
    UnsupportedFamily,
}

/// A dynamical system from one of the two supported families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MapSpec {
    /// `f(z) = z^d + c`, critical point 0, critical value `c`.
    UnicriticalPoly { degree: u32, c: Complex64 },
    /// `E(z) = a·e^z`, asymptotic value 0.
    Exponential { a: Complex64 },
}

impl MapSpec {
    pub fn unicritical(degree: u32, c: Complex64) -> Result<Self, DynamicsError> {
        let map = MapSpec::UnicriticalPoly { degree, c };
        map.validate()?;
        Ok(map)
    }

    /// `z^2 + c`.
    pub fn quadratic(c: Complex64) -> Self {
        MapSpec::UnicriticalPoly { degree: 2, c }
    }

    pub fn exponential(a: Complex64) -> Result<Self, DynamicsError> {
        let map = MapSpec::Exponential { a };
        map.validate()?;
        Ok(map)
    }

    /// Checks the family invariants. Deserialized values bypass the constructors,
    /// so callers loading configs should run this.
    pub fn validate(&self) -> Result<(), DynamicsError> {
        match *self {
            MapSpec::UnicriticalPoly { degree, c } => {
                if degree < 2 {
                    return Err(DynamicsError::InvalidDegree(degree));
                }
                if !c.is_finite() {
                    return Err(DynamicsError::NonFiniteParameter);
                }
            }
            MapSpec::Exponential { a } => {
                if !a.is_finite() {
                    return Err(DynamicsError::NonFiniteParameter);
                }
                if a == Complex64::new(0.0, 0.0) {
                    return Err(DynamicsError::ZeroExponentialParameter);
                }
            }
        }
        Ok(())
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, MapSpec::UnicriticalPoly { .. })
    }

    pub fn degree(&self) -> Option<u32> {
        match *self {
            MapSpec::UnicriticalPoly { degree, .. } => Some(degree),
            MapSpec::Exponential { .. } => None,
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            MapSpec::UnicriticalPoly { degree, c } => z.powu(degree) + c,
            MapSpec::Exponential { a } => a * z.exp(),
        }
    }

    /// `Df(z)`: `d·z^(d-1)` or `a·e^z`.
    #[inline]
    pub fn derivative_at(&self, z: Complex64) -> Complex64 {
        match *self {
            MapSpec::UnicriticalPoly { degree, .. } => z.powu(degree - 1) * degree as f64,
            MapSpec::Exponential { a } => a * z.exp(),
        }
    }

    /// `log|Df(z)|`, computed without forming `Df(z)` so it stays finite for
    /// large `z`. Returns `-inf` at the critical point.
    #[inline]
    pub fn log_abs_derivative(&self, z: Complex64) -> f64 {
        match *self {
            MapSpec::UnicriticalPoly { degree, .. } => {
                if z.re == 0.0 && z.im == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (degree as f64).ln() + (degree - 1) as f64 * z.norm().ln()
                }
            }
            // |a e^z| = |a| e^{Re z}
            MapSpec::Exponential { a } => a.norm().ln() + z.re,
        }
    }

    /// The marked point `c(f)`: the critical value `c`, or 0 for the exponential.
    pub fn marked_point(&self) -> Complex64 {
        match *self {
            MapSpec::UnicriticalPoly { c, .. } => c,
            MapSpec::Exponential { .. } => Complex64::new(0.0, 0.0),
        }
    }

    /// The critical point in the plane, if any.
    pub fn critical_point(&self) -> Option<Complex64> {
        match self {
            MapSpec::UnicriticalPoly { .. } => Some(Complex64::new(0.0, 0.0)),
            MapSpec::Exponential { .. } => None,
        }
    }

    /// `1 + max(1, |c|)` for polynomials. For the exponential this is
    /// [`EXP_ESCAPE_RE`], which bounds the real part rather than the modulus.
    pub fn escape_radius(&self) -> f64 {
        match *self {
            MapSpec::UnicriticalPoly { c, .. } => 1.0 + c.norm().max(1.0),
            MapSpec::Exponential { .. } => EXP_ESCAPE_RE,
        }
    }

    #[inline]
    pub fn has_escaped(&self, z: Complex64) -> bool {
        if !z.is_finite() {
            return true;
        }
        match *self {
            MapSpec::UnicriticalPoly { .. } => z.norm() > self.escape_radius(),
            MapSpec::Exponential { .. } => z.re > EXP_ESCAPE_RE,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(MapSpec::quadratic(c(-2.0, 0.0)).derivative_at(c(2.0, 0.0)), c(4.0, 0.0));
        let cubic = MapSpec::unicritical(3, c(0.0, 0.0)).unwrap();
        assert_eq!(cubic.derivative_at(c(0.0, 1.0)), c(-3.0, 0.0));
        let e = MapSpec::exponential(c(1.0, 0.0)).unwrap();
        assert_eq!(e.derivative_at(c(0.0, 0.0)), c(1.0, 0.0));
    }

    #[test]
    fn escape_radius_examples() {
        assert_eq!(MapSpec::quadratic(c(-2.0, 0.0)).escape_radius(), 3.0);
        assert_eq!(MapSpec::quadratic(c(0.0, 0.0)).escape_radius(), 2.0);
        assert_eq!(MapSpec::unicritical(5, c(0.3, 0.0)).unwrap().escape_radius(), 2.0);
    }

    #[test]
    fn escape_radius_is_sufficient() {
        // |z| > R implies |f(z)| > |z| on a sample of the boundary circle.
        for &(d, cre, cim) in &[(2, -2.0, 0.0), (2, 0.0, 1.0), (3, 1.5, -0.5), (5, 0.3, 0.0)] {
            let map = MapSpec::unicritical(d, c(cre, cim)).unwrap();
            let r = map.escape_radius() * (1.0 + 1e-9);
            for k in 0..360 {
                let z = Complex64::from_polar(r, k as f64 * std::f64::consts::TAU / 360.0);
                assert!(map.eval(z).norm() > z.norm());
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(MapSpec::unicritical(1, c(0.0, 0.0)), Err(DynamicsError::InvalidDegree(1)));
        assert_eq!(
            MapSpec::exponential(c(0.0, 0.0)),
            Err(DynamicsError::ZeroExponentialParameter)
        );
        assert!(MapSpec::unicritical(2, c(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn marked_points() {
        assert_eq!(MapSpec::quadratic(c(0.0, 1.0)).marked_point(), c(0.0, 1.0));
        assert_eq!(MapSpec::exponential(c(0.3, 0.0)).unwrap().marked_point(), c(0.0, 0.0));
    }

    #[test]
    fn log_derivative_matches_direct() {
        let map = MapSpec::unicritical(3, c(0.2, 0.1)).unwrap();
        let z = c(0.7, -1.3);
        assert!((map.log_abs_derivative(z) - map.derivative_at(z).norm().ln()).abs() < 1e-14);
        assert_eq!(map.log_abs_derivative(c(0.0, 0.0)), f64::NEG_INFINITY);
    }
}
