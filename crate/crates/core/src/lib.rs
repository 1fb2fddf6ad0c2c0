//! Numerical laboratory for the Lyapunov exponent of `z^d + c` and `a·e^z`.
//!
//! The crate computes derivative cocycles along forward and backward orbits,
//! detects attracting cycles, extracts Pliss / hyperbolic times and shadow
//! sets, and runs empirical checkers for the return-time derivative
//! inequalities and the series `F(t) = 1 + Σ t^n / Df^n(c)`.
//!
//! ```
//! use lyapunov_lab::{exponents, MapSpec};
//! use num_complex::Complex64;
//!
//! let map = MapSpec::quadratic(Complex64::new(-2.0, 0.0));
//! let est = exponents::forward_exponent_series(&map, map.marked_point(), 50);
//! assert!((est.last_chi().unwrap() - 4f64.ln()).abs() < 1e-12);
//! ```

pub mod cycles;
pub mod disk;
pub mod exponents;
pub mod hyperbolic;
pub mod lab;
pub mod map;
pub mod orbit;
pub mod pliss;
pub mod seeding;
pub mod sum;

pub use disk::{pullback_disk, Disk};
pub use map::{DynamicsError, MapSpec};
pub use orbit::{iterate, OrbitTrace};

pub use num_complex::Complex64;

// The guide under `book/` is compiled here so its snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/orbits.md")]
    mod orbits {}
    #[doc = include_str!("../../../book/src/cycles.md")]
    mod cycles {}
    #[doc = include_str!("../../../book/src/exponents.md")]
    mod exponents {}
    #[doc = include_str!("../../../book/src/backward.md")]
    mod backward {}
    #[doc = include_str!("../../../book/src/pliss.md")]
    mod pliss {}
    #[doc = include_str!("../../../book/src/shadows.md")]
    mod shadows {}
    #[doc = include_str!("../../../book/src/returns.md")]
    mod returns {}
    #[doc = include_str!("../../../book/src/fredholm.md")]
    mod fredholm {}
    #[doc = include_str!("../../../book/src/area.md")]
    mod area {}
}
