//! Numerical laboratory for matrix-valued dyadic paraproducts.
//!
//! The crate is organized bottom-up:
//!
//! * [`dyadic`]: step functions on the dyadic filtration, `E_k`, `d_k`, Rademachers.
//! * [`spectral`]: SVD-derived kernels and power iteration for matrix-free operators.
//! * [`symbol`]: `L^inf`, `BMO_c`, `BMO_r`, `BMO_cr`, square and sweep functions.
//! * [`paraproduct`]: `pi_b`, `tilde_pi_b`, the `L^2` adjoint, tail multipliers and
//!   their norm estimators.
//! * [`extremal`]: triangular truncation, the Rademacher diagonal and the
//!   contractive symbols whose paraproduct norm grows like `log(n + 1)`.
//! * [`experiment`]: experiment suites, CSV/SVG output and the on-disk cache
//!   used by the `paralab` binary.

pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod extremal;
pub mod paraproduct;
pub mod sampling;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use num_complex::Complex64;
