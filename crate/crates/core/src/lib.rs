//! Numerical laboratory for correlations of Hecke eigenform coefficients.
//!
//! The crate provides, bottom to top:
//!
//! - exact integer q-expansions of level-1 eigenforms and the classical
//!   arithmetic tables (divisor functions, Möbius, totient, Ramanujan sums),
//! - smooth compactly supported windows, oscillatory quadrature and integer
//!   order Bessel functions,
//! - the delta-symbol decomposition of the indicator of zero with calibrated
//!   normalising constant,
//! - numeric verifiers for Poisson and (holomorphic) Voronoi summation and
//!   additive-twist cancellation,
//! - the double shifted convolution sum together with its delta-expanded and
//!   Poisson-dualised evaluations, divisor-correlation baselines and decay
//!   experiments.
//!
//! Everything is deterministic: fixed seeds, ordered compensated reductions,
//! and truncations that are either exact (kernel support) or measured.

pub mod arith;
pub mod bessel;
pub mod delta;
pub mod error;
pub mod forms;
pub mod kahan;
pub mod qseries;
pub mod quad;
pub mod report;
pub mod shifted;
pub mod summation;
pub mod window;

pub use error::{Error, Result};
