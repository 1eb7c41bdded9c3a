//! Polynomial and rational matrix algebra.
//!
//! Coefficients are stored in ascending powers of the shift `xi`.

mod io_repr;
mod matrix;
mod poly;
mod rational;

pub use io_repr::{channel_range, rational_to_io, Channel, IoRepresentation};
pub use matrix::{
    is_coprime, is_stable, is_stable_with_margin, toeplitz_lift, toeplitz_lift_with_lag,
    PolyMatrix, DEFAULT_COPRIME_TOL, STABILITY_TOL,
};
pub use poly::{poly_gcd, poly_lcm, Poly, C64, DEFAULT_GCD_TOL};
pub use rational::{lft_lower, lft_upper, RationalFn, RationalMatrix};
