//! Finite-horizon dissipativity from data: supply lifting, constraint
//! assembly, nullspace projection and projected PSD tests.
//!
//! Stacked vectors are channel-block ordered, time-major inside each block:
//! `[u|_L; y|_L]` for data and `[w|_L; z|_L]` for supplies.

mod check;
mod lfr;
mod supply;

pub use check::{
    check_closed_loop_dissipativity, check_data_only_dissipativity, closed_loop_l2_gain,
    constraint_l2_gain, data_only_l2_gain, finite_horizon_l2_gain_dd, Certificate, ProjectedSupply,
    Tolerances, Verdict, MAX_GAIN,
};
pub use lfr::{assemble_closed_loop_b, ConstraintSystem, FiniteHorizonLfr, GeneralizedPlantLfr};
pub use supply::{lift_supply, SupplyRate};
