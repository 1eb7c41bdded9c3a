use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ExperimentConfig, GainReport, GainRow};
use crate::config::parse_system;
use crate::dissipativity::closed_loop_l2_gain;
use crate::error::{Error, Result};
use crate::lti::{
    discretize_zoh, finite_horizon_gain_mb, hinf_norm, ss_lft, two_mass_plant, uniform_input,
    LftKind, StateSpace, TwoMassParams, DEFAULT_GRID, DEFAULT_REFINE,
};
use crate::polymat::{rational_to_io, Channel, IoRepresentation, RationalFn, RationalMatrix};
use crate::signals::{build_hankel, is_persistently_exciting, DataDictionary};

const SHIPPED_CONTROLLER: &str = include_str!("../../data/example2_controller.toml");

/// Sampling time of the two-mass benchmark.
pub const EXAMPLE2_SAMPLING: f64 = 0.1;

/// Noise-free data from rest under a seeded uniform input, checked to be
/// persistently exciting of order `order`.
pub fn pe_data(
    plant: &StateSpace,
    n_samples: usize,
    order: usize,
    seed: u64,
    rank_tol: f64,
) -> Result<DataDictionary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = uniform_input(plant.n_inputs(), n_samples, &mut rng)?;
    if !is_persistently_exciting(&u, order, rank_tol)? {
        let h = build_hankel(&u, order)?;
        return Err(Error::RankConditionViolated {
            rank: crate::linalg::numerical_rank(&h, rank_tol),
            required: h.nrows(),
        });
    }
    let y = plant.simulate(&u, &nalgebra::DVector::zeros(plant.n_states()))?;
    DataDictionary::new(u, y)
}

/// `K(q) = (q + 0.3) / (q - 1)`.
pub fn example1_controller() -> RationalFn {
    RationalFn::from_coeffs(&[0.3, 1.0], &[-1.0, 1.0]).expect("nonzero denominator")
}

fn loop_channels(n_z: usize) -> (Vec<Channel>, Vec<Channel>) {
    (
        vec![Channel::new("u", 1), Channel::new("z", n_z)],
        vec![Channel::new("y", 1), Channel::new("w", 1)],
    )
}

/// `M = [[-K, K], [-1, 1]]` from `(y, w)` to `(u, z)`.
pub fn example1_interconnection() -> Result<IoRepresentation> {
    let k = example1_controller();
    let m = RationalMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => k.neg(),
        (0, 1) => k.clone(),
        (1, 0) => RationalFn::constant(-1.0),
        _ => RationalFn::one(),
    });
    let (outputs, inputs) = loop_channels(1);
    rational_to_io(&m, outputs, inputs)
}

/// `(W_S, W_T)`.
pub fn example2_weights() -> (RationalFn, RationalFn) {
    (
        RationalFn::from_coeffs(&[-0.7641, 0.7741], &[-0.9998, 1.0]).expect("nonzero denominator"),
        RationalFn::from_coeffs(&[-25.38, 25.9], &[-0.3333, 1.0]).expect("nonzero denominator"),
    )
}

/// `M = [[-K, K], [-W_S, W_S], [W_T, 0]]` from `(y, w)` to `(u, z)`.
pub fn example2_interconnection(controller: &RationalMatrix) -> Result<IoRepresentation> {
    if controller.nrows() != 1 || controller.ncols() != 1 {
        return Err(Error::dims(
            "controller",
            "the two-mass loop needs a SISO controller",
        ));
    }
    let k = controller.entry(0, 0).clone();
    let (ws, wt) = example2_weights();
    let m = RationalMatrix::from_fn(3, 2, |i, j| match (i, j) {
        (0, 0) => k.neg(),
        (0, 1) => k.clone(),
        (1, 0) => ws.neg(),
        (1, 1) => ws.clone(),
        (2, 0) => wt.clone(),
        _ => RationalFn::zero(),
    });
    let (outputs, inputs) = loop_channels(2);
    rational_to_io(&m, outputs, inputs)
}

pub fn shipped_example2_controller() -> Result<RationalMatrix> {
    parse_system(
        SHIPPED_CONTROLLER,
        Path::new("data/example2_controller.toml"),
    )?
    .to_rational()
}

/// ZOH-sampled two-mass plant.
pub fn example2_plant() -> Result<StateSpace> {
    discretize_zoh(
        &two_mass_plant(&TwoMassParams::default()),
        EXAMPLE2_SAMPLING,
    )
}

/// Sweep `L` over `cfg.horizons`: data-driven gain from `data`, and when a
/// plant model is given, the Toeplitz oracle on the window `L - nu` plus the
/// H-infinity norm of the closed loop.
pub fn gain_sweep(
    m: &IoRepresentation,
    data: &DataDictionary,
    plant: Option<&StateSpace>,
    cfg: &ExperimentConfig,
) -> Result<GainReport> {
    let closed = match plant {
        Some(g) => {
            let cl = ss_lft(&StateSpace::from_io(m)?, g, LftKind::Upper)?;
            if !cl.is_stable() {
                return Err(Error::UnstableClosedLoop {
                    radius: cl.spectral_radius(),
                });
            }
            let (hinf, _) = hinf_norm(&cl, DEFAULT_GRID, DEFAULT_REFINE)?;
            Some((cl, hinf))
        }
        None => None,
    };
    let mut rows = Vec::new();
    for horizon in cfg.horizons.clone() {
        let gamma_dd =
            match closed_loop_l2_gain(m, data, horizon, cfg.nu, cfg.lag_bound, &cfg.tolerances) {
                Ok(cert) => cert.gamma.expect("gain certificates carry gamma"),
                Err(Error::NoFiniteGain { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
        rows.push(GainRow {
            horizon,
            gamma_dd,
            gamma_mb: closed
                .as_ref()
                .map(|(cl, _)| finite_horizon_gain_mb(cl, horizon - cfg.nu)),
            hinf: closed.as_ref().map(|(_, h)| *h),
        });
    }
    let report = GainReport {
        rows,
        nu: cfg.nu,
        hinf: closed.map(|(_, h)| h),
    };
    if let Some(path) = &cfg.output {
        std::fs::write(path, report.to_csv())?;
    }
    Ok(report)
}

fn run_with_plant(
    m: &IoRepresentation,
    plant: &StateSpace,
    cfg: &ExperimentConfig,
) -> Result<GainReport> {
    cfg.validate()?;
    let order = cfg.horizons.end() + plant.n_states();
    let data = pe_data(
        plant,
        cfg.n_samples,
        order,
        cfg.seed,
        cfg.tolerances.rank_tol,
    )?;
    gain_sweep(m, &data, Some(plant), cfg)
}

/// Tracking loop with `G(q) = (q + 0.5)/(q - 0.5)` and `K(q) = (q + 0.3)/(q - 1)`.
pub fn run_example1(cfg: &ExperimentConfig) -> Result<GainReport> {
    let plant = crate::lti::example1_plant()?;
    run_with_plant(&example1_interconnection()?, &plant, cfg)
}

/// Mixed-sensitivity loop on the sampled two-mass plant with a user-supplied controller.
pub fn run_example2(cfg: &ExperimentConfig, controller: &RationalMatrix) -> Result<GainReport> {
    let plant = example2_plant()?;
    run_with_plant(&example2_interconnection(controller)?, &plant, cfg)
}
