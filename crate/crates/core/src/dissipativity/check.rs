use nalgebra::DMatrix;
use serde::Serialize;

use super::lfr::{assemble_closed_loop_b, ConstraintSystem, FiniteHorizonLfr};
use super::supply::{lift_supply, SupplyRate};
use crate::error::{Error, Result};
use crate::linalg::{self, DEFAULT_RANK_TOL};
use crate::polymat::IoRepresentation;
use crate::signals::{zero_prefix_selector, DataDictionary};

/// Upper bracket beyond which a gain query gives up.
pub const MAX_GAIN: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular-value threshold for ranks and nullspaces.
    pub rank_tol: f64,
    /// PSD margin relative to the spectral norm of the projected matrix.
    pub psd_tol: f64,
    /// Relative bracket width at which bisection stops.
    pub bisect_tol: f64,
    pub max_bisect: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: DEFAULT_RANK_TOL,
            psd_tol: 1e-8,
            bisect_tol: 1e-8,
            max_bisect: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Dissipative,
    NotCertified,
}

/// Outcome of a projected PSD test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub min_eig: f64,
    /// Spectral norm of the projected matrix.
    pub scale: f64,
    pub nullspace_dim: usize,
    /// Set when the nullspace is trivial and the verdict holds vacuously.
    pub degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank_condition_ok: Option<bool>,
    pub horizon: usize,
    pub prefix: usize,
    pub tolerances: Tolerances,
}

impl Certificate {
    pub fn is_dissipative(&self) -> bool {
        self.verdict == Verdict::Dissipative
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("certificate fields are plain values")
    }
}

/// `Z^T E^T Pi E Z` for a nullspace basis `Z` of `B`, reduced to a factor `P`
/// with the same nonzero spectrum as `P^T Pi P`. Computed once per constraint;
/// each supply evaluation is then a small symmetric eigenproblem.
#[derive(Debug, Clone)]
pub struct ProjectedSupply {
    p: DMatrix<f64>,
    /// Orthonormal basis of the range of `E Z`, so `p = basis * S`.
    basis: DMatrix<f64>,
    nullspace_dim: usize,
}

impl ProjectedSupply {
    /// `b` is the constraint, `e` maps unknowns to the supply vector.
    pub fn new(b: &DMatrix<f64>, e: &DMatrix<f64>, rank_tol: f64) -> Self {
        let z = linalg::nullspace_basis(b, rank_tol);
        let nullspace_dim = z.ncols();
        if nullspace_dim == 0 {
            return Self {
                p: DMatrix::zeros(e.nrows(), 0),
                basis: DMatrix::zeros(e.nrows(), 0),
                nullspace_dim,
            };
        }
        // (E Z)(E Z)^T = U S^2 U^T, so P = U S carries the nonzero spectrum.
        let svd = (e * z).svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let cut = 1e-12 * e.norm().max(f64::MIN_POSITIVE);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > cut)
            .collect();
        let mut p = DMatrix::zeros(e.nrows(), keep.len());
        let mut basis = DMatrix::zeros(e.nrows(), keep.len());
        for (k, &i) in keep.iter().enumerate() {
            basis.set_column(k, &u.column(i));
            p.set_column(k, &(u.column(i) * svd.singular_values[i]));
        }
        Self {
            p,
            basis,
            nullspace_dim,
        }
    }

    pub fn nullspace_dim(&self) -> usize {
        self.nullspace_dim
    }

    /// Smallest eigenvalue and spectral norm of the projected supply matrix.
    pub fn evaluate(&self, pi_l: &DMatrix<f64>) -> (f64, f64) {
        if self.p.ncols() == 0 {
            return (0.0, 0.0);
        }
        let small = self.p.transpose() * pi_l * &self.p;
        let (mut min, norm) = linalg::symmetric_extremes(&small);
        if self.nullspace_dim > self.p.ncols() {
            min = min.min(0.0);
        }
        (min, norm)
    }

    /// `(U_w^T U_w, U_z^T U_z)` for the orthonormal basis split after `nw` rows.
    fn gain_pencil(&self, nw: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let uw = self.basis.rows(0, nw);
        let uz = self.basis.rows(nw, self.basis.nrows() - nw);
        (uw.transpose() * uw, uz.transpose() * uz)
    }

    fn passes(&self, pi_l: &DMatrix<f64>, psd_tol: f64) -> (bool, f64, f64) {
        let (min, norm) = self.evaluate(pi_l);
        (min >= -psd_tol * norm, min, norm)
    }
}

fn certificate(
    proj: &ProjectedSupply,
    pi_l: &DMatrix<f64>,
    horizon: usize,
    prefix: usize,
    tol: &Tolerances,
) -> Certificate {
    let (ok, min_eig, scale) = proj.passes(pi_l, tol.psd_tol);
    Certificate {
        verdict: if ok {
            Verdict::Dissipative
        } else {
            Verdict::NotCertified
        },
        gamma: None,
        min_eig,
        scale,
        nullspace_dim: proj.nullspace_dim(),
        degenerate: proj.nullspace_dim() == 0,
        rank_condition_ok: None,
        horizon,
        prefix,
        tolerances: *tol,
    }
}

fn supply_dims(cs: &ConstraintSystem, pi: &SupplyRate) -> Result<()> {
    let l = cs.horizon;
    if pi.n_w() * l != cs.w_cols.len() || pi.n_z() * l != cs.z_cols.len() {
        return Err(Error::dims(
            "supply rate",
            format!(
                "supply is over ({}, {}) channels, constraint has ({}, {})",
                pi.n_w(),
                pi.n_z(),
                cs.w_cols.len() / l.max(1),
                cs.z_cols.len() / l.max(1)
            ),
        ));
    }
    Ok(())
}

/// Projected test on the closed-loop constraint. A trivial nullspace yields a
/// dissipative verdict with `degenerate` set.
pub fn check_closed_loop_dissipativity(
    cs: &ConstraintSystem,
    pi: &SupplyRate,
    tol: &Tolerances,
) -> Result<Certificate> {
    supply_dims(cs, pi)?;
    let proj = ProjectedSupply::new(&cs.b, &cs.supply_map(), tol.rank_tol);
    Ok(certificate(
        &proj,
        &lift_supply(pi, cs.horizon),
        cs.horizon,
        cs.prefix,
        tol,
    ))
}

struct DataOnly {
    proj: ProjectedSupply,
    rank_ok: bool,
}

fn data_only_projection(
    d: &DataDictionary,
    horizon: usize,
    nu: usize,
    lag_bound: usize,
    tol: &Tolerances,
) -> Result<DataOnly> {
    if nu < lag_bound {
        return Err(Error::PrefixPolicy {
            nu,
            lag_bound,
            model_lag_plus_one: 0,
        });
    }
    if nu > horizon {
        return Err(Error::PrefixExceedsHorizon {
            prefix: nu,
            horizon,
        });
    }
    let h = d.stacked_hankel(horizon)?;
    let vu = zero_prefix_selector(horizon, nu, d.n_u())?.matrix;
    let vy = zero_prefix_selector(horizon, nu, d.n_y())?.matrix;
    let k = linalg::block_diag(&[&vu, &vy]) * &h;
    let proj = ProjectedSupply::new(&k, &h, tol.rank_tol);
    if proj.nullspace_dim() == 0 {
        return Err(Error::DegenerateNullspace);
    }
    let hu = h.rows(0, horizon * d.n_u()).into_owned();
    let rank_ok = linalg::numerical_rank(&hu, tol.rank_tol) == hu.nrows();
    Ok(DataOnly { proj, rank_ok })
}

/// Dissipativity of the plant itself from data, over trajectories whose first
/// `nu` samples vanish. The supply acts on `(u, y)`.
pub fn check_data_only_dissipativity(
    d: &DataDictionary,
    pi: &SupplyRate,
    horizon: usize,
    nu: usize,
    lag_bound: usize,
    tol: &Tolerances,
) -> Result<Certificate> {
    if pi.n_w() != d.n_u() || pi.n_z() != d.n_y() {
        return Err(Error::dims(
            "supply rate",
            "supply channels must match (u, y) of the data",
        ));
    }
    let dd = data_only_projection(d, horizon, nu, lag_bound, tol)?;
    let mut cert = certificate(&dd.proj, &lift_supply(pi, horizon), horizon, nu, tol);
    cert.rank_condition_ok = Some(dd.rank_ok);
    Ok(cert)
}

fn l2_lifted(gamma: f64, nw: usize, nz: usize) -> DMatrix<f64> {
    let diag: Vec<f64> = std::iter::repeat(gamma * gamma)
        .take(nw)
        .chain(std::iter::repeat(-1.0).take(nz))
        .collect();
    DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag))
}

/// Smallest certified `gamma` for the lifted l2 supply by bisection.
///
/// Each step tests `gamma^2 A - C` on an orthonormal basis of the projected
/// signal space, a congruence of the projected supply. The margin is taken
/// relative to the `z`-energy block `C`, which does not grow with `gamma`;
/// a margin relative to the whole matrix would hide the `z`-block once
/// `gamma^2 psd_tol` reaches one and certify unstable loops at a finite gain.
fn bisect_gain(proj: &ProjectedSupply, nw: usize, hint: f64, tol: &Tolerances) -> Result<f64> {
    let (a, c) = proj.gain_pencil(nw);
    let margin = tol.psd_tol * linalg::symmetric_extremes(&c).1;
    let feasible =
        |g: f64| a.ncols() == 0 || linalg::symmetric_extremes(&(&a * (g * g) - &c)).0 >= -margin;
    if feasible(0.0) {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = if hint.is_finite() && hint > 0.0 {
        hint
    } else {
        1.0
    };
    while !feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_GAIN {
            return Err(Error::NoFiniteGain { upper: MAX_GAIN });
        }
    }
    for _ in 0..tol.max_bisect {
        if hi - lo <= tol.bisect_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn gain_certificate(
    proj: &ProjectedSupply,
    nw: usize,
    nz: usize,
    hint: f64,
    horizon: usize,
    prefix: usize,
    tol: &Tolerances,
) -> Result<Certificate> {
    let gamma = bisect_gain(proj, nw, hint, tol)?;
    let mut cert = certificate(proj, &l2_lifted(gamma, nw, nz), horizon, prefix, tol);
    cert.gamma = Some(gamma);
    cert.tolerances = *tol;
    Ok(cert)
}

/// Initial upper bracket `2 (|y| / |u| + 1)` from data norms.
fn bracket_hint(num: f64, den: f64) -> f64 {
    let ratio = if den > 0.0 { num / den } else { 0.0 };
    2.0 * (ratio + 1.0)
}

/// Finite-horizon l2-gain of a closed-loop constraint system.
pub fn constraint_l2_gain(
    cs: &ConstraintSystem,
    hint: f64,
    tol: &Tolerances,
) -> Result<Certificate> {
    let proj = ProjectedSupply::new(&cs.b, &cs.supply_map(), tol.rank_tol);
    gain_certificate(
        &proj,
        cs.w_cols.len(),
        cs.z_cols.len(),
        hint,
        cs.horizon,
        cs.prefix,
        tol,
    )
}

/// Finite-horizon l2-gain from `w` to `z` of the data-driven closed loop.
pub fn finite_horizon_l2_gain_dd(lfr: &FiniteHorizonLfr, tol: &Tolerances) -> Result<Certificate> {
    let cs = assemble_closed_loop_b(lfr)?;
    let hint = bracket_hint(lfr.h_y.norm(), lfr.h_u.norm());
    let mut cert = constraint_l2_gain(&cs, hint, tol)?;
    cert.rank_condition_ok =
        Some(linalg::numerical_rank(&lfr.h_u, tol.rank_tol) == lfr.h_u.nrows());
    Ok(cert)
}

/// Convenience wrapper: lift `M` over the data and compute the gain.
pub fn closed_loop_l2_gain(
    m: &IoRepresentation,
    d: &DataDictionary,
    horizon: usize,
    nu: usize,
    lag_bound: usize,
    tol: &Tolerances,
) -> Result<Certificate> {
    let lfr = FiniteHorizonLfr::from_io(m, d, horizon, nu, lag_bound)?;
    finite_horizon_l2_gain_dd(&lfr, tol)
}

/// Finite-horizon l2-gain from `u` to `y` of the plant itself, from data only.
pub fn data_only_l2_gain(
    d: &DataDictionary,
    horizon: usize,
    nu: usize,
    lag_bound: usize,
    tol: &Tolerances,
) -> Result<Certificate> {
    let dd = data_only_projection(d, horizon, nu, lag_bound, tol)?;
    let hint = bracket_hint(d.y.as_matrix().norm(), d.u.as_matrix().norm());
    let mut cert = gain_certificate(
        &dd.proj,
        horizon * d.n_u(),
        horizon * d.n_y(),
        hint,
        horizon,
        nu,
        tol,
    )?;
    cert.rank_condition_ok = Some(dd.rank_ok);
    Ok(cert)
}
