//! State-space models: simulation, discretization, Toeplitz operators and norm oracles.

mod expm;
mod extended;
mod hinf;
mod plants;
mod random;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::polymat::{rational_to_io, Channel, IoRepresentation, RationalMatrix, C64};
use crate::signals::Trajectory;

pub use expm::{discretize_zoh, expm};
pub use extended::{build_extended_state, check_extended_rank};
pub use hinf::{hinf_norm, FrequencyResponse, DEFAULT_GRID, DEFAULT_REFINE};
pub use plants::{example1_plant, two_mass_plant, TwoMassParams};
pub use random::{generate_data, observability_index, random_stable_system, uniform_input};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeDomain {
    Continuous,
    Discrete,
}

/// `x+ = A x + B u`, `y = C x + D u` (or `x' = ...` in continuous time).
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub time: TimeDomain,
}

/// Finite-horizon maps `y|_L = O_L x0 + T_L u|_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzOperator {
    pub horizon: usize,
    pub observability: DMatrix<f64>,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LftKind {
    /// Controller closes the last inputs/outputs of the plant.
    Lower,
    /// Uncertainty closes the first inputs/outputs of the plant.
    Upper,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        time: TimeDomain,
    ) -> Result<Self> {
        let n = a.nrows();
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::dims("state space", what.to_string()))
            }
        };
        check(a.ncols() == n, "A is not square")?;
        check(b.nrows() == n, "B rows differ from state dimension")?;
        check(c.ncols() == n, "C columns differ from state dimension")?;
        check(d.nrows() == c.nrows(), "D rows differ from C rows")?;
        check(d.ncols() == b.ncols(), "D columns differ from B columns")?;
        Ok(Self { a, b, c, d, time })
    }

    /// Memoryless gain `y = D u`.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (p, m) = d.shape();
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, m),
            c: DMatrix::zeros(p, 0),
            d,
            time: TimeDomain::Discrete,
        }
    }

    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn spectral_radius(&self) -> f64 {
        linalg::spectral_radius(&self.a)
    }

    /// Schur stability for discrete time, Hurwitz for continuous time.
    pub fn is_stable(&self) -> bool {
        if self.n_states() == 0 {
            return true;
        }
        match self.time {
            TimeDomain::Discrete => self.spectral_radius() < 1.0 - crate::polymat::STABILITY_TOL,
            TimeDomain::Continuous => self
                .a
                .complex_eigenvalues()
                .iter()
                .all(|l| l.re < -crate::polymat::STABILITY_TOL),
        }
    }

    fn require_discrete(&self) -> Result<()> {
        match self.time {
            TimeDomain::Discrete => Ok(()),
            TimeDomain::Continuous => Err(Error::Config(
                "operation needs a discrete-time system".into(),
            )),
        }
    }

    pub fn simulate(&self, u: &Trajectory, x0: &DVector<f64>) -> Result<Trajectory> {
        self.require_discrete()?;
        if u.dim() != self.n_inputs() {
            return Err(Error::dims(
                "simulate",
                format!(
                    "input has {} channels, system has {}",
                    u.dim(),
                    self.n_inputs()
                ),
            ));
        }
        if x0.len() != self.n_states() {
            return Err(Error::dims(
                "simulate",
                format!(
                    "initial state has length {}, system has {} states",
                    x0.len(),
                    self.n_states()
                ),
            ));
        }
        let um = u.as_matrix();
        let mut y = DMatrix::zeros(self.n_outputs(), u.len());
        let mut x = x0.clone();
        for k in 0..u.len() {
            let uk = um.column(k);
            y.set_column(k, &(&self.c * &x + &self.d * uk));
            x = &self.a * &x + &self.b * uk;
        }
        Trajectory::from_matrix(y)
    }

    /// Impulse response matrices `D, CB, CAB, ...` (`len` of them).
    pub fn markov_parameters(&self, len: usize) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return out;
        }
        out.push(self.d.clone());
        let mut ab = self.b.clone();
        for _ in 1..len {
            out.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        out
    }

    pub fn observability(&self, horizon: usize) -> DMatrix<f64> {
        let (p, n) = (self.n_outputs(), self.n_states());
        let mut o = DMatrix::zeros(horizon * p, n);
        let mut ca = self.c.clone();
        for i in 0..horizon {
            o.view_mut((i * p, 0), (p, n)).copy_from(&ca);
            ca = &ca * &self.a;
        }
        o
    }

    pub fn toeplitz_operator(&self, horizon: usize) -> ToeplitzOperator {
        let (p, m) = (self.n_outputs(), self.n_inputs());
        let markov = self.markov_parameters(horizon);
        let mut t = DMatrix::zeros(horizon * p, horizon * m);
        for i in 0..horizon {
            for j in 0..=i {
                t.view_mut((i * p, j * m), (p, m)).copy_from(&markov[i - j]);
            }
        }
        ToeplitzOperator {
            horizon,
            observability: self.observability(horizon),
            matrix: t,
        }
    }

    /// `C (zI - A)^{-1} B + D`.
    pub fn eval(&self, z: C64) -> DMatrix<C64> {
        let n = self.n_states();
        let dc = self.d.map(|v| C64::new(v, 0.0));
        if n == 0 {
            return dc;
        }
        let zi_a = DMatrix::<C64>::identity(n, n) * z - self.a.map(|v| C64::new(v, 0.0));
        let bc = self.b.map(|v| C64::new(v, 0.0));
        let x = zi_a.lu().solve(&bc).unwrap_or_else(|| {
            DMatrix::from_element(n, self.n_inputs(), C64::new(f64::INFINITY, 0.0))
        });
        self.c.map(|v| C64::new(v, 0.0)) * x + dc
    }

    /// Realize a kernel representation with diagonal `D(q)`, row by row in
    /// observable canonical form.
    pub fn from_io(io: &IoRepresentation) -> Result<Self> {
        let p = io.n_outputs();
        let m = io.n_inputs();
        let diagonal = (0..p).all(|i| (0..p).all(|j| i == j || io.den.entry(i, j).is_zero()));
        if !diagonal {
            let outputs = (0..p).map(|i| Channel::new(format!("y{i}"), 1)).collect();
            let inputs = (0..m).map(|j| Channel::new(format!("u{j}"), 1)).collect();
            return Self::from_io(&rational_to_io(&io.to_rational()?, outputs, inputs)?);
        }
        let mut blocks_a = Vec::new();
        let mut blocks_b = Vec::new();
        let mut blocks_c = Vec::new();
        let mut d = DMatrix::zeros(p, m);
        for r in 0..p {
            let den = io.den.entry(r, r);
            let n = den.degree().ok_or(Error::SingularDenominator)?;
            let lead = den.lead();
            let den = den.scale(1.0 / lead);
            let mut b = DMatrix::zeros(n, m);
            for k in 0..m {
                let num = io.num.entry(r, k).scale(1.0 / lead);
                if num.degree().is_some_and(|dn| dn > n) {
                    return Err(Error::NotProper(format!(
                        "row {r}, input {k}: numerator degree exceeds denominator"
                    )));
                }
                let feed = num.coeff(n);
                d[(r, k)] = feed;
                let rem = &num - &den.scale(feed);
                for i in 0..n {
                    b[(i, k)] = rem.coeff(i);
                }
            }
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                if i > 0 {
                    a[(i, i - 1)] = 1.0;
                }
                a[(i, n - 1)] = -den.coeff(i);
            }
            let mut c = DMatrix::zeros(1, n);
            if n > 0 {
                c[(0, n - 1)] = 1.0;
            }
            blocks_a.push(a);
            blocks_b.push(b);
            blocks_c.push(c);
        }
        let a = linalg::block_diag(&blocks_a.iter().collect::<Vec<_>>());
        let b = linalg::vstack(&blocks_b.iter().collect::<Vec<_>>());
        let c = linalg::block_diag(&blocks_c.iter().collect::<Vec<_>>());
        Self::new(a, b, c, d, TimeDomain::Discrete)
    }

    pub fn from_rational(m: &RationalMatrix) -> Result<Self> {
        let outputs = (0..m.nrows())
            .map(|i| Channel::new(format!("y{i}"), 1))
            .collect();
        let inputs = (0..m.ncols())
            .map(|j| Channel::new(format!("u{j}"), 1))
            .collect();
        Self::from_io(&rational_to_io(m, outputs, inputs)?)
    }

    /// Select outputs `rows` and inputs `cols`.
    pub fn subsystem(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Self {
            a: self.a.clone(),
            b: self.b.columns(cols.start, cols.len()).into_owned(),
            c: self.c.rows(rows.start, rows.len()).into_owned(),
            d: self
                .d
                .view((rows.start, cols.start), (rows.len(), cols.len()))
                .into_owned(),
            time: self.time,
        }
    }
}

/// `sigma_max(T_L)`: the finite-horizon l2-gain from zero initial state.
pub fn finite_horizon_gain_mb(sys: &StateSpace, horizon: usize) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    linalg::singular_values(&sys.toeplitz_operator(horizon).matrix)
        .first()
        .copied()
        .unwrap_or(0.0)
}

/// State-space LFT. For [`LftKind::Lower`] the partition sizes come from `k`
/// (its outputs feed the last plant inputs); [`LftKind::Upper`] closes the
/// first plant channels instead. The closed-loop state is `[x_p; x_k]`.
pub fn ss_lft(p: &StateSpace, k: &StateSpace, kind: LftKind) -> Result<StateSpace> {
    let (k_in, k_out) = (k.n_inputs(), k.n_outputs());
    if p.n_outputs() < k_in || p.n_inputs() < k_out {
        return Err(Error::dims(
            "state-space LFT",
            "closing system is larger than the plant",
        ));
    }
    match kind {
        LftKind::Lower => lower_lft(p, k),
        LftKind::Upper => {
            let (po, pi) = (p.n_outputs(), p.n_inputs());
            let out_perm: Vec<usize> = (k_in..po).chain(0..k_in).collect();
            let in_perm: Vec<usize> = (k_out..pi).chain(0..k_out).collect();
            let permuted = StateSpace {
                a: p.a.clone(),
                b: p.b.select_columns(&in_perm),
                c: p.c.select_rows(&out_perm),
                d: p.d.select_rows(&out_perm).select_columns(&in_perm),
                time: p.time,
            };
            lower_lft(&permuted, k)
        }
    }
}

fn lower_lft(p: &StateSpace, k: &StateSpace) -> Result<StateSpace> {
    let (ny, nu) = (k.n_inputs(), k.n_outputs());
    let (nz, nw) = (p.n_outputs() - ny, p.n_inputs() - nu);
    let n = p.n_states();
    let b1 = p.b.columns(0, nw).into_owned();
    let b2 = p.b.columns(nw, nu).into_owned();
    let c1 = p.c.rows(0, nz).into_owned();
    let c2 = p.c.rows(nz, ny).into_owned();
    let d11 = p.d.view((0, 0), (nz, nw)).into_owned();
    let d12 = p.d.view((0, nw), (nz, nu)).into_owned();
    let d21 = p.d.view((nz, 0), (ny, nw)).into_owned();
    let d22 = p.d.view((nz, nw), (ny, nu)).into_owned();

    let r = DMatrix::identity(ny, ny) - &d22 * &k.d;
    let r_inv = r
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::IllPosedInterconnection("I - D22 Dk is singular".into()))?;
    // y = Yx x + Yk xk + Yw w ; u = Ux x + Uk xk + Uw w
    let yx = &r_inv * &c2;
    let yk = &r_inv * &d22 * &k.c;
    let yw = &r_inv * &d21;
    let ux = &k.d * &yx;
    let uk = &k.c + &k.d * &yk;
    let uw = &k.d * &yw;

    let nk = k.n_states();
    let mut a = DMatrix::zeros(n + nk, n + nk);
    a.view_mut((0, 0), (n, n)).copy_from(&(&p.a + &b2 * &ux));
    a.view_mut((0, n), (n, nk)).copy_from(&(&b2 * &uk));
    a.view_mut((n, 0), (nk, n)).copy_from(&(&k.b * &yx));
    a.view_mut((n, n), (nk, nk)).copy_from(&(&k.a + &k.b * &yk));
    let b = linalg::vstack(&[&(&b1 + &b2 * &uw), &(&k.b * &yw)]);
    let c = linalg::hstack(&[&(&c1 + &d12 * &ux), &(&d12 * &uk)]);
    let d = &d11 + &d12 * &uw;
    StateSpace::new(a, b, c, d, p.time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::{lft_lower, RationalFn};

    fn integrator() -> StateSpace {
        let one = DMatrix::from_element(1, 1, 1.0);
        StateSpace::new(
            one.clone(),
            one.clone(),
            one,
            DMatrix::zeros(1, 1),
            TimeDomain::Discrete,
        )
        .unwrap()
    }

    #[test]
    fn integrator_ramp() {
        let u = Trajectory::scalar(&[1.0; 5]).unwrap();
        let y = integrator().simulate(&u, &DVector::zeros(1)).unwrap();
        assert_eq!(y.as_matrix().as_slice(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn realized_plant_impulse() {
        let g = example1_plant().unwrap();
        let mut u = vec![0.0; 8];
        u[0] = 1.0;
        let y = g
            .simulate(
                &Trajectory::scalar(&u).unwrap(),
                &DVector::zeros(g.n_states()),
            )
            .unwrap();
        let y = y.as_matrix();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);
        for k in 2..8 {
            assert!((y[k] - 0.5 * y[k - 1]).abs() < 1e-14);
        }
    }

    #[test]
    fn toeplitz_small_cases() {
        let t = integrator().toeplitz_operator(3);
        assert_eq!(
            t.matrix,
            DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0])
        );
        let t1 = integrator().toeplitz_operator(1);
        assert_eq!(t1.matrix, DMatrix::zeros(1, 1));
        assert_eq!(t1.observability, DMatrix::from_element(1, 1, 1.0));
        assert!((finite_horizon_gain_mb(&integrator(), 2) - 1.0).abs() < 1e-14);
        let s = StateSpace::static_gain(DMatrix::from_element(1, 1, 2.0));
        assert!((finite_horizon_gain_mb(&s, 7) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lft_zero_controller_is_p11() {
        let g = example1_plant().unwrap();
        let p = StateSpace {
            b: linalg::hstack(&[&g.b, &g.b]),
            d: DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]),
            c: linalg::vstack(&[&g.c, &g.c]),
            ..g.clone()
        };
        let k = StateSpace::static_gain(DMatrix::zeros(1, 1));
        let cl = ss_lft(&p, &k, LftKind::Lower).unwrap();
        let z = C64::new(0.3, 1.1);
        assert!((cl.eval(z)[(0, 0)] - p.subsystem(0..1, 0..1).eval(z)[(0, 0)]).norm() < 1e-12);
    }

    #[test]
    fn lft_matches_rational() {
        let kf = RationalFn::from_coeffs(&[0.3, 1.0], &[-1.0, 1.0]).unwrap();
        let f = RationalMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => RationalFn::from_coeffs(&[0.1], &[-0.2, 1.0]).unwrap(),
            (0, 1) => RationalFn::one(),
            (1, 0) => RationalFn::constant(0.5),
            _ => RationalFn::from_coeffs(&[0.5, 1.0], &[-0.5, 1.0])
                .unwrap()
                .neg(),
        });
        let k = RationalMatrix::scalar(kf);
        let cl_r = lft_lower(&f, &k).unwrap();
        let cl_s = ss_lft(
            &StateSpace::from_rational(&f).unwrap(),
            &StateSpace::from_rational(&k).unwrap(),
            LftKind::Lower,
        )
        .unwrap();
        for t in 0..20 {
            let z = C64::from_polar(0.6 + 0.05 * t as f64, 0.3 * t as f64 + 0.1);
            let (a, b) = (cl_r.eval(z)[(0, 0)], cl_s.eval(z)[(0, 0)]);
            assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn ill_posed_static_loop() {
        let p = StateSpace::static_gain(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]));
        let k = StateSpace::static_gain(DMatrix::from_element(1, 1, 1.0));
        assert!(matches!(
            ss_lft(&p, &k, LftKind::Lower),
            Err(Error::IllPosedInterconnection(_))
        ));
    }
}
