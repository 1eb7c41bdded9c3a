use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::poly::{Poly, C64};
use crate::error::{Error, Result};

/// Stability margin tolerance: roots must satisfy `|lambda| < 1 - margin - STABILITY_TOL`.
pub const STABILITY_TOL: f64 = 1e-10;

/// Default relative tolerance for the coprimeness rank test.
pub const DEFAULT_COPRIME_TOL: f64 = 1e-7;

/// Matrix polynomial `P(xi) = sum_i P_i xi^i` with dense real coefficients.
///
/// Trailing zero coefficient matrices are trimmed; the zero matrix has none.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    coeffs: Vec<DMatrix<f64>>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, mut coeffs: Vec<DMatrix<f64>>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| c.shape() != (rows, cols)) {
            return Err(Error::dims(
                "polynomial matrix",
                format!(
                    "coefficient {i} is {:?}, expected ({rows}, {cols})",
                    coeffs[i].shape()
                ),
            ));
        }
        while coeffs.last().is_some_and(|c| c.iter().all(|&v| v == 0.0)) {
            coeffs.pop();
        }
        Ok(Self { rows, cols, coeffs })
    }

    /// Build entrywise from scalar polynomials.
    pub fn from_entries(
        rows: usize,
        cols: usize,
        mut entry: impl FnMut(usize, usize) -> Poly,
    ) -> Self {
        let grid: Vec<Poly> = (0..rows * cols)
            .map(|k| entry(k / cols, k % cols))
            .collect();
        let len = grid.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        let coeffs = (0..len)
            .map(|d| DMatrix::from_fn(rows, cols, |i, j| grid[i * cols + j].coeff(d)))
            .collect();
        Self::new(rows, cols, coeffs).expect("shapes are consistent by construction")
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        let (r, c) = m.shape();
        Self::new(r, c, vec![m]).expect("single coefficient")
    }

    pub fn scalar(p: &Poly) -> Self {
        Self::from_entries(1, 1, |_, _| p.clone())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coeffs: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    /// Highest index with a nonzero coefficient matrix.
    pub fn lag(&self) -> Result<usize> {
        self.coeffs.len().checked_sub(1).ok_or(Error::ZeroMatrix)
    }

    /// Lag of a single row, `None` if the row is zero.
    pub fn row_lag(&self, i: usize) -> Option<usize> {
        (0..self.cols)
            .filter_map(|j| self.entry(i, j).degree())
            .max()
    }

    pub fn rows_range(&self, start: usize, len: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.rows(start, len).into_owned())
            .collect();
        Self::new(len, self.cols, coeffs).expect("consistent shapes")
    }

    pub fn cols_range(&self, start: usize, len: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| c.columns(start, len).into_owned())
            .collect();
        Self::new(self.rows, len, coeffs).expect("consistent shapes")
    }

    /// `[self other]`.
    pub fn hstack(&self, other: &PolyMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::dims("polynomial matrix", "row counts differ"));
        }
        let cols = self.cols + other.cols;
        Ok(Self::from_entries(self.rows, cols, |i, j| {
            if j < self.cols {
                self.entry(i, j)
            } else {
                other.entry(i, j - self.cols)
            }
        }))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            self.rows,
            self.cols,
            self.coeffs.iter().map(|c| c * s).collect(),
        )
        .expect("same shape")
    }

    pub fn eval(&self, z: C64) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.rows, self.cols);
        for c in self.coeffs.iter().rev() {
            out = out * z + c.map(|v| C64::new(v, 0.0));
        }
        out
    }

    /// Sum of coefficient Frobenius norms.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Determinant; cofactor expansion up to 4x4, otherwise evaluation on
    /// `n * lag + 1` unit-circle points followed by interpolation.
    pub fn det(&self) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(Error::dims(
                "determinant",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(Poly::one());
        }
        if self.is_zero() {
            return Ok(Poly::zero());
        }
        if n <= 4 {
            let grid: Vec<Poly> = (0..n * n).map(|k| self.entry(k / n, k % n)).collect();
            let idx: Vec<usize> = (0..n).collect();
            return Ok(cofactor_det(&grid, n, &idx, &idx));
        }
        let lag = self.lag()?;
        let points = n * lag + 1;
        let values: Vec<C64> = (0..points)
            .map(|k| {
                let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / points as f64);
                self.eval(z).lu().determinant()
            })
            .collect();
        let mut coeffs: Vec<f64> = (0..points)
            .map(|j| {
                let s: C64 = values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| {
                        v * C64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / points as f64)
                    })
                    .sum();
                s.re / points as f64
            })
            .collect();
        let max = coeffs.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        for c in coeffs.iter_mut() {
            if c.abs() <= 1e-13 * max {
                *c = 0.0;
            }
        }
        Ok(Poly::new(coeffs))
    }
}

fn cofactor_det(grid: &[Poly], n: usize, rows: &[usize], cols: &[usize]) -> Poly {
    if rows.len() == 1 {
        return grid[rows[0] * n + cols[0]].clone();
    }
    let r = rows[0];
    let sub_rows = &rows[1..];
    let mut acc = Poly::zero();
    for (k, &c) in cols.iter().enumerate() {
        let e = &grid[r * n + c];
        if e.is_zero() {
            continue;
        }
        let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = cofactor_det(grid, n, sub_rows, &sub_cols);
        let term = e * &minor;
        acc = if k % 2 == 0 {
            &acc + &term
        } else {
            &acc - &term
        };
    }
    acc
}

/// Upper block-Toeplitz lift `T_L(P)`, `(L - lag) n x L m`: block row `i` holds
/// `P_0 .. P_lag` starting at block column `i`.
pub fn toeplitz_lift(p: &PolyMatrix, horizon: usize) -> Result<DMatrix<f64>> {
    let lag = p.lag()?;
    toeplitz_lift_with_lag(p, horizon, lag)
}

/// Lift treating `p` as having lag `lag` (at least its true lag).
pub fn toeplitz_lift_with_lag(p: &PolyMatrix, horizon: usize, lag: usize) -> Result<DMatrix<f64>> {
    if horizon <= lag {
        return Err(Error::HorizonTooShort { horizon, lag });
    }
    let (n, m) = (p.nrows(), p.ncols());
    let block_rows = horizon - lag;
    let mut t = DMatrix::zeros(block_rows * n, horizon * m);
    for i in 0..block_rows {
        for (k, c) in p.coeffs().iter().enumerate() {
            t.view_mut((i * n, (i + k) * m), (n, m)).copy_from(c);
        }
    }
    Ok(t)
}

/// True iff every root of `det D(xi)` lies strictly inside the unit disc.
pub fn is_stable(d: &PolyMatrix) -> Result<bool> {
    is_stable_with_margin(d, 0.0)
}

pub fn is_stable_with_margin(d: &PolyMatrix, margin: f64) -> Result<bool> {
    let det = d.det()?;
    if det.is_zero() {
        return Err(Error::SingularDenominator);
    }
    Ok(det.root_radius()? < 1.0 - margin - STABILITY_TOL)
}

/// True iff `[-N(lambda) D(lambda)]` keeps full row rank at every root of `det D`.
pub fn is_coprime(d: &PolyMatrix, n: &PolyMatrix, tol: f64) -> Result<bool> {
    if d.nrows() != n.nrows() {
        return Err(Error::dims(
            "coprimeness test",
            "D and N have different row counts",
        ));
    }
    let det = d.det()?;
    if det.is_zero() {
        return Err(Error::SingularDenominator);
    }
    if det.degree() == Some(0) {
        return Ok(true);
    }
    let composite = n.scale(-1.0).hstack(d)?;
    let scale = composite.coeff_norm().max(f64::MIN_POSITIVE);
    for lambda in det.roots()? {
        let m = composite.eval(lambda);
        let sv = m.singular_values();
        let rank = sv.iter().filter(|&&s| s >= tol * scale).count();
        if rank < d.nrows() {
            return Ok(false);
        }
    }
    Ok(true)
}
