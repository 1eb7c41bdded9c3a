use std::fmt;

use nalgebra::DMatrix;

use super::matrix::PolyMatrix;
use super::poly::{poly_gcd, poly_lcm, Poly, C64, DEFAULT_GCD_TOL};
use crate::error::{Error, Result};

// Numerator coefficients below this fraction of the operand scale are cancellation noise.
const CHOP_REL: f64 = 1e-13;

/// Scalar rational function `num / den`, kept reduced with a monic denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFn {
    num: Poly,
    den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::SingularDenominator);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = poly_gcd(&num, &den, DEFAULT_GCD_TOL);
        let (num, den) = if g.degree().unwrap_or(0) > 0 {
            (
                num.div_rem(&g).expect("gcd is nonzero").0,
                den.div_rem(&g).expect("gcd is nonzero").0,
            )
        } else {
            (num, den)
        };
        let lead = den.lead();
        Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        }
    }

    pub fn zero() -> Self {
        Self {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::one(),
        }
    }

    /// Build from ascending coefficient lists.
    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Poly::new(num.to_vec()), Poly::new(den.to_vec()))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.degree().unwrap_or(0) <= self.den.degree().unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.num.eval_complex(z) / self.den.eval_complex(z)
    }

    pub fn add(&self, other: &RationalFn) -> RationalFn {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        // Common denominator via the LCM so shared poles are not duplicated.
        let den =
            poly_lcm(&self.den, &other.den, DEFAULT_GCD_TOL).expect("denominators are nonzero");
        let a = &self.num * &den.div_rem(&self.den).expect("denominator is nonzero").0;
        let b = &other.num * &den.div_rem(&other.den).expect("denominator is nonzero").0;
        let scale = a.norm().max(b.norm());
        let num = (&a + &b).chop(CHOP_REL * scale);
        Self::reduced(num, den)
    }

    pub fn sub(&self, other: &RationalFn) -> RationalFn {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        Self::reduced(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn neg(&self) -> RationalFn {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn inv(&self) -> Result<RationalFn> {
        if self.is_zero() {
            return Err(Error::SingularDenominator);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == Some(0) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// Matrix of scalar rational functions (row-major storage).
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<RationalFn>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<RationalFn>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::dims(
                "rational matrix",
                format!("{} entries for a {rows}x{cols} matrix", entries.len()),
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> RationalFn,
    ) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| RationalFn::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                RationalFn::one()
            } else {
                RationalFn::zero()
            }
        })
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| RationalFn::constant(m[(i, j)]))
    }

    pub fn scalar(f: RationalFn) -> Self {
        Self {
            rows: 1,
            cols: 1,
            entries: vec![f],
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFn {
        &self.entries[i * self.cols + j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, f: RationalFn) {
        self.entries[i * self.cols + j] = f;
    }

    pub fn is_proper(&self) -> bool {
        self.entries.iter().all(RationalFn::is_proper)
    }

    /// Sub-block with `nr` rows from `r0` and `nc` columns from `c0`.
    pub fn block(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Self {
        Self::from_fn(nr, nc, |i, j| self.entry(r0 + i, c0 + j).clone())
    }

    pub fn hstack(blocks: &[&RationalMatrix]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        if blocks.iter().any(|b| b.rows != rows) {
            return Err(Error::dims("rational hstack", "row counts differ"));
        }
        let cols = blocks.iter().map(|b| b.cols).sum();
        Ok(Self::from_fn(rows, cols, |i, mut j| {
            for b in blocks {
                if j < b.cols {
                    return b.entry(i, j).clone();
                }
                j -= b.cols;
            }
            unreachable!()
        }))
    }

    pub fn vstack(blocks: &[&RationalMatrix]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(Error::dims("rational vstack", "column counts differ"));
        }
        let mut entries = Vec::new();
        for b in blocks {
            entries.extend(b.entries.iter().cloned());
        }
        let rows = blocks.iter().map(|b| b.rows).sum();
        Self::new(rows, cols, entries)
    }

    pub fn eval(&self, z: C64) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).eval(z))
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<Self> {
        self.same_shape(other, "rational add")?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.entry(i, j).add(other.entry(i, j))
        }))
    }

    pub fn sub(&self, other: &RationalMatrix) -> Result<Self> {
        self.same_shape(other, "rational sub")?;
        Ok(Self::from_fn(self.rows, self.cols, |i, j| {
            self.entry(i, j).sub(other.entry(i, j))
        }))
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.entry(i, j).neg())
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(
                "rational mul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(RationalFn::zero(), |acc, k| {
                acc.add(&self.entry(i, k).mul(other.entry(k, j)))
            })
        }))
    }

    /// Inverse through the adjugate of the numerator matrix.
    ///
    /// Each row is put over the LCM of its denominators, `M = diag(d)^{-1} N`,
    /// so `M^{-1} = adj(N) diag(d) / det(N)` and every entry is reduced once.
    /// Elimination over rational entries compounds missed cancellations instead.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::dims("rational inverse", "matrix is not square"));
        }
        let n = self.rows;
        let mut dens = Vec::with_capacity(n);
        let mut nums = Vec::with_capacity(n * n);
        for i in 0..n {
            let mut l = Poly::one();
            for j in 0..n {
                l = poly_lcm(&l, self.entry(i, j).den(), DEFAULT_GCD_TOL)?;
            }
            for j in 0..n {
                let e = self.entry(i, j);
                nums.push(&l.div_rem(e.den())?.0 * e.num());
            }
            dens.push(l);
        }
        let num = PolyMatrix::from_entries(n, n, |i, j| nums[i * n + j].clone());
        // Hadamard bound on the determinant's coefficient scale.
        let scale: f64 = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| nums[i * n + j].norm().powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .product();
        let det = num.det()?.chop(CHOP_REL * scale);
        if det.is_zero() {
            return Err(Error::SingularDenominator);
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let minor = PolyMatrix::from_entries(n - 1, n - 1, |r, c| {
                    num.entry(if r < j { r } else { r + 1 }, if c < i { c } else { c + 1 })
                });
                let cofactor = if (i + j) % 2 == 0 {
                    minor.det()?
                } else {
                    -&minor.det()?
                };
                entries.push(RationalFn::new(&cofactor * &dens[j], det.clone())?);
            }
        }
        Self::new(n, n, entries)
    }

    fn same_shape(&self, other: &RationalMatrix, block: &str) -> Result<()> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::dims(
                block,
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.entry(i, j).to_string())
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

fn ill_posed(e: Error) -> Error {
    match e {
        Error::SingularDenominator => {
            Error::IllPosedInterconnection("I - F22 K is singular".into())
        }
        other => other,
    }
}

/// Lower LFT `F11 + F12 K (I - F22 K)^{-1} F21`; partition sizes come from `K`.
pub fn lft_lower(f: &RationalMatrix, k: &RationalMatrix) -> Result<RationalMatrix> {
    let (nu, ny) = (k.nrows(), k.ncols());
    if f.nrows() < ny || f.ncols() < nu {
        return Err(Error::dims("lower LFT", "K is larger than the plant"));
    }
    let (nz, nw) = (f.nrows() - ny, f.ncols() - nu);
    let f11 = f.block(0, nz, 0, nw);
    let f12 = f.block(0, nz, nw, nu);
    let f21 = f.block(nz, ny, 0, nw);
    let f22 = f.block(nz, ny, nw, nu);
    let loop_inv = RationalMatrix::identity(ny)
        .sub(&f22.mul(k)?)?
        .inverse()
        .map_err(ill_posed)?;
    f11.add(&f12.mul(k)?.mul(&loop_inv)?.mul(&f21)?)
}

/// Upper LFT `M22 + M21 D (I - M11 D)^{-1} M12`; partition sizes come from `D`.
pub fn lft_upper(m: &RationalMatrix, delta: &RationalMatrix) -> Result<RationalMatrix> {
    let (n_out, n_in) = (delta.nrows(), delta.ncols());
    if m.nrows() < n_in || m.ncols() < n_out {
        return Err(Error::dims("upper LFT", "Delta is larger than the plant"));
    }
    let (nz, nw) = (m.nrows() - n_in, m.ncols() - n_out);
    let m11 = m.block(0, n_in, 0, n_out);
    let m12 = m.block(0, n_in, n_out, nw);
    let m21 = m.block(n_in, nz, 0, n_out);
    let m22 = m.block(n_in, nz, n_out, nw);
    let loop_inv = RationalMatrix::identity(n_in)
        .sub(&m11.mul(delta)?)?
        .inverse()
        .map_err(ill_posed)?;
    m22.add(&m21.mul(delta)?.mul(&loop_inv)?.mul(&m12)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(num: &[f64], den: &[f64]) -> RationalFn {
        RationalFn::from_coeffs(num, den).unwrap()
    }

    fn close(a: &RationalFn, b: &RationalFn) -> bool {
        let d = a.sub(b);
        d.is_zero()
    }

    #[test]
    fn add_same_pole() {
        let a = rf(&[1.0], &[-1.0, 1.0]);
        let s = a.add(&a);
        assert_eq!(s.num().coeffs(), &[2.0]);
        assert_eq!(s.den().coeffs(), &[-1.0, 1.0]);
    }

    #[test]
    fn product_cancels() {
        let p = rf(&[0.5, 1.0], &[-0.5, 1.0]).mul(&rf(&[-0.5, 1.0], &[0.5, 1.0]));
        assert!(close(&p, &RationalFn::one()));
        assert_eq!(p.den().degree(), Some(0));
    }

    #[test]
    fn plant_times_controller() {
        let g = rf(&[0.5, 1.0], &[-0.5, 1.0]);
        let k = rf(&[0.3, 1.0], &[-1.0, 1.0]);
        let gk = g.mul(&k);
        let num = Poly::from_roots(&[-0.5, -0.3]);
        let den = Poly::from_roots(&[0.5, 1.0]);
        for i in 0..3 {
            assert!((gk.num().coeff(i) - num.coeff(i)).abs() < 1e-14);
            assert!((gk.den().coeff(i) - den.coeff(i)).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(
            RationalFn::from_coeffs(&[1.0], &[]),
            Err(Error::SingularDenominator)
        ));
    }

    #[test]
    fn reduction_is_idempotent() {
        let f = rf(&[0.2, -1.0, 1.0], &[0.06, -0.5, 1.0]);
        let again = RationalFn::new(f.num().clone(), f.den().clone()).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn lft_trivial_cases() {
        let k = RationalMatrix::scalar(RationalFn::constant(0.7));
        let f = RationalMatrix::constant(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let cl = lft_lower(&f, &k).unwrap();
        assert!(close(cl.entry(0, 0), &RationalFn::constant(0.7)));
        let f = RationalMatrix::constant(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]));
        let cl = lft_lower(&f, &RationalMatrix::zeros(1, 1)).unwrap();
        assert!(close(cl.entry(0, 0), &RationalFn::one()));
        let cl = lft_upper(&f.block(0, 2, 0, 2), &RationalMatrix::zeros(1, 1)).unwrap();
        assert!(close(cl.entry(0, 0), &RationalFn::zero()));
    }

    #[test]
    fn ill_posed_loop() {
        let f = RationalMatrix::constant(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]));
        let k = RationalMatrix::scalar(RationalFn::one());
        assert!(matches!(
            lft_lower(&f, &k),
            Err(Error::IllPosedInterconnection(_))
        ));
    }

    #[test]
    fn inverse_of_two_by_two() {
        let m = RationalMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => rf(&[1.0], &[-0.5, 1.0]),
            (0, 1) => RationalFn::constant(2.0),
            (1, 0) => RationalFn::zero(),
            _ => rf(&[0.3, 1.0], &[1.0]),
        });
        let prod = m.mul(&m.inverse().unwrap()).unwrap();
        let z = C64::new(0.2, -1.3);
        let e = prod.eval(z) - DMatrix::<C64>::identity(2, 2);
        assert!(e.norm() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let g = rf(&[1.0], &[-0.5, 1.0]);
        let m = RationalMatrix::from_fn(2, 2, |i, _| {
            if i == 0 {
                g.clone()
            } else {
                g.mul(&RationalFn::constant(3.0))
            }
        });
        assert!(matches!(m.inverse(), Err(Error::SingularDenominator)));
    }
}
