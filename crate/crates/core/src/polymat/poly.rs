use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default relative tolerance for Euclid remainders.
pub const DEFAULT_GCD_TOL: f64 = 1e-10;

/// Real polynomial with ascending coefficients: `coeffs[i]` multiplies `xi^i`.
///
/// The zero polynomial has no coefficients; otherwise the last coefficient is nonzero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `xi - root`.
    pub fn linear(root: f64) -> Self {
        Self::new(vec![-root, 1.0])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Self::one(), |acc, &r| &acc * &Self::linear(r))
    }

    /// Monic real polynomial from roots closed under conjugation.
    pub fn from_complex_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (i, ci) in c.iter().enumerate() {
                next[i + 1] += ci;
                next[i] -= ci * r;
            }
            c = next;
        }
        Self::new(c.into_iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `xi^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(1.0 / self.lead())
    }

    /// Multiply by `xi^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut c = vec![0.0; k];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    /// Zero every coefficient with magnitude at most `abs_tol`.
    pub fn chop(&self, abs_tol: f64) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|&c| if c.abs() <= abs_tol { 0.0 } else { c })
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Polynomial long division: `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::ZeroPolynomial)?;
        let Some(n) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if n < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![0.0; n - dd + 1];
        let lead = d.lead();
        for k in (0..=n - dd).rev() {
            let c = r[k + dd] / lead;
            q[k] = c;
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[k + j] -= c * dj;
            }
            r[k + dd] = 0.0;
        }
        r.truncate(dd);
        Ok((Poly::new(q), Poly::new(r)))
    }

    /// Roots as eigenvalues of the companion matrix of the monic polynomial.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let n = self.degree().ok_or(Error::ZeroPolynomial)?;
        if n == 0 {
            return Err(Error::DegreeZero);
        }
        let lead = self.lead();
        if n == 1 {
            return Ok(vec![C64::new(-self.coeffs[0] / lead, 0.0)]);
        }
        let mut comp = DMatrix::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        Ok(comp.complex_eigenvalues().iter().copied().collect())
    }

    /// Largest root modulus, zero for constants.
    pub fn root_radius(&self) -> Result<f64> {
        match self.degree() {
            None => Err(Error::ZeroPolynomial),
            Some(0) => Ok(0.0),
            Some(_) => Ok(self.roots()?.iter().fold(0.0_f64, |a, r| a.max(r.norm()))),
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = c.abs();
            if !first {
                write!(f, " ")?;
            }
            let body = match i {
                0 => format!("{mag}"),
                1 if mag == 1.0 => "xi".to_string(),
                1 => format!("{mag} xi"),
                _ if mag == 1.0 => format!("xi^{i}"),
                _ => format!("{mag} xi^{i}"),
            };
            if first {
                write!(f, "{sign}{body}")?;
            } else {
                write!(f, "{sign} {body}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

/// Monic GCD by Euclid's algorithm on monic iterates; a remainder is treated as
/// zero once its norm drops to `tol * (|a| + |b|)` of the current pair.
///
/// Reliable for common factors of low degree. Past degree four or so the
/// iterates drown in rounding and the GCD comes out too small.
pub fn poly_gcd(a: &Poly, b: &Poly, tol: f64) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let (mut x, mut y) = if a.degree() >= b.degree() {
        (a.monic(), b.monic())
    } else {
        (b.monic(), a.monic())
    };
    loop {
        if y.degree() == Some(0) {
            return Poly::one();
        }
        let scale = x.norm() + y.norm();
        let (_, r) = x.div_rem(&y).expect("divisor is nonzero");
        if r.norm() <= tol * scale {
            return y;
        }
        x = y;
        y = r.monic();
    }
}

/// Monic least common multiple.
pub fn poly_lcm(a: &Poly, b: &Poly, tol: f64) -> Result<Poly> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let g = poly_gcd(a, b, tol);
    let (q, _) = a.monic().div_rem(&g)?;
    Ok((&q * &b.monic()).monic())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut r: Vec<C64>) -> Vec<C64> {
        r.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        r
    }

    #[test]
    fn roots_linear_and_quadratic() {
        let r = Poly::new(vec![-0.5, 1.0]).roots().unwrap();
        assert!((r[0] - C64::new(0.5, 0.0)).norm() < 1e-14);
        let r = sorted_re(Poly::new(vec![-1.0, 0.0, 1.0]).roots().unwrap());
        assert!((r[0] - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
        let r = Poly::new(vec![1.0, 0.0, 1.0]).roots().unwrap();
        let mut im: Vec<f64> = r.iter().map(|z| z.im).collect();
        im.sort_by(f64::total_cmp);
        assert!((im[0] + 1.0).abs() < 1e-12 && (im[1] - 1.0).abs() < 1e-12);
        assert!(r.iter().all(|z| z.re.abs() < 1e-12));
    }

    #[test]
    fn roots_errors() {
        assert!(matches!(Poly::zero().roots(), Err(Error::ZeroPolynomial)));
        assert!(matches!(
            Poly::constant(3.0).roots(),
            Err(Error::DegreeZero)
        ));
    }

    #[test]
    fn gcd_cases() {
        let g = poly_gcd(
            &Poly::new(vec![-1.0, 0.0, 1.0]),
            &Poly::linear(1.0),
            DEFAULT_GCD_TOL,
        );
        assert_eq!(g.degree(), Some(1));
        assert!((g.coeff(0) + 1.0).abs() < 1e-12);
        let g = poly_gcd(&Poly::linear(0.5), &Poly::linear(-0.5), DEFAULT_GCD_TOL);
        assert_eq!(g, Poly::one());
        let p = Poly::new(vec![2.0, 4.0]);
        assert_eq!(
            poly_gcd(&p, &Poly::zero(), DEFAULT_GCD_TOL),
            Poly::new(vec![0.5, 1.0])
        );
    }

    #[test]
    fn lcm_of_distinct_factors() {
        let l = poly_lcm(&Poly::linear(0.2), &Poly::linear(0.7), DEFAULT_GCD_TOL).unwrap();
        assert_eq!(l, &Poly::linear(0.2) * &Poly::linear(0.7));
    }

    #[test]
    fn division_identity() {
        let a = Poly::new(vec![1.0, -2.0, 0.5, 3.0]);
        let d = Poly::new(vec![0.3, 1.0]);
        let (q, r) = a.div_rem(&d).unwrap();
        let back = &(&q * &d) + &r;
        for i in 0..4 {
            assert!((back.coeff(i) - a.coeff(i)).abs() < 1e-12);
        }
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn complex_roots_rebuild() {
        let roots = [C64::new(0.2, 0.5), C64::new(0.2, -0.5), C64::new(-0.3, 0.0)];
        let p = Poly::from_complex_roots(&roots);
        for r in roots {
            assert!(p.eval_complex(r).norm() < 1e-14);
        }
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(Poly::new(vec![-0.5, 1.0]).to_string(), "xi - 0.5");
        assert_eq!(Poly::zero().to_string(), "0");
    }
}
