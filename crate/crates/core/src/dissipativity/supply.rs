use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

/// Quadratic supply `s(w, z) = [w; z]^T [[Q, S], [S^T, R]] [w; z]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupplyRate {
    #[serde(serialize_with = "ser_matrix")]
    pub q: DMatrix<f64>,
    #[serde(serialize_with = "ser_matrix")]
    pub s: DMatrix<f64>,
    #[serde(serialize_with = "ser_matrix")]
    pub r: DMatrix<f64>,
}

fn ser_matrix<S: serde::Serializer>(
    m: &DMatrix<f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

impl SupplyRate {
    /// Custom supply; `Q` and `R` are symmetrized.
    pub fn new(q: DMatrix<f64>, s: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        if !q.is_square() || !r.is_square() {
            return Err(Error::dims("supply rate", "Q and R must be square"));
        }
        if s.shape() != (q.nrows(), r.nrows()) {
            return Err(Error::dims(
                "supply rate",
                format!(
                    "S is {:?}, expected ({}, {})",
                    s.shape(),
                    q.nrows(),
                    r.nrows()
                ),
            ));
        }
        Ok(Self {
            q: linalg::symmetrize(&q),
            s,
            r: linalg::symmetrize(&r),
        })
    }

    /// `(gamma^2 I, 0, -I)`.
    pub fn l2_gain(gamma: f64, n_w: usize, n_z: usize) -> Self {
        Self {
            q: DMatrix::identity(n_w, n_w) * (gamma * gamma),
            s: DMatrix::zeros(n_w, n_z),
            r: -DMatrix::identity(n_z, n_z),
        }
    }

    /// `(0, I, 0)`.
    pub fn passivity(n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, n),
            s: DMatrix::identity(n, n),
            r: DMatrix::zeros(n, n),
        }
    }

    /// `(-nu I, I, 0)`.
    pub fn input_feedforward_passivity(nu: f64, n: usize) -> Self {
        Self {
            q: DMatrix::identity(n, n) * -nu,
            s: DMatrix::identity(n, n),
            r: DMatrix::zeros(n, n),
        }
    }

    /// `(0, I, beta I)`.
    pub fn passivity_shortage(beta: f64, n: usize) -> Self {
        Self {
            q: DMatrix::zeros(n, n),
            s: DMatrix::identity(n, n),
            r: DMatrix::identity(n, n) * beta,
        }
    }

    pub fn n_w(&self) -> usize {
        self.q.nrows()
    }

    pub fn n_z(&self) -> usize {
        self.r.nrows()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            q: &self.q * alpha,
            s: &self.s * alpha,
            r: &self.r * alpha,
        }
    }

    /// The full `(n_w + n_z)` square matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let top = linalg::hstack(&[&self.q, &self.s]);
        let bottom = linalg::hstack(&[&self.s.transpose(), &self.r]);
        linalg::vstack(&[&top, &bottom])
    }
}

/// `Pi_L = [[I_L (x) Q, I_L (x) S], [I_L (x) S^T, I_L (x) R]]` on `[w|_L; z|_L]`.
pub fn lift_supply(pi: &SupplyRate, horizon: usize) -> DMatrix<f64> {
    let id = DMatrix::<f64>::identity(horizon, horizon);
    let q = linalg::kron(&id, &pi.q);
    let s = linalg::kron(&id, &pi.s);
    let r = linalg::kron(&id, &pi.r);
    let top = linalg::hstack(&[&q, &s]);
    let bottom = linalg::hstack(&[&s.transpose(), &r]);
    linalg::vstack(&[&top, &bottom])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_lift_is_diagonal() {
        let p = lift_supply(&SupplyRate::l2_gain(1.5, 1, 1), 2);
        assert_eq!(
            p,
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.25, 2.25, -1.0, -1.0]))
        );
    }

    #[test]
    fn passivity_single_step() {
        let p = lift_supply(&SupplyRate::passivity(1), 1);
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn custom_is_symmetrized() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let s = DMatrix::from_row_slice(2, 1, &[0.3, -0.7]);
        let r = DMatrix::from_element(1, 1, -1.0);
        let pi = SupplyRate::new(q, s, r).unwrap();
        let p = lift_supply(&pi, 3);
        assert_eq!(p, p.transpose());
        assert!(SupplyRate::new(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(1, 1),
            DMatrix::zeros(1, 1)
        )
        .is_err());
    }
}
