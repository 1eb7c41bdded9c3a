use nalgebra::DMatrix;

use super::{StateSpace, TimeDomain};
use crate::error::Result;
use crate::polymat::{RationalFn, RationalMatrix};

/// Two masses in series: mass 1 tied to ground, force on mass 2, position of mass 1 measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoMassParams {
    pub m1: f64,
    pub m2: f64,
    pub d1: f64,
    pub d2: f64,
    pub k1: f64,
    pub k2: f64,
}

impl Default for TwoMassParams {
    fn default() -> Self {
        Self {
            m1: 10.0,
            m2: 0.5,
            d1: 200.0,
            d2: 10.0,
            k1: 3000.0,
            k2: 1000.0,
        }
    }
}

/// Continuous-time model with state `(x1, v1, x2, v2)`.
pub fn two_mass_plant(p: &TwoMassParams) -> StateSpace {
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        0.0, 1.0, 0.0, 0.0,
        -(p.k1 + p.k2) / p.m1, -(p.d1 + p.d2) / p.m1, p.k2 / p.m1, p.d2 / p.m1,
        0.0, 0.0, 0.0, 1.0,
        p.k2 / p.m2, p.d2 / p.m2, -p.k2 / p.m2, -p.d2 / p.m2,
    ]);
    let b = DMatrix::from_column_slice(4, 1, &[0.0, 0.0, 0.0, 1.0 / p.m2]);
    let c = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 0.0, 0.0]);
    StateSpace {
        a,
        b,
        c,
        d: DMatrix::zeros(1, 1),
        time: TimeDomain::Continuous,
    }
}

/// `G(q) = (q + 0.5) / (q - 0.5)`.
pub fn example1_plant() -> Result<StateSpace> {
    let g = RationalFn::from_coeffs(&[0.5, 1.0], &[-0.5, 1.0])?;
    StateSpace::from_rational(&RationalMatrix::scalar(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matrix() {
        let s = two_mass_plant(&TwoMassParams::default());
        assert_eq!(
            s.a.row(1).iter().copied().collect::<Vec<_>>(),
            vec![-400.0, -21.0, 100.0, 1.0]
        );
        assert_eq!(
            s.a.row(3).iter().copied().collect::<Vec<_>>(),
            vec![2000.0, 20.0, -2000.0, -20.0]
        );
        assert_eq!(s.b[(3, 0)], 2.0);
        assert!(s.is_stable());
    }
}
