use nalgebra::DMatrix;

use super::{StateSpace, TimeDomain};
use crate::error::{Error, Result};

// Degree-13 Pade coefficients and the matching 1-norm bound (Higham 2005).
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Pade approximant.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::dims("expm", "matrix is not square"));
    }
    if n == 0 {
        return Ok(a.clone());
    }
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::Numerical("expm of a non-finite matrix".into()));
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Numerical("singular Pade denominator".into()))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

/// Zero-order-hold discretization through `exp(h [[A, B], [0, 0]])`.
pub fn discretize_zoh(sys: &StateSpace, h: f64) -> Result<StateSpace> {
    if sys.time != TimeDomain::Continuous {
        return Err(Error::Config(
            "zero-order hold needs a continuous-time system".into(),
        ));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!(
            "sampling time must be positive, got {h}"
        )));
    }
    let (n, m) = (sys.n_states(), sys.n_inputs());
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&sys.a * h));
    aug.view_mut((0, n), (n, m)).copy_from(&(&sys.b * h));
    let e = expm(&aug)?;
    StateSpace::new(
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
        sys.c.clone(),
        sys.d.clone(),
        TimeDomain::Discrete,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_ct(a: f64) -> StateSpace {
        let m = |v| DMatrix::from_element(1, 1, v);
        StateSpace::new(m(a), m(1.0), m(1.0), m(0.0), TimeDomain::Continuous).unwrap()
    }

    #[test]
    fn integrator_and_first_order() {
        let d = discretize_zoh(&scalar_ct(0.0), 0.1).unwrap();
        assert_eq!(d.a[(0, 0)], 1.0);
        assert!((d.b[(0, 0)] - 0.1).abs() < 1e-16);
        let d = discretize_zoh(&scalar_ct(-1.0), 0.1).unwrap();
        let e = (-0.1f64).exp();
        assert!((d.a[(0, 0)] - e).abs() < 1e-15);
        assert!((d.b[(0, 0)] - (1.0 - e)).abs() < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        let t = 7.5;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let e = expm(&a).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((e - expected).norm() < 1e-13);
    }

    #[test]
    fn nilpotent() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        let e = expm(&a).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.5, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0]);
        assert!((e - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_step() {
        assert!(discretize_zoh(&scalar_ct(-1.0), 0.0).is_err());
    }
}
