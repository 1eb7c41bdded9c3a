use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::StateSpace;
use crate::error::{Error, Result};
use crate::polymat::{IoRepresentation, RationalMatrix, C64};

pub const DEFAULT_GRID: usize = 2000;
pub const DEFAULT_REFINE: usize = 60;

/// Anything with a discrete-time frequency response.
pub trait FrequencyResponse {
    fn response(&self, z: C64) -> DMatrix<C64>;

    /// Largest pole modulus.
    fn pole_radius(&self) -> Result<f64>;
}

impl FrequencyResponse for StateSpace {
    fn response(&self, z: C64) -> DMatrix<C64> {
        self.eval(z)
    }

    fn pole_radius(&self) -> Result<f64> {
        Ok(self.spectral_radius())
    }
}

impl FrequencyResponse for RationalMatrix {
    fn response(&self, z: C64) -> DMatrix<C64> {
        self.eval(z)
    }

    fn pole_radius(&self) -> Result<f64> {
        let mut r = 0.0_f64;
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                r = r.max(self.entry(i, j).den().root_radius()?);
            }
        }
        Ok(r)
    }
}

impl FrequencyResponse for IoRepresentation {
    fn response(&self, z: C64) -> DMatrix<C64> {
        let d = self.den.eval(z);
        let n = self.num.eval(z);
        d.lu().solve(&n).unwrap_or_else(|| {
            DMatrix::from_element(n.nrows(), n.ncols(), C64::new(f64::INFINITY, 0.0))
        })
    }

    fn pole_radius(&self) -> Result<f64> {
        self.den.det()?.root_radius()
    }
}

fn sigma_max(m: &DMatrix<C64>) -> f64 {
    if m.len() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().max()
}

fn gain_at<T: FrequencyResponse + ?Sized>(sys: &T, theta: f64) -> f64 {
    sigma_max(&sys.response(C64::from_polar(1.0, theta)))
}

/// `max_theta sigma_max(G(e^{i theta}))` over `[0, pi]` from a uniform grid of
/// `n_grid` points refined by golden-section search next to the best grid point.
///
/// The result is a lower bound on the H-infinity norm; returns the norm and
/// its maximizing frequency.
pub fn hinf_norm<T: FrequencyResponse + ?Sized>(
    sys: &T,
    n_grid: usize,
    refine_iters: usize,
) -> Result<(f64, f64)> {
    let radius = sys.pole_radius()?;
    if radius >= 1.0 - crate::polymat::STABILITY_TOL {
        return Err(Error::UnstableSystem { radius });
    }
    let n_grid = n_grid.max(64);
    let step = PI / (n_grid - 1) as f64;
    let (mut best, mut best_theta, mut best_k) = (f64::NEG_INFINITY, 0.0, 0);
    for k in 0..n_grid {
        let theta = k as f64 * step;
        let g = gain_at(sys, theta);
        if g > best {
            (best, best_theta, best_k) = (g, theta, k);
        }
    }
    let (mut lo, mut hi) = (
        best_k.saturating_sub(1) as f64 * step,
        ((best_k + 1).min(n_grid - 1)) as f64 * step,
    );
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (gain_at(sys, x1), gain_at(sys, x2));
    for _ in 0..refine_iters {
        if f1 >= f2 {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - ratio * (hi - lo);
            f1 = gain_at(sys, x1);
        } else {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + ratio * (hi - lo);
            f2 = gain_at(sys, x2);
        }
        for (f, x) in [(f1, x1), (f2, x2)] {
            if f > best {
                (best, best_theta) = (f, x);
            }
        }
    }
    Ok((best, best_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymat::RationalFn;

    #[test]
    fn static_gain() {
        let s = StateSpace::static_gain(DMatrix::from_element(1, 1, 2.0));
        let (g, _) = hinf_norm(&s, DEFAULT_GRID, DEFAULT_REFINE).unwrap();
        assert!((g - 2.0).abs() < 1e-14);
    }

    #[test]
    fn first_order_peak_at_dc() {
        let g = RationalMatrix::scalar(RationalFn::from_coeffs(&[1.0], &[-0.5, 1.0]).unwrap());
        let (n, theta) = hinf_norm(&g, DEFAULT_GRID, DEFAULT_REFINE).unwrap();
        assert!((n - 2.0).abs() < 1e-12);
        assert_eq!(theta, 0.0);
    }

    #[test]
    fn unstable_rejected() {
        let g = RationalMatrix::scalar(RationalFn::from_coeffs(&[1.0], &[-1.0, 1.0]).unwrap());
        assert!(matches!(
            hinf_norm(&g, 100, 10),
            Err(Error::UnstableSystem { .. })
        ));
    }
}
