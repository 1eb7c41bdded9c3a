use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::signals::{DataDictionary, Trajectory};

/// Extended state `chi_L(k) = col(u_[k-L, k-1], y_[k-L, k-1])` for `k = L..N-1`.
pub fn build_extended_state(d: &DataDictionary, horizon: usize) -> Result<Trajectory> {
    let n = d.len();
    if horizon == 0 || n <= horizon {
        return Err(Error::HorizonTooLong { horizon, len: n });
    }
    let (nu, ny) = (d.n_u(), d.n_y());
    let dim = horizon * (nu + ny);
    let mut chi = DMatrix::zeros(dim, n - horizon);
    for (col, k) in (horizon..n).enumerate() {
        let uw = d.u.window(k - horizon, horizon);
        let yw = d.y.window(k - horizon, horizon);
        chi.view_mut((0, col), (horizon * nu, 1)).copy_from(&uw);
        chi.view_mut((horizon * nu, col), (horizon * ny, 1))
            .copy_from(&yw);
    }
    Trajectory::from_matrix(chi)
}

/// True iff `rank [H_1(u); H_1(chi_L)] = L (n_u + n_y) + n_u` on the aligned samples.
pub fn check_extended_rank(d: &DataDictionary, horizon: usize, rank_tol: f64) -> Result<bool> {
    let chi = build_extended_state(d, horizon)?;
    let n = d.len();
    let u = d.u.as_matrix().columns(horizon, n - horizon).into_owned();
    let stacked = linalg::vstack(&[&u, chi.as_matrix()]);
    let required = horizon * (d.n_u() + d.n_y()) + d.n_u();
    Ok(linalg::numerical_rank(&stacked, rank_tol) == required)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_step_extended_state() {
        let d = DataDictionary::new(
            Trajectory::scalar(&[1.0, 2.0]).unwrap(),
            Trajectory::scalar(&[3.0, 4.0]).unwrap(),
        )
        .unwrap();
        let chi = build_extended_state(&d, 1).unwrap();
        assert_eq!(chi.as_matrix().as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn shape_and_zero_data() {
        let z = Trajectory::scalar(&[0.0; 4]).unwrap();
        let d = DataDictionary::new(z.clone(), z).unwrap();
        let chi = build_extended_state(&d, 2).unwrap();
        assert_eq!((chi.dim(), chi.len()), (4, 2));
        assert!(chi.as_matrix().iter().all(|&v| v == 0.0));
        assert!(!check_extended_rank(&d, 1, 1e-9).unwrap());
        assert!(matches!(
            build_extended_state(&d, 4),
            Err(Error::HorizonTooLong { .. })
        ));
    }
}
