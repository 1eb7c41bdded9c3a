//! Trajectories, data dictionaries, Hankel matrices and rank diagnostics.
//!
//! Stacked trajectory vectors are time-major: the window `z|_L` of an
//! `n`-channel signal is `[z(0); z(1); ...; z(L-1)]`, each block of length `n`.
//! Hankel columns follow the same layout.

mod dictionary_csv;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

pub use dictionary_csv::{
    format_f64, load_dictionary, read_dictionary, save_dictionary, write_dictionary,
};

/// A sampled multi-channel signal `{z_k}`, `k = 0..N-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    // dim x N, column k holds sample k
    data: DMatrix<f64>,
}

impl Trajectory {
    /// Build from a `dim x N` matrix whose columns are samples.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::EmptyTrajectory);
        }
        if data.nrows() == 0 {
            return Err(Error::dims(
                "trajectory",
                "channel count must be at least 1",
            ));
        }
        Ok(Self { data })
    }

    pub fn from_samples(samples: &[DVector<f64>]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyTrajectory)?;
        let dim = first.len();
        if let Some(k) = samples.iter().position(|s| s.len() != dim) {
            return Err(Error::dims(
                "trajectory",
                format!(
                    "sample {k} has {} channels, expected {dim}",
                    samples[k].len()
                ),
            ));
        }
        Self::from_matrix(DMatrix::from_columns(samples))
    }

    /// Single-channel trajectory.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        Self::from_matrix(DMatrix::from_row_slice(1, values.len(), values))
    }

    /// Build from rows of per-sample values (`samples[k][c]`).
    pub fn from_rows(samples: &[Vec<f64>]) -> Result<Self> {
        let vs: Vec<DVector<f64>> = samples
            .iter()
            .map(|s| DVector::from_column_slice(s))
            .collect();
        Self::from_samples(&vs)
    }

    pub fn zeros(dim: usize, len: usize) -> Result<Self> {
        Self::from_matrix(DMatrix::zeros(dim, len))
    }

    pub fn len(&self) -> usize {
        self.data.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.data.ncols() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn sample(&self, k: usize) -> DVector<f64> {
        self.data.column(k).into_owned()
    }

    /// Stacked window `[z(start); ...; z(start+len-1)]`.
    pub fn window(&self, start: usize, len: usize) -> DVector<f64> {
        let block = self.data.columns(start, len);
        DVector::from_iterator(len * self.dim(), block.iter().copied())
    }

    /// Stacked restriction `z|_L`.
    pub fn restrict(&self, horizon: usize) -> DVector<f64> {
        self.window(0, horizon)
    }

    /// Unstack a time-major vector into a trajectory with `dim` channels.
    pub fn from_stacked(v: &DVector<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || v.len() % dim != 0 {
            return Err(Error::dims(
                "trajectory",
                format!("length {} not a multiple of {dim}", v.len()),
            ));
        }
        Self::from_matrix(DMatrix::from_column_slice(dim, v.len() / dim, v.as_slice()))
    }
}

/// A measured input-output record `{u_k, y_k}`: the only plant knowledge available.
#[derive(Debug, Clone, PartialEq)]
pub struct DataDictionary {
    pub u: Trajectory,
    pub y: Trajectory,
}

impl DataDictionary {
    pub fn new(u: Trajectory, y: Trajectory) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::dims(
                "data dictionary",
                format!("input has {} samples, output has {}", u.len(), y.len()),
            ));
        }
        Ok(Self { u, y })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn n_u(&self) -> usize {
        self.u.dim()
    }

    pub fn n_y(&self) -> usize {
        self.y.dim()
    }

    /// Stacked `[H_L(u); H_L(y)]`.
    pub fn stacked_hankel(&self, horizon: usize) -> Result<DMatrix<f64>> {
        let hu = build_hankel(&self.u, horizon)?;
        let hy = build_hankel(&self.y, horizon)?;
        Ok(linalg::vstack(&[&hu, &hy]))
    }
}

/// Depth-`L` block Hankel matrix, `(L n) x (N - L + 1)`, block `(i, j) = z(i + j)`.
pub fn build_hankel(z: &Trajectory, horizon: usize) -> Result<DMatrix<f64>> {
    let n_samples = z.len();
    if n_samples == 0 {
        return Err(Error::EmptyTrajectory);
    }
    if horizon == 0 || horizon > n_samples {
        return Err(Error::HorizonTooLong {
            horizon,
            len: n_samples,
        });
    }
    let n = z.dim();
    let cols = n_samples - horizon + 1;
    let src = z.as_matrix();
    Ok(DMatrix::from_fn(horizon * n, cols, |r, j| {
        src[(r % n, r / n + j)]
    }))
}

/// True iff `H_L(u)` has full row rank `L n_u`.
pub fn is_persistently_exciting(u: &Trajectory, horizon: usize, rank_tol: f64) -> Result<bool> {
    let h = build_hankel(u, horizon)?;
    Ok(linalg::numerical_rank(&h, rank_tol) == h.nrows())
}

/// Numerical rank of `[H_L(u); H_L(y)]`.
pub fn hankel_rank(d: &DataDictionary, horizon: usize, rank_tol: f64) -> Result<usize> {
    Ok(linalg::numerical_rank(
        &d.stacked_hankel(horizon)?,
        rank_tol,
    ))
}

/// True iff `rank [H_L(u); H_L(y)] = n_u L + n_x`.
pub fn check_fundamental_rank(
    d: &DataDictionary,
    horizon: usize,
    state_dim: usize,
    rank_tol: f64,
) -> Result<bool> {
    Ok(hankel_rank(d, horizon, rank_tol)? == d.n_u() * horizon + state_dim)
}

/// `V_L^nu = [I_{nu n} 0]`: extracts the first `nu` samples of a stacked window.
#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    pub horizon: usize,
    pub prefix: usize,
    pub channels: usize,
    pub matrix: DMatrix<f64>,
}

pub fn zero_prefix_selector(horizon: usize, prefix: usize, channels: usize) -> Result<Selector> {
    if prefix > horizon {
        return Err(Error::PrefixExceedsHorizon { prefix, horizon });
    }
    let rows = prefix * channels;
    let matrix = DMatrix::from_fn(
        rows,
        horizon * channels,
        |i, j| if i == j { 1.0 } else { 0.0 },
    );
    Ok(Selector {
        horizon,
        prefix,
        channels,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hankel_scalar_expansion() {
        let z = Trajectory::scalar(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let h = build_hankel(&z, 2).unwrap();
        assert_eq!(
            h,
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0])
        );
    }

    #[test]
    fn hankel_single_sample() {
        let z = Trajectory::scalar(&[5.0]).unwrap();
        assert_eq!(
            build_hankel(&z, 1).unwrap(),
            DMatrix::from_element(1, 1, 5.0)
        );
    }

    #[test]
    fn hankel_two_channels() {
        let z = Trajectory::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let h = build_hankel(&z, 2).unwrap();
        let expected = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(h, expected);
    }

    #[test]
    fn hankel_errors() {
        let z = Trajectory::scalar(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            build_hankel(&z, 3),
            Err(Error::HorizonTooLong { .. })
        ));
        assert!(matches!(
            Trajectory::scalar(&[]),
            Err(Error::EmptyTrajectory)
        ));
    }

    #[test]
    fn excitation_cases() {
        let ones = Trajectory::scalar(&[1.0; 10]).unwrap();
        assert!(!is_persistently_exciting(&ones, 2, 1e-9).unwrap());
        // An impulse at k = 0 only reaches the first Hankel column: rank 1.
        let mut imp = [0.0; 10];
        imp[0] = 1.0;
        let first = Trajectory::scalar(&imp).unwrap();
        assert_eq!(
            crate::linalg::numerical_rank(&build_hankel(&first, 3).unwrap(), 1e-9),
            1
        );
        assert!(!is_persistently_exciting(&first, 3, 1e-9).unwrap());
        // Moved to k = 2 it fills an anti-diagonal band.
        imp.swap(0, 2);
        let shifted = Trajectory::scalar(&imp).unwrap();
        assert!(is_persistently_exciting(&shifted, 3, 1e-9).unwrap());
        let zeros = Trajectory::scalar(&[0.0; 10]).unwrap();
        for l in 1..=10 {
            assert!(!is_persistently_exciting(&zeros, l, 1e-9).unwrap());
        }
    }

    #[test]
    fn zero_data_fails_rank() {
        let z = Trajectory::scalar(&[0.0; 20]).unwrap();
        let d = DataDictionary::new(z.clone(), z).unwrap();
        assert!(!check_fundamental_rank(&d, 3, 1, 1e-9).unwrap());
    }

    #[test]
    fn selector_shapes() {
        assert_eq!(
            zero_prefix_selector(3, 1, 1).unwrap().matrix,
            DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0])
        );
        assert_eq!(
            zero_prefix_selector(2, 2, 1).unwrap().matrix,
            DMatrix::identity(2, 2)
        );
        let v = zero_prefix_selector(3, 1, 2).unwrap().matrix;
        assert_eq!(
            v,
            DMatrix::from_row_slice(
                2,
                6,
                &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
            )
        );
        assert!(matches!(
            zero_prefix_selector(2, 3, 1),
            Err(Error::PrefixExceedsHorizon { .. })
        ));
    }

    #[test]
    fn window_is_time_major() {
        let z = Trajectory::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(z.restrict(2).as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }
}
