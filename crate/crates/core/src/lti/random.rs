use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{StateSpace, TimeDomain};
use crate::error::Result;
use crate::linalg;
use crate::signals::{DataDictionary, Trajectory};

/// Random discrete-time system with i.i.d. standard-normal entries and `A`
/// rescaled to spectral radius `rho`.
pub fn random_stable_system<R: Rng + ?Sized>(
    n_u: usize,
    n_x: usize,
    n_y: usize,
    rho: f64,
    rng: &mut R,
) -> StateSpace {
    let mut normal = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng));
    let a = normal(n_x, n_x);
    let b = normal(n_x, n_u);
    let c = normal(n_y, n_x);
    let d = normal(n_y, n_u);
    let radius = linalg::spectral_radius(&a);
    let a = if radius > 0.0 { a * (rho / radius) } else { a };
    StateSpace {
        a,
        b,
        c,
        d,
        time: TimeDomain::Discrete,
    }
}

/// I.i.d. uniform `[-1, 1]` input.
pub fn uniform_input<R: Rng + ?Sized>(n_u: usize, len: usize, rng: &mut R) -> Result<Trajectory> {
    let dist = Uniform::new_inclusive(-1.0, 1.0);
    Trajectory::from_matrix(DMatrix::from_fn(n_u, len, |_, _| dist.sample(rng)))
}

/// Simulate `sys` from rest under a uniform random input of length `len`.
pub fn generate_data<R: Rng + ?Sized>(
    sys: &StateSpace,
    len: usize,
    rng: &mut R,
) -> Result<DataDictionary> {
    let u = uniform_input(sys.n_inputs(), len, rng)?;
    let y = sys.simulate(&u, &DVector::zeros(sys.n_states()))?;
    DataDictionary::new(u, y)
}

/// Smallest `l` after which `rank [C; CA; ...; CA^{l-1}]` stops growing.
pub fn observability_index(sys: &StateSpace, rank_tol: f64) -> usize {
    let n = sys.n_states();
    let mut prev = 0;
    for l in 1..=n.max(1) {
        let r = linalg::numerical_rank(&sys.observability(l), rank_tol);
        if r == prev || r == n {
            return if r == prev { l - 1 } else { l };
        }
        prev = r;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_and_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let sys = random_stable_system(2, 20, 3, 0.8, &mut rng);
        assert!((sys.spectral_radius() - 0.8).abs() < 1e-10);
        assert_eq!(observability_index(&sys, 1e-9), 7);
    }

    #[test]
    fn uniform_range_and_determinism() {
        let a = uniform_input(2, 50, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = uniform_input(2, 50, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert!(a.as_matrix().iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}
