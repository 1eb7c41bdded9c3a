//! Turn a transfer function into a kernel representation `D(q) y = N(q) u`,
//! lift it over a horizon and check it on a simulated trajectory.

use nalgebra::DVector;

use ddgp::lti::StateSpace;
use ddgp::polymat::{rational_to_io, toeplitz_lift_with_lag, Channel, RationalFn, RationalMatrix};
use ddgp::signals::Trajectory;

fn main() -> ddgp::Result<()> {
    // G(q) = (q + 0.5) / ((q - 0.5)(q + 0.2))
    let g = RationalFn::from_coeffs(&[0.5, 1.0], &[-0.1, -0.3, 1.0])?;
    let io = rational_to_io(
        &RationalMatrix::scalar(g.clone()),
        vec![Channel::new("y", 1)],
        vec![Channel::new("u", 1)],
    )?;
    println!("D(q) = {}", io.den.entry(0, 0));
    println!("N(q) = {}", io.num.entry(0, 0));
    println!("lag = {}", io.lag());

    let horizon = 8;
    let sys = StateSpace::from_rational(&RationalMatrix::scalar(g))?;
    let u: Vec<f64> = (0..horizon)
        .map(|k| ((k * 7 % 5) as f64 - 2.0) / 2.0)
        .collect();
    let u = Trajectory::scalar(&u)?;
    let y = sys.simulate(&u, &DVector::from_element(sys.n_states(), 0.4))?;

    // Both sides share the lag of the representation, not of each factor.
    let td = toeplitz_lift_with_lag(&io.den, horizon, io.lag())?;
    let tn = toeplitz_lift_with_lag(&io.num, horizon, io.lag())?;
    let residual = &td * y.restrict(horizon) - &tn * u.restrict(horizon);
    println!(
        "T_L(D) is {}x{}; kernel residual on a trajectory from a nonzero state: {:.2e}",
        td.nrows(),
        td.ncols(),
        residual.norm()
    );
    Ok(())
}
