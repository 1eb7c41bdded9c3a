//! Close a generalized plant with a controller at the constraint level and
//! compare with the directly assembled loop.

use ddgp::dissipativity::{
    assemble_closed_loop_b, constraint_l2_gain, FiniteHorizonLfr, GeneralizedPlantLfr, Tolerances,
};
use ddgp::experiments::{example1_interconnection, pe_data};
use ddgp::lti::example1_plant;
use ddgp::polymat::{rational_to_io, Channel, IoRepresentation, Poly, PolyMatrix, RationalMatrix};
use nalgebra::DMatrix;

fn main() -> ddgp::Result<()> {
    let (horizon, nu) = (12, 3);
    let data = pe_data(&example1_plant()?, 300, horizon + 1, 1, 1e-9)?;

    // Routing only: u = f, z = w - y, e = w - y.
    #[rustfmt::skip]
    let routing = DMatrix::from_row_slice(3, 3, &[
        0.0, 0.0, 1.0,
        -1.0, 1.0, 0.0,
        -1.0, 1.0, 0.0,
    ]);
    let f = rational_to_io(
        &RationalMatrix::constant(&routing),
        vec![
            Channel::new("u", 1),
            Channel::new("z", 1),
            Channel::new("e", 1),
        ],
        vec![
            Channel::new("y", 1),
            Channel::new("w", 1),
            Channel::new("f", 1),
        ],
    )?;
    // (q - 1) f = (q + 0.3) e
    let k = IoRepresentation::new(
        PolyMatrix::scalar(&Poly::new(vec![-1.0, 1.0])),
        PolyMatrix::scalar(&Poly::new(vec![0.3, 1.0])),
        vec![Channel::new("f", 1)],
        vec![Channel::new("e", 1)],
    )?;

    let tol = Tolerances::default();
    let gp = GeneralizedPlantLfr::from_io(&f, &data, horizon, nu, 1)?;
    let via_plant = constraint_l2_gain(&gp.close_with_controller(&k)?, 2.0, &tol)?;
    let direct = constraint_l2_gain(
        &assemble_closed_loop_b(&FiniteHorizonLfr::from_io(
            &example1_interconnection()?,
            &data,
            horizon,
            nu,
            1,
        )?)?,
        2.0,
        &tol,
    )?;
    println!(
        "gain through the generalized plant: {:.8}",
        via_plant.gamma.unwrap_or(f64::NAN)
    );
    println!(
        "gain of the assembled loop:         {:.8}",
        direct.gamma.unwrap_or(f64::NAN)
    );
    Ok(())
}
