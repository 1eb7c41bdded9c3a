//! Certify an l2-gain bound for a model-based controller around a plant known
//! only through data, and print the certificate.

use ddgp::dissipativity::{
    assemble_closed_loop_b, check_closed_loop_dissipativity, FiniteHorizonLfr, SupplyRate,
    Tolerances,
};
use ddgp::experiments::{example1_interconnection, pe_data};
use ddgp::lti::example1_plant;

fn main() -> ddgp::Result<()> {
    let (horizon, nu, lag_bound) = (20, 3, 1);
    let data = pe_data(&example1_plant()?, 300, horizon + 1, 1, 1e-9)?;
    let m = example1_interconnection()?;
    let lfr = FiniteHorizonLfr::from_io(&m, &data, horizon, nu, lag_bound)?;
    let cs = assemble_closed_loop_b(&lfr)?;
    println!("constraint matrix: {}x{}", cs.b.nrows(), cs.ncols());

    for gamma in [0.9, 1.2] {
        let cert = check_closed_loop_dissipativity(
            &cs,
            &SupplyRate::l2_gain(gamma, 1, 1),
            &Tolerances::default(),
        )?;
        println!("--- gamma = {gamma}\n{}", cert.to_toml());
    }
    Ok(())
}
