//! Bound the l2-gain of an unknown plant from one recorded trajectory.

use ddgp::dissipativity::{
    check_data_only_dissipativity, data_only_l2_gain, SupplyRate, Tolerances,
};
use ddgp::experiments::pe_data;
use ddgp::lti::{example1_plant, finite_horizon_gain_mb};

fn main() -> ddgp::Result<()> {
    let plant = example1_plant()?;
    let (horizon, nu, lag_bound) = (15, 2, 1);
    let data = pe_data(&plant, 200, horizon + plant.n_states(), 5, 1e-9)?;
    let tol = Tolerances::default();

    let cert = data_only_l2_gain(&data, horizon, nu, lag_bound, &tol)?;
    let gamma = cert.gamma.expect("gain certificates carry gamma");
    println!("data-driven gain over L = {horizon} with a rest prefix of {nu}: {gamma:.6}");
    println!(
        "model-based gain over the free window: {:.6}",
        finite_horizon_gain_mb(&plant, horizon - nu)
    );

    for g in [0.95 * gamma, 1.05 * gamma] {
        let c = check_data_only_dissipativity(
            &data,
            &SupplyRate::l2_gain(g, 1, 1),
            horizon,
            nu,
            lag_bound,
            &tol,
        )?;
        println!("supply gamma = {g:.4}: {:?}", c.verdict);
    }
    Ok(())
}
