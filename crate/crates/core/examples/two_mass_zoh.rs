//! Sample the two-mass benchmark with a zero-order hold and compare its
//! H-infinity norm with finite-horizon Toeplitz gains.

use ddgp::experiments::EXAMPLE2_SAMPLING;
use ddgp::lti::{
    discretize_zoh, finite_horizon_gain_mb, hinf_norm, two_mass_plant, TwoMassParams, DEFAULT_GRID,
    DEFAULT_REFINE,
};

fn main() -> ddgp::Result<()> {
    let plant = two_mass_plant(&TwoMassParams::default());
    let sampled = discretize_zoh(&plant, EXAMPLE2_SAMPLING)?;
    let modes: Vec<String> = plant
        .a
        .complex_eigenvalues()
        .iter()
        .map(|l| format!("{:.3}{:+.3}i", l.re, l.im))
        .collect();
    println!("continuous modes: {}", modes.join(", "));
    println!(
        "sampled spectral radius at h = {EXAMPLE2_SAMPLING}: {:.6}",
        sampled.spectral_radius()
    );

    let (hinf, theta) = hinf_norm(&sampled, DEFAULT_GRID, DEFAULT_REFINE)?;
    println!("H-infinity norm {hinf:.6e} at theta = {theta:.4} rad/sample");
    for horizon in [5, 20, 80, 320] {
        println!(
            "L = {horizon:3}: sigma_max(T_L) = {:.6e}",
            finite_horizon_gain_mb(&sampled, horizon)
        );
    }
    Ok(())
}
