//! Gain sweep on the weighted two-mass loop with the shipped stabilizing
//! controller, compared with the model-based Toeplitz gain.

use ddgp::experiments::{run_example2, shipped_example2_controller, ExperimentConfig};

fn main() -> ddgp::Result<()> {
    let cfg = ExperimentConfig {
        horizons: 15..=30,
        ..ExperimentConfig::example2()
    };
    let report = run_example2(&cfg, &shipped_example2_controller()?)?;
    print!("{}", report.to_csv());
    println!("max relative error {:.2e}", report.max_relative_error());
    Ok(())
}
