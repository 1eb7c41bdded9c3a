//! Where the Hankel rank condition starts to hold and the extended-state rank
//! condition stops holding, relative to the lag of a random system.

use ddgp::experiments::{run_fig1, Fig1Config};

fn main() -> ddgp::Result<()> {
    let report = run_fig1(&Fig1Config::default())?;
    println!("n_x = {}, lag = {}", report.n_x, report.lag);
    print!("{}", report.to_csv());
    println!("crossover confirmed: {}", report.crossover_confirmed());
    Ok(())
}
