//! Record data from a random plant, check persistency of excitation and the
//! rank of the stacked Hankel matrix, and write the dictionary as CSV.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ddgp::lti::{generate_data, random_stable_system};
use ddgp::signals::{
    build_hankel, check_fundamental_rank, hankel_rank, is_persistently_exciting, save_dictionary,
};

fn main() -> ddgp::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plant = random_stable_system(1, 3, 1, 0.8, &mut rng);
    let data = generate_data(&plant, 120, &mut rng)?;

    for horizon in [2, 5, 10] {
        let h = build_hankel(&data.u, horizon)?;
        println!(
            "L = {horizon:2}: H_L(u) is {}x{}, PE of order L + n_x: {}, rank [H(u); H(y)] = {} (n_u L + n_x = {}), fundamental rank ok: {}",
            h.nrows(),
            h.ncols(),
            is_persistently_exciting(&data.u, horizon + plant.n_states(), 1e-9)?,
            hankel_rank(&data, horizon, 1e-9)?,
            horizon + plant.n_states(),
            check_fundamental_rank(&data, horizon, plant.n_states(), 1e-9)?,
        );
    }

    let path = std::env::temp_dir().join("ddgp_hankel_example.csv");
    save_dictionary(&data, &path)?;
    println!("dictionary written to {}", path.display());
    Ok(())
}
