use ddgp::dissipativity::*;
use ddgp::experiments::{example1_interconnection, pe_data};
use ddgp::linalg;
use ddgp::lti::example1_plant;
use ddgp::polymat::{rational_to_io, Channel, IoRepresentation, Poly, PolyMatrix, RationalMatrix};
use ddgp::signals::{DataDictionary, Trajectory};
use ddgp::Error;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example1_data() -> DataDictionary {
    pe_data(&example1_plant().unwrap(), 300, 41, 1, 1e-9).unwrap()
}

fn static_data(a: f64, len: usize) -> DataDictionary {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = u.iter().map(|v| a * v).collect();
    DataDictionary::new(
        Trajectory::scalar(&u).unwrap(),
        Trajectory::scalar(&y).unwrap(),
    )
    .unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn data_only_static_gain_verdicts() {
    let d = static_data(0.5, 60);
    let above = check_data_only_dissipativity(&d, &SupplyRate::l2_gain(0.6, 1, 1), 5, 1, 0, &tol())
        .unwrap();
    let below = check_data_only_dissipativity(&d, &SupplyRate::l2_gain(0.4, 1, 1), 5, 1, 0, &tol())
        .unwrap();
    assert!(above.is_dissipative());
    assert!(!below.is_dissipative());
    assert_eq!(above.rank_condition_ok, Some(true));
}

#[test]
fn loop_verdicts_on_either_side_of_the_gain() {
    let d = example1_data();
    let lfr =
        FiniteHorizonLfr::from_io(&example1_interconnection().unwrap(), &d, 20, 3, 1).unwrap();
    let cs = assemble_closed_loop_b(&lfr).unwrap();
    let pass =
        check_closed_loop_dissipativity(&cs, &SupplyRate::l2_gain(1.2, 1, 1), &tol()).unwrap();
    let fail =
        check_closed_loop_dissipativity(&cs, &SupplyRate::l2_gain(0.5, 1, 1), &tol()).unwrap();
    assert!(pass.is_dissipative());
    assert!(!fail.is_dissipative());
    assert!(!pass.degenerate);
}

#[test]
fn zero_supply_is_trivially_dissipative() {
    let d = example1_data();
    let lfr =
        FiniteHorizonLfr::from_io(&example1_interconnection().unwrap(), &d, 10, 3, 1).unwrap();
    let cs = assemble_closed_loop_b(&lfr).unwrap();
    let zero = SupplyRate::new(
        DMatrix::zeros(1, 1),
        DMatrix::zeros(1, 1),
        DMatrix::zeros(1, 1),
    )
    .unwrap();
    let cert = check_closed_loop_dissipativity(&cs, &zero, &tol()).unwrap();
    assert!(cert.is_dissipative());
    assert_eq!(cert.min_eig, 0.0);
}

fn poly(c: &[f64]) -> Poly {
    Poly::new(c.to_vec())
}

#[test]
fn constraint_rows_with_unit_lag_kernel() {
    // Kernel form with the z-row written over q: q z = q w - q y.
    let den = PolyMatrix::from_entries(2, 2, |i, j| match (i, j) {
        (0, 0) => poly(&[-1.0, 1.0]),
        (1, 1) => poly(&[0.0, 1.0]),
        _ => Poly::zero(),
    });
    let num = PolyMatrix::from_entries(2, 2, |i, j| match (i, j) {
        (0, 0) => poly(&[-0.3, -1.0]),
        (0, 1) => poly(&[0.3, 1.0]),
        (1, 0) => poly(&[0.0, -1.0]),
        _ => poly(&[0.0, 1.0]),
    });
    let m = IoRepresentation::new(
        den,
        num,
        vec![Channel::new("u", 1), Channel::new("z", 1)],
        vec![Channel::new("y", 1), Channel::new("w", 1)],
    )
    .unwrap();
    let d = example1_data();
    let (l, nu) = (3, 3);
    let cs = assemble_closed_loop_b(&FiniteHorizonLfr::build(&m, &d, l, nu).unwrap()).unwrap();
    assert_eq!(cs.b.nrows(), 2 * (l - 1) + 2 * nu);
    assert_eq!(cs.ncols(), d.len() - l + 1 + 2 * l);

    // The reduced form has a static z-row, lifted over all L samples.
    let reduced = FiniteHorizonLfr::build(&example1_interconnection().unwrap(), &d, l, nu).unwrap();
    assert_eq!(
        assemble_closed_loop_b(&reduced).unwrap().b.nrows(),
        (l - 1) + l + 2 * nu
    );
}

#[test]
fn prefix_policy_is_enforced() {
    let d = example1_data();
    let err =
        FiniteHorizonLfr::from_io(&example1_interconnection().unwrap(), &d, 10, 1, 1).unwrap_err();
    assert!(matches!(err, Error::PrefixPolicy { nu: 1, .. }));
}

#[test]
fn static_pass_through_recovers_plant_gain() {
    let a = -1.7;
    let d = static_data(a, 80);
    let m = rational_to_io(
        &RationalMatrix::constant(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])),
        vec![Channel::new("u", 1), Channel::new("z", 1)],
        vec![Channel::new("y", 1), Channel::new("w", 1)],
    )
    .unwrap();
    let cert = closed_loop_l2_gain(&m, &d, 6, 1, 0, &tol()).unwrap();
    assert!((cert.gamma.unwrap() - a.abs()).abs() < 1e-6);
}

/// Simulate the tracking loop from rest with `w` zero over the prefix.
fn simulate_example1_loop(w: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (mut u, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
    let (mut u1, mut y1, mut e1) = (0.0, 0.0, 0.0);
    for &wk in w {
        let a = u1 + wk + 0.3 * e1;
        let yk = (0.5 * y1 + a + 0.5 * u1) / 2.0;
        let uk = a - yk;
        u.push(uk);
        y.push(yk);
        z.push(wk - yk);
        (u1, y1, e1) = (uk, yk, wk - yk);
    }
    (u, y, z)
}

#[test]
fn simulated_loop_trajectories_satisfy_the_constraint() {
    let d = example1_data();
    let (l, nu) = (12, 3);
    let lfr =
        FiniteHorizonLfr::from_io(&example1_interconnection().unwrap(), &d, l, nu, 1).unwrap();
    let cs = assemble_closed_loop_b(&lfr).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let w: Vec<f64> = (0..l)
        .map(|k| {
            if k < nu {
                0.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        })
        .collect();
    let (u, y, z) = simulate_example1_loop(&w);
    let h = d.stacked_hankel(l).unwrap();
    let target = DVector::from_iterator(2 * l, u.iter().chain(y.iter()).copied());
    let g = linalg::least_squares(&h, &target, 1e-9);
    assert!((&h * &g - &target).norm() < 1e-8 * target.norm());
    let x = DVector::from_iterator(
        cs.ncols(),
        g.iter().chain(w.iter()).chain(z.iter()).copied(),
    );
    assert!((&cs.b * x).norm() < 1e-8 * (1.0 + g.norm()));
}

#[test]
fn generalized_plant_reproduces_the_loop_nullspace() {
    let d = example1_data();
    let (l, nu) = (10, 3);
    let f = rational_to_io(
        &RationalMatrix::constant(&DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 0.0, 1.0, -1.0, 1.0, 0.0, -1.0, 1.0, 0.0],
        )),
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
    )
    .unwrap();
    let k = IoRepresentation::new(
        PolyMatrix::scalar(&poly(&[-1.0, 1.0])),
        PolyMatrix::scalar(&poly(&[0.3, 1.0])),
        vec![Channel::new("f", 1)],
        vec![Channel::new("e", 1)],
    )
    .unwrap();
    let gp = GeneralizedPlantLfr::from_io(&f, &d, l, nu, 1).unwrap();
    let open = gp.assemble().unwrap();
    assert_eq!(open.ncols(), d.len() - l + 1 + 4 * l);
    let closed = gp.close_with_controller(&k).unwrap();

    let loop_cs = assemble_closed_loop_b(
        &FiniteHorizonLfr::from_io(&example1_interconnection().unwrap(), &d, l, nu, 1).unwrap(),
    )
    .unwrap();
    let z1 = linalg::nullspace_basis(&loop_cs.b, 1e-9);
    let z2 = linalg::nullspace_basis(&closed.b, 1e-9);
    assert_eq!(z1.ncols(), z2.ncols());

    // Drop the f and e coordinates: [g | w | f | z | e] -> [g | w | z].
    let keep: Vec<usize> = (0..closed.w_cols.end)
        .chain(closed.z_cols.clone())
        .collect();
    let z2r = DMatrix::from_fn(keep.len(), z2.ncols(), |i, j| z2[(keep[i], j)]);
    let residual = &z2r - &z1 * (z1.transpose() * &z2r);
    assert!(residual.norm() < 1e-8 * z2r.norm());
    assert_eq!(linalg::numerical_rank(&z2r, 1e-9), z1.ncols());

    let g1 = constraint_l2_gain(&loop_cs, 2.0, &tol())
        .unwrap()
        .gamma
        .unwrap();
    let g2 = constraint_l2_gain(&closed, 2.0, &tol())
        .unwrap()
        .gamma
        .unwrap();
    assert!((g1 - g2).abs() < 1e-6 * g1);
}

#[test]
fn prefix_above_model_lag_keeps_the_plant_at_rest() {
    let d = example1_data();
    let m = example1_interconnection().unwrap();
    let first_input = |nu: usize| {
        let lfr = FiniteHorizonLfr::build(&m, &d, 8, nu).unwrap();
        let cs = assemble_closed_loop_b(&lfr).unwrap();
        let z = linalg::nullspace_basis(&cs.b, 1e-9);
        let zg = z.rows(0, cs.g_cols).into_owned();
        let u0 = lfr.h_u.row(0) * zg;
        u0.amax() / lfr.h_u.row(0).norm()
    };
    assert!(first_input(0) > 1e-3);
    assert!(first_input(3) < 1e-9);
}
