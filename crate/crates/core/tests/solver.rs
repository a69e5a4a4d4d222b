use std::f64::consts::PI;

use ospde::model::{Lipschitz, ObstacleSpec, ScalarForm, SigmaSpec, SpatialDomain, SpdeProblem};
use ospde::solver::{
    picard_solve, psor_obstacle, simulate, solve_deterministic_obstacle, solve_linear_obstacle, weighted_norm,
    Discretization, NoisePath, RecordOptions, TimeMesh,
};

fn heat(nodes: usize) -> SpdeProblem {
    let mut p = SpdeProblem::zero(nodes);
    p.sigma = SigmaSpec::new(&["d1"], 1.0);
    p.initial = ScalarForm::sin_x(1.0, 1.0);
    p.horizon = 0.5;
    p
}

#[test]
fn zero_data_gives_zero_trajectory() {
    let mut p = SpdeProblem::zero(32);
    p.obstacle = Some(ObstacleSpec::field(ScalarForm::zero()));
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(1.0, 50).unwrap();
    let t = solve_linear_obstacle(&p, &disc, 1e3, &NoisePath::zero(0, &mesh), &mesh, RecordOptions::default()).unwrap();
    assert!(t.states.iter().flatten().all(|v| *v == 0.0));
    assert_eq!(t.energy.reflection_mass, 0.0);
}

#[test]
fn heat_equation_matches_exact_solution() {
    for (nodes, steps) in [(63usize, 50usize), (127, 200), (255, 800)] {
        let mut p = heat(nodes);
        p.obstacle = Some(ObstacleSpec::field(ScalarForm::constant(-10.0)));
        let disc = Discretization::new(&p).unwrap();
        let mesh = TimeMesh::new(0.5, steps).unwrap();
        let t = simulate(&p, &disc, 1e4, &NoisePath::zero(0, &mesh), &mesh, RecordOptions::summary_only()).unwrap();
        let err = disc
            .points
            .iter()
            .zip(t.final_state())
            .map(|(x, u)| (u - (-0.5f64).exp() * x[0].sin()).abs())
            .fold(0.0, f64::max);
        let h = disc.grid.spacing()[0];
        assert!(err <= 5.0 * (mesh.dt + h * h), "err {err} dt {} h {h}", mesh.dt);
        assert_eq!(t.energy.reflection_mass, 0.0);
    }
}

#[test]
fn inactive_penalty_matches_unconstrained_step() {
    let mut p = heat(63);
    p.coeffs.h = vec![ScalarForm::sin_x(0.3, 1.0)];
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 100).unwrap();
    let path = NoisePath::generate(11, 1, &mesh);
    let free = simulate(&p, &disc, 0.0, &path, &mesh, RecordOptions::default()).unwrap();
    p.obstacle = Some(ObstacleSpec::field(ScalarForm::constant(-100.0)));
    let pen = simulate(&p, &disc, 1e3, &path, &mesh, RecordOptions::default()).unwrap();
    assert_eq!(free.states, pen.states);
}

#[test]
fn obstacle_pushes_up_where_free_solution_crosses() {
    let mut p = heat(63);
    p.coeffs.f = ScalarForm::constant(-5.0);
    p.coeffs.h = vec![ScalarForm::sin_x(0.5, 1.0)];
    p.obstacle = Some(ObstacleSpec::field(ScalarForm::zero()));
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 200).unwrap();
    let path = NoisePath::generate(3, 1, &mesh);
    let con = simulate(&p, &disc, 1e3, &path, &mesh, RecordOptions::default()).unwrap();
    let mut free_p = p.clone();
    free_p.obstacle = None;
    let free = simulate(&free_p, &disc, 0.0, &path, &mesh, RecordOptions::default()).unwrap();
    assert!(free.final_state().iter().any(|v| *v < 0.0));
    assert!(con.energy.reflection_mass > 0.0);
    assert!(con.reflection.iter().flatten().all(|r| *r >= 0.0));
    assert_eq!(con.energy.skorokhod, 0.0);

    let mut prev = f64::INFINITY;
    for n in [10.0, 20.0, 40.0, 80.0] {
        let t = simulate(&p, &disc, n, &path, &mesh, RecordOptions::summary_only()).unwrap();
        assert!(t.energy.negative_part_l2 < prev);
        prev = t.energy.negative_part_l2;
    }
}

#[test]
fn same_seed_same_bits() {
    let mut p = heat(31);
    p.coeffs.h = vec![ScalarForm::sin_x(1.0, 2.0), ScalarForm::sin_x(0.2, 1.0)];
    p.coeffs.f = ScalarForm::Sine { amp: 0.5, arg: Box::new(ScalarForm::affine_y(0.0, 1.0)) };
    p.coeffs.lipschitz = Lipschitz::new(0.5, 0.0, 0.0);
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 100).unwrap();
    let a = simulate(&p, &disc, 0.0, &NoisePath::generate(5, 2, &mesh), &mesh, RecordOptions::default()).unwrap();
    let b = simulate(&p, &disc, 0.0, &NoisePath::generate(5, 2, &mesh), &mesh, RecordOptions::default()).unwrap();
    assert_eq!(a, b);
}

fn obstacle_disc(nodes: usize) -> Discretization {
    let mut p = SpdeProblem::zero(nodes);
    p.sigma = SigmaSpec::new(&["0.1*d1"], 0.01);
    p.domain = SpatialDomain::interval(0.0, 1.0, nodes);
    Discretization::new(&p).unwrap()
}

#[test]
fn deterministic_obstacle_below_zero_stays_zero() {
    let disc = obstacle_disc(63);
    let mesh = TimeMesh::new(1.0, 100).unwrap();
    let psi: Vec<f64> = disc.points.iter().map(|x| -x[0]).collect();
    let zero = vec![0.0; 63];
    let states = solve_deterministic_obstacle(&disc, &psi, &zero, &zero, 1e-3, &mesh).unwrap();
    assert!(states.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn deterministic_obstacle_matches_psor_and_is_monotone() {
    let disc = obstacle_disc(63);
    let mesh = TimeMesh::new(1.0, 100).unwrap();
    let c = 0.5;
    let psi = vec![c; 63];
    let zero = vec![0.0; 63];
    let reference = psor_obstacle(&disc, &psi, &psi, &zero, &mesh, Default::default()).unwrap();
    let pen = solve_deterministic_obstacle(&disc, &psi, &psi, &zero, 1e-5, &mesh).unwrap();
    let gap = pen.iter().zip(&reference).flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max);
    assert!(gap <= 1e-3, "gap {gap}");

    let mut prev = solve_deterministic_obstacle(&disc, &psi, &psi, &zero, 1e-2, &mesh).unwrap();
    for eps in [5e-3, 2.5e-3, 1.25e-3] {
        let next = solve_deterministic_obstacle(&disc, &psi, &psi, &zero, eps, &mesh).unwrap();
        for (a, b) in next.iter().flatten().zip(prev.iter().flatten()) {
            assert!(*a >= *b - 1e-10);
        }
        prev = next;
    }
}

#[test]
fn weighted_norm_basic_identities() {
    let p = heat(31);
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 50).unwrap();
    let path = NoisePath::zero(0, &mesh);
    let mut t = simulate(&p, &disc, 0.0, &path, &mesh, RecordOptions::default()).unwrap();
    let base = weighted_norm(&t, 2.0, 3.0);
    t.states.iter_mut().flatten().for_each(|v| *v *= 2.0);
    t.grads.iter_mut().flatten().flatten().for_each(|v| *v *= 2.0);
    assert_eq!(weighted_norm(&t, 2.0, 3.0), 4.0 * base);
    t.states.iter_mut().for_each(|s| *s = vec![1.0; 31]);
    t.grads.iter_mut().for_each(|g| *g = vec![vec![0.0; 31]]);
    let vol = disc.grid.cell_volume() * 31.0;
    assert!((weighted_norm(&t, 0.0, 1.0) - 0.5 * vol).abs() < 1e-12);
}

#[test]
fn picard_constant_coefficients_converge_after_one_iterate() {
    let mut p = heat(31);
    p.coeffs.f = ScalarForm::constant(0.3);
    p.coeffs.h = vec![ScalarForm::sin_x(0.5, 1.0)];
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 100).unwrap();
    let out = picard_solve(&p, &disc, 0.0, &NoisePath::generate(1, 1, &mesh), &mesh, 1e-8, 30).unwrap();
    assert_eq!(out.converged_after(), 1);
    assert_eq!(out.history[1].distance, 0.0);
}

#[test]
fn picard_fixed_point_matches_implicit_linear_drift() {
    // f(y) = c·y: the direct oracle treats c·u implicitly by shifting L.
    let c = 0.4;
    let mut p = heat(63);
    p.coeffs.f = ScalarForm::affine_y(0.0, c);
    p.coeffs.lipschitz = Lipschitz::new(c, 0.0, 0.0);
    let disc = Discretization::new(&p).unwrap();
    let mesh = TimeMesh::new(0.5, 200).unwrap();
    let out = picard_solve(&p, &disc, 0.0, &NoisePath::zero(0, &mesh), &mesh, 1e-12, 40).unwrap();
    let l = &disc.ops.divergence.matrix;
    let mut u = disc.sample(&p.initial, 0.0);
    for _ in 0..mesh.steps {
        // (I − Δt L − cΔt I) u⁺ = u via a dense oracle solve.
        let n = u.len();
        let d = l.to_dense();
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| (i == j) as u8 as f64 * (1.0 - c * mesh.dt) - mesh.dt * d[i][j]);
        u = a.lu().solve(&nalgebra::DVector::from_vec(u)).unwrap().as_slice().to_vec();
    }
    let diff = u.iter().zip(out.trajectory.final_state()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6 + 2.0 * mesh.dt, "{diff}");
}
