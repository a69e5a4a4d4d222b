use std::f64::consts::PI;

use nalgebra::DMatrix;
use ospde::discretize::{
    assemble_divergence, assemble_first_order, fractional_norm, FractionalNorm, Grid, SpatialDomain, SpectralSymbol,
};
use ospde::model::{SigmaField, SigmaSpec};

fn grushin(n: usize) -> (Grid, SigmaField) {
    let g = Grid::new(&SpatialDomain::rectangle([-1.0, 1.0], [-1.0, 1.0], n, n)).unwrap();
    let s = SigmaField::from_spec(&g, &SigmaSpec::new(&["d1", "x1*d2"], 1.0)).unwrap();
    (g, s)
}

fn dense(m: &ospde::discretize::SparseMatrix) -> DMatrix<f64> {
    let d = m.to_dense();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| d[i][j])
}

#[test]
fn one_dimensional_stencil_is_classical() {
    let g = Grid::new(&SpatialDomain::interval(0.0, 1.0, 7)).unwrap();
    let s = SigmaField::constant(&g, vec![vec![1.0]], 1.0);
    let l = assemble_divergence(&s, &g, 0.0).unwrap().matrix;
    let h2 = 1.0 / (g.spacing()[0] * g.spacing()[0]);
    for p in 0..7 {
        assert_eq!(l.get(p, p), -2.0 * h2);
        if p > 0 {
            assert_eq!(l.get(p, p - 1), h2);
        }
    }
}

#[test]
fn zero_sigma_gives_zero_operator() {
    let g = Grid::new(&SpatialDomain::interval(0.0, PI, 9)).unwrap();
    let s = SigmaField::constant(&g, vec![vec![0.0]], 0.0);
    assert_eq!(assemble_divergence(&s, &g, 0.0).unwrap().matrix.max_abs(), 0.0);
    assert_eq!(assemble_first_order(&s, 0, &g).unwrap().matrix.max_abs(), 0.0);
}

#[test]
fn divergence_matrix_is_symmetric_negative_semidefinite() {
    // Full, degenerate and rotated σ in 2D.
    let g = Grid::new(&SpatialDomain::rectangle([0.0, 1.0], [0.0, 2.0], 9, 7)).unwrap();
    let sigmas = [
        SigmaField::from_spec(&g, &SigmaSpec::new(&["d1 + x2*d2", "x1*d1 - d2"], 20.0)).unwrap(),
        SigmaField::from_spec(&g, &SigmaSpec::new(&["d1 + d2"], 2.0)).unwrap(),
        grushin(8).1,
    ];
    for (k, s) in sigmas.iter().enumerate() {
        let grid = if k == 2 { grushin(8).0 } else { g.clone() };
        let l = assemble_divergence(s, &grid, 0.0).unwrap().matrix;
        assert!(l.is_symmetric());
        let eig = dense(&l).symmetric_eigenvalues();
        let scale = l.max_abs();
        assert!(eig.iter().all(|&e| e <= 1e-12 * scale), "max eigenvalue {}", eig.max());
    }
}

#[test]
fn grushin_operator_on_quadratic_is_exact() {
    for n in [15, 31] {
        let (g, s) = grushin(n);
        let l = assemble_divergence(&s, &g, 0.0).unwrap().matrix;
        // Dirichlet data of x²+y² is not zero, so compare on nodes whose
        // stencil avoids the boundary, feeding the full field.
        let u: Vec<f64> = g.interior_points().iter().map(|x| x[0] * x[0] + x[1] * x[1]).collect();
        let lu = l.mul_vec(&u);
        for p in g.deep_interior(1) {
            let x = g.interior_coords(p);
            assert!((lu[p] - (2.0 + 2.0 * x[0] * x[0])).abs() < 1e-9, "node {p}: {}", lu[p]);
        }
    }
}

#[test]
fn grushin_operator_is_second_order_on_smooth_fields() {
    // u = sin(x)cos(y): div(a∇u) = −sin x cos y − x² sin x cos y.
    // Errors are compared on the nodes of the coarsest grid in [-1/2, 1/2]²,
    // which every refinement contains.
    let errs: Vec<f64> = [31usize, 63, 127, 255]
        .iter()
        .map(|&n| {
            let (g, s) = grushin(n);
            let l = assemble_divergence(&s, &g, 0.0).unwrap().matrix;
            let u: Vec<f64> = g.interior_points().iter().map(|x| x[0].sin() * x[1].cos()).collect();
            let lu = l.mul_vec(&u);
            let coarse = 2.0 / 32.0;
            (0..g.num_interior())
                .filter(|&p| {
                    let x = g.interior_coords(p);
                    x.iter().all(|c| c.abs() <= 0.5 + 1e-12 && ((c / coarse).round() * coarse - c).abs() < 1e-12)
                })
                .map(|p| {
                    let x = g.interior_coords(p);
                    (lu[p] + (1.0 + x[0] * x[0]) * x[0].sin() * x[1].cos()).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "observed order {order} from {errs:?}");
    }
}

#[test]
fn first_order_consistency() {
    let (g, s) = grushin(31);
    let l1 = assemble_first_order(&s, 0, &g).unwrap();
    let l2 = assemble_first_order(&s, 1, &g).unwrap();
    let x1: Vec<f64> = g.interior_points().iter().map(|x| x[0]).collect();
    let y: Vec<f64> = g.interior_points().iter().map(|x| x[1]).collect();
    let r1 = l1.apply(&x1);
    let r2 = l2.apply(&y);
    for p in g.deep_interior(1) {
        let x = g.interior_coords(p);
        assert!((r1[p] - 1.0).abs() < 1e-12);
        assert!((r2[p] - x[0]).abs() < 1e-12);
    }
}

#[test]
fn integration_by_parts_defect_vanishes_at_first_order() {
    let defect = |n: usize| {
        let (g, s) = grushin(n);
        let l = assemble_divergence(&s, &g, 0.0).unwrap().matrix;
        let u: Vec<f64> = g.interior_points().iter().map(|x| (PI * (x[0] + 1.0) / 2.0).sin() * (1.0 - x[1] * x[1])).collect();
        let lhs = g.inner(&l.mul_vec(&u), &u);
        let rhs: f64 = (0..2).map(|k| g.norm_sq(&assemble_first_order(&s, k, &g).unwrap().apply(&u))).sum();
        (lhs + rhs).abs()
    };
    let (a, b, c) = (defect(15), defect(31), defect(63));
    assert!((a / b).log2() >= 1.0 && (b / c).log2() >= 1.0, "{a} {b} {c}");
}

#[test]
fn single_sine_mode_has_exact_symbol() {
    let g = Grid::new(&SpatialDomain::interval(0.0, PI, 127)).unwrap();
    for k in [1usize, 3, 10] {
        let v: Vec<f64> = g.interior_points().iter().map(|x| (2.0 / PI).sqrt() * (k as f64 * x[0]).sin()).collect();
        for eta in [0.0, 0.25, 0.5, 1.0] {
            let got = fractional_norm(&v, eta, &g).unwrap();
            let want = (1.0 + (k * k) as f64).powf(eta);
            assert!((got - want).abs() < 1e-10 * want, "k={k} eta={eta}: {got} vs {want}");
        }
    }
}

#[test]
fn eta_one_matches_finite_difference_energy() {
    let g = Grid::new(&SpatialDomain::interval(0.0, PI, 255)).unwrap();
    let h = g.spacing()[0];
    let v: Vec<f64> = g.interior_points().iter().map(|x| x[0] * (PI - x[0]) * (1.0 + x[0].cos())).collect();
    let mut grad = 0.0;
    for i in 0..=v.len() {
        let a = if i == 0 { 0.0 } else { v[i - 1] };
        let b = if i == v.len() { 0.0 } else { v[i] };
        grad += h * ((b - a) / h).powi(2);
    }
    let fd = g.norm_sq(&v) + grad;
    let spec = fractional_norm(&v, 1.0, &g).unwrap();
    assert!((spec - fd).abs() < 0.02 * fd, "{spec} vs {fd}");
    let disc = FractionalNorm::new(&g, SpectralSymbol::Discrete).norm_sq(&v, 1.0).unwrap();
    assert!((disc - fd).abs() < 1e-9 * fd);
}

#[test]
fn fractional_norm_is_monotone_in_eta() {
    let (g, _) = grushin(31);
    let v: Vec<f64> = g.interior_points().iter().map(|x| (1.0 - x[0] * x[0]) * (3.0 * x[1]).sin()).collect();
    let mut last = 0.0;
    for i in 0..=10 {
        let n = fractional_norm(&v, i as f64 / 10.0, &g).unwrap();
        assert!(n >= last);
        last = n;
    }
}

#[test]
fn operator_triplet_export_round_trips() {
    let (g, s) = grushin(7);
    let op = assemble_divergence(&s, &g, 0.1).unwrap();
    let text = op.to_triplet_text();
    assert!(text.starts_with("# divergence_form 49 49 "));
    let (_, back) = ospde::discretize::SparseMatrix::from_triplet_text(&text).unwrap();
    assert_eq!(back, op.matrix);
}
