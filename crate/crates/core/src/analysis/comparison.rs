//! Coupled-noise ordering check between two problems.

use serde::{Deserialize, Serialize};

use super::{run_paths, AnalysisError};
use crate::model::{Barrier, FormPoint, SpdeProblem};
use crate::solver::{simulate, Discretization, NoisePath, RecordOptions, TimeMesh};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonStats {
    pub paths: usize,
    /// Node-time pairs compared.
    pub checked: usize,
    /// Pairs with `u_A > u_B + tol`.
    pub violations: usize,
    pub fraction: f64,
    /// `max (u_A − u_B)` over all pairs (may be negative).
    pub max_excess: f64,
}

fn check_orderings(a: &SpdeProblem, b: &SpdeProblem, disc: &Discretization) -> Result<(), AnalysisError> {
    let fail = |m: String| Err(AnalysisError::Precondition(m));
    if a.domain != b.domain || a.sigma != b.sigma || a.viscosity != b.viscosity || a.horizon != b.horizon {
        return fail("problems must share domain, sigma, viscosity and horizon".into());
    }
    if a.coeffs.g != b.coeffs.g || a.coeffs.h != b.coeffs.h {
        return fail("g and h must be identical".into());
    }
    let pts = &disc.points;
    let (xa, xb) = (disc.sample(&a.initial, 0.0), disc.sample(&b.initial, 0.0));
    if let Some(k) = (0..pts.len()).find(|&k| xa[k] > xb[k]) {
        return fail(format!("ξ_A > ξ_B at x = {:?}", pts[k]));
    }
    let probe_y = [-2.0, -0.5, 0.0, 0.75, 3.0];
    let probe_z = [-1.5, 0.0, 2.0];
    let cols = disc.columns();
    for (k, x) in pts.iter().enumerate() {
        for &y in &probe_y {
            for &zv in &probe_z {
                let z = vec![zv; cols];
                let p = FormPoint { t: 0.0, x, node: Some(k), y, z: &z };
                if a.coeffs.f.eval(&p) > b.coeffs.f.eval(&p) {
                    return fail(format!("f_A > f_B at x = {x:?}, y = {y}, z = {z:?}"));
                }
            }
        }
    }
    match (&a.obstacle, &b.obstacle) {
        (None, None) => Ok(()),
        (Some(oa), Some(ob)) => match (&oa.barrier, &ob.barrier) {
            (Barrier::Field { s: sa }, Barrier::Field { s: sb }) => {
                let (va, vb) = (disc.sample(sa, 0.0), disc.sample(sb, 0.0));
                match (0..pts.len()).find(|&k| va[k] > vb[k]) {
                    Some(k) => fail(format!("S_A > S_B at x = {:?}", pts[k])),
                    None => Ok(()),
                }
            }
            _ => fail("comparison supports deterministic barriers only".into()),
        },
        (Some(_), None) => fail("problem A has an obstacle and B does not".into()),
        (None, Some(_)) => Ok(()),
    }
}

/// Simulates both problems on the same noise for every seed and counts
/// node-time pairs where `u_A > u_B + tol`.
#[allow(clippy::too_many_arguments)]
pub fn comparison_test(
    a: &SpdeProblem,
    b: &SpdeProblem,
    penalty: f64,
    seeds: (u64, usize),
    mesh: &TimeMesh,
    tol: f64,
    workers: usize,
) -> Result<ComparisonStats, AnalysisError> {
    let disc = Discretization::new(a)?;
    check_orderings(a, b, &disc)?;
    let channels = a.coeffs.channels();
    let opts = RecordOptions { stride: 1, grads: false };
    let per_path = run_paths(seeds.1, seeds.0, workers, |seed| -> Result<(usize, usize, f64), AnalysisError> {
        let path = NoisePath::generate(seed, channels, mesh);
        let ua = simulate(a, &disc, penalty, &path, mesh, opts)?;
        let ub = simulate(b, &disc, penalty, &path, mesh, opts)?;
        let (mut checked, mut bad, mut worst) = (0, 0, f64::NEG_INFINITY);
        for (sa, sb) in ua.states.iter().zip(&ub.states) {
            for (x, y) in sa.iter().zip(sb) {
                checked += 1;
                worst = worst.max(x - y);
                if *x > y + tol {
                    bad += 1;
                }
            }
        }
        Ok((checked, bad, worst))
    })?;
    let checked: usize = per_path.iter().map(|r| r.0).sum();
    let violations: usize = per_path.iter().map(|r| r.1).sum();
    let max_excess = per_path.iter().map(|r| r.2).fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonStats {
        paths: seeds.1,
        checked,
        violations,
        fraction: if checked == 0 { 0.0 } else { violations as f64 / checked as f64 },
        max_excess,
    })
}
