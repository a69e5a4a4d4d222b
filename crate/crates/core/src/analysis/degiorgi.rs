//! De Giorgi truncation energies and sup-norm tail statistics.

use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_mean_se, linear_fit, mean, LineFit};
use super::{run_paths, AnalysisError};
use crate::discretize::FractionalNorm;
use crate::model::SpdeProblem;
use crate::solver::{simulate, simulate_dominator, Discretization, NoisePath, RecordOptions, Stepper, TimeMesh};

/// `v^m = [v − λ(1 − 2^{−m})]⁺`.
pub fn truncate(v: &[f64], lambda: f64, m: u32) -> Vec<f64> {
    let level = lambda * (1.0 - 0.5f64.powi(m as i32));
    v.iter().map(|x| (x - level).max(0.0)).collect()
}

/// De Giorgi energies of one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeGiorgiPath {
    pub lambda: f64,
    /// `V^m` for `m = 0..=M`.
    pub levels: Vec<f64>,
    /// `sup_{t,x} v⁺`.
    pub sup_v: f64,
    /// `v^m ≤ v^{m−1}` held at every node and time.
    pub nested: bool,
    /// `1_{v^m > 0} ≤ 2^m v^{m−1}/λ` held at every node and time.
    pub chebyshev: bool,
}

impl DeGiorgiPath {
    pub fn nonincreasing(&self) -> bool {
        self.levels.windows(2).all(|w| w[1] <= w[0])
    }

    /// `V^m / V^{m−1}` for `m ≥ 1`, with `0` when `V^{m−1} = 0`.
    pub fn ratios(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] }).collect()
    }
}

/// `V^m = sup_k ‖v^m_k‖² + Σ_{k≥1} Δt (Σ_c ‖L_c v^m_k‖² + ‖v^m_k‖²_{H^η})`
/// for the path `v` given at every mesh point.
pub fn degiorgi_sequence(
    v: &[Vec<f64>],
    lambda: f64,
    levels: u32,
    eta: f64,
    disc: &Discretization,
    norm: &FractionalNorm,
    mesh: &TimeMesh,
) -> Result<DeGiorgiPath, AnalysisError> {
    if !(lambda > 0.0) {
        return Err(AnalysisError::Precondition(format!("λ = {lambda} must be positive")));
    }
    if v.len() != mesh.steps + 1 {
        return Err(AnalysisError::Incomplete(format!("{} states for {} steps", v.len(), mesh.steps)));
    }
    let vol = disc.grid.cell_volume();
    let sq = |u: &[f64]| vol * u.iter().map(|x| x * x).sum::<f64>();
    let mut out = Vec::with_capacity(levels as usize + 1);
    let (mut nested, mut chebyshev) = (true, true);
    let sup_v = v.iter().flatten().fold(0.0f64, |m, x| m.max(*x));
    for m in 0..=levels {
        let mut sup: f64 = 0.0;
        let mut integral = 0.0;
        for (k, vk) in v.iter().enumerate() {
            let vm = truncate(vk, lambda, m);
            if m > 0 {
                let prev = truncate(vk, lambda, m - 1);
                let scale = 2f64.powi(m as i32) / lambda;
                for (a, b) in vm.iter().zip(&prev) {
                    nested &= a <= b;
                    chebyshev &= *a <= 0.0 || 1.0 <= scale * b;
                }
            }
            sup = sup.max(sq(&vm));
            if k > 0 && vm.iter().any(|x| *x > 0.0) {
                let grads: f64 = disc.ops.gradients(&vm).iter().map(|g| sq(g)).sum();
                integral += mesh.dt * (grads + norm.norm_sq(&vm, eta)?);
            }
        }
        out.push(sup + integral);
    }
    Ok(DeGiorgiPath { lambda, levels: out, sup_v, nested, chebyshev })
}

/// Settings of a De Giorgi ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeGiorgiSettings {
    pub penalty: f64,
    pub lambda: f64,
    pub levels: u32,
    pub eta: f64,
}

/// Runs `paths` paths and returns the De Giorgi energies of
/// `v = u − S′` on each, `S′` being the dominator driven by the same noise
/// (`v = u` without one).
pub fn degiorgi_ensemble(
    problem: &SpdeProblem,
    disc: &Discretization,
    norm: &FractionalNorm,
    settings: DeGiorgiSettings,
    mesh: &TimeMesh,
    seeds: (u64, usize),
    workers: usize,
) -> Result<Vec<DeGiorgiPath>, AnalysisError> {
    let stepper = Stepper::new(&disc.ops, mesh.dt)?;
    let dominator = problem.obstacle.as_ref().and_then(|o| o.dominator.as_ref());
    let channels = problem.coeffs.channels();
    let opts = RecordOptions { stride: 1, grads: false };
    run_paths(seeds.1, seeds.0, workers, |seed| {
        let path = NoisePath::generate(seed, channels, mesh);
        let traj = simulate(problem, disc, settings.penalty, &path, mesh, opts)?;
        let v: Vec<Vec<f64>> = match dominator {
            Some(dom) => {
                let upper = simulate_dominator(disc, dom, &stepper, &path, mesh)?;
                traj.states.iter().zip(&upper).map(|(u, s)| u.iter().zip(s).map(|(a, b)| a - b).collect()).collect()
            }
            None => traj.states,
        };
        degiorgi_sequence(&v, settings.lambda, settings.levels, settings.eta, disc, norm, mesh)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub lambdas: Vec<f64>,
    /// `P̂(sup > λ)` per λ.
    pub tail: Vec<f64>,
    /// Fit of `ln P̂ = b − C′ λ^{2α₀}` over `λ > max(λ₀, 1)` with `P̂ > 0`.
    pub fit: Option<TailFit>,
    pub p: f64,
    pub moment_direct: f64,
    pub moment_layer_cake: f64,
    pub moment_se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c_prime: f64,
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Points of the λ grid used by the layer-cake quadrature.
pub const LAYER_CAKE_POINTS: usize = 4096;

/// Empirical tail of `sups`, its stretched-exponential fit and the two
/// estimates of `E sup^p`.
pub fn tail_and_moments(
    sups: &[f64],
    lambdas: &[f64],
    p: f64,
    alpha0: f64,
    lambda0: f64,
    seed: u64,
) -> Result<TailReport, AnalysisError> {
    if sups.len() < 100 {
        return Err(AnalysisError::Precondition(format!("{} paths; at least 100 are needed", sups.len())));
    }
    if !(p > 2.0) {
        return Err(AnalysisError::Precondition(format!("p = {p} must exceed 2")));
    }
    let n = sups.len() as f64;
    let tail_at = |l: f64| sups.iter().filter(|s| **s > l).count() as f64 / n;
    let tail: Vec<f64> = lambdas.iter().map(|&l| tail_at(l)).collect();

    let exponent = 2.0 * alpha0;
    let cut = lambda0.max(1.0);
    let (xs, ys): (Vec<f64>, Vec<f64>) = lambdas
        .iter()
        .zip(&tail)
        .filter(|(l, t)| **l > cut && **t > 0.0)
        .map(|(l, t)| (l.powf(exponent), t.ln()))
        .unzip();
    let fit = if xs.len() >= 3 {
        linear_fit(&xs, &ys).map(|LineFit { slope, intercept, r_squared }| TailFit {
            c_prime: -slope,
            exponent,
            intercept,
            r_squared,
            points: xs.len(),
        })
    } else {
        None
    };

    let powered: Vec<f64> = sups.iter().map(|s| s.max(0.0).powf(p)).collect();
    let moment_direct = mean(&powered);
    let moment_se = bootstrap_mean_se(&powered, seed);
    let top = sups.iter().fold(0.0f64, |m, s| m.max(*s));
    let moment_layer_cake = if top == 0.0 {
        0.0
    } else {
        let h = top / (LAYER_CAKE_POINTS - 1) as f64;
        let mut sorted = sups.to_vec();
        sorted.sort_by(f64::total_cmp);
        // Trapezoid rule on the grid, evaluating the tail by binary search.
        let tail_sorted = |l: f64| (sorted.len() - sorted.partition_point(|s| *s <= l)) as f64 / n;
        let g = |i: usize| {
            let l = i as f64 * h;
            p * l.powf(p - 1.0) * tail_sorted(l)
        };
        h * ((1..LAYER_CAKE_POINTS - 1).map(g).sum::<f64>() + 0.5 * (g(0) + g(LAYER_CAKE_POINTS - 1)))
    };
    Ok(TailReport { lambdas: lambdas.to_vec(), tail, fit, p, moment_direct, moment_layer_cake, moment_se })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SigmaSpec, SpdeProblem};
    use crate::discretize::SpectralSymbol;

    fn setup() -> (Discretization, FractionalNorm, TimeMesh) {
        let mut p = SpdeProblem::zero(15);
        p.sigma = SigmaSpec::new(&["d1"], 1.0);
        let d = Discretization::new(&p).unwrap();
        let n = FractionalNorm::new(&d.grid, SpectralSymbol::Discrete);
        (d, n, TimeMesh::new(1.0, 4).unwrap())
    }

    #[test]
    fn constant_fields() {
        let (d, n, mesh) = setup();
        let lambda = 2.0;
        let quarter = vec![vec![lambda / 4.0; 15]; 5];
        let r = degiorgi_sequence(&quarter, lambda, 4, 0.25, &d, &n, &mesh).unwrap();
        assert!(r.levels[0] > 0.0 && r.levels[1..].iter().all(|v| *v == 0.0));
        for m in 0..5 {
            assert!(truncate(&[lambda], lambda, m).iter().all(|x| *x == lambda / 2f64.powi(m as i32)));
        }
        let full = degiorgi_sequence(&vec![vec![lambda; 15]; 5], lambda, 4, 0.25, &d, &n, &mesh).unwrap();
        assert!(full.nonincreasing() && full.nested && full.chebyshev);
        assert!(degiorgi_sequence(&quarter, 0.0, 4, 0.25, &d, &n, &mesh).is_err());
    }

    #[test]
    fn tail_of_zero_sups() {
        let r = tail_and_moments(&[0.0; 100], &[0.5, 1.0, 2.0], 3.0, 0.2, 0.0, 1).unwrap();
        assert!(r.tail.iter().all(|t| *t == 0.0));
        assert!(r.fit.is_none());
        assert_eq!((r.moment_direct, r.moment_layer_cake), (0.0, 0.0));
    }
}
