//! Whole-path solves and the recorded trajectory.

use serde::{Deserialize, Serialize};

use super::scheme::{step_penalized, Discretization, Forcing, StepInput, StepOutput, Stepper, Workspace};
use super::{NoisePath, SolverError, TimeMesh};
use crate::model::{Barrier, Dominator, SpdeProblem};

/// The barrier along a path.
#[derive(Clone, Debug, PartialEq)]
pub enum BarrierPath {
    None,
    Static(Vec<f64>),
    /// One field per mesh point `0..=M`.
    Dynamic(Vec<Vec<f64>>),
}

impl BarrierPath {
    pub fn at(&self, k: usize) -> Option<&[f64]> {
        match self {
            Self::None => None,
            Self::Static(s) => Some(s),
            Self::Dynamic(s) => Some(&s[k]),
        }
    }
}

/// What to keep while stepping. Energies are always accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordOptions {
    /// Keep every `stride`-th mesh point; 0 keeps nothing but the endpoints.
    pub stride: usize,
    pub grads: bool,
}

impl Default for RecordOptions {
    fn default() -> Self {
        Self { stride: 1, grads: true }
    }
}

impl RecordOptions {
    pub fn summary_only() -> Self {
        Self { stride: 0, grads: false }
    }
}

/// Online accumulators of a trajectory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    /// `max_k ‖u_k‖²`.
    pub sup_norm_sq: f64,
    /// `Σ_k Δt ‖σᵀ∇u_k‖²`.
    pub grad_integral: f64,
    /// `Σ_k Δt · n ‖(u_k − S_k)⁻‖²`.
    pub penalty_integral: f64,
    /// `(Σ_k Δt ‖(u_k − S_k)⁻‖²)^{1/2}`.
    pub negative_part_l2: f64,
    /// Total reflection mass `Σ_{k,x} ν_k(x)`.
    pub reflection_mass: f64,
    /// `Σ_{k,x} (u_k − S_k)⁺ ν_k(x)`.
    pub skorokhod: f64,
    /// `max_{k,x} |u_k(x)|`.
    pub sup_abs: f64,
}

impl EnergySummary {
    /// `sup‖u‖² + ∫‖σᵀ∇u‖² + n∫‖(u−S)⁻‖²`.
    pub fn total(&self) -> f64 {
        self.sup_norm_sq + self.grad_integral + self.penalty_integral
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub penalty: f64,
    pub seed: u64,
    pub mesh: TimeMesh,
    pub cell_volume: f64,
    pub stride: usize,
    /// Recorded mesh indices.
    pub indices: Vec<usize>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `σᵀ∇u` per recorded time, one vector per σ column; empty when not kept.
    pub grads: Vec<Vec<Vec<f64>>>,
    /// Reflection accumulated since the previous recorded time.
    pub reflection: Vec<Vec<f64>>,
    pub energy: EnergySummary,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory records its endpoints")
    }

    pub fn is_complete(&self) -> bool {
        self.stride == 1 && self.states.len() == self.mesh.steps + 1
    }
}

/// Steps a whole path. `frozen`, when given, must be a complete trajectory
/// with gradients on the same mesh; its values at the start of each step
/// replace `(y, z)` in the coefficients.
#[allow(clippy::too_many_arguments)]
pub fn run_path(
    disc: &Discretization,
    forcing: &Forcing,
    stepper: &Stepper,
    initial: &[f64],
    barrier: &BarrierPath,
    penalty: f64,
    path: &NoisePath,
    mesh: &TimeMesh,
    frozen: Option<&Trajectory>,
    opts: RecordOptions,
) -> Result<Trajectory, SolverError> {
    if path.steps() != mesh.steps || path.channels() != forcing.channels() {
        return Err(SolverError::InvalidMesh(format!(
            "noise path has {} steps x {} channels, expected {} x {}",
            path.steps(),
            path.channels(),
            mesh.steps,
            forcing.channels()
        )));
    }
    if let Some(fz) = frozen {
        if !fz.is_complete() || fz.grads.len() != fz.states.len() || fz.mesh != *mesh {
            return Err(SolverError::InvalidMesh("frozen iterate must be complete, with gradients, on the same mesh".into()));
        }
    }
    if !(penalty >= 0.0) {
        return Err(SolverError::InvalidMesh(format!("penalty {penalty} must be >= 0")));
    }
    let vol = disc.grid.cell_volume();
    let grads_of = |u: &[f64]| disc.ops.gradients(u);
    let sq = |u: &[f64]| vol * u.iter().map(|v| v * v).sum::<f64>();

    let mut traj = Trajectory {
        penalty,
        seed: path.seed,
        mesh: *mesh,
        cell_volume: vol,
        stride: opts.stride,
        indices: vec![0],
        times: vec![0.0],
        states: vec![initial.to_vec()],
        grads: Vec::new(),
        reflection: vec![vec![0.0; initial.len()]],
        energy: EnergySummary::default(),
    };
    if opts.grads {
        traj.grads.push(grads_of(initial));
    }
    let mut e = EnergySummary { sup_norm_sq: sq(initial), sup_abs: initial.iter().fold(0.0, |m, v| m.max(v.abs())), ..Default::default() };
    let mut neg_sq = 0.0;

    let mut ws = Workspace::default();
    let mut out = StepOutput::default();
    let mut u = initial.to_vec();
    let mut pending_refl = vec![0.0; u.len()];
    for k in 0..mesh.steps {
        let input = StepInput {
            t: mesh.time(k),
            u: &u,
            frozen: frozen.map(|fz| (fz.states[k].as_slice(), fz.grads[k].as_slice())),
            barrier: barrier.at(k + 1),
            penalty,
            noise: path.increment(k),
        };
        step_penalized(disc, forcing, stepper, &input, &mut ws, &mut out)?;
        std::mem::swap(&mut u, &mut out.u);

        let z = grads_of(&u);
        e.sup_norm_sq = e.sup_norm_sq.max(sq(&u));
        e.sup_abs = u.iter().fold(e.sup_abs, |m, v| m.max(v.abs()));
        e.grad_integral += mesh.dt * z.iter().map(|zk| sq(zk)).sum::<f64>();
        if let Some(s) = barrier.at(k + 1) {
            let neg: f64 = vol * u.iter().zip(s).map(|(a, b)| (b - a).max(0.0).powi(2)).sum::<f64>();
            neg_sq += mesh.dt * neg;
            e.penalty_integral += mesh.dt * penalty * neg;
            for p in 0..u.len() {
                e.reflection_mass += out.reflection[p];
                e.skorokhod += (u[p] - s[p]).max(0.0) * out.reflection[p];
            }
        }
        pending_refl.iter_mut().zip(&out.reflection).for_each(|(a, r)| *a += r);

        let last = k + 1 == mesh.steps;
        if last || (opts.stride > 0 && (k + 1) % opts.stride == 0) {
            traj.indices.push(k + 1);
            traj.times.push(mesh.time(k + 1));
            traj.states.push(u.clone());
            traj.reflection.push(std::mem::replace(&mut pending_refl, vec![0.0; u.len()]));
            if opts.grads {
                traj.grads.push(z);
            }
        }
    }
    e.negative_part_l2 = neg_sq.sqrt();
    traj.energy = e;
    Ok(traj)
}

/// Unconstrained linear path of the dominating process `S′`, every mesh point.
pub fn simulate_dominator(
    disc: &Discretization,
    dom: &Dominator,
    stepper: &Stepper,
    path: &NoisePath,
    mesh: &TimeMesh,
) -> Result<Vec<Vec<f64>>, SolverError> {
    let forcing = Forcing::from_dominator(dom, &disc.points);
    let init = disc.sample(&dom.initial, 0.0);
    let t = run_path(disc, &forcing, stepper, &init, &BarrierPath::None, 0.0, path, mesh, None, RecordOptions {
        stride: 1,
        grads: false,
    })?;
    Ok(t.states)
}

/// The barrier of `problem` along `path`; simulates `S′` when required.
pub fn barrier_path(
    problem: &SpdeProblem,
    disc: &Discretization,
    stepper: &Stepper,
    path: &NoisePath,
    mesh: &TimeMesh,
) -> Result<BarrierPath, SolverError> {
    let Some(obs) = &problem.obstacle else { return Ok(BarrierPath::None) };
    match &obs.barrier {
        Barrier::Field { s } => Ok(BarrierPath::Static(disc.sample(s, 0.0))),
        Barrier::DominatorOffset { offset } => {
            let dom = obs.dominator.as_ref().ok_or_else(|| SolverError::Obstacle("barrier needs a dominator".into()))?;
            let mut states = simulate_dominator(disc, dom, stepper, path, mesh)?;
            states.iter_mut().flatten().for_each(|v| *v -= offset);
            Ok(BarrierPath::Dynamic(states))
        }
    }
}

/// Penalized solve of `problem` with coefficients evaluated at the current
/// state (explicitly). For state-independent coefficients this is the
/// linear obstacle solve.
pub fn simulate(
    problem: &SpdeProblem,
    disc: &Discretization,
    penalty: f64,
    path: &NoisePath,
    mesh: &TimeMesh,
    opts: RecordOptions,
) -> Result<Trajectory, SolverError> {
    let stepper = Stepper::new(&disc.ops, mesh.dt)?;
    let forcing = Forcing::from_coefficients(&problem.coeffs, &disc.points);
    let barrier = barrier_path(problem, disc, &stepper, path, mesh)?;
    let init = disc.sample(&problem.initial, 0.0);
    run_path(disc, &forcing, &stepper, &init, &barrier, penalty, path, mesh, None, opts)
}

/// [`simulate`] restricted to coefficients that do not depend on `(y, z)`.
pub fn solve_linear_obstacle(
    problem: &SpdeProblem,
    disc: &Discretization,
    penalty: f64,
    path: &NoisePath,
    mesh: &TimeMesh,
    opts: RecordOptions,
) -> Result<Trajectory, SolverError> {
    if problem.coeffs.depends_on_state() {
        return Err(SolverError::NotLinear);
    }
    simulate(problem, disc, penalty, path, mesh, opts)
}
