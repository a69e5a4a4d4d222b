//! The semi-implicit penalized step and its building blocks.

use crate::discretize::{BandedCholesky, Grid, OperatorSet, SparseMatrix};
use crate::model::{CoefficientSet, Dominator, FormPoint, ScalarForm, SigmaField, SpdeProblem};

use super::SolverError;

/// Grid, sampled σ and assembled operators of one problem.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: Grid,
    pub sigma: SigmaField,
    pub ops: OperatorSet,
    pub points: Vec<Vec<f64>>,
}

impl Discretization {
    pub fn new(problem: &SpdeProblem) -> Result<Self, SolverError> {
        let grid = Grid::new(&problem.domain)?;
        let sigma = SigmaField::from_spec(&grid, &problem.sigma)?;
        Self::from_parts(grid, sigma, problem.viscosity)
    }

    pub fn from_parts(grid: Grid, sigma: SigmaField, viscosity: f64) -> Result<Self, SolverError> {
        let ops = OperatorSet::assemble(&sigma, &grid, viscosity)?;
        let points = grid.interior_points();
        Ok(Self { grid, sigma, ops, points })
    }

    pub fn nodes(&self) -> usize {
        self.points.len()
    }

    pub fn columns(&self) -> usize {
        self.ops.columns()
    }

    pub fn sample(&self, form: &ScalarForm, t: f64) -> Vec<f64> {
        form.sample(t, &self.points)
    }
}

/// A coefficient form with its nodal values precomputed when it does not
/// depend on the state. No registry form depends on `t`.
#[derive(Clone, Debug)]
struct CachedForm {
    form: ScalarForm,
    values: Option<Vec<f64>>,
}

impl CachedForm {
    fn new(form: &ScalarForm, points: &[Vec<f64>]) -> Self {
        let values = (!form.depends_on_state()).then(|| form.sample(0.0, points));
        Self { form: form.clone(), values }
    }

    fn eval_into(&self, t: f64, points: &[Vec<f64>], y: &[f64], z: &[Vec<f64>], zbuf: &mut Vec<f64>, out: &mut [f64]) {
        if let Some(v) = &self.values {
            out.copy_from_slice(v);
            return;
        }
        for (p, o) in out.iter_mut().enumerate() {
            zbuf.clear();
            zbuf.extend(z.iter().map(|zk| zk[p]));
            *o = self.form.eval(&FormPoint { t, x: &points[p], node: Some(p), y: y[p], z: zbuf });
        }
    }
}

/// The data `(f, g, h)` of a linear or quasilinear equation.
#[derive(Clone, Debug)]
pub struct Forcing {
    f: CachedForm,
    g: Vec<CachedForm>,
    h: Vec<CachedForm>,
    state_dependent: bool,
}

impl Forcing {
    pub fn new(f: &ScalarForm, g: &[ScalarForm], h: &[ScalarForm], points: &[Vec<f64>]) -> Self {
        let state_dependent =
            f.depends_on_state() || g.iter().any(ScalarForm::depends_on_state) || h.iter().any(ScalarForm::depends_on_state);
        Self {
            f: CachedForm::new(f, points),
            g: g.iter().map(|x| CachedForm::new(x, points)).collect(),
            h: h.iter().map(|x| CachedForm::new(x, points)).collect(),
            state_dependent,
        }
    }

    pub fn from_coefficients(c: &CoefficientSet, points: &[Vec<f64>]) -> Self {
        Self::new(&c.f, &c.g, &c.h, points)
    }

    pub fn from_dominator(d: &Dominator, points: &[Vec<f64>]) -> Self {
        Self::new(&d.f, &d.g, &d.h, points)
    }

    /// Nodal drift only, no divergence data and no noise.
    pub fn drift(values: Vec<f64>, columns: usize) -> Self {
        let zero = vec![0.0; values.len()];
        let f = CachedForm { form: ScalarForm::zero(), values: Some(values) };
        let g = (0..columns).map(|_| CachedForm { form: ScalarForm::zero(), values: Some(zero.clone()) }).collect();
        Self { f, g, h: Vec::new(), state_dependent: false }
    }

    pub fn channels(&self) -> usize {
        self.h.len()
    }

    pub fn depends_on_state(&self) -> bool {
        self.state_dependent
    }
}

/// Evaluated coefficients at one time level.
#[derive(Clone, Debug, Default)]
pub struct NodalCoefficients {
    pub f: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
}

impl Forcing {
    pub fn evaluate(&self, t: f64, points: &[Vec<f64>], y: &[f64], z: &[Vec<f64>], out: &mut NodalCoefficients) {
        let n = points.len();
        let mut zbuf = Vec::with_capacity(z.len());
        out.f.resize(n, 0.0);
        self.f.eval_into(t, points, y, z, &mut zbuf, &mut out.f);
        out.g.resize(self.g.len(), Vec::new());
        for (form, o) in self.g.iter().zip(out.g.iter_mut()) {
            o.resize(n, 0.0);
            form.eval_into(t, points, y, z, &mut zbuf, o);
        }
        out.h.resize(self.h.len(), Vec::new());
        for (form, o) in self.h.iter().zip(out.h.iter_mut()) {
            o.resize(n, 0.0);
            form.eval_into(t, points, y, z, &mut zbuf, o);
        }
    }
}

/// Factorization of `I − Δt·L_h`, reusable for every step of a given `Δt`.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub dt: f64,
    factor: BandedCholesky,
}

impl Stepper {
    pub fn new(ops: &OperatorSet, dt: f64) -> Result<Self, SolverError> {
        if !(dt > 0.0) {
            return Err(SolverError::InvalidMesh(format!("time step {dt} must be positive")));
        }
        let n = ops.divergence.matrix.nrows();
        let m = SparseMatrix::identity(n).linear_combination(1.0, &ops.divergence.matrix, -dt);
        Ok(Self { dt, factor: BandedCholesky::factor(&m)? })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        self.factor.solve_in_place(rhs);
    }
}

/// Inputs of one step from `t` to `t + Δt`.
#[derive(Clone, Copy, Debug)]
pub struct StepInput<'a> {
    pub t: f64,
    pub u: &'a [f64],
    /// Previous Picard iterate `(y, z)` at time `t`; `None` uses `u` itself.
    pub frozen: Option<(&'a [f64], &'a [Vec<f64>])>,
    /// Barrier at `t + Δt`, if any.
    pub barrier: Option<&'a [f64]>,
    pub penalty: f64,
    pub noise: &'a [f64],
}

#[derive(Clone, Debug, Default)]
pub struct StepOutput {
    pub u: Vec<f64>,
    /// `vol · Δt · n · (u − S)⁻` per node; all zero without a barrier.
    pub reflection: Vec<f64>,
}

/// Reusable buffers for [`step_penalized`].
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    coeffs: NodalCoefficients,
    grads: Vec<Vec<f64>>,
}

/// One semi-implicit step: diffusion implicit, drift, divergence term and
/// noise explicit, penalty solved per node in closed form.
pub fn step_penalized(
    disc: &Discretization,
    forcing: &Forcing,
    stepper: &Stepper,
    input: &StepInput<'_>,
    ws: &mut Workspace,
    out: &mut StepOutput,
) -> Result<(), SolverError> {
    let n = disc.nodes();
    let dt = stepper.dt;
    if input.noise.len() != forcing.channels() {
        return Err(SolverError::InvalidMesh(format!(
            "noise slice has {} channels, coefficients have {}",
            input.noise.len(),
            forcing.channels()
        )));
    }
    let (y, z): (&[f64], &[Vec<f64>]) = match input.frozen {
        Some(fz) => fz,
        None => {
            if forcing.depends_on_state() {
                ws.grads.resize(disc.columns(), Vec::new());
                for (op, g) in disc.ops.first_order.iter().zip(ws.grads.iter_mut()) {
                    g.resize(n, 0.0);
                    op.matrix.mul_vec_into(input.u, g);
                }
            }
            (input.u, &ws.grads)
        }
    };
    forcing.evaluate(input.t, &disc.points, y, z, &mut ws.coeffs);
    let c = &ws.coeffs;

    out.u.clear();
    out.u.extend(input.u.iter().zip(&c.f).map(|(u, f)| u + dt * f));
    let mut div = vec![0.0; n];
    disc.ops.add_divergence_of(&c.g, &mut div);
    for (o, d) in out.u.iter_mut().zip(&div) {
        *o += dt * d;
    }
    for (h, db) in c.h.iter().zip(input.noise) {
        for (o, hv) in out.u.iter_mut().zip(h) {
            *o += hv * db;
        }
    }
    stepper.solve_in_place(&mut out.u);

    out.reflection.clear();
    out.reflection.resize(n, 0.0);
    if let Some(s) = input.barrier {
        let a = dt * input.penalty;
        let vol = disc.grid.cell_volume();
        for p in 0..n {
            let w = out.u[p];
            let pushed = (w + a * s[p]) / (1.0 + a);
            if pushed > w {
                out.u[p] = pushed;
                out.reflection[p] = vol * (pushed - w);
            }
        }
    }
    if let Some(p) = out.u.iter().position(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite { time: input.t + dt, node: p, coords: disc.points[p].clone() });
    }
    Ok(())
}
