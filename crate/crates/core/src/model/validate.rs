//! Aggregated invariant checks of a [`SpdeProblem`].

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Barrier, FormPoint, ScalarForm, SigmaField, SpdeProblem};
use crate::discretize::Grid;

/// Which structural assumption a violation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    /// Box domain and resolution.
    Domain,
    /// `0 ≤ a ≤ λ₀` for `a = σσᵀ`, and σ well formed.
    Ellipticity,
    /// Lipschitz and shape conditions of (H).
    H,
    /// Initial datum conditions of (I).
    I,
    /// Obstacle conditions of (O).
    O,
    /// Horizon, viscosity and other scalar parameters.
    Parameters,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Domain => "domain",
            Self::Ellipticity => "ellipticity",
            Self::H => "H",
            Self::I => "I",
            Self::O => "O",
            Self::Parameters => "parameters",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub assumption: Assumption,
    /// Short stable identifier such as `s0_le_xi` or `lipschitz_h`.
    pub code: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) {}", self.assumption, self.message)
    }
}

struct Sink(Vec<Violation>);

impl Sink {
    fn push(&mut self, assumption: Assumption, code: &str, message: String) {
        self.0.push(Violation { assumption, code: code.to_string(), message });
    }
}

/// Probe values for `y` and for each component of `z`.
const PROBE_Y: [f64; 4] = [-2.0, -0.5, 0.75, 3.0];
const PROBE_Z: [f64; 3] = [-1.5, 0.25, 2.0];
/// At most this many interior nodes are probed, evenly spread.
const PROBE_NODES: usize = 24;

fn probe_states(columns: usize) -> Vec<(f64, Vec<f64>)> {
    let mut zs: Vec<Vec<f64>> = vec![Vec::new()];
    for _ in 0..columns.min(3) {
        zs = zs.iter().flat_map(|z| PROBE_Z.iter().map(move |&v| [z.as_slice(), &[v]].concat())).collect();
    }
    zs.iter_mut().for_each(|z| z.resize(columns, 0.0));
    PROBE_Y.iter().flat_map(|&y| zs.iter().map(move |z| (y, z.clone()))).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Spot-checks `|F(y,z) − F(y′,z′)| ≤ cy|y−y′| + cz|z−z′|` for a vector of
/// forms `F` on the probe lattice; returns the first failing pair.
fn probe_lipschitz(
    forms: &[ScalarForm],
    cy: f64,
    cz: f64,
    nodes: &[(usize, Vec<f64>)],
    times: &[f64],
    states: &[(f64, Vec<f64>)],
) -> Option<String> {
    for &t in times {
        for (node, x) in nodes {
            let vals: Vec<Vec<f64>> = states
                .iter()
                .map(|(y, z)| forms.iter().map(|f| f.eval(&FormPoint { t, x, node: Some(*node), y: *y, z })).collect())
                .collect();
            for i in 0..states.len() {
                for j in i + 1..states.len() {
                    let (si, sj) = (&states[i], &states[j]);
                    let lhs = dist(&vals[i], &vals[j]);
                    let rhs = cy * (si.0 - sj.0).abs() + cz * dist(&si.1, &sj.1);
                    if lhs > rhs * (1.0 + 1e-9) + 1e-12 {
                        return Some(format!(
                            "at t={t}, x={x:?}: (y,z)={:?} vs {:?} gives difference {lhs:e} > bound {rhs:e}",
                            si, sj
                        ));
                    }
                }
            }
        }
    }
    None
}

fn check_forms_finite(sink: &mut Sink, assumption: Assumption, name: &str, form: &ScalarForm, grid: &Grid, t: f64) {
    if let Some(len) = form.tabulation_mismatch(grid.num_interior()) {
        sink.push(
            assumption,
            "tabulation_length",
            format!("{name}: tabulated form has {len} values for {} interior nodes", grid.num_interior()),
        );
        return;
    }
    let pts = grid.interior_points();
    if let Some(k) = form.sample(t, &pts).iter().position(|v| !v.is_finite()) {
        sink.push(assumption, "non_finite", format!("{name} is not finite at node {k} (x={:?})", pts[k]));
    }
}

/// Lists every violated invariant. An empty list means the problem is
/// admissible on its grid and on the probe lattice.
pub fn validate_problem(problem: &SpdeProblem) -> Vec<Violation> {
    let mut sink = Sink(Vec::new());
    let s = &mut sink;

    if !(problem.horizon > 0.0) || !problem.horizon.is_finite() {
        s.push(Assumption::Parameters, "horizon", format!("horizon T = {} must be positive", problem.horizon));
    }
    if !(problem.viscosity >= 0.0) || !problem.viscosity.is_finite() {
        s.push(Assumption::Parameters, "viscosity", format!("viscosity {} must be >= 0", problem.viscosity));
    }
    let grid = match Grid::new(&problem.domain) {
        Ok(g) => g,
        Err(e) => {
            s.push(Assumption::Domain, "domain", e.to_string());
            return sink.0;
        }
    };
    let t_end = if problem.horizon > 0.0 { problem.horizon } else { 0.0 };

    // σ and the ellipticity bound.
    let mut columns = problem.sigma.columns.len();
    match SigmaField::from_spec(&grid, &problem.sigma) {
        Err(e) => {
            s.push(Assumption::Ellipticity, "sigma_parse", format!("sigma columns: {e}"));
            columns = problem.coeffs.g.len();
        }
        Ok(sigma) => {
            if columns == 0 {
                s.push(Assumption::Ellipticity, "sigma_empty", "sigma needs at least one column".into());
            }
            if !(problem.sigma.bound >= 0.0) {
                s.push(Assumption::Ellipticity, "lambda0", format!("bound λ₀ = {} must be >= 0", problem.sigma.bound));
            }
            let tol = 1e-12 * problem.sigma.bound.abs().max(1.0);
            if let Some(q) = (0..grid.num_full()).find(|&q| sigma.max_eigenvalue(q) > problem.sigma.bound + tol) {
                s.push(
                    Assumption::Ellipticity,
                    "lambda0",
                    format!(
                        "largest eigenvalue of σσᵀ is {} > λ₀ = {} at x={:?}",
                        sigma.max_eigenvalue(q),
                        problem.sigma.bound,
                        grid.full_coords(q)
                    ),
                );
            }
        }
    }

    // Shapes and finiteness of the coefficients.
    let c = &problem.coeffs;
    if c.g.len() != columns {
        s.push(Assumption::H, "g_columns", format!("g has {} components, sigma has {columns} columns", c.g.len()));
    }
    let l = c.lipschitz;
    if [l.c, l.alpha, l.beta].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        s.push(Assumption::H, "lipschitz_sign", format!("Lipschitz constants must be finite and >= 0, got {l:?}"));
    }
    check_forms_finite(s, Assumption::H, "f", &c.f, &grid, 0.0);
    for (k, g) in c.g.iter().enumerate() {
        check_forms_finite(s, Assumption::H, &format!("g[{k}]"), g, &grid, 0.0);
    }
    for (j, h) in c.h.iter().enumerate() {
        check_forms_finite(s, Assumption::H, &format!("h[{j}]"), h, &grid, 0.0);
    }

    // Lipschitz probes, only when the shapes are sound.
    if !s.0.iter().any(|v| v.assumption == Assumption::H) {
        let n_int = grid.num_interior();
        let stride = n_int.div_ceil(PROBE_NODES).max(1);
        let nodes: Vec<(usize, Vec<f64>)> = (0..n_int).step_by(stride).map(|k| (k, grid.interior_coords(k))).collect();
        let times = [0.0, 0.5 * t_end, t_end];
        let states = probe_states(columns);
        let checks: [(&str, &[ScalarForm], f64, f64, &str); 3] = [
            ("lipschitz_f", std::slice::from_ref(&c.f), l.c, l.c, "f"),
            ("lipschitz_g", &c.g, l.c, l.alpha, "g"),
            ("lipschitz_h", &c.h, l.c, l.beta, "h"),
        ];
        for (code, forms, cy, cz, name) in checks {
            if forms.is_empty() {
                continue;
            }
            if let Some(msg) = probe_lipschitz(forms, cy, cz, &nodes, &times, &states) {
                s.push(Assumption::H, code, format!("Lipschitz probe for {name} failed {msg}"));
            }
        }
    }

    // Initial datum.
    if problem.initial.depends_on_state() {
        s.push(Assumption::I, "xi_state", "initial datum must not depend on (y, z)".into());
    }
    check_forms_finite(s, Assumption::I, "initial datum", &problem.initial, &grid, 0.0);
    if !problem.initial.is_tabulated() {
        let boundary = (0..grid.num_full()).filter(|&q| grid.interior_of(grid.full_multi(q)).is_none());
        for q in boundary {
            let x = grid.full_coords(q);
            let v = problem.initial.eval(&FormPoint::spatial(0.0, &x, None));
            if !(v.abs() <= 1e-9) {
                s.push(Assumption::I, "xi_boundary", format!("initial datum is {v:e} at boundary point {x:?}"));
                break;
            }
        }
    }
    let pts = grid.interior_points();
    let xi = problem.initial.sample(0.0, &pts);

    // Obstacle.
    if let Some(obs) = &problem.obstacle {
        if let Some(dom) = &obs.dominator {
            let forms = std::iter::once(("S'0", &dom.initial))
                .chain(std::iter::once(("f'", &dom.f)))
                .chain(dom.g.iter().map(|g| ("g'", g)))
                .chain(dom.h.iter().map(|h| ("h'", h)));
            for (name, form) in forms {
                if form.depends_on_state() {
                    s.push(Assumption::O, "dominator_linear", format!("dominator coefficient {name} depends on (y, z)"));
                }
                check_forms_finite(s, Assumption::O, name, form, &grid, 0.0);
            }
            if dom.g.len() != columns {
                s.push(Assumption::O, "dominator_g", format!("g' has {} components, sigma has {columns}", dom.g.len()));
            }
            if dom.h.len() != c.h.len() {
                s.push(
                    Assumption::O,
                    "dominator_h",
                    format!("h' has {} channels, h has {}", dom.h.len(), c.h.len()),
                );
            }
        }
        let s0: Option<Vec<f64>> = match &obs.barrier {
            Barrier::Field { s: form } => {
                if form.depends_on_state() {
                    s.push(Assumption::O, "barrier_state", "barrier must not depend on (y, z)".into());
                }
                check_forms_finite(s, Assumption::O, "S", form, &grid, 0.0);
                Some(form.sample(0.0, &pts))
            }
            Barrier::DominatorOffset { offset } => match &obs.dominator {
                None => {
                    s.push(Assumption::O, "dominator_missing", "barrier refers to a dominator that is not given".into());
                    None
                }
                Some(dom) => {
                    if !(*offset >= 0.0) {
                        s.push(Assumption::O, "offset", format!("offset {offset} must be >= 0 so that S ≤ S′"));
                    }
                    Some(dom.initial.sample(0.0, &pts).iter().map(|v| v - offset).collect())
                }
            },
        };
        if let Some(s0) = s0 {
            if let Some(k) = (0..pts.len()).find(|&k| s0[k] > xi[k]) {
                s.push(
                    Assumption::O,
                    "s0_le_xi",
                    format!("S₀ ≤ ξ violated at x={:?}: S₀ = {}, ξ = {}", pts[k], s0[k], xi[k]),
                );
            }
        }
        if let (Barrier::Field { s: form }, Some(dom)) = (&obs.barrier, &obs.dominator) {
            let sp = dom.initial.sample(0.0, &pts);
            if let Some(k) = (0..pts.len()).find(|&k| form.eval(&FormPoint::spatial(0.0, &pts[k], Some(k))) > sp[k]) {
                s.push(Assumption::O, "s_le_dominator", format!("S > S′ at t = 0, x={:?}", pts[k]));
            }
        }
    }
    sink.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Lipschitz, ObstacleSpec};

    #[test]
    fn zero_problem_is_admissible() {
        assert!(validate_problem(&SpdeProblem::zero(16)).is_empty());
    }

    #[test]
    fn obstacle_above_initial_datum() {
        let mut p = SpdeProblem::zero(16);
        p.obstacle = Some(ObstacleSpec::field(ScalarForm::constant(1.0)));
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!((v[0].assumption, v[0].code.as_str()), (Assumption::O, "s0_le_xi"));
        assert!(v[0].message.contains("S₀ ≤ ξ violated"));
    }

    #[test]
    fn undeclared_gradient_dependence_of_h() {
        let mut p = SpdeProblem::zero(16);
        p.coeffs.h = vec![ScalarForm::affine_z(0.0, vec![1.0])];
        p.coeffs.lipschitz = Lipschitz::new(0.0, 0.0, 0.0);
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].code, "lipschitz_h");
        p.coeffs.lipschitz.beta = 1.0;
        assert!(validate_problem(&p).is_empty());
    }

    #[test]
    fn initial_datum_must_vanish_on_boundary() {
        let mut p = SpdeProblem::zero(16);
        p.initial = ScalarForm::constant(0.5);
        let v = validate_problem(&p);
        assert!(v.iter().any(|v| v.code == "xi_boundary"), "{v:?}");
    }

    #[test]
    fn ellipticity_bound_is_checked() {
        let mut p = SpdeProblem::zero(16);
        p.sigma = crate::model::SigmaSpec::new(&["2*d1"], 1.0);
        let v = validate_problem(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].assumption, Assumption::Ellipticity);
        p.sigma.bound = 4.0;
        assert!(validate_problem(&p).is_empty());
    }
}
