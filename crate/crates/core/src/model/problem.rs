//! The full problem description, as ingested from JSON.

use serde::{Deserialize, Serialize};

use super::{ScalarForm, SigmaSpec};
use crate::discretize::SpatialDomain;

/// Declared Lipschitz constants of assumption (H).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lipschitz {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Lipschitz {
    pub fn new(c: f64, alpha: f64, beta: f64) -> Self {
        Self { c, alpha, beta }
    }
}

/// Drift `f`, divergence data `g` (one per σ column) and noise
/// coefficients `h` (one per Brownian channel, so `J = h.len()`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSet {
    pub f: ScalarForm,
    #[serde(default)]
    pub g: Vec<ScalarForm>,
    #[serde(default)]
    pub h: Vec<ScalarForm>,
    pub lipschitz: Lipschitz,
}

impl CoefficientSet {
    pub fn zero(columns: usize) -> Self {
        Self {
            f: ScalarForm::zero(),
            g: vec![ScalarForm::zero(); columns],
            h: Vec::new(),
            lipschitz: Lipschitz::default(),
        }
    }

    /// Number of noise channels.
    pub fn channels(&self) -> usize {
        self.h.len()
    }

    pub fn depends_on_state(&self) -> bool {
        self.f.depends_on_state()
            || self.g.iter().any(ScalarForm::depends_on_state)
            || self.h.iter().any(ScalarForm::depends_on_state)
    }
}

/// Data of the linear SPDE whose solution `S′` dominates the barrier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dominator {
    pub initial: ScalarForm,
    pub f: ScalarForm,
    #[serde(default)]
    pub g: Vec<ScalarForm>,
    #[serde(default)]
    pub h: Vec<ScalarForm>,
}

/// The lower barrier `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Barrier {
    /// A deterministic field `S(t, x)`.
    Field { s: ScalarForm },
    /// `S = S′ − offset`, with `S′` the simulated dominator.
    DominatorOffset { offset: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub barrier: Barrier,
    #[serde(default)]
    pub dominator: Option<Dominator>,
}

impl ObstacleSpec {
    pub fn field(s: ScalarForm) -> Self {
        Self { barrier: Barrier::Field { s }, dominator: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpdeProblem {
    pub domain: SpatialDomain,
    pub sigma: SigmaSpec,
    pub coeffs: CoefficientSet,
    pub initial: ScalarForm,
    #[serde(default)]
    pub obstacle: Option<ObstacleSpec>,
    pub horizon: f64,
    #[serde(default)]
    pub viscosity: f64,
}

impl SpdeProblem {
    /// σ = 0, f = g = h = 0, ξ = 0, no obstacle, on `(0, π)`.
    pub fn zero(nodes: usize) -> Self {
        Self {
            domain: SpatialDomain::interval(0.0, std::f64::consts::PI, nodes),
            sigma: SigmaSpec::new(&["0*d1"], 0.0),
            coeffs: CoefficientSet::zero(1),
            initial: ScalarForm::zero(),
            obstacle: None,
            horizon: 1.0,
            viscosity: 0.0,
        }
    }
}
