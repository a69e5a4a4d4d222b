//! The contraction gate `2α + β² < 1` and the weighted-norm parameters.

use serde::{Deserialize, Serialize};

use super::Lipschitz;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub satisfied: bool,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    /// `(Cε + α + β²(1+ε)) / (1 − α − Cε)`, the contraction factor of the
    /// squared weighted distance.
    pub ratio: Option<f64>,
}

/// Slack `(1 − α − Cε) − (Cε + α + β²(1+ε))`; positive iff `ε` is admissible.
pub fn contraction_slack(l: &Lipschitz, eps: f64) -> f64 {
    (1.0 - l.alpha - l.c * eps) - (l.c * eps + l.alpha + l.beta * l.beta * (1.0 + eps))
}

/// Checks `2α + β² < 1` and, when it holds, picks `ε ∈ (0, 1]` and derives
/// `δ`, `γ`. The admissible set is an interval `(0, ε*)`; its right end is
/// located by bisection and `ε` is taken at its midpoint (capped at 1).
pub fn check_contraction(l: &Lipschitz) -> ContractionReport {
    let Lipschitz { c, alpha, beta } = *l;
    let satisfied = 2.0 * alpha + beta * beta < 1.0;
    if !satisfied || c < 0.0 || alpha < 0.0 || beta < 0.0 {
        return ContractionReport { satisfied: false, epsilon: None, gamma: None, delta: None, ratio: None };
    }
    let edge = if contraction_slack(l, 1.0) > 0.0 {
        2.0
    } else {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if contraction_slack(l, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        lo
    };
    let eps = (0.5 * edge).min(1.0);
    let lower = c * eps + alpha + beta * beta * (1.0 + eps);
    let upper = 1.0 - alpha - c * eps;
    let num = c * (c + eps + (c + 1.0) / eps);
    let delta = if num == 0.0 { 0.0 } else { num / lower };
    let gamma = 1.0 / eps + delta * upper;
    ContractionReport {
        satisfied,
        epsilon: Some(eps),
        gamma: Some(gamma),
        delta: Some(delta),
        ratio: Some(lower / upper),
    }
}
