//! Problem data and the structural assumptions as checkable values.

mod contraction;
mod forms;
mod problem;
mod sigma;
mod validate;

pub use crate::discretize::SpatialDomain;
pub use contraction::{check_contraction, contraction_slack, ContractionReport};
pub use forms::{FormPoint, ScalarForm};
pub use problem::{Barrier, CoefficientSet, Dominator, Lipschitz, ObstacleSpec, SpdeProblem};
pub use sigma::{SigmaField, SigmaSpec};
pub use validate::{validate_problem, Assumption, Violation};
