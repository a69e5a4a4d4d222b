//! Numerical laboratory for obstacle problems of degenerate quasilinear
//! stochastic PDEs.
//!
//! * [`model`]: problem data, structural assumptions and their checks.
//! * [`symbolic`]: polynomial vector fields, Lie brackets, Hörmander order.
//! * [`discretize`]: grids, divergence-form and first-order operators,
//!   spectral fractional norms.
//! * [`solver`]: penalized semi-implicit stepping, deterministic obstacle
//!   solver, Picard iteration.
//! * [`analysis`]: Monte Carlo ensembles, Itô residuals, comparison,
//!   De Giorgi diagnostics, the Galerkin blow-up experiment.
//! * [`config`] and [`cli`]: JSON run configuration and experiment drivers.

pub mod symbolic;
pub mod discretize;
pub mod model;
pub mod solver;
pub mod analysis;
pub mod config;
pub mod cli;
