//! Box grids, sparse operators and spectral norms.

mod grid;
mod operators;
mod sparse;
mod spectral;

use thiserror::Error;

pub use grid::{Grid, SpatialDomain};
pub use operators::{
    assemble_divergence, assemble_first_order, assemble_mass, DiscreteOperator, OperatorKind, OperatorSet,
};
pub use sparse::{BandedCholesky, SparseMatrix};
pub use spectral::{fractional_norm, FractionalNorm, SineTransform, SpectralSymbol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("viscosity must be finite and >= 0, got {0}")]
    InvalidViscosity(f64),
    #[error("a = σσᵀ is not positive semidefinite at node {node} {coords:?} (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { node: usize, coords: Vec<f64>, min_eigenvalue: f64 },
    #[error("non-finite σ at node {node} {coords:?}")]
    NonFinite { node: usize, coords: Vec<f64> },
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("eta must lie in [0, 1], got {0}")]
    EtaOutOfRange(f64),
    #[error("triplet text: {0}")]
    TripletFormat(String),
}
