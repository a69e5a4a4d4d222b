//! Polynomial vector fields, Lie brackets and the Hörmander-order search.

mod field;
mod hormander;
mod parse;
mod poly;

pub use field::{lie_bracket, VectorField};
pub use hormander::{
    eta_exponent, eta_for, ha_floor, hormander_order, sample_points, BracketExpr, EtaExponent,
    HormanderReport, HormanderResult, LieGeneration, Witness,
};
pub use parse::{parse_field_list, parse_vector_field};
pub use poly::{monomials_up_to, rational, Exponents, Polynomial};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector field needs at least one component")]
    EmptyField,
    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("'{expr}' is not a first-order operator (every term needs exactly one d_k)")]
    NotFirstOrder { expr: String },
    #[error("no Hörmander order found within the depth cap")]
    NoHormanderOrder,
    #[error("integrability exponent k = {k} must exceed 1 + d/(2η) = {bound}")]
    IntegrabilityTooSmall { k: u32, bound: f64 },
}
