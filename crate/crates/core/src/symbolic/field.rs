//! First-order differential operators `X = Σ X_i ∂_i` with polynomial
//! coefficients, and their Lie bracket.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::{fmt_rational, Polynomial};
use super::SymbolicError;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorField {
    components: Vec<Polynomial>,
}

impl VectorField {
    pub fn new(components: Vec<Polynomial>) -> Result<Self, SymbolicError> {
        let dim = components.len();
        if dim == 0 {
            return Err(SymbolicError::EmptyField);
        }
        if let Some(bad) = components.iter().find(|p| p.nvars() != dim) {
            return Err(SymbolicError::DimensionMismatch { expected: dim, found: bad.nvars() });
        }
        Ok(Self { components })
    }

    pub fn zero(dim: usize) -> Self {
        Self { components: vec![Polynomial::zero(dim); dim] }
    }

    /// The coordinate field `∂_{i+1}`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.components[i] = Polynomial::one(dim);
        f
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Polynomial {
        &self.components[i]
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Applies the field as a derivation to a polynomial: `X p = Σ X_i ∂_i p`.
    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero(self.dim());
        for (i, xi) in self.components.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            acc = &acc + &(xi * &p.derivative(i));
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Result<Self, SymbolicError> {
        self.check_dim(other)?;
        Ok(Self {
            components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self { components: self.components.iter().map(|p| p.scale(c)).collect() }
    }

    pub fn mul_poly(&self, p: &Polynomial) -> Self {
        Self { components: self.components.iter().map(|q| q * p).collect() }
    }

    /// Representative of the line spanned by this field: scaled so the
    /// leading coefficient of the first nonzero component is one.
    pub fn normalized(&self) -> Self {
        match self.components.iter().find_map(|p| p.leading_coefficient()) {
            Some(c) => self.scale(&(BigRational::one() / c)),
            None => self.clone(),
        }
    }

    pub fn eval_f64(&self, point: &[f64]) -> Vec<f64> {
        self.components.iter().map(|p| p.eval_f64(point)).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<(), SymbolicError> {
        if self.dim() != other.dim() {
            return Err(SymbolicError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// `[X, Y] = XY − YX`; component j is `Σ_i (X_i ∂_i Y_j − Y_i ∂_i X_j)`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, SymbolicError> {
    x.check_dim(y)?;
    let components = (0..x.dim())
        .map(|j| &x.apply(y.component(j)) - &y.apply(x.component(j)))
        .collect();
    Ok(VectorField { components })
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = Polynomial::default_names(self.dim());
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (i, p) in self.components.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let d = format!("d{}", i + 1);
            if p.num_terms() == 1 {
                let (e, c) = p.terms().next().unwrap();
                let neg = c.is_negative();
                let mono = Polynomial::monomial(e.clone(), c.abs()).fmt_with(&names);
                let body = if mono == "1" { d } else { format!("{mono}*{d}") };
                parts.push((neg, body));
            } else {
                parts.push((false, format!("({})*{d}", p.fmt_with(&names))));
            }
        }
        if parts.is_empty() {
            return f.write_str("0");
        }
        for (idx, (neg, body)) in parts.iter().enumerate() {
            match (idx, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

/// Formats a polynomial coefficient in front of another expression.
pub(crate) fn coefficient_prefix(p: &Polynomial) -> String {
    if p.is_one() {
        return String::new();
    }
    if p.num_terms() == 1 {
        let (e, c) = p.terms().next().unwrap();
        if e.iter().all(|&k| k == 0) {
            return format!("{}*", fmt_rational(c));
        }
    }
    format!("({p})*")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rational;

    fn field(c: Vec<Polynomial>) -> VectorField {
        VectorField::new(c).unwrap()
    }

    #[test]
    fn self_bracket_vanishes() {
        let x = Polynomial::var(2, 0);
        let f = field(vec![&x * &x, Polynomial::var(2, 1)]);
        assert!(lie_bracket(&f, &f).unwrap().is_zero());
    }

    #[test]
    fn grushin_bracket_gives_dy() {
        let dx = VectorField::coordinate(2, 0);
        let x_dy = field(vec![Polynomial::zero(2), Polynomial::var(2, 0)]);
        assert_eq!(lie_bracket(&dx, &x_dy).unwrap(), VectorField::coordinate(2, 1));
    }

    #[test]
    fn rotation_pair_bracket() {
        // [x ∂y, y ∂x] = x ∂x − y ∂y
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let a = field(vec![Polynomial::zero(2), x.clone()]);
        let b = field(vec![y.clone(), Polynomial::zero(2)]);
        let expected = field(vec![x, -&y]);
        assert_eq!(lie_bracket(&a, &b).unwrap(), expected);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = VectorField::coordinate(1, 0);
        let b = VectorField::coordinate(2, 0);
        assert!(matches!(lie_bracket(&a, &b), Err(SymbolicError::DimensionMismatch { .. })));
    }

    #[test]
    fn display_round_trips_simple_forms() {
        let x = Polynomial::var(2, 0);
        let f = field(vec![Polynomial::constant(2, rational(3, 1)), x]);
        assert_eq!(f.to_string(), "3*d1 + x1*d2");
        assert_eq!(VectorField::zero(3).to_string(), "0");
    }
}
