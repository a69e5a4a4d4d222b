//! Iterated Lie sets and the Hörmander-order search.
//!
//! `𝕃_0 = {L_1..L_n}`, `𝕃_{m+1} = 𝕃_m ∪ {[L_k, M] : M ∈ 𝕃_m}`. A level spans
//! when every coordinate field `∂_i` is a combination of its members with
//! polynomial coefficients. Membership is decided by exact rank tests on
//! the evaluation matrix at fixed rational sample points; any combination
//! found is then re-checked symbolically and kept as the witness.

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::field::{coefficient_prefix, lie_bracket, VectorField};
use super::poly::{fmt_rational, monomials_up_to, Polynomial};
use super::SymbolicError;

/// How a member of a Lie set was produced from the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BracketExpr {
    /// Generator `L_{k+1}`.
    Generator(usize),
    /// `[L_{k+1}, inner]`.
    Bracket(usize, Box<BracketExpr>),
}

impl BracketExpr {
    pub fn depth(&self) -> usize {
        match self {
            BracketExpr::Generator(_) => 0,
            BracketExpr::Bracket(_, inner) => 1 + inner.depth(),
        }
    }
}

impl fmt::Display for BracketExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketExpr::Generator(k) => write!(f, "L{}", k + 1),
            BracketExpr::Bracket(k, inner) => write!(f, "[L{},{}]", k + 1, inner),
        }
    }
}

/// The set `𝕃_level`, each member tagged with its bracket expression.
#[derive(Clone, Debug)]
pub struct LieGeneration {
    pub level: usize,
    pub fields: Vec<(VectorField, BracketExpr)>,
}

impl LieGeneration {
    pub fn base(generators: &[VectorField]) -> Self {
        let mut seen = HashSet::new();
        let mut fields = Vec::new();
        for (k, g) in generators.iter().enumerate() {
            if g.is_zero() || !seen.insert(g.normalized()) {
                continue;
            }
            fields.push((g.clone(), BracketExpr::Generator(k)));
        }
        Self { level: 0, fields }
    }

    /// Next level; members equal up to a scalar factor are stored once.
    pub fn next(&self, generators: &[VectorField]) -> Result<Self, SymbolicError> {
        let mut seen: HashSet<VectorField> = self.fields.iter().map(|(f, _)| f.normalized()).collect();
        let mut fields = self.fields.clone();
        for (member, expr) in &self.fields {
            for (k, gen) in generators.iter().enumerate() {
                let b = lie_bracket(gen, member)?;
                if b.is_zero() || !seen.insert(b.normalized()) {
                    continue;
                }
                fields.push((b, BracketExpr::Bracket(k, Box::new(expr.clone()))));
            }
        }
        Ok(Self { level: self.level + 1, fields })
    }
}

/// `∂_{coordinate+1} = Σ coefficient · expr`.
#[derive(Clone, Debug)]
pub struct Witness {
    pub coordinate: usize,
    pub combination: Vec<(Polynomial, BracketExpr)>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{} = ", self.coordinate + 1)?;
        for (idx, (c, e)) in self.combination.iter().enumerate() {
            if idx > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}{}", coefficient_prefix(c), e)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct HormanderResult {
    pub dim: usize,
    /// Smallest spanning level found, if any level up to `depth_cap` spans.
    pub n0: Option<usize>,
    /// `max(n0, floor(dim))`.
    pub n0_eff: Option<usize>,
    /// `2^(−n0_eff)`.
    pub eta: Option<BigRational>,
    pub witness: Vec<Witness>,
    pub depth_cap: usize,
    /// `|𝕃_m|` for every level built.
    pub level_sizes: Vec<usize>,
}

/// Serializable summary of a [`HormanderResult`].
#[derive(Clone, Debug, Serialize)]
pub struct HormanderReport {
    pub dim: usize,
    pub n0: Option<usize>,
    pub n0_eff: Option<usize>,
    pub eta: Option<String>,
    pub eta_value: Option<f64>,
    pub depth_cap: usize,
    pub level_sizes: Vec<usize>,
    pub witness: Vec<String>,
}

impl HormanderResult {
    pub fn report(&self) -> HormanderReport {
        HormanderReport {
            dim: self.dim,
            n0: self.n0,
            n0_eff: self.n0_eff,
            eta: self.eta.as_ref().map(fmt_rational),
            eta_value: self.eta.as_ref().and_then(|e| e.to_f64()),
            depth_cap: self.depth_cap,
            level_sizes: self.level_sizes.clone(),
            witness: self.witness.iter().map(|w| w.to_string()).collect(),
        }
    }
}

/// Lower bound on the Hörmander order needed for the fractional Sobolev
/// embedding: 2 in one dimension, 1 in two, 0 from three on.
pub fn ha_floor(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 1,
        _ => 0,
    }
}

/// `2^(−n)` as an exact rational.
pub fn eta_for(n: usize) -> BigRational {
    BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(2), n))
}

pub fn hormander_order(
    fields: &[VectorField],
    dim: usize,
    depth_cap: usize,
) -> Result<HormanderResult, SymbolicError> {
    if let Some(bad) = fields.iter().find(|f| f.dim() != dim) {
        return Err(SymbolicError::DimensionMismatch { expected: dim, found: bad.dim() });
    }
    let mut generation = LieGeneration::base(fields);
    let mut level_sizes = vec![generation.fields.len()];
    loop {
        if let Some(witness) = spanning_witness(&generation, dim) {
            let n0 = generation.level;
            let n0_eff = n0.max(ha_floor(dim));
            return Ok(HormanderResult {
                dim,
                n0: Some(n0),
                n0_eff: Some(n0_eff),
                eta: Some(eta_for(n0_eff)),
                witness,
                depth_cap,
                level_sizes,
            });
        }
        if generation.level >= depth_cap {
            break;
        }
        let next = generation.next(fields)?;
        let saturated = next.fields.len() == generation.fields.len();
        generation = next;
        level_sizes.push(generation.fields.len());
        if saturated {
            // no new members can appear at any later level
            while level_sizes.len() <= depth_cap {
                level_sizes.push(generation.fields.len());
            }
            break;
        }
    }
    Ok(HormanderResult { dim, n0: None, n0_eff: None, eta: None, witness: Vec::new(), depth_cap, level_sizes })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EtaExponent {
    pub eta: f64,
    pub alpha0: f64,
    #[serde(skip)]
    pub eta_exact: BigRational,
    #[serde(skip)]
    pub alpha0_exact: BigRational,
}

/// Regularity exponent `η = 2^(−n0_eff)` and the De Giorgi exponent
/// `α0 = (2ηk − d − 2η)/(dk)`, valid for integer `k > 1 + d/(2η)`.
pub fn eta_exponent(result: &HormanderResult, dim: usize, k: u32) -> Result<EtaExponent, SymbolicError> {
    let eta = result.eta.clone().ok_or(SymbolicError::NoHormanderOrder)?;
    let d = BigRational::from_integer(BigInt::from(dim));
    let kk = BigRational::from_integer(BigInt::from(k));
    let two = BigRational::from_integer(BigInt::from(2));
    let bound = BigRational::one() + &d / (&two * &eta);
    if kk <= bound {
        return Err(SymbolicError::IntegrabilityTooSmall { k, bound: bound.to_f64().unwrap_or(f64::NAN) });
    }
    let alpha0 = (&two * &eta * &kk - &d - &two * &eta) / (&d * &kk);
    debug_assert!(alpha0.is_positive());
    Ok(EtaExponent {
        eta: eta.to_f64().unwrap_or(f64::NAN),
        alpha0: alpha0.to_f64().unwrap_or(f64::NAN),
        eta_exact: eta,
        alpha0_exact: alpha0,
    })
}

/// Deterministic sample points in `(-2, 2)^dim` from Halton sequences in
/// bases 2, 3, 5, ... (point `s` uses index `s + 1`).
pub fn sample_points(dim: usize, count: usize) -> Vec<Vec<BigRational>> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let four = BigRational::from_integer(BigInt::from(4));
    let two = BigRational::from_integer(BigInt::from(2));
    (0..count)
        .map(|s| {
            (0..dim)
                .map(|j| {
                    let r = halton(s as u64 + 1, PRIMES[j]);
                    &r * &four - &two
                })
                .collect()
        })
        .collect()
}

fn halton(index: u64, base: u64) -> BigRational {
    let mut f = BigRational::one();
    let mut r = BigRational::zero();
    let mut i = index;
    let b = BigRational::from_integer(BigInt::from(base));
    while i > 0 {
        f = f / &b;
        r += &f * BigRational::from_integer(BigInt::from(i % base));
        i /= base;
    }
    r
}

fn spanning_witness(generation: &LieGeneration, dim: usize) -> Option<Vec<Witness>> {
    if generation.fields.is_empty() {
        return None;
    }
    let coeff_degree = generation.fields.iter().map(|(f, _)| f.degree()).max().unwrap_or(0);
    let coeff_monos = monomials_up_to(dim, coeff_degree);
    let support = monomials_up_to(dim, 2 * coeff_degree).len();
    let points = sample_points(dim, 2 * support + dim);

    let nfields = generation.fields.len();
    let ncols = nfields * coeff_monos.len();
    let mono_polys: Vec<Polynomial> =
        coeff_monos.iter().map(|e| Polynomial::monomial(e.clone(), BigRational::one())).collect();

    // rows: (point, component); columns: (field, coefficient monomial)
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(points.len() * dim);
    for p in &points {
        let mono_vals: Vec<BigRational> = mono_polys.iter().map(|m| m.eval(p)).collect();
        let field_vals: Vec<Vec<BigRational>> = generation
            .fields
            .iter()
            .map(|(f, _)| f.components().iter().map(|c| c.eval(p)).collect())
            .collect();
        for comp in 0..dim {
            let mut row = Vec::with_capacity(ncols + dim);
            for fv in &field_vals {
                for mv in &mono_vals {
                    row.push(mv * &fv[comp]);
                }
            }
            for target in 0..dim {
                row.push(if target == comp { BigRational::one() } else { BigRational::zero() });
            }
            rows.push(row);
        }
    }

    let solution = solve_multi_rhs(rows, ncols, dim)?;
    let mut witnesses = Vec::with_capacity(dim);
    for (target, coeffs) in solution.into_iter().enumerate() {
        let mut combination = Vec::new();
        let mut total = VectorField::zero(dim);
        for (fi, (field, expr)) in generation.fields.iter().enumerate() {
            let mut c = Polynomial::zero(dim);
            for (mi, m) in mono_polys.iter().enumerate() {
                let v = &coeffs[fi * coeff_monos.len() + mi];
                if !v.is_zero() {
                    c = &c + &m.scale(v);
                }
            }
            if c.is_zero() {
                continue;
            }
            total = total.add(&field.mul_poly(&c)).ok()?;
            combination.push((c, expr.clone()));
        }
        // symbolic certificate: the combination must be the coordinate field exactly
        if total != VectorField::coordinate(dim, target) {
            return None;
        }
        witnesses.push(Witness { coordinate: target, combination });
    }
    Some(witnesses)
}

/// Exact Gaussian elimination on `[A | B]` with `nrhs` right-hand sides.
/// Returns one particular solution per right-hand side (free variables set
/// to zero) when every system is consistent.
fn solve_multi_rhs(mut m: Vec<Vec<BigRational>>, ncols: usize, nrhs: usize) -> Option<Vec<Vec<BigRational>>> {
    let nrows = m.len();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = BigRational::one() / &m[r][c];
        for v in m[r].iter_mut().skip(c) {
            *v = &*v * &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !pv.is_zero() {
                    *v = &*v - &factor * pv;
                }
            }
        }
        pivots.push((r, c));
        r += 1;
    }
    // consistency: zero rows of A must have zero right-hand sides
    for row in &m[r..] {
        if row[ncols..ncols + nrhs].iter().any(|v| !v.is_zero()) {
            return None;
        }
    }
    let mut out = vec![vec![BigRational::zero(); ncols]; nrhs];
    for &(row, col) in &pivots {
        for (t, sol) in out.iter_mut().enumerate() {
            sol[col] = m[row][ncols + t].clone();
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::parse::parse_field_list;

    #[test]
    fn coordinates_span_at_level_zero() {
        let fields = parse_field_list("d1; d2; d3", 3).unwrap();
        let r = hormander_order(&fields, 3, 4).unwrap();
        assert_eq!(r.n0, Some(0));
        assert_eq!(r.n0_eff, Some(0));
        assert_eq!(r.eta, Some(BigRational::one()));
    }

    #[test]
    fn grushin_needs_one_bracket() {
        let fields = parse_field_list("d1; x1*d2", 2).unwrap();
        let r = hormander_order(&fields, 2, 4).unwrap();
        assert_eq!(r.n0, Some(1));
        assert_eq!(r.eta, Some(eta_for(1)));
        assert_eq!(r.witness[1].to_string(), "d2 = -1*[L2,L1]");
    }

    #[test]
    fn higher_step_grushin() {
        // ∂x, x²∂y: [∂x, x²∂y] = 2x∂y, [∂x, 2x∂y] = 2∂y
        let fields = parse_field_list("d1; x1^2*d2", 2).unwrap();
        let r = hormander_order(&fields, 2, 4).unwrap();
        assert_eq!(r.n0, Some(2));
        assert_eq!(r.eta, Some(eta_for(2)));
    }

    #[test]
    fn zero_field_never_spans() {
        let r = hormander_order(&[VectorField::zero(1)], 1, 5).unwrap();
        assert_eq!(r.n0, None);
        assert_eq!(r.eta, None);
        assert_eq!(r.level_sizes.len(), 6);
    }

    #[test]
    fn one_dimensional_floor_applies() {
        let fields = parse_field_list("d1", 1).unwrap();
        let r = hormander_order(&fields, 1, 3).unwrap();
        assert_eq!(r.n0, Some(0));
        assert_eq!(r.n0_eff, Some(2));
        assert_eq!(r.eta, Some(eta_for(2)));
    }

    #[test]
    fn depth_cap_reports_absent() {
        let fields = parse_field_list("d1; x1^3*d2", 2).unwrap();
        let r = hormander_order(&fields, 2, 2).unwrap();
        assert_eq!(r.n0, None);
        let r = hormander_order(&fields, 2, 3).unwrap();
        assert_eq!(r.n0, Some(3));
    }

    #[test]
    fn sample_points_are_distinct_per_coordinate() {
        let pts = sample_points(2, 40);
        let xs: HashSet<_> = pts.iter().map(|p| p[0].clone()).collect();
        assert_eq!(xs.len(), 40);
    }

    #[test]
    fn alpha0_examples() {
        let grushin = hormander_order(&parse_field_list("d1; x1*d2", 2).unwrap(), 2, 3).unwrap();
        let e = eta_exponent(&grushin, 2, 4).unwrap();
        assert_eq!(e.alpha0_exact, BigRational::new(1.into(), 8.into()));
        assert!(matches!(eta_exponent(&grushin, 2, 3), Err(SymbolicError::IntegrabilityTooSmall { .. })));

        let line = hormander_order(&parse_field_list("d1", 1).unwrap(), 1, 3).unwrap();
        let e = eta_exponent(&line, 1, 5).unwrap();
        assert_eq!(e.eta_exact, BigRational::new(1.into(), 4.into()));
        assert_eq!(e.alpha0_exact, BigRational::new(1.into(), 5.into()));
    }
}
