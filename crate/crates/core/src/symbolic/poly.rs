//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exponent vector of a monomial, one entry per variable.
pub type Exponents = Vec<u32>;

/// A polynomial in `nvars` variables. Terms are kept sorted by exponent
/// vector with no zero coefficients, so structural equality is polynomial
/// equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Exponents, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    /// The coordinate polynomial `x_{i+1}`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range for {nvars} variables");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    pub fn monomial(exponents: Exponents, c: BigRational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(e, c)| e.iter().all(|&k| k == 0) && c.is_one())
                .unwrap_or(false)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum::<u32>()).max().unwrap_or(0)
    }

    /// Coefficient of the leading (largest exponent vector) term.
    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.iter().next_back().map(|(_, c)| c)
    }

    fn add_term(&mut self, e: Exponents, c: BigRational) {
        debug_assert_eq!(e.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Partial derivative with respect to variable `i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            let k = e2[i];
            e2[i] -= 1;
            out.add_term(e2, c * BigRational::from_integer(BigInt::from(k)));
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut term = c.to_f64().unwrap_or(f64::NAN);
                for (x, &k) in point.iter().zip(e) {
                    term *= x.powi(k as i32);
                }
                term
            })
            .sum()
    }

    /// Drops the trailing variables, keeping the first `nvars`. Panics if a
    /// dropped variable actually occurs.
    pub fn restrict_vars(&self, nvars: usize) -> Self {
        let mut out = Self::zero(nvars);
        for (e, c) in &self.terms {
            assert!(e[nvars..].iter().all(|&k| k == 0), "restricting away a used variable");
            out.add_term(e[..nvars].to_vec(), c.clone());
        }
        out
    }

    /// Formats with variables named `names[i]`.
    pub fn fmt_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        // highest exponent vector first
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&k| k == 0);
            if !abs.is_one() || is_const {
                factors.push(fmt_rational(&abs));
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(names[i].clone()),
                    _ => factors.push(format!("{}^{}", names[i], k)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    pub fn default_names(nvars: usize) -> Vec<String> {
        (1..=nvars).map(|i| format!("x{i}")).collect()
    }
}

pub fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_with(&Self::default_names(self.nvars)))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = Polynomial::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Exponents = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-BigRational::one())
    }
}

/// All exponent vectors in `nvars` variables with total degree `<= degree`,
/// in graded order.
pub fn monomials_up_to(nvars: usize, degree: u32) -> Vec<Exponents> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut current = vec![0u32; nvars];
        push_compositions(&mut out, &mut current, 0, total);
    }
    out
}

fn push_compositions(out: &mut Vec<Exponents>, current: &mut Exponents, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        push_compositions(out, current, pos + 1, remaining - k);
    }
    current[pos] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Polynomial {
        Polynomial::var(2, i)
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = &x(0) + &x(1);
        let q = &p - &x(1);
        assert_eq!(q, x(0));
        assert!((&q - &x(0)).is_zero());
    }

    #[test]
    fn product_rule_on_derivative() {
        let p = &x(0) * &x(1);
        let q = &p * &x(0);
        assert_eq!(q.derivative(0), (&p * &Polynomial::constant(2, rational(2, 1))));
        assert_eq!(q.degree(), 3);
    }

    #[test]
    fn monomial_count_matches_binomial() {
        assert_eq!(monomials_up_to(2, 2).len(), 6);
        assert_eq!(monomials_up_to(3, 1).len(), 4);
        assert_eq!(monomials_up_to(1, 4).len(), 5);
    }

    #[test]
    fn display_is_readable() {
        let p = &(&x(0).pow(2) * &x(1)).scale(&rational(3, 1)) - &Polynomial::constant(2, rational(1, 2));
        assert_eq!(p.to_string(), "3*x1^2*x2 - 1/2");
    }

    #[test]
    fn eval_matches_f64_eval() {
        let p = &(&x(0).pow(3) - &x(1)) + &Polynomial::constant(2, rational(1, 3));
        let exact = p.eval(&[rational(1, 2), rational(-2, 1)]);
        let approx = p.eval_f64(&[0.5, -2.0]);
        assert!((exact.to_f64().unwrap() - approx).abs() < 1e-14);
    }
}
