//! Parser for the vector-field expression grammar, e.g. `x1*d2 + 3*d1`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := number | 'x'k | 'd'k | 'x' | 'y' | 'z' | 'dx' | 'dy' | 'dz' | '(' expr ')'
//! ```
//!
//! `xk` is the k-th coordinate (1-based), `dk` the k-th coordinate derivative.
//! Numbers may be integers or decimals and are converted to exact
//! rationals. Division is only allowed by constants. After expansion every
//! term must contain exactly one `dk`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::field::VectorField;
use super::poly::Polynomial;
use super::SymbolicError;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(BigRational),
    Coord(usize),
    Deriv(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

/// Largest coordinate index accepted by the grammar.
const MAX_DIM: usize = 8;

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, SymbolicError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |pos: usize, msg: &str| SymbolicError::Parse { pos, message: msg.to_string() };
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Token::Plus)),
            '-' => out.push((start, Token::Minus)),
            '*' => out.push((start, Token::Star)),
            '/' => out.push((start, Token::Slash)),
            '^' => out.push((start, Token::Caret)),
            '(' => out.push((start, Token::LParen)),
            ')' => out.push((start, Token::RParen)),
            '0'..='9' | '.' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
                    j += 1;
                }
                let text = &src[i..j];
                out.push((start, Token::Num(parse_decimal(text).ok_or_else(|| err(start, "malformed number"))?)));
                i = j;
                continue;
            }
            'x' | 'y' | 'z' | 'd' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_alphanumeric() {
                    j += 1;
                }
                let word = &src[i..j];
                let tok = match word {
                    "x" => Token::Coord(0),
                    "y" => Token::Coord(1),
                    "z" => Token::Coord(2),
                    "dx" => Token::Deriv(0),
                    "dy" => Token::Deriv(1),
                    "dz" => Token::Deriv(2),
                    _ => {
                        let (head, digits) = word.split_at(1);
                        let k: usize = digits.parse().map_err(|_| err(start, "unknown identifier"))?;
                        if k == 0 || k > MAX_DIM {
                            return Err(err(start, "coordinate index out of range"));
                        }
                        match head {
                            "x" => Token::Coord(k - 1),
                            "d" => Token::Deriv(k - 1),
                            _ => return Err(err(start, "unknown identifier")),
                        }
                    }
                };
                out.push((start, tok));
                i = j;
                continue;
            }
            _ => return Err(err(start, "unexpected character")),
        }
        i += 1;
    }
    Ok(out)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let mut parts = text.splitn(2, '.');
    let int_part = parts.next()?;
    let frac_part = parts.next().unwrap_or("");
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.contains('.') {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Recursive-descent parser over polynomials in `2 * MAX_DIM` variables:
/// the first `MAX_DIM` are coordinates, the rest are derivative symbols.
struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

const NV: usize = 2 * MAX_DIM;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, SymbolicError> {
        Err(SymbolicError::Parse { pos: self.here(), message: msg.to_string() })
    }

    fn expr(&mut self) -> Result<Polynomial, SymbolicError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, SymbolicError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    let divisor = self.unary()?;
                    let c = constant_value(&divisor).ok_or_else(|| SymbolicError::Parse {
                        pos: self.here(),
                        message: "division by a non-constant".into(),
                    })?;
                    if c.is_zero() {
                        return self.fail("division by zero");
                    }
                    acc = acc.scale(&(BigRational::one() / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, SymbolicError> {
        if let Some(Token::Minus) = self.peek() {
            self.pos += 1;
            return Ok(-&self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, SymbolicError> {
        let base = self.atom()?;
        if let Some(Token::Caret) = self.peek() {
            self.pos += 1;
            let k = match self.tokens.get(self.pos) {
                Some((_, Token::Num(n))) if n.is_integer() => n.to_integer(),
                _ => return self.fail("exponent must be a non-negative integer"),
            };
            self.pos += 1;
            let k: u32 = k.try_into().map_err(|_| SymbolicError::Parse {
                pos: self.here(),
                message: "exponent out of range".into(),
            })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, SymbolicError> {
        let tok = match self.peek() {
            Some(t) => t.clone(),
            None => return self.fail("unexpected end of input"),
        };
        self.pos += 1;
        match tok {
            Token::Num(n) => Ok(Polynomial::constant(NV, n)),
            Token::Coord(i) => Ok(Polynomial::var(NV, i)),
            Token::Deriv(i) => Ok(Polynomial::var(NV, MAX_DIM + i)),
            Token::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => self.fail("expected ')'"),
                }
            }
            _ => {
                self.pos -= 1;
                self.fail("expected a number, coordinate, derivative or '('")
            }
        }
    }
}

fn constant_value(p: &Polynomial) -> Option<BigRational> {
    if p.is_zero() {
        return Some(BigRational::zero());
    }
    if p.num_terms() == 1 {
        let (e, c) = p.terms().next().unwrap();
        if e.iter().all(|&k| k == 0) {
            return Some(c.clone());
        }
    }
    None
}

/// Parses one vector field in dimension `dim`.
pub fn parse_vector_field(src: &str, dim: usize) -> Result<VectorField, SymbolicError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(SymbolicError::Parse { pos: 0, message: format!("dimension {dim} unsupported") });
    }
    let tokens = tokenize(src)?;
    let mut parser = Parser { tokens, pos: 0, end: src.len() };
    let poly = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return parser.fail("trailing input");
    }
    let mut comps = vec![Polynomial::zero(NV); dim];
    for (e, c) in poly.terms() {
        let d_degree: u32 = e[MAX_DIM..].iter().sum();
        if d_degree != 1 {
            return Err(SymbolicError::NotFirstOrder { expr: src.to_string() });
        }
        let k = e[MAX_DIM..].iter().position(|&v| v == 1).unwrap();
        if k >= dim || e[dim..MAX_DIM].iter().any(|&v| v > 0) {
            return Err(SymbolicError::Parse {
                pos: 0,
                message: format!("index exceeds dimension {dim} in '{src}'"),
            });
        }
        let mut coord = e.clone();
        coord[MAX_DIM + k] = 0;
        comps[k] = &comps[k] + &Polynomial::monomial(coord, c.clone());
    }
    VectorField::new(comps.into_iter().map(|p| p.restrict_vars(dim)).collect())
}

/// Parses a `;`-separated list of vector fields.
pub fn parse_field_list(src: &str, dim: usize) -> Result<Vec<VectorField>, SymbolicError> {
    src.split(';').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_vector_field(s, dim)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::poly::rational;

    #[test]
    fn parses_the_documented_example() {
        let f = parse_vector_field("x1*d2 + 3*d1", 2).unwrap();
        assert_eq!(f.component(0), &Polynomial::constant(2, rational(3, 1)));
        assert_eq!(f.component(1), &Polynomial::var(2, 0));
    }

    #[test]
    fn distributes_parenthesised_coefficients() {
        let f = parse_vector_field("(x1 + 1/2)*(d1 - d2)", 2).unwrap();
        let c = &Polynomial::var(2, 0) + &Polynomial::constant(2, rational(1, 2));
        assert_eq!(f.component(0), &c);
        assert_eq!(f.component(1), &-&c);
    }

    #[test]
    fn decimals_are_exact() {
        let f = parse_vector_field("0.25*x^2*dx", 1).unwrap();
        assert_eq!(f.component(0), &Polynomial::var(1, 0).pow(2).scale(&rational(1, 4)));
    }

    #[test]
    fn rejects_non_first_order_terms() {
        assert!(matches!(parse_vector_field("x1 + d1", 1), Err(SymbolicError::NotFirstOrder { .. })));
        assert!(matches!(parse_vector_field("d1*d1", 1), Err(SymbolicError::NotFirstOrder { .. })));
    }

    #[test]
    fn rejects_out_of_range_index() {
        assert!(parse_vector_field("d3", 2).is_err());
        assert!(parse_vector_field("x2*d1", 1).is_err());
    }

    #[test]
    fn reports_position_of_garbage() {
        match parse_vector_field("d1 + $", 1) {
            Err(SymbolicError::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn display_output_parses_back() {
        let src = "x1^2*d1 - 2/3*x2*d2";
        let f = parse_vector_field(src, 2).unwrap();
        let again = parse_vector_field(&f.to_string(), 2).unwrap();
        assert_eq!(f, again);
    }

    #[test]
    fn field_lists_split_on_semicolons() {
        let fields = parse_field_list("d1; x1*d2;", 2).unwrap();
        assert_eq!(fields.len(), 2);
    }
}
