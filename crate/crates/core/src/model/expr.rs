use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::algebra::{CoeffRing, MultiPoly, Rationals, Ring};

/// Expression tree over exact rational constants and symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Const(BigRational),
    Sym(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Const(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    /// Symbols in order of first appearance (left to right).
    pub fn symbols(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Sym(s) => {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_symbols(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
        }
    }

    /// Replace symbols by constants.
    pub fn substitute(&self, values: &[(String, BigRational)]) -> Expr {
        match self {
            Expr::Sym(s) => match values.iter().find(|(n, _)| n == s) {
                Some((_, v)) => Expr::Const(v.clone()),
                None => self.clone(),
            },
            Expr::Const(_) => self.clone(),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(values))),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.substitute(values)), *e),
            Expr::Add(a, b) => Expr::Add(Box::new(a.substitute(values)), Box::new(b.substitute(values))),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.substitute(values)), Box::new(b.substitute(values))),
            Expr::Mul(a, b) => Expr::Mul(Box::new(a.substitute(values)), Box::new(b.substitute(values))),
            Expr::Div(a, b) => Expr::Div(Box::new(a.substitute(values)), Box::new(b.substitute(values))),
        }
    }

    /// Convert to a ratio of polynomials in `ring`, whose variable names must
    /// cover every symbol.
    pub fn to_rational(&self, ring: &Arc<Ring>) -> Result<RationalFunction, ConversionError> {
        match self {
            Expr::Const(c) => Ok(RationalFunction::poly(MultiPoly::constant(ring.clone(), Rationals, c.clone()))),
            Expr::Sym(s) => {
                let i = ring.index_of(s).ok_or_else(|| ConversionError::UnknownSymbol(s.clone()))?;
                Ok(RationalFunction::poly(MultiPoly::var(ring.clone(), Rationals, i)))
            }
            Expr::Neg(a) => Ok(a.to_rational(ring)?.neg()),
            Expr::Add(a, b) => Ok(a.to_rational(ring)?.add(&b.to_rational(ring)?, false)),
            Expr::Sub(a, b) => Ok(a.to_rational(ring)?.add(&b.to_rational(ring)?, true)),
            Expr::Mul(a, b) => Ok(a.to_rational(ring)?.mul(&b.to_rational(ring)?)),
            Expr::Div(a, b) => a.to_rational(ring)?.div(&b.to_rational(ring)?),
            Expr::Pow(a, e) => Ok(a.to_rational(ring)?.pow(*e)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.is_negative() || !c.is_integer() => 3,
            Expr::Const(_) | Expr::Sym(_) => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConversionError {
    #[error("unknown symbol \"{0}\"")]
    UnknownSymbol(String),
    #[error("denominator is identically zero")]
    ZeroDenominator,
}

/// `num / den` with `den` nonzero; a constant denominator is always folded
/// into the numerator so that polynomial inputs have `den == 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    pub num: MultiPoly<Rationals>,
    pub den: MultiPoly<Rationals>,
}

impl RationalFunction {
    pub fn poly(p: MultiPoly<Rationals>) -> Self {
        let den = MultiPoly::constant(p.ring().clone(), Rationals, BigRational::one());
        RationalFunction { num: p, den }
    }

    fn normalize(num: MultiPoly<Rationals>, den: MultiPoly<Rationals>) -> Self {
        if let Some(c) = den.constant_value() {
            let inv = Rationals.inv(&c).expect("nonzero constant denominator");
            return RationalFunction::poly(num.scale(&inv));
        }
        if num.is_zero() {
            return RationalFunction::poly(num);
        }
        // Keep the denominator's leading coefficient at 1.
        let lc = den.leading_coeff().cloned().expect("nonzero");
        let inv = Rationals.inv(&lc).expect("field");
        RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    fn neg(self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den }
    }

    fn add(&self, other: &Self, subtract: bool) -> Self {
        let rhs = if subtract { other.num.neg() } else { other.num.clone() };
        if self.den == other.den {
            return Self::normalize(&self.num + &rhs, self.den.clone());
        }
        let num = &(&self.num * &other.den) + &(&rhs * &self.den);
        Self::normalize(num, &self.den * &other.den)
    }

    fn mul(&self, other: &Self) -> Self {
        // Cancel syntactically equal numerator/denominator pairs.
        if self.den == other.num && !self.den.is_constant() {
            return Self::normalize(self.num.clone(), other.den.clone());
        }
        if other.den == self.num && !other.den.is_constant() {
            return Self::normalize(other.num.clone(), self.den.clone());
        }
        Self::normalize(&self.num * &other.num, &self.den * &other.den)
    }

    fn div(&self, other: &Self) -> Result<Self, ConversionError> {
        if other.num.is_zero() {
            return Err(ConversionError::ZeroDenominator);
        }
        let inv = RationalFunction { num: other.den.clone(), den: other.num.clone() };
        Ok(self.mul(&inv))
    }

    fn pow(&self, e: u32) -> Self {
        Self::normalize(self.num.pow(e), self.den.pow(e))
    }
}

/// Minimal-parenthesis printer whose output parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_integer() {
                    write!(f, "{}", c.numer())
                } else {
                    write!(f, "{}/{}", c.numer(), c.denom())
                }
            }
            Expr::Sym(s) => write!(f, "{s}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, a.precedence() < 4 || matches!(**a, Expr::Neg(_)))
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, prec) = match self {
                    Expr::Add(..) => (" + ", 1),
                    Expr::Sub(..) => (" - ", 1),
                    Expr::Mul(..) => ("*", 2),
                    _ => ("/", 2),
                };
                write_child(f, a, a.precedence() < prec)?;
                write!(f, "{op}")?;
                write_child(f, b, b.precedence() <= prec || b.precedence() == 3)
            }
            Expr::Pow(a, e) => {
                write_child(f, a, a.precedence() <= 4)?;
                write!(f, "^{e}")
            }
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

pub(crate) fn rational_is_zero(q: &BigRational) -> bool {
    q.is_zero()
}
