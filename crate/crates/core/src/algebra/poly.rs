//! Sparse distributed multivariate polynomials.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::field::CoeffRing;
use super::monomial::{Exp, Monomial, MonomialOrder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("polynomials live in different rings")]
    RingMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("cannot parse polynomial `{0}`")]
    Parse(String),
}

/// An ordered list of variable names together with the monomial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ring {
    names: Vec<String>,
    order: MonomialOrder,
}

impl Ring {
    pub fn new(names: Vec<String>, order: MonomialOrder) -> Arc<Ring> {
        if let Some(w) = order.weights() {
            assert_eq!(w.len(), names.len(), "one weight per variable");
        }
        Arc::new(Ring { names, order })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn with_order(&self, order: MonomialOrder) -> Arc<Ring> {
        Ring::new(self.names.clone(), order)
    }
}

/// A polynomial: terms sorted strictly descending under the ring's order,
/// no zero coefficients stored.
#[derive(Clone, Debug)]
pub struct MultiPoly<R: CoeffRing> {
    ring: Arc<Ring>,
    coeffs: R,
    terms: Vec<(Monomial, R::Elem)>,
}

impl<R: CoeffRing> PartialEq for MultiPoly<R> {
    fn eq(&self, other: &Self) -> bool {
        same_ring(&self.ring, &other.ring) && self.terms == other.terms
    }
}

fn same_ring(a: &Arc<Ring>, b: &Arc<Ring>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl<R: CoeffRing> MultiPoly<R> {
    pub fn zero(ring: Arc<Ring>, coeffs: R) -> Self {
        MultiPoly { ring, coeffs, terms: Vec::new() }
    }

    pub fn constant(ring: Arc<Ring>, coeffs: R, c: R::Elem) -> Self {
        let n = ring.nvars();
        Self::from_terms(ring, coeffs, vec![(Monomial::one(n), c)])
    }

    pub fn var(ring: Arc<Ring>, coeffs: R, index: usize) -> Self {
        let n = ring.nvars();
        let one = coeffs.one();
        Self::from_terms(ring, coeffs, vec![(Monomial::var(n, index), one)])
    }

    /// Build from arbitrary terms: like monomials are combined, zeros dropped.
    pub fn from_terms(ring: Arc<Ring>, coeffs: R, terms: Vec<(Monomial, R::Elem)>) -> Self {
        let mut acc: HashMap<Monomial, R::Elem> = HashMap::with_capacity(terms.len());
        for (m, c) in terms {
            debug_assert_eq!(m.nvars(), ring.nvars());
            match acc.get_mut(&m) {
                Some(v) => *v = coeffs.add(v, &c),
                None => {
                    acc.insert(m, c);
                }
            }
        }
        let mut terms: Vec<_> = acc.into_iter().filter(|(_, c)| !coeffs.is_zero(c)).collect();
        let order = ring.order().clone();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        MultiPoly { ring, coeffs, terms }
    }

    /// Trusted constructor: `terms` already sorted descending with no zeros.
    pub(crate) fn from_sorted_terms(ring: Arc<Ring>, coeffs: R, terms: Vec<(Monomial, R::Elem)>) -> Self {
        debug_assert!(terms.windows(2).all(|w| ring.order().cmp(&w[0].0, &w[1].0).is_gt()));
        MultiPoly { ring, coeffs, terms }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn coeffs(&self) -> &R {
        &self.coeffs
    }

    pub fn terms(&self) -> &[(Monomial, R::Elem)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, R::Elem)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.is_one())
    }

    /// The constant value if the polynomial is constant (zero included).
    pub fn constant_value(&self) -> Option<R::Elem> {
        match self.terms.as_slice() {
            [] => Some(self.coeffs.zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn leading_term(&self) -> Option<&(Monomial, R::Elem)> {
        self.terms.first()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.first().map(|t| &t.0)
    }

    pub fn leading_coeff(&self) -> Option<&R::Elem> {
        self.terms.first().map(|t| &t.1)
    }

    /// Maximum over terms of the sum of exponents; `-1` for the zero polynomial.
    pub fn total_degree(&self) -> i64 {
        self.terms.iter().map(|(m, _)| m.degree() as i64).max().unwrap_or(-1)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.iter().map(|(m, _)| m.exps()[var] as u32).max().unwrap_or(0)
    }

    /// Variables occurring in at least one term.
    pub fn variables(&self) -> Vec<usize> {
        let n = self.ring.nvars();
        let mut seen = vec![false; n];
        for (m, _) in &self.terms {
            for (i, _) in m.support() {
                seen[i] = true;
            }
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    fn check(&self, other: &Self) -> Result<(), AlgebraError> {
        if same_ring(&self.ring, &other.ring) && self.coeffs == other.coeffs {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(self.merge(other, false))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        Ok(self.merge(other, true))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check(other)?;
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                terms.push((ma.mul(mb), self.coeffs.mul(ca, cb)));
            }
        }
        Ok(Self::from_terms(self.ring.clone(), self.coeffs.clone(), terms))
    }

    fn merge(&self, other: &Self, subtract: bool) -> Self {
        let order = self.ring.order();
        let r = &self.coeffs;
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ma, ca) = &self.terms[i];
            let (mb, cb) = &other.terms[j];
            match order.cmp(ma, mb) {
                std::cmp::Ordering::Greater => {
                    out.push((ma.clone(), ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Less => {
                    out.push((mb.clone(), if subtract { r.neg(cb) } else { cb.clone() }));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = if subtract { r.sub(ca, cb) } else { r.add(ca, cb) };
                    if !r.is_zero(&c) {
                        out.push((ma.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        for (mb, cb) in &other.terms[j..] {
            out.push((mb.clone(), if subtract { r.neg(cb) } else { cb.clone() }));
        }
        Self::from_sorted_terms(self.ring.clone(), self.coeffs.clone(), out)
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), self.coeffs.neg(c))).collect();
        Self::from_sorted_terms(self.ring.clone(), self.coeffs.clone(), terms)
    }

    pub fn scale(&self, c: &R::Elem) -> Self {
        if self.coeffs.is_zero(c) {
            return Self::zero(self.ring.clone(), self.coeffs.clone());
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, a)| (m.clone(), self.coeffs.mul(a, c)))
            .filter(|(_, a)| !self.coeffs.is_zero(a))
            .collect();
        Self::from_sorted_terms(self.ring.clone(), self.coeffs.clone(), terms)
    }

    /// Multiply by a monomial and a scalar.
    pub fn mul_term(&self, m: &Monomial, c: &R::Elem) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(mm, a)| (mm.mul(m), self.coeffs.mul(a, c)))
            .filter(|(_, a)| !self.coeffs.is_zero(a))
            .collect();
        Self::from_sorted_terms(self.ring.clone(), self.coeffs.clone(), terms)
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut acc = Self::constant(self.ring.clone(), self.coeffs.clone(), self.coeffs.one());
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative with respect to variable `var`.
    pub fn partial_derivative(&self, var: usize) -> Self {
        let r = &self.coeffs;
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.exps()[var] > 0)
            .map(|(m, c)| {
                let e = m.exps()[var];
                let mut m2 = m.clone();
                m2.exps_mut()[var] = e - 1;
                (m2, r.mul(c, &r.from_i64(e as i64)))
            })
            .collect();
        Self::from_terms(self.ring.clone(), self.coeffs.clone(), terms)
    }

    pub fn eval(&self, point: &[R::Elem]) -> R::Elem {
        let r = &self.coeffs;
        let mut acc = r.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.support() {
                for _ in 0..e {
                    t = r.mul(&t, &point[i]);
                }
            }
            acc = r.add(&acc, &t);
        }
        acc
    }

    /// Replace variable `var` by the constant `value` (the variable stays in the ring).
    pub fn substitute(&self, var: usize, value: &R::Elem) -> Self {
        let r = &self.coeffs;
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut m2 = m.clone();
                let e = m2.exps()[var];
                m2.exps_mut()[var] = 0;
                let mut t = c.clone();
                for _ in 0..e {
                    t = r.mul(&t, value);
                }
                (m2, t)
            })
            .collect();
        Self::from_terms(self.ring.clone(), self.coeffs.clone(), terms)
    }

    /// Re-embed into `target`, sending variable `i` to `map[i]` (which must be
    /// `Some` for every variable that occurs).
    pub fn remap(&self, target: &Arc<Ring>, map: &[Option<usize>]) -> Self {
        let n = target.nvars();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut e = vec![0; n];
                for (i, x) in m.support() {
                    let j = map[i].expect("variable is mapped into target ring");
                    e[j] += x;
                }
                (Monomial::from_exps(e), c.clone())
            })
            .collect();
        Self::from_terms(target.clone(), self.coeffs.clone(), terms)
    }

    /// Apply a ring homomorphism on coefficients.
    pub fn map_coeffs<S: CoeffRing>(&self, target: S, f: impl Fn(&R::Elem) -> S::Elem) -> MultiPoly<S> {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), f(c))).collect();
        MultiPoly::from_terms(self.ring.clone(), target, terms)
    }

    /// Same polynomial, re-sorted under a different order on the same variables.
    pub fn with_ring(&self, ring: Arc<Ring>) -> Self {
        assert_eq!(ring.nvars(), self.ring.nvars());
        let mut terms = self.terms.clone();
        let order = ring.order().clone();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        MultiPoly { ring, coeffs: self.coeffs.clone(), terms }
    }

    /// Divide by the leading coefficient (fields only).
    pub fn monic(&self) -> Self {
        match self.leading_coeff().and_then(|c| self.coeffs.inv(c)) {
            Some(inv) => self.scale(&inv),
            None => self.clone(),
        }
    }
}

macro_rules! impl_op {
    ($tr:ident, $f:ident, $checked:ident) => {
        impl<'a, R: CoeffRing> std::ops::$tr<&'a MultiPoly<R>> for &'a MultiPoly<R> {
            type Output = MultiPoly<R>;
            fn $f(self, rhs: &'a MultiPoly<R>) -> MultiPoly<R> {
                self.$checked(rhs).expect("operands share a ring")
            }
        }
    };
}
impl_op!(Add, add, checked_add);
impl_op!(Sub, sub, checked_sub);
impl_op!(Mul, mul, checked_mul);

/// Canonical text: terms in descending order, explicit `*` and `^`.
impl<R: CoeffRing> fmt::Display for MultiPoly<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let r = &self.coeffs;
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = r.is_negative(c);
            let shown = if negative { r.neg(c) } else { c.clone() };
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut first = true;
            if !r.is_one(&shown) || m.is_one() {
                r.fmt_elem(&shown, f)?;
                first = false;
            }
            for (i, e) in m.support() {
                if !first {
                    write!(f, "*")?;
                }
                first = false;
                write!(f, "{}", self.ring.names()[i])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}


/// Parse the canonical text form (integer coefficients, `*`, `^`, `+`, `-`).
pub fn parse_poly<R: CoeffRing>(ring: &Arc<Ring>, coeffs: &R, text: &str) -> Result<MultiPoly<R>, AlgebraError> {
    let bad = || AlgebraError::Parse(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(bad());
    }
    let n = ring.nvars();
    let mut terms = Vec::new();
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut negative = false;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            negative = bytes[i] == b'-';
            i += 1;
        } else if i > 0 {
            return Err(bad());
        }
        let end = (i..bytes.len()).find(|&j| bytes[j] == b'+' || (bytes[j] == b'-' && j > i && bytes[j - 1] != b'^')).unwrap_or(bytes.len());
        let term = &s[i..end];
        if term.is_empty() {
            return Err(bad());
        }
        let mut c = coeffs.one();
        let mut m = Monomial::one(n);
        for factor in term.split('*') {
            if factor.is_empty() {
                return Err(bad());
            }
            if factor.bytes().all(|b| b.is_ascii_digit()) {
                let v: num_bigint::BigInt = factor.parse().map_err(|_| bad())?;
                c = coeffs.mul(&c, &coeffs.from_bigint(&v));
                continue;
            }
            let (name, e) = match factor.split_once('^') {
                Some((v, e)) => (v, e.parse::<Exp>().map_err(|_| bad())?),
                None => (factor, 1),
            };
            let idx = ring.index_of(name).ok_or_else(|| AlgebraError::UnknownVariable(name.to_string()))?;
            m.exps_mut()[idx] += e;
        }
        if negative {
            c = coeffs.neg(&c);
        }
        terms.push((m, c));
        i = end;
    }
    Ok(MultiPoly::from_terms(ring.clone(), coeffs.clone(), terms))
}
