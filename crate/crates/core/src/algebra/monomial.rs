//! Dense exponent vectors and the (weighted) degree-reverse-lexicographic orders.

use std::cmp::Ordering;
use std::sync::Arc;

pub type Exp = u16;

/// An exponent vector whose length equals the number of ring variables.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct Monomial(Box<[Exp]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn from_exps(exps: Vec<Exp>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e.into_boxed_slice())
    }

    #[inline]
    pub fn exps(&self) -> &[Exp] {
        &self.0
    }

    #[inline]
    pub fn exps_mut(&mut self) -> &mut [Exp] {
        &mut self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    #[inline]
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `other / self`, if `self` divides `other`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        Some(Monomial(other.0.iter().zip(self.0.iter()).map(|(b, a)| b - a).collect()))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(other.0.iter()).map(|(a, b)| *a.max(b)).collect())
    }

    /// No variable occurs in both monomials.
    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of variables with positive exponent.
    pub fn support(&self) -> impl Iterator<Item = (usize, Exp)> + '_ {
        self.0.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, &e)| (i, e))
    }
}

/// Monomial order. Weighted degrevlex compares the weighted degree first and
/// falls back to reverse lexicographic comparison; plain degrevlex is the
/// all-ones weight vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MonomialOrder {
    DegRevLex,
    WeightedDegRevLex(Arc<[u32]>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("monomial weights must be strictly positive (variable {0} has weight 0)")]
    NonPositiveWeight(usize),
}

impl MonomialOrder {
    pub fn weighted(weights: Vec<u32>) -> Result<Self, OrderError> {
        if let Some(i) = weights.iter().position(|&w| w == 0) {
            return Err(OrderError::NonPositiveWeight(i));
        }
        if weights.iter().all(|&w| w == 1) {
            return Ok(MonomialOrder::DegRevLex);
        }
        Ok(MonomialOrder::WeightedDegRevLex(weights.into()))
    }

    pub fn weights(&self) -> Option<&[u32]> {
        match self {
            MonomialOrder::DegRevLex => None,
            MonomialOrder::WeightedDegRevLex(w) => Some(w),
        }
    }

    #[inline]
    pub fn weighted_degree(&self, m: &Monomial) -> u64 {
        match self {
            MonomialOrder::DegRevLex => m.degree() as u64,
            MonomialOrder::WeightedDegRevLex(w) => m
                .exps()
                .iter()
                .zip(w.iter())
                .map(|(&e, &w)| e as u64 * w as u64)
                .sum(),
        }
    }

    #[inline]
    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self.weighted_degree(a).cmp(&self.weighted_degree(b)) {
            Ordering::Equal => revlex(a.exps(), b.exps()),
            o => o,
        }
    }

    /// Restrict the order to the variables kept by `keep` (in order).
    pub fn restrict(&self, keep: &[usize]) -> MonomialOrder {
        match self {
            MonomialOrder::DegRevLex => MonomialOrder::DegRevLex,
            MonomialOrder::WeightedDegRevLex(w) => {
                MonomialOrder::weighted(keep.iter().map(|&i| w[i]).collect())
                    .expect("restricted weights stay positive")
            }
        }
    }
}

/// Reverse lexicographic tie-break: the monomial with the smaller exponent in
/// the last differing variable is the larger one.
#[inline]
fn revlex(a: &[Exp], b: &[Exp]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()).rev() {
        if x != y {
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(e: &[Exp]) -> Monomial {
        Monomial::from_exps(e.to_vec())
    }

    #[test]
    fn degrevlex_textbook_cases() {
        let o = MonomialOrder::DegRevLex;
        // x > y > z
        assert_eq!(o.cmp(&m(&[1, 0, 0]), &m(&[0, 1, 0])), Ordering::Greater);
        assert_eq!(o.cmp(&m(&[0, 1, 0]), &m(&[0, 0, 1])), Ordering::Greater);
        // x*y*z vs x^2: degree wins
        assert_eq!(o.cmp(&m(&[1, 1, 1]), &m(&[2, 0, 0])), Ordering::Greater);
        // x^2 z vs x y^2: revlex, z exponent smaller wins
        assert_eq!(o.cmp(&m(&[1, 2, 0]), &m(&[2, 0, 1])), Ordering::Greater);
    }

    #[test]
    fn weights_reorder() {
        let o = MonomialOrder::weighted(vec![1, 3]).unwrap();
        assert_eq!(o.cmp(&m(&[2, 0]), &m(&[0, 1])), Ordering::Less);
        assert!(MonomialOrder::weighted(vec![1, 0]).is_err());
        assert_eq!(MonomialOrder::weighted(vec![1, 1]).unwrap(), MonomialOrder::DegRevLex);
    }

    #[test]
    fn divisibility_and_lcm() {
        let a = m(&[1, 2, 0]);
        let b = m(&[2, 2, 1]);
        assert!(a.divides(&b));
        assert_eq!(a.div(&b), Some(m(&[1, 0, 1])));
        assert_eq!(b.div(&a), None);
        assert_eq!(a.lcm(&m(&[0, 3, 1])), m(&[1, 3, 1]));
        assert!(m(&[1, 0]).is_coprime(&m(&[0, 4])));
    }
}
