//! Transcendence bases of `E^t` among the model unknowns.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{jacobian_at, FpMatrix};
use crate::prolong::{PolySystem, SpecializationConfig};

pub const DEFAULT_POOL_CAP: usize = 3000;
pub const RANK_ATTEMPTS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisCandidate {
    /// Display names (`x3(0)` for initial values), in variable order.
    pub members: Vec<String>,
    pub valid: bool,
    /// Filled in by the entropy selector, aligned with `members`.
    pub entropies: Vec<f64>,
}

impl BasisCandidate {
    pub fn new(members: Vec<String>, valid: bool) -> Self {
        BasisCandidate { members, valid, entropies: Vec::new() }
    }

    pub fn sorted_names(&self) -> Vec<String> {
        let mut v = self.members.clone();
        v.sort();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidatePool {
    pub candidates: Vec<BasisCandidate>,
    pub k: usize,
    pub eligible: usize,
    /// `C(eligible, k)`.
    #[serde(serialize_with = "as_decimal")]
    pub total: BigUint,
    /// Number of subsets tested.
    pub sampled: usize,
    pub seed: u64,
}

fn as_decimal<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

impl CandidatePool {
    pub fn contains(&self, members: &[&str]) -> bool {
        let want: BTreeSet<&str> = members.iter().copied().collect();
        self.candidates.iter().any(|c| c.members.iter().map(String::as_str).collect::<BTreeSet<_>>() == want)
    }

    /// One line per candidate: comma-separated members, then the validity flag.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.candidates {
            for m in &c.members {
                out.push_str(m);
                out.push(',');
            }
            out.push_str(if c.valid { "valid" } else { "invalid" });
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BasisError {
    #[error("Jacobian rank differs between sample points after {0} attempts")]
    UnstableRank(u64),
    #[error("system has no sample point")]
    NoWitness,
    #[error("basis has {got} members, transcendence degree is {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("{0} is not a parameter or initial value")]
    NotEligible(String),
    #[error("no valid candidate among {0} tested subsets")]
    NoValidCandidate(usize),
    #[error("pool cap must be at least 1")]
    ZeroCap,
}

/// The sampled Jacobian of a system with its rank checked against an
/// independent sample, and a kernel basis for validity tests.
#[derive(Debug, Clone)]
pub struct Analysis {
    jacobian: FpMatrix,
    rank: usize,
    pivots: Vec<usize>,
    kernel: Vec<Vec<u64>>,
    names: Vec<String>,
}

impl Analysis {
    pub fn new(sys: &PolySystem, seed: u64) -> Result<Analysis, BasisError> {
        let point = sys.witness().ok_or(BasisError::NoWitness)?;
        let all: Vec<usize> = (0..sys.vars().len()).collect();
        let jacobian = jacobian_at(sys.polys(), &all, point, sys.field());
        let (_, pivots) = jacobian.rref();
        let rank = pivots.len();
        check_rank(sys, rank, seed)?;
        let kernel = jacobian.kernel();
        let names = sys.vars().iter().map(|v| v.display_name()).collect();
        Ok(Analysis { jacobian, rank, pivots, kernel, names })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn jacobian(&self) -> &FpMatrix {
        &self.jacobian
    }

    pub fn transcendence_degree(&self) -> usize {
        self.names.len() - self.rank
    }

    /// Non-pivot columns, as display names.
    pub fn free_variables(&self) -> Vec<String> {
        (0..self.names.len()).filter(|c| !self.pivots.contains(c)).map(|c| self.names[c].clone()).collect()
    }

    /// Removing the columns `cols` keeps the rank iff the kernel restricted to
    /// those rows is nonsingular.
    pub fn is_valid_columns(&self, cols: &[usize]) -> bool {
        if cols.len() != self.kernel.len() {
            return false;
        }
        if cols.is_empty() {
            return true;
        }
        let rows = cols.iter().map(|&c| self.kernel.iter().map(|v| v[c]).collect()).collect();
        FpMatrix::from_rows(self.jacobian.field(), rows).rank() == cols.len()
    }

    fn column(&self, name: &str, sys: &PolySystem) -> Result<usize, BasisError> {
        sys.var_index(name).ok_or_else(|| BasisError::UnknownVariable(name.to_string()))
    }
}

/// Rank at an independent sample of the same generic system must agree.
fn check_rank(sys: &PolySystem, rank: usize, seed: u64) -> Result<(), BasisError> {
    let (Some(generic), Some(spec)) = (sys.generic(), sys.specialization()) else {
        return Ok(());
    };
    let all: Vec<usize> = (0..sys.vars().len()).collect();
    for attempt in 0..RANK_ATTEMPTS {
        let cfg = SpecializationConfig {
            seed: seed.wrapping_add(attempt).wrapping_add(0x9E37_79B9) ^ spec.seed,
            bound: spec.bound,
            prime: sys.prime(),
            ..Default::default()
        };
        let Ok(other) = generic.specialize(&cfg) else { continue };
        let r = jacobian_at(other.polys(), &all, other.witness().expect("generated"), sys.field()).rank();
        if r == rank {
            return Ok(());
        }
    }
    Err(BasisError::UnstableRank(RANK_ATTEMPTS))
}

/// Variables of the non-pivot columns of the sampled Jacobian.
pub fn find_independent(sys: &PolySystem, seed: u64) -> Result<Vec<String>, BasisError> {
    Ok(Analysis::new(sys, seed)?.free_variables())
}

pub fn transcendence_degree(sys: &PolySystem, seed: u64) -> Result<usize, BasisError> {
    Ok(Analysis::new(sys, seed)?.transcendence_degree())
}

pub fn is_valid_basis(sys: &PolySystem, members: &[&str]) -> Result<bool, BasisError> {
    is_valid_with(&Analysis::new(sys, 0)?, sys, members)
}

pub fn is_valid_with(a: &Analysis, sys: &PolySystem, members: &[&str]) -> Result<bool, BasisError> {
    let k = a.transcendence_degree();
    if members.len() != k {
        return Err(BasisError::SizeMismatch { expected: k, got: members.len() });
    }
    let cols = members.iter().map(|m| a.column(m, sys)).collect::<Result<Vec<_>, _>>()?;
    if cols.iter().collect::<BTreeSet<_>>().len() != cols.len() {
        return Ok(false);
    }
    Ok(a.is_valid_columns(&cols))
}

fn binomial(n: usize, k: usize) -> BigUint {
    (0..k).fold(BigUint::one(), |acc, i| acc * BigUint::from(n - i) / BigUint::from(i + 1))
}

/// k-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let next = (0..k).rev().find(|&i| cur.as_ref().unwrap()[i] < n - k + i);
        match next {
            None => cur = None,
            Some(i) => {
                let c = cur.as_mut().unwrap();
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
            }
        }
        Some(out)
    })
}

/// Valid transcendence bases among the parameters and initial values.
///
/// All `C(n, k)` subsets are tested when there are at most `cap` of them;
/// otherwise `cap` distinct subsets are drawn uniformly and the invalid ones
/// discarded.
pub fn enumerate_candidates(sys: &PolySystem, cap: usize, seed: u64) -> Result<CandidatePool, BasisError> {
    enumerate_with(&Analysis::new(sys, seed)?, sys, cap, seed)
}

pub fn enumerate_with(a: &Analysis, sys: &PolySystem, cap: usize, seed: u64) -> Result<CandidatePool, BasisError> {
    if cap == 0 {
        return Err(BasisError::ZeroCap);
    }
    let eligible: Vec<usize> = sys.vars().iter().enumerate().filter(|(_, v)| v.is_unknown()).map(|(i, _)| i).collect();
    let n = eligible.len();
    let k = a.transcendence_degree();
    let total = binomial(n, k);
    let subsets: Vec<Vec<usize>> = if total.to_usize().is_some_and(|t| t <= cap) {
        combinations(n, k).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(cap);
        while out.len() < cap {
            let mut s = sample(&mut rng, n, k).into_vec();
            s.sort_unstable();
            if seen.insert(s.clone()) {
                out.push(s);
            }
        }
        out
    };
    let sampled = subsets.len();
    let mut candidates: Vec<BasisCandidate> = subsets
        .par_iter()
        .filter_map(|s| {
            let cols: Vec<usize> = s.iter().map(|&i| eligible[i]).collect();
            a.is_valid_columns(&cols).then(|| BasisCandidate::new(cols.iter().map(|&c| a.names[c].clone()).collect(), true))
        })
        .collect();
    candidates.sort_by_key(|c| c.sorted_names());
    if candidates.is_empty() {
        return Err(BasisError::NoValidCandidate(sampled));
    }
    Ok(CandidatePool { candidates, k, eligible: n, total, sampled, seed })
}
