//! Degree-weighted count entropy of candidate bases.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{BasisCandidate, CandidatePool};
use crate::prolong::PolySystem;

pub const ENTROPY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberProfile {
    pub member: String,
    pub degrees: Vec<u32>,
    pub entropy: f64,
}

impl MemberProfile {
    /// `degrees` normalized to sum to one.
    pub fn weights(&self) -> Vec<f64> {
        let total: u64 = self.degrees.iter().map(|&d| d as u64).sum();
        self.degrees.iter().map(|&d| if total == 0 { 0.0 } else { d as f64 / total as f64 }).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeProfile {
    pub members: Vec<MemberProfile>,
}

impl DegreeProfile {
    pub fn entropies(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.entropy).collect()
    }
}

/// `-sum w log2 w` with `w = d / sum(d)`; zero for an empty or all-zero array.
pub fn entropy(degrees: &[u32]) -> f64 {
    let total: f64 = degrees.iter().map(|&d| d as f64).sum();
    if total == 0.0 {
        return 0.0;
    }
    -degrees
        .iter()
        .filter(|&&d| d > 0)
        .map(|&d| {
            let w = d as f64 / total;
            w * w.log2()
        })
        .sum::<f64>()
}

/// Total degrees of the monomials of `sys` containing a member of `members`.
///
/// A monomial containing several members counts once, for the member with
/// the highest exponent (ties: the smaller name).
pub fn degree_profile(sys: &PolySystem, members: &[String]) -> DegreeProfile {
    let idx: Vec<Option<usize>> = members.iter().map(|m| sys.var_index(m)).collect();
    let mut degrees: Vec<Vec<u32>> = vec![Vec::new(); members.len()];
    for p in sys.polys() {
        for (m, _) in p.terms() {
            let e = m.exps();
            let owner = (0..members.len())
                .filter(|&k| idx[k].is_some_and(|i| e[i] > 0))
                .max_by(|&a, &b| e[idx[a].unwrap()].cmp(&e[idx[b].unwrap()]).then_with(|| members[b].cmp(&members[a])));
            if let Some(k) = owner {
                degrees[k].push(m.degree());
            }
        }
    }
    let members = members
        .iter()
        .zip(degrees)
        .map(|(m, d)| MemberProfile { member: m.clone(), entropy: entropy(&d), degrees: d })
        .collect();
    DegreeProfile { members }
}

/// Fill in `entropies` for every candidate of the pool.
pub fn score_pool(sys: &PolySystem, pool: &mut CandidatePool) {
    pool.candidates.par_iter_mut().for_each(|c| {
        c.entropies = degree_profile(sys, &c.members).entropies();
    });
}

fn padded_sorted(v: &[f64], len: usize) -> Vec<f64> {
    let mut s = v.to_vec();
    s.resize(len, f64::NEG_INFINITY);
    s.sort_by(f64::total_cmp);
    s
}

/// Lexicographic comparison of ascending entropy tuples, the shorter one
/// padded with minus infinity.
fn compare_entropies(a: &[f64], b: &[f64]) -> Ordering {
    let len = a.len().max(b.len());
    let (a, b) = (padded_sorted(a, len), padded_sorted(b, len));
    for (x, y) in a.iter().zip(&b) {
        if x == y {
            continue;
        }
        if x.is_infinite() || y.is_infinite() || (x - y).abs() > ENTROPY_TOLERANCE {
            return x.total_cmp(y);
        }
    }
    Ordering::Equal
}

/// The candidate with the lexicographically largest sorted entropy tuple;
/// ties go to the smaller sorted member-name list.
pub fn select_best(candidates: &[BasisCandidate]) -> Option<&BasisCandidate> {
    candidates.iter().reduce(|best, c| match compare_entropies(&c.entropies, &best.entropies) {
        Ordering::Greater => c,
        Ordering::Less => best,
        Ordering::Equal => {
            if c.sorted_names() < best.sorted_names() {
                c
            } else {
                best
            }
        }
    })
}

/// `candidate,member,entropy` rows, candidates numbered from 0.
pub fn entropy_csv(candidates: &[BasisCandidate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["candidate", "member", "entropy"]).expect("in-memory write");
    for (i, c) in candidates.iter().enumerate() {
        for (m, h) in c.members.iter().zip(&c.entropies) {
            w.write_record([i.to_string(), m.clone(), format!("{h:.6}")]).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, MonomialOrder, Ring, Zp};
    use crate::prolong::{SysVar, VarKind};
    use proptest::prelude::*;

    fn system(names: &[&str], src: &[&str]) -> PolySystem {
        let f = Zp::new(101).unwrap();
        let r = Ring::new(names.iter().map(|s| s.to_string()).collect(), MonomialOrder::DegRevLex);
        let vars = names.iter().map(|n| SysVar::new(n.to_string(), VarKind::Parameter)).collect();
        let polys = src.iter().map(|s| parse_poly(&r, &f, s).unwrap()).collect();
        PolySystem::new(r, f, vars, polys)
    }

    /// Shannon entropy computed from probabilities directly.
    fn shannon(p: &[f64]) -> f64 {
        p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln() / 2f64.ln()).sum()
    }

    #[test]
    fn uniform_six() {
        assert!((entropy(&[5; 6]) - 6f64.log2()).abs() < 1e-12);
        assert!((entropy(&[5; 6]) - 2.584).abs() < 1e-3);
    }

    #[test]
    fn skewed_six() {
        // Weights 2/3 and five times 1/15.
        let expected = shannon(&[20.0 / 30.0, 2.0 / 30.0, 2.0 / 30.0, 2.0 / 30.0, 2.0 / 30.0, 2.0 / 30.0]);
        assert!((entropy(&[20, 2, 2, 2, 2, 2]) - expected).abs() < 1e-12);
        assert!((expected - 1.6923).abs() < 1e-4);
    }

    #[test]
    fn degenerate_arrays() {
        assert_eq!(entropy(&[7]), 0.0);
        assert_eq!(entropy(&[]), 0.0);
        assert_eq!(entropy(&[0, 0]), 0.0);
    }

    #[test]
    fn profile_of_the_two_parameter_example() {
        let sys = system(
            &["p1", "p2", "x1", "x2", "x3", "x4", "x5"],
            &["p1^10*x1^5*x2^5 + p1*x1 + p1*x2 + p1*x3 + p1*x4 + p1*x5", "p2^5 + p2^4*x1 + p2^3*x1^2 + p2^2*x1^3 + p2*x1^4 + x1^3*x2*p2"],
        );
        let prof = degree_profile(&sys, &["p1".into(), "p2".into()]);
        let mut d1 = prof.members[0].degrees.clone();
        d1.sort();
        assert_eq!(d1, [2, 2, 2, 2, 2, 20]);
        assert_eq!(prof.members[1].degrees, [5; 6]);
        let w: f64 = prof.members[0].weights().iter().sum();
        assert!((w - 1.0).abs() < 1e-12);
        let a = BasisCandidate { members: vec!["p1".into()], valid: true, entropies: vec![prof.members[0].entropy] };
        let b = BasisCandidate { members: vec!["p2".into()], valid: true, entropies: vec![prof.members[1].entropy] };
        assert_eq!(select_best(&[a.clone(), b.clone()]).unwrap().members, ["p2"]);
        assert_eq!(select_best(&[b, a]).unwrap().members, ["p2"]);
    }

    #[test]
    fn shared_monomial_counts_once() {
        let sys = system(&["p", "q"], &["p*q + 1"]);
        let prof = degree_profile(&sys, &["p".into(), "q".into()]);
        assert_eq!(prof.members[0].degrees, [2]);
        assert!(prof.members[1].degrees.is_empty());
        let sys = system(&["p", "q"], &["p*q^2 + 1"]);
        let prof = degree_profile(&sys, &["p".into(), "q".into()]);
        assert_eq!(prof.members[1].degrees, [3]);
    }

    #[test]
    fn absent_member_has_zero_entropy() {
        let sys = system(&["p", "q"], &["p^2 + p"]);
        let prof = degree_profile(&sys, &["q".into()]);
        assert!(prof.members[0].degrees.is_empty());
        assert_eq!(prof.members[0].entropy, 0.0);
    }

    #[test]
    fn selection_rules() {
        let c = |m: &[&str], e: &[f64]| BasisCandidate { members: m.iter().map(|s| s.to_string()).collect(), valid: true, entropies: e.to_vec() };
        assert!(select_best(&[]).is_none());
        assert_eq!(select_best(&[c(&["a"], &[1.0])]).unwrap().members, ["a"]);
        // Equal tuples: smaller name list wins, regardless of order.
        let x = c(&["b", "c"], &[1.0, 2.0]);
        let y = c(&["c", "a"], &[2.0, 1.0 + 1e-12]);
        assert_eq!(select_best(&[x.clone(), y.clone()]).unwrap().members, ["c", "a"]);
        assert_eq!(select_best(&[y, x]).unwrap().members, ["c", "a"]);
        // The smallest entry decides first.
        let lo = c(&["u"], &[0.5, 3.0]);
        let hi = c(&["v"], &[0.6, 0.7]);
        assert_eq!(select_best(&[lo, hi]).unwrap().members, ["v"]);
        // Padding with minus infinity.
        assert_eq!(compare_entropies(&[1.0], &[1.0, 0.0]), Ordering::Less);
        assert_eq!(compare_entropies(&[5.0], &[0.0, 0.0]), Ordering::Less);
        assert_eq!(compare_entropies(&[], &[]), Ordering::Equal);
    }

    #[test]
    fn csv_rows() {
        let c = BasisCandidate { members: vec!["x3(0)".into(), "gamma".into()], valid: true, entropies: vec![1.5, 0.25] };
        let text = entropy_csv(&[c]);
        assert_eq!(text, "candidate,member,entropy\n0,x3(0),1.500000\n0,gamma,0.250000\n");
    }

    proptest! {
        #[test]
        fn permutation_invariant(mut d in prop::collection::vec(0u32..50, 0..12), rot in 0usize..12) {
            let h = entropy(&d);
            if !d.is_empty() {
                let k = rot % d.len();
                d.rotate_left(k);
                d.reverse();
            }
            prop_assert!((entropy(&d) - h).abs() < 1e-9);
        }

        #[test]
        fn scale_invariant(d in prop::collection::vec(0u32..50, 1..12), s in 1u32..20) {
            let scaled: Vec<u32> = d.iter().map(|x| x * s).collect();
            prop_assert!((entropy(&scaled) - entropy(&d)).abs() < 1e-9);
        }

        #[test]
        fn uniform_is_maximal(d in prop::collection::vec(0u32..50, 1..12), v in 1u32..50) {
            let l = d.len();
            let h = entropy(&d);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (l as f64).log2() + 1e-9);
            prop_assert!((entropy(&vec![v; l]) - (l as f64).log2()).abs() < 1e-9);
        }
    }
}
