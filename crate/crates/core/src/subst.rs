//! Random substitution into a transcendence basis.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{MultiPoly, Ring, Zp};
use crate::linalg::jacobian_at;
use crate::prolong::{system_degree, PolySystem};

pub const SUBST_ATTEMPTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstEntry {
    pub member: String,
    pub value: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubstitutionRecord {
    pub entries: Vec<SubstEntry>,
    /// `ceil(4/3 * D2)`, as a decimal string.
    pub bound: String,
    pub d2: String,
    /// Largest value actually drawn from: `min(bound, p - 1)`.
    pub range_max: u64,
    pub clamped: bool,
    pub seed: u64,
    pub attempts: usize,
}

impl SubstitutionRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubstError {
    #[error("probability must lie strictly between 0 and 1")]
    BadProbability,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("{0} is not a parameter or initial value")]
    NotUnknown(String),
    #[error("no admissible values after {0} attempts")]
    Exhausted(usize),
}

/// `(D2, bound)` with `D2 = ceil(6 deg / (1 - p))` and `bound = ceil(4/3 D2)`.
pub fn bound_for_degree(degree: &BigInt, prob: &BigRational) -> Result<(BigInt, BigInt), SubstError> {
    if !prob.is_positive() || *prob >= BigRational::one() {
        return Err(SubstError::BadProbability);
    }
    let d2 = (BigRational::from_integer(degree * 6) / (BigRational::one() - prob)).ceil().to_integer();
    let bound = (&d2 * BigInt::from(4)).div_ceil(&BigInt::from(3));
    Ok((d2, bound))
}

pub fn sampling_bound(sys: &PolySystem, prob: &BigRational) -> Result<BigInt, SubstError> {
    bound_for_degree(&system_degree(sys), prob).map(|(_, b)| b)
}

/// Fix `values` in `sys`, removing those variables from the ring.
pub fn substitute_values(sys: &Arc<PolySystem>, values: &[(String, u64)]) -> Result<PolySystem, SubstError> {
    let field = sys.field();
    let mut idx = Vec::with_capacity(values.len());
    for (name, _) in values {
        let i = sys.var_index(name).ok_or_else(|| SubstError::UnknownVariable(name.clone()))?;
        if !sys.vars()[i].is_unknown() {
            return Err(SubstError::NotUnknown(name.clone()));
        }
        idx.push(i);
    }
    let n = sys.vars().len();
    let keep: Vec<usize> = (0..n).filter(|i| !idx.contains(i)).collect();
    let mut map = vec![None; n];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = Some(new);
    }
    let names = keep.iter().map(|&i| sys.ring().names()[i].clone()).collect();
    let ring = Ring::new(names, sys.ring().order().restrict(&keep));
    let polys: Vec<MultiPoly<Zp>> = sys
        .polys()
        .iter()
        .map(|p| {
            let mut q = p.clone();
            for (&i, (_, v)) in idx.iter().zip(values) {
                q = q.substitute(i, &(v % field.modulus()));
            }
            q.remap(&ring, &map)
        })
        .collect();
    let vars = keep.iter().map(|&i| sys.vars()[i].clone()).collect();
    let fixed = idx.iter().zip(values).map(|(&i, (_, v))| (sys.vars()[i].name.clone(), *v)).collect();
    Ok(PolySystem::new(ring, field, vars, polys).with_parent(sys.clone(), fixed))
}

/// Substitute random values from the sampling range into `basis`.
///
/// A draw is rejected when it turns a polynomial into zero or when the
/// Jacobian of the result at the parent's sample point (restricted to the
/// remaining variables) is not of full column rank.
pub fn substitute_basis(
    sys: &Arc<PolySystem>,
    basis: &[String],
    seed: u64,
    prob: &BigRational,
) -> Result<(PolySystem, SubstitutionRecord), SubstError> {
    let (d2, bound) = bound_for_degree(&system_degree(sys), prob)?;
    let p = sys.prime();
    let clamped = bound >= BigInt::from(p);
    let range_max = if clamped { p - 1 } else { bound.to_u64().expect("bound below p") };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if basis.is_empty() {
        let record = SubstitutionRecord { entries: Vec::new(), bound: bound.to_string(), d2: d2.to_string(), range_max, clamped, seed, attempts: 0 };
        return Ok((sys.as_ref().clone(), record));
    }
    for attempt in 1..=SUBST_ATTEMPTS {
        let values: Vec<(String, u64)> = basis.iter().map(|b| (b.clone(), rng.gen_range(1..=range_max))).collect();
        let out = substitute_values(sys, &values)?;
        // A polynomial collapsing to a constant means the draw hit a relation
        // among the members (zero) or made the system inconsistent.
        if out.polys().iter().zip(sys.polys()).any(|(a, b)| a.is_constant() && !b.is_constant()) {
            continue;
        }
        if !full_column_rank(sys, &out) {
            continue;
        }
        let entries = out
            .fixed()
            .iter()
            .map(|(m, v)| {
                let member = sys.vars().iter().find(|x| x.name == *m).map_or_else(|| m.clone(), |x| x.display_name());
                SubstEntry { member, value: *v }
            })
            .collect();
        let record = SubstitutionRecord {
            entries,
            bound: bound.to_string(),
            d2: d2.to_string(),
            range_max,
            clamped,
            seed,
            attempts: attempt,
        };
        return Ok((out, record));
    }
    Err(SubstError::Exhausted(SUBST_ATTEMPTS))
}

fn full_column_rank(parent: &PolySystem, sys: &PolySystem) -> bool {
    let n = sys.vars().len();
    if n == 0 {
        return true;
    }
    let Some(w) = parent.witness() else { return true };
    let point: Vec<u64> = sys.vars().iter().map(|v| w[parent.var_index(&v.name).expect("subset of parent")]).collect();
    let all: Vec<usize> = (0..n).collect();
    jacobian_at(sys.polys(), &all, &point, sys.field()).rank() == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use crate::prolong::{generate_et, SpecializationConfig};
    use proptest::prelude::*;
    use num_traits::Zero;

    fn half() -> BigRational {
        BigRational::new(1.into(), 2.into())
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bound_for_degree(&2.into(), &half()).unwrap(), (24.into(), 32.into()));
        assert_eq!(bound_for_degree(&1.into(), &half()).unwrap(), (12.into(), 16.into()));
        assert_eq!(bound_for_degree(&1.into(), &BigRational::one()), Err(SubstError::BadProbability));
        assert_eq!(bound_for_degree(&1.into(), &BigRational::zero()), Err(SubstError::BadProbability));
    }

    #[test]
    fn small_probability_sits_just_above_eight_times_degree() {
        // At p = 0 the formula gives exactly 8 deg; any p > 0 adds the rounding.
        let tiny = BigRational::new(1.into(), BigInt::from(10).pow(9));
        for deg in 1..20u32 {
            let (_, b) = bound_for_degree(&deg.into(), &tiny).unwrap();
            assert_eq!(b, BigInt::from(8 * deg + 2));
        }
    }

    proptest! {
        #[test]
        fn bound_is_monotone(deg in 1u64..1000, a in 1i64..99, b in 1i64..99) {
            let (lo, hi) = (a.min(b), a.max(b));
            let p = |x: i64| BigRational::new(x.into(), 100.into());
            let d: BigInt = deg.into();
            prop_assert!(bound_for_degree(&d, &p(lo)).unwrap().1 <= bound_for_degree(&d, &p(hi)).unwrap().1);
            prop_assert!(bound_for_degree(&d, &p(lo)).unwrap().1 <= bound_for_degree(&(d.clone() + 1), &p(lo)).unwrap().1);
        }

        #[test]
        fn bound_matches_float_formula(deg in 1u64..10_000, num in 1i64..100) {
            let q = num as f64 / 100.0;
            let d2 = (6.0 * deg as f64 / (1.0 - q)).ceil();
            let expected = (4.0 * d2 / 3.0).ceil();
            let (d2x, bx) = bound_for_degree(&deg.into(), &BigRational::new(num.into(), 100.into())).unwrap();
            // Exact arithmetic may differ from floats only at exact integers.
            prop_assert!((d2x.to_f64().unwrap() - d2).abs() <= 1.0);
            prop_assert!((bx.to_f64().unwrap() - expected).abs() <= 2.0);
        }
    }

    fn seir() -> Arc<PolySystem> {
        let src = std::fs::read_to_string(format!("{}/../../models/seir.ode", env!("CARGO_MANIFEST_DIR"))).unwrap();
        Arc::new(generate_et(&parse_model(&src).unwrap(), &SpecializationConfig::default()).unwrap())
    }

    #[test]
    fn substituted_members_disappear() {
        let sys = seir();
        let basis = vec!["beta".to_string(), "N".to_string()];
        let (out, rec) = substitute_basis(&sys, &basis, 4, &BigRational::new(99.into(), 100.into())).unwrap();
        assert_eq!(out.vars().len(), sys.vars().len() - 2);
        assert_eq!(out.polys().len(), sys.polys().len());
        assert!(rec.clamped);
        assert_eq!(rec.range_max, sys.prime() - 1);
        let text = out.to_psys();
        for b in &basis {
            assert!(out.var_index(b).is_none());
            assert!(!text.lines().skip_while(|l| !l.starts_with("polys")).any(|l| l.split(|c: char| !c.is_alphanumeric() && c != '_').any(|w| w == b)));
        }
        for e in &rec.entries {
            assert!((1..=rec.range_max).contains(&e.value));
        }
        let json = rec.to_json();
        assert!(json.contains("\"member\": \"beta\""));
    }

    #[test]
    fn empty_basis_is_identity() {
        let sys = seir();
        let (out, rec) = substitute_basis(&sys, &[], 1, &half()).unwrap();
        assert_eq!(out.to_psys(), sys.to_psys());
        assert!(rec.entries.is_empty());
    }

    #[test]
    fn dependent_set_is_rejected() {
        // Fixing two identifiable unknowns leaves a positive-dimensional system.
        let m = parse_model("x' = a*x\ny = x").unwrap();
        let sys = Arc::new(generate_et(&m, &SpecializationConfig::default()).unwrap());
        let r = substitute_basis(&sys, &["a".into(), "x(0)".into()], 3, &half());
        assert_eq!(r.unwrap_err(), SubstError::Exhausted(SUBST_ATTEMPTS));
    }

    #[test]
    fn only_unknowns_can_be_fixed() {
        let sys = seir();
        assert!(matches!(substitute_values(&sys, &[("z_aux".into(), 1)]), Err(SubstError::NotUnknown(_))));
        assert!(matches!(substitute_values(&sys, &[("nope".into(), 1)]), Err(SubstError::UnknownVariable(_))));
    }
}
