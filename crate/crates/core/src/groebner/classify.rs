use serde::Serialize;

use super::{normal_form, GroebnerBasis};
use crate::algebra::{MultiPoly, Zp};
use crate::linalg::jacobian_at;
use crate::prolong::PolySystem;
use crate::subst::SubstitutionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentClass {
    Global,
    Local,
    NonIdentifiable,
    Substituted,
}

impl std::fmt::Display for IdentClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IdentClass::Global => "globally identifiable",
            IdentClass::Local => "locally identifiable",
            IdentClass::NonIdentifiable => "non-identifiable",
            IdentClass::Substituted => "substituted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamReport {
    pub name: String,
    pub class: IdentClass,
    /// Value at the sampled point of the unsubstituted system.
    pub witness: Option<u64>,
    /// Value used when the unknown was substituted.
    pub value: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentReport {
    pub params: Vec<ParamReport>,
    pub substitution: Option<SubstitutionRecord>,
}

impl IdentReport {
    pub fn class_of(&self, name: &str) -> Option<IdentClass> {
        self.params.iter().find(|p| p.name == name).map(|p| p.class)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error("Gröbner basis is incomplete (budget exhausted)")]
    Incomplete,
    #[error("system has no sample point for the local test")]
    NoWitness,
    #[error("normal form of {name} is the constant {found}, but the sample has {expected}")]
    WitnessMismatch { name: String, found: u64, expected: u64 },
}

/// Classify every parameter and initial value of `sys`.
///
/// The local test runs on the unsubstituted ancestor of `sys` (Jacobian at its
/// sample point); the global test asks whether the normal form of the unknown
/// modulo `g` is a constant.
pub fn classify(g: &GroebnerBasis, sys: &PolySystem) -> Result<IdentReport, ClassifyError> {
    if !g.is_complete() {
        return Err(ClassifyError::Incomplete);
    }
    let mut root = sys;
    let mut fixed: Vec<(String, u64)> = Vec::new();
    loop {
        fixed.extend(root.fixed().iter().cloned());
        match root.parent() {
            Some(p) => root = p,
            None => break,
        }
    }
    let point = root.witness().ok_or(ClassifyError::NoWitness)?;
    let field = root.field();
    let all: Vec<usize> = (0..root.vars().len()).collect();
    let kernel = jacobian_at(root.polys(), &all, point, field).kernel();

    let mut params = Vec::new();
    for (i, v) in root.vars().iter().enumerate().filter(|(_, v)| v.is_unknown()) {
        let name = v.display_name();
        let witness = Some(point[i]);
        if let Some((_, val)) = fixed.iter().find(|(n, _)| *n == v.name) {
            params.push(ParamReport { name, class: IdentClass::Substituted, witness, value: Some(*val) });
            continue;
        }
        let local = kernel.iter().all(|k| k[i] == 0);
        let class = if !local {
            IdentClass::NonIdentifiable
        } else {
            let j = sys.var_index(&v.name).expect("unsubstituted unknowns stay in the system");
            let nf = normal_form(&MultiPoly::var(g.ring().clone(), field, j), g);
            match constant_of(&nf) {
                Some(c) if std::ptr::eq(root, sys) && c != point[i] && !g.is_unit() => {
                    return Err(ClassifyError::WitnessMismatch { name, found: c, expected: point[i] });
                }
                Some(_) => IdentClass::Global,
                None => IdentClass::Local,
            }
        };
        params.push(ParamReport { name, class, witness, value: None });
    }
    Ok(IdentReport { params, substitution: None })
}

fn constant_of(p: &MultiPoly<Zp>) -> Option<u64> {
    if p.is_zero() {
        Some(0)
    } else {
        p.constant_value()
    }
}
