use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::GenericSystem;
use crate::algebra::{parse_poly, AlgebraError, MonomialOrder, MultiPoly, Ring, Zp};

/// Role of a variable of the specialized system.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Parameter,
    InitialState { state: String },
    StateDerivative { state: String, order: u32 },
    InputDerivative { input: String, order: u32 },
    Aux,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SysVar {
    pub name: String,
    pub kind: VarKind,
}

impl SysVar {
    pub fn new(name: String, kind: VarKind) -> Self {
        SysVar { name, kind }
    }

    /// `x3(0)` for initial values, the ring name otherwise.
    pub fn display_name(&self) -> String {
        match &self.kind {
            VarKind::InitialState { state } => format!("{state}(0)"),
            _ => self.name.clone(),
        }
    }

    /// Parameters and initial values: the model unknowns.
    pub fn is_unknown(&self) -> bool {
        matches!(self.kind, VarKind::Parameter | VarKind::InitialState { .. })
    }
}

/// The sampled trajectory: drawn values (parameters, initial states, input
/// derivatives) and the resulting output derivatives.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Specialization {
    pub seed: u64,
    pub bound: u64,
    pub values: Vec<(String, u64)>,
    pub outputs: Vec<(String, u64)>,
}

/// A polynomial system over `Z/pZ` with a classified variable table.
#[derive(Debug, Clone)]
pub struct PolySystem {
    ring: Arc<Ring>,
    field: Zp,
    vars: Vec<SysVar>,
    polys: Vec<MultiPoly<Zp>>,
    witness: Option<Vec<u64>>,
    specialization: Option<Specialization>,
    generic: Option<Arc<GenericSystem>>,
    parent: Option<Arc<PolySystem>>,
    fixed: Vec<(String, u64)>,
}

impl PolySystem {
    /// A system given directly. `polys` must live in `ring`, whose names must
    /// match `vars`.
    pub fn new(ring: Arc<Ring>, field: Zp, vars: Vec<SysVar>, polys: Vec<MultiPoly<Zp>>) -> Self {
        assert_eq!(ring.nvars(), vars.len());
        assert!(ring.names().iter().zip(&vars).all(|(n, v)| *n == v.name));
        assert!(polys.iter().all(|p| Arc::ptr_eq(p.ring(), &ring) || **p.ring() == *ring));
        PolySystem { ring, field, vars, polys, witness: None, specialization: None, generic: None, parent: None, fixed: Vec::new() }
    }

    pub(super) fn from_generated(
        ring: Arc<Ring>,
        field: Zp,
        vars: Vec<SysVar>,
        polys: Vec<MultiPoly<Zp>>,
        witness: Vec<u64>,
        spec: Specialization,
        generic: Arc<GenericSystem>,
    ) -> Self {
        let mut s = Self::new(ring, field, vars, polys);
        s.witness = Some(witness);
        s.specialization = Some(spec);
        s.generic = Some(generic);
        s
    }

    /// A point on the variety, if known. Must assign every variable.
    pub fn with_witness(mut self, witness: Vec<u64>) -> Self {
        assert_eq!(witness.len(), self.vars.len());
        self.witness = Some(witness);
        self
    }

    /// Record that this system was derived from `parent` by fixing variables.
    pub fn with_parent(mut self, parent: Arc<PolySystem>, fixed: Vec<(String, u64)>) -> Self {
        self.parent = Some(parent);
        self.fixed = fixed;
        self
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn field(&self) -> Zp {
        self.field
    }

    pub fn prime(&self) -> u64 {
        self.field.modulus()
    }

    pub fn vars(&self) -> &[SysVar] {
        &self.vars
    }

    pub fn polys(&self) -> &[MultiPoly<Zp>] {
        &self.polys
    }

    pub fn witness(&self) -> Option<&[u64]> {
        self.witness.as_deref()
    }

    pub fn specialization(&self) -> Option<&Specialization> {
        self.specialization.as_ref()
    }

    pub fn generic(&self) -> Option<&Arc<GenericSystem>> {
        self.generic.as_ref()
    }

    pub fn parent(&self) -> Option<&Arc<PolySystem>> {
        self.parent.as_ref()
    }

    /// Variables fixed relative to the parent system, with their values.
    pub fn fixed(&self) -> &[(String, u64)] {
        &self.fixed
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name || v.display_name() == name)
    }

    /// The same system under another monomial order.
    pub fn with_order(&self, order: MonomialOrder) -> PolySystem {
        let ring = self.ring.with_order(order);
        let mut s = self.clone();
        s.polys = self.polys.iter().map(|p| p.with_ring(ring.clone())).collect();
        s.ring = ring;
        s
    }

    /// Canonical `.psys` text.
    pub fn to_psys(&self) -> String {
        self.to_string()
    }
}

/// Product of the total degrees of the polynomials (each at least 1).
pub fn system_degree(sys: &PolySystem) -> BigInt {
    sys.polys.iter().fold(BigInt::one(), |acc, p| acc * BigInt::from(p.total_degree().max(1)))
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "prime {}", self.prime())?;
        match self.ring.order().weights() {
            None => writeln!(f, "order grevlex")?,
            Some(w) => writeln!(f, "order wgrevlex {}", w.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))?,
        }
        writeln!(f, "vars {}", self.vars.len())?;
        for v in &self.vars {
            match &v.kind {
                VarKind::Parameter => writeln!(f, "{} param", v.name)?,
                VarKind::InitialState { state } => writeln!(f, "{} init {state}", v.name)?,
                VarKind::StateDerivative { state, order } => writeln!(f, "{} deriv {state} {order}", v.name)?,
                VarKind::InputDerivative { input, order } => writeln!(f, "{} input {input} {order}", v.name)?,
                VarKind::Aux => writeln!(f, "{} aux", v.name)?,
            }
        }
        writeln!(f, "polys {}", self.polys.len())?;
        for p in &self.polys {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PsysError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("line {0}: {1}")]
    Poly(usize, AlgebraError),
}

/// Read the `.psys` format written by [`PolySystem::to_psys`].
pub fn parse_psys(text: &str) -> Result<PolySystem, PsysError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| PsysError::Malformed(0, format!("missing {what}")));
    let bad = |n: usize, m: &str| PsysError::Malformed(n, m.to_string());

    let (n, l) = next("prime")?;
    let prime = l.strip_prefix("prime ").and_then(|p| p.trim().parse::<u64>().ok()).ok_or_else(|| bad(n, "expected `prime <p>`"))?;
    let field = Zp::new(prime).map_err(|e| bad(n, &e.to_string()))?;
    let (n, l) = next("order")?;
    let order = match l.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["order", "grevlex"] => MonomialOrder::DegRevLex,
        ["order", "wgrevlex", ws @ ..] => {
            let w: Result<Vec<u32>, _> = ws.iter().map(|w| w.parse()).collect();
            MonomialOrder::weighted(w.map_err(|_| bad(n, "bad weight"))?).map_err(|e| bad(n, &e.to_string()))?
        }
        _ => return Err(bad(n, "expected `order grevlex` or `order wgrevlex ...`")),
    };
    let (n, l) = next("vars")?;
    let nv: usize = l.strip_prefix("vars ").and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad(n, "expected `vars <n>`"))?;
    let mut vars = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = next("variable")?;
        let parts: Vec<&str> = l.split_whitespace().collect();
        let order_of = |s: &str| s.parse::<u32>().map_err(|_| bad(n, "bad order"));
        let kind = match parts.as_slice() {
            [_, "param"] => VarKind::Parameter,
            [_, "aux"] => VarKind::Aux,
            [_, "init", s] => VarKind::InitialState { state: s.to_string() },
            [_, "deriv", s, k] => VarKind::StateDerivative { state: s.to_string(), order: order_of(k)? },
            [_, "input", u, k] => VarKind::InputDerivative { input: u.to_string(), order: order_of(k)? },
            _ => return Err(bad(n, "bad variable line")),
        };
        vars.push(SysVar::new(parts[0].to_string(), kind));
    }
    if let Some(w) = order.weights() {
        if w.len() != nv {
            return Err(bad(0, "weight count differs from variable count"));
        }
    }
    let ring = Ring::new(vars.iter().map(|v| v.name.clone()).collect(), order);
    let (n, l) = next("polys")?;
    let np: usize = l.strip_prefix("polys ").and_then(|v| v.trim().parse().ok()).ok_or_else(|| bad(n, "expected `polys <m>`"))?;
    let mut polys = Vec::with_capacity(np);
    for _ in 0..np {
        let (n, l) = next("polynomial")?;
        polys.push(parse_poly(&ring, &field, l).map_err(|e| PsysError::Poly(n, e))?);
    }
    if let Some((n, _)) = lines.next() {
        return Err(bad(n, "trailing content"));
    }
    Ok(PolySystem::new(ring, field, vars, polys))
}
