//! Prolongation of an ODE model into the polynomial system `E^t`, and its
//! specialization at a random trajectory.
//!
//! The jet ring has one variable per state derivative `x_k` (the `k`-th
//! derivative of `x` at `t = 0`), per parameter, per input and output
//! derivative, plus the auxiliary `z_aux` that inverts the product of the
//! model's denominators. Output equations are differentiated level by level
//! for as long as they add rank with respect to the unknowns; the state
//! equations needed to close the system are pulled in on demand.

mod series;
mod system;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{CoeffRing, Integers, Monomial, MonomialOrder, MultiPoly, Rationals, Ring, Zp, DEFAULT_PRIME};
use crate::linalg::{gradient_at, FpMatrix};
use crate::model::{validate, ModelError, OdeModel};

pub use system::{parse_psys, system_degree, PolySystem, PsysError, Specialization, SysVar, VarKind};

/// How the witness trajectory is drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecializationConfig {
    pub seed: u64,
    /// Values are drawn from `[1, min(bound, p - 1)]`.
    pub bound: u64,
    /// Target probability of a correct answer.
    pub prob: BigRational,
    pub prime: u64,
}

impl Default for SpecializationConfig {
    fn default() -> Self {
        SpecializationConfig {
            seed: 1,
            bound: u64::MAX,
            prob: BigRational::new(99.into(), 100.into()),
            prime: DEFAULT_PRIME,
        }
    }
}

impl SpecializationConfig {
    pub fn with_seed(seed: u64) -> Self {
        SpecializationConfig { seed, ..Default::default() }
    }

    pub fn check(&self) -> Result<Zp, GenerationError> {
        if self.bound == 0 {
            return Err(GenerationError::InvalidConfig("sampling bound must be at least 1".into()));
        }
        if !self.prob.is_positive() || self.prob >= BigRational::one() {
            return Err(GenerationError::InvalidConfig(format!("probability {} is not in (0, 1)", self.prob)));
        }
        Zp::new(self.prime).map_err(|e| GenerationError::InvalidConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    InvalidConfig(String),
    #[error("generated variable name \"{0}\" collides with a model symbol")]
    NameCollision(String),
    #[error("prime {prime} is too small for derivatives of order {order}")]
    PrimeTooSmall { prime: u64, order: usize },
    #[error("no admissible sample point after {0} attempts (a denominator vanished every time)")]
    SingularSample(usize),
}

const SAMPLE_ATTEMPTS: usize = 16;

/// Where a jet-ring variable comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Jet {
    State(usize, usize),
    Param(usize),
    Input(usize, usize),
    Output(usize, usize),
    Aux,
}

/// Index arithmetic for the jet ring. Orders run from 0 to `max_order`.
#[derive(Debug, Clone)]
struct JetLayout {
    n: usize,
    params: usize,
    inputs: usize,
    outputs: usize,
    max_order: usize,
}

impl JetLayout {
    fn w(&self) -> usize {
        self.max_order + 1
    }
    fn state(&self, i: usize, k: usize) -> usize {
        i * self.w() + k
    }
    fn param(&self, m: usize) -> usize {
        self.n * self.w() + m
    }
    fn input(&self, l: usize, k: usize) -> usize {
        self.n * self.w() + self.params + l * self.w() + k
    }
    fn output(&self, j: usize, k: usize) -> usize {
        (self.n + self.inputs) * self.w() + self.params + j * self.w() + k
    }
    fn aux(&self) -> usize {
        (self.n + self.inputs + self.outputs) * self.w() + self.params
    }
    fn len(&self) -> usize {
        self.aux() + 1
    }
    fn decode(&self, v: usize) -> Jet {
        let w = self.w();
        let s_end = self.n * w;
        let p_end = s_end + self.params;
        let u_end = p_end + self.inputs * w;
        let y_end = u_end + self.outputs * w;
        if v < s_end {
            Jet::State(v / w, v % w)
        } else if v < p_end {
            Jet::Param(v - s_end)
        } else if v < u_end {
            Jet::Input((v - p_end) / w, (v - p_end) % w)
        } else if v < y_end {
            Jet::Output((v - u_end) / w, (v - u_end) % w)
        } else {
            Jet::Aux
        }
    }
    /// The variable whose value is the time derivative of `v`.
    fn successor(&self, v: usize) -> Option<usize> {
        match self.decode(v) {
            Jet::State(i, k) if k < self.max_order => Some(self.state(i, k + 1)),
            Jet::Input(l, k) if k < self.max_order => Some(self.input(l, k + 1)),
            Jet::Output(j, k) if k < self.max_order => Some(self.output(j, k + 1)),
            Jet::State(..) | Jet::Input(..) | Jet::Output(..) => panic!("jet order exceeds layout"),
            Jet::Param(_) | Jet::Aux => None,
        }
    }
}

/// Which equation of `E^t` a polynomial is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyLabel {
    /// `k`-th derivative of the equation of state `i` (leader `x_i^(k+1)`).
    State { state: usize, order: usize },
    /// `k`-th derivative of output equation `j`.
    Output { output: usize, order: usize },
    /// `z_aux * Q - 1`.
    Aux,
}

/// The prolonged system before specialization: integer coefficients in the
/// full jet ring, with output and input derivatives still symbolic.
#[derive(Debug, Clone)]
pub struct GenericSystem {
    model: OdeModel,
    layout: JetLayout,
    ring: Arc<Ring>,
    polys: Vec<MultiPoly<Integers>>,
    labels: Vec<PolyLabel>,
    /// Jet index of each variable of the specialized system.
    var_map: Vec<usize>,
    vars: Vec<SysVar>,
}

impl GenericSystem {
    pub fn model(&self) -> &OdeModel {
        &self.model
    }

    pub fn jet_ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn polys(&self) -> &[MultiPoly<Integers>] {
        &self.polys
    }

    pub fn labels(&self) -> &[PolyLabel] {
        &self.labels
    }

    /// Specialize at a fresh trajectory drawn with `cfg`.
    pub fn specialize(self: &Arc<Self>, cfg: &SpecializationConfig) -> Result<PolySystem, GenerationError> {
        let field = cfg.check()?;
        let (point, spec) = sample_jets(&self.model, &self.layout, field, cfg)?;
        Ok(self.specialize_at(field, &point, spec))
    }

    fn specialize_at(self: &Arc<Self>, field: Zp, point: &[u64], spec: Specialization) -> PolySystem {
        let names: Vec<String> = self.vars.iter().map(|v| v.name.clone()).collect();
        let ring = Ring::new(names, MonomialOrder::DegRevLex);
        let mut target = vec![None; self.layout.len()];
        for (k, &j) in self.var_map.iter().enumerate() {
            target[j] = Some(k);
        }
        let folded: Vec<bool> = (0..self.layout.len())
            .map(|v| matches!(self.layout.decode(v), Jet::Input(..) | Jet::Output(..)))
            .collect();
        let nv = self.vars.len();
        let polys = self
            .polys
            .iter()
            .map(|p| {
                let terms = p
                    .terms()
                    .iter()
                    .map(|(m, c)| {
                        let mut coeff = field.from_bigint(c);
                        let mut exps = vec![0; nv];
                        for (v, e) in m.support() {
                            if folded[v] {
                                coeff = field.mul(&coeff, &field.pow(point[v], e as u64));
                            } else {
                                exps[target[v].expect("system variable")] = e;
                            }
                        }
                        (Monomial::from_exps(exps), coeff)
                    })
                    .collect();
                MultiPoly::from_terms(ring.clone(), field, terms)
            })
            .collect();
        let witness = self.var_map.iter().map(|&j| point[j]).collect();
        PolySystem::from_generated(ring, field, self.vars.clone(), polys, witness, spec, self.clone())
    }
}

/// Build and specialize `E^t` for `model`.
pub fn generate_et(model: &OdeModel, cfg: &SpecializationConfig) -> Result<PolySystem, GenerationError> {
    let field = cfg.check()?;
    let diags = validate(model);
    if !diags.is_empty() {
        return Err(ModelError::Invalid(diags).into());
    }
    let n = model.states().len();
    let s = model.params().len() + n;
    let layout = JetLayout {
        n,
        params: model.params().len(),
        inputs: model.inputs().len(),
        outputs: model.outputs().len(),
        max_order: s + 3,
    };
    if layout.max_order as u64 >= cfg.prime {
        return Err(GenerationError::PrimeTooSmall { prime: cfg.prime, order: layout.max_order });
    }
    let ring = jet_ring(model, &layout)?;
    let (point, spec) = sample_jets(model, &layout, field, cfg)?;

    let mut gen = Prolonger::new(model, &layout, &ring, field, &point);
    gen.run(s);
    let (polys, labels) = gen.finish();

    let mut state_jets: Vec<(usize, usize)> = BTreeSet::<usize>::from_iter(polys.iter().flat_map(|p| p.variables()))
        .into_iter()
        .filter_map(|v| match layout.decode(v) {
            Jet::State(i, k) => Some((i, k)),
            _ => None,
        })
        .collect();
    // Highest derivatives first, initial values after the auxiliary variable.
    state_jets.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let states = model.states();
    let mut vars = Vec::new();
    let mut var_map = Vec::new();
    for &(i, k) in state_jets.iter().filter(|(_, k)| *k > 0) {
        vars.push(SysVar::new(ring.names()[layout.state(i, k)].clone(), VarKind::StateDerivative { state: states[i].to_string(), order: k as u32 }));
        var_map.push(layout.state(i, k));
    }
    vars.push(SysVar::new("z_aux".into(), VarKind::Aux));
    var_map.push(layout.aux());
    // Every initial value is an unknown, even when no equation mentions it.
    for i in 0..n {
        vars.push(SysVar::new(ring.names()[layout.state(i, 0)].clone(), VarKind::InitialState { state: states[i].to_string() }));
        var_map.push(layout.state(i, 0));
    }
    for (m, p) in model.params().iter().enumerate() {
        vars.push(SysVar::new(p.clone(), VarKind::Parameter));
        var_map.push(layout.param(m));
    }
    let generic = Arc::new(GenericSystem {
        model: model.clone(),
        layout,
        ring,
        polys,
        labels,
        var_map,
        vars,
    });
    Ok(generic.specialize_at(field, &point, spec))
}

fn jet_ring(model: &OdeModel, layout: &JetLayout) -> Result<Arc<Ring>, GenerationError> {
    let mut names = Vec::with_capacity(layout.len());
    for x in model.states() {
        names.extend((0..=layout.max_order).map(|k| format!("{x}_{k}")));
    }
    names.extend(model.params().iter().cloned());
    for u in model.inputs() {
        names.extend((0..=layout.max_order).map(|k| format!("{u}_{k}")));
    }
    for (y, _) in model.outputs() {
        names.extend((0..=layout.max_order).map(|k| format!("{y}_{k}")));
    }
    names.push("z_aux".into());
    let mut seen = std::collections::HashSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(GenerationError::NameCollision(n.clone()));
        }
    }
    Ok(Ring::new(names, MonomialOrder::DegRevLex))
}

/// Multiply a rational-coefficient polynomial by the least common multiple
/// of its denominators and divide out the integer content.
fn primitive_integer(p: &MultiPoly<Rationals>) -> MultiPoly<Integers> {
    let lcm = p.terms().iter().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.terms().iter().map(|(_, c)| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let g = if g.is_zero() { BigInt::one() } else { g };
    let terms = p.terms().iter().zip(ints).map(|((m, _), c)| (m.clone(), c / &g)).collect();
    MultiPoly::from_terms(p.ring().clone(), Integers, terms)
}

/// Draw parameters, initial values and input derivatives, then propagate the
/// Taylor coefficients of states and outputs.
fn sample_jets(
    model: &OdeModel,
    layout: &JetLayout,
    field: Zp,
    cfg: &SpecializationConfig,
) -> Result<(Vec<u64>, Specialization), GenerationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hi = cfg.bound.min(field.modulus() - 1);
    for _ in 0..SAMPLE_ATTEMPTS {
        if let Some(r) = try_sample(model, layout, field, hi, &mut rng) {
            let (point, mut spec) = r;
            spec.seed = cfg.seed;
            spec.bound = hi;
            return Ok((point, spec));
        }
    }
    Err(GenerationError::SingularSample(SAMPLE_ATTEMPTS))
}

fn try_sample(model: &OdeModel, layout: &JetLayout, field: Zp, hi: u64, rng: &mut ChaCha8Rng) -> Option<(Vec<u64>, Specialization)> {
    use series::{eval, Series};
    let len = layout.max_order + 1;
    let mut point = vec![0u64; layout.len()];
    let mut spec = Specialization::default();
    let states = model.states();
    for (m, p) in model.params().iter().enumerate() {
        point[layout.param(m)] = rng.gen_range(1..=hi);
        spec.values.push((p.clone(), point[layout.param(m)]));
    }
    let mut xs: Vec<Series> = Vec::new();
    for (i, x) in states.iter().enumerate() {
        let v = rng.gen_range(1..=hi);
        point[layout.state(i, 0)] = v;
        spec.values.push((format!("{x}_0"), v));
        xs.push(Series::constant(v, len));
    }
    let mut fact = vec![1u64; len];
    for k in 1..len {
        fact[k] = field.mul(&fact[k - 1], &(k as u64));
    }
    let mut us: Vec<Series> = Vec::new();
    for (l, u) in model.inputs().iter().enumerate() {
        let mut c = vec![0u64; len];
        for k in 0..len {
            let v = rng.gen_range(1..=hi);
            point[layout.input(l, k)] = v;
            spec.values.push((format!("{u}_{k}"), v));
            c[k] = field.mul(&v, &field.inverse(fact[k])?);
        }
        us.push(Series(c));
    }
    let pvals: Vec<u64> = (0..layout.params).map(|m| point[layout.param(m)]).collect();
    let env_at = |xs: &[Series], n: usize| {
        let xs: Vec<Series> = xs.iter().map(|s| Series(s.0[..n].to_vec())).collect();
        let us: Vec<Series> = us.iter().map(|s| Series(s.0[..n].to_vec())).collect();
        let (states, params, inputs, pvals) = (&states, model.params(), model.inputs(), &pvals);
        move |name: &str| -> Series {
            if let Some(i) = states.iter().position(|s| *s == name) {
                xs[i].clone()
            } else if let Some(m) = params.iter().position(|p| p == name) {
                Series::constant(pvals[m], n)
            } else {
                let l = inputs.iter().position(|u| u == name).expect("validated symbol");
                us[l].clone()
            }
        }
    };
    // Picard step: coefficient k of x' fixes coefficient k + 1 of x.
    for k in 0..layout.max_order {
        let env = env_at(&xs, k + 1);
        let mut next = Vec::with_capacity(states.len());
        for (_, rhs) in model.equations() {
            let f = eval(rhs, &env, field, k + 1).ok()?;
            next.push(field.mul(&f.0[k], &field.inverse((k + 1) as u64)?));
        }
        for (i, c) in next.into_iter().enumerate() {
            xs[i].0[k + 1] = c;
        }
    }
    for (i, s) in xs.iter().enumerate() {
        for k in 1..len {
            point[layout.state(i, k)] = field.mul(&s.0[k], &fact[k]);
        }
    }
    let env = env_at(&xs, len);
    for (j, (y, g)) in model.outputs().iter().enumerate() {
        let ys = eval(g, &env, field, len).ok()?;
        for k in 0..len {
            point[layout.output(j, k)] = field.mul(&ys.0[k], &fact[k]);
            spec.outputs.push((format!("{y}_{k}"), point[layout.output(j, k)]));
        }
    }
    let q = denominator_product(model, layout)?;
    let qv = q.map_coeffs(field, |c| field.from_bigint(c)).eval(&point);
    point[layout.aux()] = field.inverse(qv)?;
    Some((point, spec))
}

/// Product of the distinct denominators of the right-hand sides and outputs,
/// in the time-zero jet variables.
fn denominator_product(model: &OdeModel, layout: &JetLayout) -> Option<MultiPoly<Integers>> {
    let sym = model.symbol_ring();
    let jring = jet_placeholder_ring(layout);
    let map = time_zero_map(model, layout, &sym);
    let mut dens: Vec<MultiPoly<Integers>> = Vec::new();
    for (_, e) in model.equations().iter().chain(model.outputs()) {
        let rf = e.to_rational(&sym).ok()?;
        if rf.den.is_constant() {
            continue;
        }
        let d = primitive_integer(&rf.den).remap(&jring, &map);
        if !dens.contains(&d) && !dens.contains(&d.neg()) {
            dens.push(d);
        }
    }
    Some(dens.iter().fold(MultiPoly::constant(jring.clone(), Integers, BigInt::one()), |acc, d| &acc * d))
}

/// A nameless ring with the jet layout's size; only used for evaluation.
fn jet_placeholder_ring(layout: &JetLayout) -> Arc<Ring> {
    Ring::new((0..layout.len()).map(|i| format!("v{i}")).collect(), MonomialOrder::DegRevLex)
}

fn time_zero_map(model: &OdeModel, layout: &JetLayout, sym: &Ring) -> Vec<Option<usize>> {
    sym.names()
        .iter()
        .map(|name| {
            if let Some(i) = model.states().iter().position(|s| s == name) {
                Some(layout.state(i, 0))
            } else if let Some(m) = model.params().iter().position(|p| p == name) {
                Some(layout.param(m))
            } else {
                model.inputs().iter().position(|u| u == name).map(|l| layout.input(l, 0))
            }
        })
        .collect()
}

/// Mutable state of the prolongation loop.
struct Prolonger<'a> {
    layout: &'a JetLayout,
    ring: Arc<Ring>,
    field: Zp,
    point: &'a [u64],
    succ: Vec<Option<usize>>,
    /// `xs[i][k]` is the `k`-th derivative of the equation of state `i`.
    xs: Vec<Vec<MultiPoly<Integers>>>,
    ys: Vec<Vec<MultiPoly<Integers>>>,
    q: MultiPoly<Integers>,
    et: Vec<(PolyLabel, MultiPoly<Integers>, Vec<(usize, u64)>)>,
    theta: Vec<usize>,
    in_theta: Vec<bool>,
}

impl<'a> Prolonger<'a> {
    fn new(model: &OdeModel, layout: &'a JetLayout, ring: &Arc<Ring>, field: Zp, point: &'a [u64]) -> Self {
        let sym = model.symbol_ring();
        let map = time_zero_map(model, layout, &sym);
        let one = |v: usize| MultiPoly::<Rationals>::var(ring.clone(), Rationals, v);
        let xs = model
            .equations()
            .iter()
            .enumerate()
            .map(|(i, (_, rhs))| {
                let rf = rhs.to_rational(&sym).expect("validated model");
                let num = rf.num.remap(ring, &map);
                let den = rf.den.remap(ring, &map);
                vec![primitive_integer(&(&(&one(layout.state(i, 1)) * &den) - &num))]
            })
            .collect();
        let ys = model
            .outputs()
            .iter()
            .enumerate()
            .map(|(j, (_, g))| {
                let rf = g.to_rational(&sym).expect("validated model");
                let num = rf.num.remap(ring, &map);
                let den = rf.den.remap(ring, &map);
                vec![primitive_integer(&(&(&one(layout.output(j, 0)) * &den) - &num))]
            })
            .collect();
        let q = denominator_product(model, layout).expect("validated model").with_ring(ring.clone());
        let mut theta: Vec<usize> = (0..layout.params).map(|m| layout.param(m)).collect();
        theta.extend((0..layout.n).map(|i| layout.state(i, 0)));
        let mut in_theta = vec![false; layout.len()];
        for &v in &theta {
            in_theta[v] = true;
        }
        Prolonger {
            layout,
            ring: ring.clone(),
            field,
            point,
            succ: (0..layout.len()).map(|v| layout.successor_checked(v)).collect(),
            xs,
            ys,
            q,
            et: Vec::new(),
            theta,
            in_theta,
        }
    }

    fn derivative(&self, p: &MultiPoly<Integers>) -> MultiPoly<Integers> {
        let mut terms = Vec::new();
        for (m, c) in p.terms() {
            for (v, e) in m.support() {
                let Some(s) = self.succ[v] else { continue };
                let mut m2 = m.clone();
                m2.exps_mut()[v] -= 1;
                m2.exps_mut()[s] += 1;
                terms.push((m2, c * BigInt::from(e)));
            }
        }
        MultiPoly::from_terms(self.ring.clone(), Integers, terms)
    }

    /// Equation with leader `x_i^(k)`, `k >= 1`.
    fn x_eq(&mut self, i: usize, k: usize) -> MultiPoly<Integers> {
        while self.xs[i].len() < k {
            let d = self.derivative(self.xs[i].last().unwrap());
            self.xs[i].push(d);
        }
        self.xs[i][k - 1].clone()
    }

    fn y_eq(&mut self, j: usize, k: usize) -> MultiPoly<Integers> {
        while self.ys[j].len() <= k {
            let d = self.derivative(self.ys[j].last().unwrap());
            self.ys[j].push(d);
        }
        self.ys[j][k].clone()
    }

    fn gradient(&self, p: &MultiPoly<Integers>) -> Vec<(usize, u64)> {
        let f = self.field;
        gradient_at(&p.map_coeffs(f, |c| f.from_bigint(c)), self.point)
    }

    fn state_jets(&self, p: &MultiPoly<Integers>) -> Vec<usize> {
        p.variables().into_iter().filter(|&v| matches!(self.layout.decode(v), Jet::State(..))).collect()
    }

    fn rank(&self, extra: &[(usize, u64)]) -> usize {
        let mut col = vec![usize::MAX; self.layout.len()];
        for (j, &v) in self.theta.iter().enumerate() {
            col[v] = j;
        }
        let rows = self.et.iter().map(|(_, _, g)| g.as_slice()).chain(std::iter::once(extra));
        let mut m = FpMatrix::zeros(self.field, self.et.len() + 1, self.theta.len());
        for (r, g) in rows.enumerate() {
            for &(v, val) in g {
                if col[v] != usize::MAX {
                    m.set(r, col[v], val);
                }
            }
        }
        m.rank()
    }

    fn push(&mut self, label: PolyLabel, p: MultiPoly<Integers>) {
        let g = self.gradient(&p);
        self.et.push((label, p, g));
    }

    fn run(&mut self, s: usize) {
        let m = self.layout.outputs;
        let mut beta = vec![0usize; m];
        let mut possible = vec![true; m];
        while possible.iter().any(|&b| b) {
            for i in 0..m {
                if !possible[i] {
                    continue;
                }
                let cand = self.y_eq(i, beta[i]);
                let g = self.gradient(&cand);
                if self.rank(&g) == self.et.len() + 1 {
                    self.et.push((PolyLabel::Output { output: i, order: beta[i] }, cand, g));
                    beta[i] += 1;
                    let mut to_process: Vec<MultiPoly<Integers>> = self.et.iter().map(|(_, p, _)| p.clone()).collect();
                    for k in 0..m {
                        to_process.push(self.y_eq(k, beta[k]));
                    }
                    while !to_process.is_empty() {
                        let vars: BTreeSet<usize> = to_process.iter().flat_map(|p| self.state_jets(p)).filter(|&v| !self.in_theta[v]).collect();
                        let mut added = Vec::new();
                        for v in vars {
                            let Jet::State(si, k) = self.layout.decode(v) else { unreachable!() };
                            self.theta.push(v);
                            self.in_theta[v] = true;
                            let eq = self.x_eq(si, k);
                            self.push(PolyLabel::State { state: si, order: k - 1 }, eq.clone());
                            added.push(eq);
                        }
                        to_process = added;
                    }
                } else {
                    possible[i] = false;
                }
            }
        }
        // Append any further output derivatives that introduce no new unknowns.
        for i in 0..m {
            for j in beta[i]..=s + 1 {
                let y = self.y_eq(i, j);
                if self.state_jets(&y).iter().all(|&v| self.in_theta[v]) {
                    self.push(PolyLabel::Output { output: i, order: j }, y);
                }
            }
        }
    }

    fn finish(self) -> (Vec<MultiPoly<Integers>>, Vec<PolyLabel>) {
        let z = MultiPoly::var(self.ring.clone(), Integers, self.layout.aux());
        let aux = &(&z * &self.q) - &MultiPoly::constant(self.ring.clone(), Integers, BigInt::one());
        let (mut labels, mut polys): (Vec<_>, Vec<_>) = self.et.into_iter().map(|(l, p, _)| (l, p)).unzip();
        labels.push(PolyLabel::Aux);
        polys.push(aux);
        (polys, labels)
    }
}

impl JetLayout {
    fn successor_checked(&self, v: usize) -> Option<usize> {
        match self.decode(v) {
            Jet::State(_, k) | Jet::Input(_, k) | Jet::Output(_, k) if k == self.max_order => None,
            _ => self.successor(v),
        }
    }
}
