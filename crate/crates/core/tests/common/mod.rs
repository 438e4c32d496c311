//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use identforge::algebra::{Monomial, MonomialOrder, MultiPoly, Ring, Zp};
use identforge::prolong::{PolySystem, SysVar, VarKind};
use rand::Rng;

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn model_path(name: &str) -> PathBuf {
    models_dir().join(format!("{name}.ode"))
}

pub fn ring(n: usize) -> Arc<Ring> {
    Ring::new((0..n).map(|i| format!("v{i}")).collect(), MonomialOrder::DegRevLex)
}

/// Random polynomial with 1 to 4 terms of total degree at most 3.
pub fn random_poly(rng: &mut impl Rng, r: &Arc<Ring>, f: Zp) -> MultiPoly<Zp> {
    let n = r.nvars();
    let terms = (0..rng.gen_range(1..=4))
        .map(|_| {
            let d = rng.gen_range(0..=3);
            let mut e = vec![0u16; n];
            for _ in 0..d {
                e[rng.gen_range(0..n)] += 1;
            }
            (Monomial::from_exps(e), rng.gen_range(1..f.modulus()))
        })
        .collect();
    MultiPoly::from_terms(r.clone(), f, terms)
}

/// Textbook multivariate division, written against the generic polynomial
/// type only.
pub fn divide(f: &MultiPoly<Zp>, gs: &[MultiPoly<Zp>]) -> MultiPoly<Zp> {
    let k = *f.coeffs();
    let mut p = f.clone();
    let mut rem = MultiPoly::zero(f.ring().clone(), k);
    while let Some((m, c)) = p.leading_term().cloned() {
        match gs.iter().find(|g| g.leading_monomial().is_some_and(|l| l.divides(&m))) {
            Some(g) => {
                let (lm, lc) = g.leading_term().unwrap().clone();
                let q = lm.div(&m).unwrap();
                let coef = k.modulus() - (c * k.inverse(lc).unwrap() % k.modulus());
                p = p.checked_add(&g.mul_term(&q, &coef)).unwrap();
            }
            None => {
                let t = MultiPoly::from_terms(f.ring().clone(), k, vec![(m.clone(), c)]);
                rem = rem.checked_add(&t).unwrap();
                p = p.checked_sub(&t).unwrap();
            }
        }
    }
    rem
}

pub fn s_poly(f: &MultiPoly<Zp>, g: &MultiPoly<Zp>) -> MultiPoly<Zp> {
    let k = *f.coeffs();
    let (mf, cf) = f.leading_term().unwrap().clone();
    let (mg, cg) = g.leading_term().unwrap().clone();
    let l = mf.lcm(&mg);
    let a = f.mul_term(&mf.div(&l).unwrap(), &k.inverse(cf).unwrap());
    let b = g.mul_term(&mg.div(&l).unwrap(), &k.inverse(cg).unwrap());
    a.checked_sub(&b).unwrap()
}

/// All points of `F_p^n` where every polynomial vanishes.
pub fn variety(polys: &[MultiPoly<Zp>], n: usize, p: u64) -> Vec<Vec<u64>> {
    let terms: Vec<Vec<(Vec<u16>, u64)>> =
        polys.iter().map(|f| f.terms().iter().map(|(m, c)| (m.exps().to_vec(), *c)).collect()).collect();
    let maxdeg = terms.iter().flatten().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0) as usize;
    let mut out = Vec::new();
    let mut pt = vec![0u64; n];
    let mut pw = vec![vec![1u64; maxdeg + 1]; n];
    let total = (p as usize).pow(n as u32);
    for idx in 0..total {
        let mut r = idx;
        for (v, x) in pt.iter_mut().enumerate() {
            *x = (r % p as usize) as u64;
            r /= p as usize;
            for d in 1..=maxdeg {
                pw[v][d] = pw[v][d - 1] * *x % p;
            }
        }
        let zero = terms.iter().all(|ts| {
            ts.iter().fold(0u64, |acc, (e, c)| {
                let mut t = *c;
                for (v, &d) in e.iter().enumerate() {
                    if d > 0 {
                        t = t * pw[v][d as usize] % p;
                    }
                }
                (acc + t) % p
            }) == 0
        });
        if zero {
            out.push(pt.clone());
        }
    }
    out
}

/// A radical ideal whose points are all rational: a triangular system in
/// the constrained coordinates, each equation a product of distinct shifts
/// of one affine form, some coordinates left free, then a random invertible
/// linear change of variables. Returns the generators and one point.
pub fn split_system(rng: &mut impl Rng, n: usize, p: u64) -> (Vec<MultiPoly<Zp>>, Vec<u64>) {
    let f = Zp::new(p).unwrap();
    let r = ring(n);
    let var = |i: usize| MultiPoly::var(r.clone(), f, i);
    let cst = |c: u64| MultiPoly::constant(r.clone(), f, c % p);
    // Internal coordinates u_i = v_i before the change of variables.
    let free: Vec<bool> = (0..n).map(|i| i > 0 && rng.gen_bool(0.3)).collect();
    let mut gens = Vec::new();
    for i in 0..n {
        if free[i] {
            continue;
        }
        let mut affine = cst(0);
        for j in 0..i {
            if rng.gen_bool(0.6) {
                affine = affine.checked_add(&var(j).scale(&rng.gen_range(1..p))).unwrap();
            }
        }
        let roots = rng.gen_range(1..=3);
        let mut shifts: Vec<u64> = Vec::new();
        while shifts.len() < roots {
            let s = rng.gen_range(0..p);
            if !shifts.contains(&s) {
                shifts.push(s);
            }
        }
        let mut g = cst(1);
        for s in shifts {
            let factor = var(i).checked_sub(&affine).unwrap().checked_sub(&cst(s)).unwrap();
            g = g.checked_mul(&factor).unwrap();
        }
        gens.push(g);
    }
    // Random invertible change of variables v -> A v, kept degree-preserving.
    let a = loop {
        let m: Vec<Vec<u64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect()).collect();
        if identforge::linalg::FpMatrix::from_rows(f, m.clone()).rank() == n {
            break m;
        }
    };
    let images: Vec<MultiPoly<Zp>> = (0..n)
        .map(|i| (0..n).fold(cst(0), |acc, j| acc.checked_add(&var(j).scale(&a[i][j])).unwrap()))
        .collect();
    let gens: Vec<MultiPoly<Zp>> = gens.iter().map(|g| compose(g, &images)).collect();
    let pts = variety(&gens, n, p);
    let witness = pts[rng.gen_range(0..pts.len())].clone();
    (gens, witness)
}

/// `g(images[0], ..., images[n-1])`.
pub fn compose(g: &MultiPoly<Zp>, images: &[MultiPoly<Zp>]) -> MultiPoly<Zp> {
    let k = *g.coeffs();
    let mut out = MultiPoly::zero(g.ring().clone(), k);
    for (m, c) in g.terms() {
        let mut t = MultiPoly::constant(g.ring().clone(), k, *c);
        for (v, &e) in m.exps().iter().enumerate() {
            t = t.checked_mul(&images[v].pow(e as u32)).unwrap();
        }
        out = out.checked_add(&t).unwrap();
    }
    out
}

pub fn param_system(polys: Vec<MultiPoly<Zp>>, n: usize, p: u64, witness: Vec<u64>) -> PolySystem {
    let r = ring(n);
    let vars = (0..n).map(|i| SysVar::new(format!("v{i}"), VarKind::Parameter)).collect();
    PolySystem::new(r, Zp::new(p).unwrap(), vars, polys).with_witness(witness)
}

/// Buchberger output on `count` random ideals over `F_101` in at most four
/// variables, checked by textbook division (generators and S-polynomials
/// reduce to zero, output monic and interreduced) and, for at most three
/// variables, by comparing rational points with the input.
pub fn check_random_ideals(count: usize, seed: u64) -> Result<(), String> {
    use identforge::groebner::{buchberger_polys, Budget};
    use rand::SeedableRng;
    let p = 101;
    let f = Zp::new(p).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for case in 0..count {
        let n = rng.gen_range(1..=4);
        let r = ring(n);
        let input: Vec<_> = (0..rng.gen_range(1..=3)).map(|_| random_poly(&mut rng, &r, f)).collect();
        let g = buchberger_polys(&input, f, r.order(), &Budget::unlimited());
        if !g.is_complete() {
            return Err(format!("case {case}: incomplete"));
        }
        let gens = g.generators();
        for h in &input {
            if !divide(h, gens).is_zero() {
                return Err(format!("case {case}: generator {h} does not reduce"));
            }
        }
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if !divide(&s_poly(&gens[i], &gens[j]), gens).is_zero() {
                    return Err(format!("case {case}: S({}, {}) does not reduce", gens[i], gens[j]));
                }
            }
            if gens[i].leading_coeff().copied() != Some(1) {
                return Err(format!("case {case}: {} is not monic", gens[i]));
            }
            let lm = gens[i].leading_monomial().unwrap();
            if gens.iter().enumerate().any(|(j, o)| j != i && o.terms().iter().any(|(m, _)| lm.divides(m))) {
                return Err(format!("case {case}: basis is not interreduced"));
            }
        }
        if n <= 3 && variety(&input, n, p) != variety(gens, n, p) {
            return Err(format!("case {case}: rational points differ"));
        }
    }
    Ok(())
}

/// Class from the rational points alone: one value, a few, or a whole line.
pub fn enumerated_class(points: &[Vec<u64>], v: usize) -> identforge::groebner::IdentClass {
    use identforge::groebner::IdentClass;
    let mut vals: Vec<u64> = points.iter().map(|x| x[v]).collect();
    vals.sort();
    vals.dedup();
    match vals.len() {
        1 => IdentClass::Global,
        k if k <= 27 => IdentClass::Local,
        _ => IdentClass::NonIdentifiable,
    }
}

/// `classify` against exhaustive enumeration on `count` split systems in at
/// most three variables. Returns how often each class was expected.
pub fn check_classify(count: usize, seed: u64) -> Result<[usize; 3], String> {
    use identforge::groebner::{buchberger, classify, Budget};
    use rand::SeedableRng;
    let p = 101;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen = [0usize; 3];
    for case in 0..count {
        let n = rng.gen_range(1..=3);
        let (polys, witness) = split_system(&mut rng, n, p);
        let points = variety(&polys, n, p);
        let sys = param_system(polys, n, p, witness);
        let g = buchberger(&sys, sys.ring().order(), &Budget::unlimited());
        let report = classify(&g, &sys).map_err(|e| format!("case {case}: {e}"))?;
        for v in 0..n {
            let want = enumerated_class(&points, v);
            let got = report.class_of(&format!("v{v}"));
            if got != Some(want) {
                return Err(format!("case {case}, v{v}: classify says {got:?}, points say {want:?}\n{}", sys.to_psys()));
            }
            seen[want as usize] += 1;
        }
    }
    Ok(seen)
}
