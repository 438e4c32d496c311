//! Buchberger's algorithm over `Z/pZ` on hash-consed monomials.
//!
//! Monomials live in one table and are referred to by `u32` ids; a
//! polynomial is a vector of `(id, coefficient)` sorted descending. Each
//! monomial carries its (weighted) degree and a 64-bit divisibility mask.
//! Reduction accumulates into a dense array driven by a max-heap of monomials.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::Instant;

use rustc_hash::FxHashMap;

use crate::algebra::{Monomial, MonomialOrder, MultiPoly, Ring, Zp};

pub(crate) type Term = (u32, u32);
pub(crate) type Poly = Vec<Term>;

pub(crate) struct MonTable {
    n: usize,
    weights: Option<Vec<u32>>,
    exps: Vec<u16>,
    wdeg: Vec<u64>,
    mask: Vec<u64>,
    /// Order-preserving prefix: degree, then the last fourteen exponents
    /// complemented, one byte each. Saturation zeroes the rest, so equal
    /// keys only mean "compare in full".
    key: Vec<u128>,
    index: FxHashMap<Box<[u16]>, u32>,
    products: FxHashMap<u64, u32>,
    scratch: Vec<u16>,
}

impl MonTable {
    pub fn new(n: usize, order: &MonomialOrder) -> Self {
        MonTable {
            n,
            weights: order.weights().map(|w| w.to_vec()),
            exps: Vec::new(),
            wdeg: Vec::new(),
            mask: Vec::new(),
            key: Vec::new(),
            index: FxHashMap::default(),
            products: FxHashMap::default(),
            scratch: vec![0; n],
        }
    }

    #[inline]
    pub fn exps(&self, m: u32) -> &[u16] {
        let s = m as usize * self.n;
        &self.exps[s..s + self.n]
    }

    pub fn intern(&mut self, e: &[u16]) -> u32 {
        if let Some(&id) = self.index.get(e) {
            return id;
        }
        let id = self.wdeg.len() as u32;
        let wdeg = self.degree_of(e);
        let mut mask = 0u64;
        for (i, &x) in e.iter().enumerate() {
            if x > 0 {
                mask |= 1 << (i % 64);
            }
        }
        let mut key = (wdeg.min(0xFFFF) as u128) << 112;
        for (j, &x) in e.iter().rev().take(14).enumerate() {
            if x >= 0xFF {
                break;
            }
            key |= ((0xFF - x) as u128) << (104 - 8 * j);
        }
        self.key.push(key);
        self.exps.extend_from_slice(e);
        self.wdeg.push(wdeg);
        self.mask.push(mask);
        self.index.insert(e.into(), id);
        id
    }

    fn intern_scratch(&mut self) -> u32 {
        let buf = std::mem::take(&mut self.scratch);
        let id = self.intern(&buf);
        self.scratch = buf;
        id
    }

    #[inline]
    pub fn key(&self, a: u32) -> u128 {
        self.key[a as usize]
    }

    #[inline]
    pub fn cmp(&self, a: u32, b: u32) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        self.cmp_keyed(self.key[a as usize], a, self.key[b as usize], b)
    }

    #[inline]
    fn cmp_keyed(&self, ka: u128, a: u32, kb: u128, b: u32) -> Ordering {
        if ka != kb && (ka >> 112) as u16 != 0xFFFF {
            return ka.cmp(&kb);
        }
        if a == b {
            return Ordering::Equal;
        }
        self.cmp_full(a, b)
    }

    fn cmp_full(&self, a: u32, b: u32) -> Ordering {
        match self.wdeg[a as usize].cmp(&self.wdeg[b as usize]) {
            Ordering::Equal => {
                let (x, y) = (self.exps(a), self.exps(b));
                for k in (0..self.n).rev() {
                    if x[k] != y[k] {
                        return y[k].cmp(&x[k]);
                    }
                }
                Ordering::Equal
            }
            o => o,
        }
    }

    #[inline]
    pub fn divides(&self, a: u32, b: u32) -> bool {
        if self.mask[a as usize] & !self.mask[b as usize] != 0 {
            return false;
        }
        self.exps(a).iter().zip(self.exps(b)).all(|(x, y)| x <= y)
    }

    pub fn mul(&mut self, a: u32, b: u32) -> u32 {
        let key = if a < b { (a as u64) << 32 | b as u64 } else { (b as u64) << 32 | a as u64 };
        if let Some(&id) = self.products.get(&key) {
            return id;
        }
        let s = self.n;
        let (ia, ib) = (a as usize * s, b as usize * s);
        for k in 0..s {
            self.scratch[k] = self.exps[ia + k] + self.exps[ib + k];
        }
        let id = self.intern_scratch();
        self.products.insert(key, id);
        id
    }

    /// `b / a`, assuming `a | b`.
    pub fn quo(&mut self, a: u32, b: u32) -> u32 {
        let s = self.n;
        let (ia, ib) = (a as usize * s, b as usize * s);
        for k in 0..s {
            self.scratch[k] = self.exps[ib + k] - self.exps[ia + k];
        }
        self.intern_scratch()
    }

    pub fn lcm(&mut self, a: u32, b: u32) -> u32 {
        let s = self.n;
        let (ia, ib) = (a as usize * s, b as usize * s);
        for k in 0..s {
            self.scratch[k] = self.exps[ia + k].max(self.exps[ib + k]);
        }
        self.intern_scratch()
    }

    /// Whether `lcm(a, b) == l`.
    pub fn lcm_is(&self, a: u32, b: u32, l: u32) -> bool {
        let (x, y, z) = (self.exps(a), self.exps(b), self.exps(l));
        (0..self.n).all(|k| x[k].max(y[k]) == z[k])
    }

    pub fn coprime(&self, a: u32, b: u32) -> bool {
        if self.mask[a as usize] & self.mask[b as usize] == 0 {
            return true;
        }
        self.exps(a).iter().zip(self.exps(b)).all(|(x, y)| *x == 0 || *y == 0)
    }

    pub fn degree_of(&self, e: &[u16]) -> u64 {
        match &self.weights {
            None => e.iter().map(|&x| x as u64).sum(),
            Some(w) => e.iter().zip(w).map(|(&x, &w)| x as u64 * w as u64).sum(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.wdeg.len()
    }

    #[inline]
    pub fn wdeg(&self, a: u32) -> u64 {
        self.wdeg[a as usize]
    }

    pub fn is_one(&self, a: u32) -> bool {
        self.exps(a).iter().all(|&x| x == 0)
    }
}

/// Max-heap of monomial ids under the table's order.
struct MonHeap(Vec<(u128, u32)>);

impl MonHeap {
    #[inline]
    fn greater(t: &MonTable, x: (u128, u32), y: (u128, u32)) -> bool {
        t.cmp_keyed(x.0, x.1, y.0, y.1) == Ordering::Greater
    }

    fn push(&mut self, t: &MonTable, m: u32) {
        let h = &mut self.0;
        let item = (t.key(m), m);
        h.push(item);
        let mut i = h.len() - 1;
        while i > 0 {
            let up = (i - 1) / 2;
            if !Self::greater(t, item, h[up]) {
                break;
            }
            h[i] = h[up];
            i = up;
        }
        h[i] = item;
    }

    fn pop(&mut self, t: &MonTable) -> Option<u32> {
        let h = &mut self.0;
        let top = h.first()?.1;
        let last = h.pop().expect("nonempty");
        if h.is_empty() {
            return Some(top);
        }
        let len = h.len();
        let mut i = 0;
        loop {
            let l = 2 * i + 1;
            if l >= len {
                break;
            }
            let c = if l + 1 < len && Self::greater(t, h[l + 1], h[l]) { l + 1 } else { l };
            if !Self::greater(t, h[c], last) {
                break;
            }
            h[i] = h[c];
            i = c;
        }
        h[i] = last;
        Some(top)
    }
}

/// Resource limits; `None` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_pairs: Option<u64>,
    pub max_secs: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_pairs: Some(1_000_000), max_secs: Some(600.0) }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { max_pairs: None, max_secs: None }
    }

    fn exhausted(&self, pairs: u64, start: &Instant) -> bool {
        self.max_pairs.is_some_and(|mx| pairs >= mx) || self.max_secs.is_some_and(|s| start.elapsed().as_secs_f64() > s)
    }
}

/// S-pair selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Smallest degree of the lcm first.
    #[default]
    Normal,
    /// Smallest sugar (degree of the lcm in the homogenized computation) first.
    Sugar,
}

#[derive(Debug, Clone, Default, PartialEq, serde::Serialize)]
pub struct GbStats {
    pub pairs_processed: u64,
    pub zero_reductions: u64,
    pub pairs_skipped: u64,
    pub max_basis_len: usize,
    pub seconds: f64,
}

/// (selection degree, lcm degree, lcm order key, insertion number, lcm, i, j).
type PairKey = (u64, u64, u128, u64, u32, u32, u32);

pub(crate) struct Engine {
    pub t: MonTable,
    p: u64,
    field: Zp,
    strategy: Strategy,
    /// Per monomial: the shortest basis element seen so far whose leading
    /// monomial divides it, or `NONE`.
    reducer: Vec<u32>,
    /// Per monomial: basis length up to which `reducer` is settled.
    checked: Vec<u32>,
    /// Dense accumulator for reduction; `stamp` marks live entries.
    acc: Vec<u64>,
    stamp: Vec<u32>,
    round: u32,
    /// `(basis index, multiplier)` to the span of `multiples` holding the
    /// monomials of `multiplier * tail(basis[index])`.
    multiple_of: FxHashMap<u64, (u32, u32)>,
    multiples: Vec<u32>,
}

const MULTIPLES_CAP: usize = 1 << 26;

const NONE: u32 = u32::MAX;

impl Engine {
    pub fn new(n: usize, order: &MonomialOrder, field: Zp, strategy: Strategy) -> Self {
        Engine {
            t: MonTable::new(n, order),
            p: field.modulus(),
            field,
            strategy,
            reducer: Vec::new(),
            checked: Vec::new(),
            acc: Vec::new(),
            stamp: Vec::new(),
            round: 0,
            multiple_of: FxHashMap::default(),
            multiples: Vec::new(),
        }
    }

    pub fn from_multipoly(&mut self, f: &MultiPoly<Zp>) -> Poly {
        let mut out: Poly = f.terms().iter().map(|(m, c)| (self.t.intern(m.exps()), *c as u32)).collect();
        out.sort_by(|a, b| self.t.cmp(b.0, a.0));
        out
    }

    pub fn to_multipoly(&self, f: &Poly, ring: &Arc<Ring>) -> MultiPoly<Zp> {
        let terms = f.iter().map(|&(m, c)| (Monomial::from_exps(self.t.exps(m).to_vec()), c as u64)).collect();
        MultiPoly::from_terms(ring.clone(), self.field, terms)
    }

    pub fn monic(&self, f: &mut Poly) {
        if let Some(&(_, c)) = f.first() {
            if c != 1 {
                let inv = self.field.inverse(c as u64).expect("nonzero");
                for t in f.iter_mut() {
                    t.1 = (t.1 as u64 * inv % self.p) as u32;
                }
            }
        }
    }

    fn find_reducer(&self, m: u32, basis: &[Poly], active: &[usize]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for &k in active {
            let g = &basis[k];
            if self.t.divides(g[0].0, m) && best.map_or(true, |b| basis[b].len() > g.len()) {
                best = Some(k);
            }
        }
        best
    }

    /// Shortest element of `basis` whose leading monomial divides `m`,
    /// memoized. Only valid while `basis` grows by appending.
    fn find_reducer_cached(&mut self, m: u32, basis: &[Poly]) -> Option<usize> {
        let mi = m as usize;
        if self.reducer.len() <= mi {
            self.reducer.resize(self.t.len(), NONE);
            self.checked.resize(self.t.len(), 0);
        }
        let mut best = (self.reducer[mi] != NONE).then_some(self.reducer[mi] as usize);
        for k in self.checked[mi] as usize..basis.len() {
            if self.t.divides(basis[k][0].0, m) && best.map_or(true, |b| basis[b].len() > basis[k].len()) {
                best = Some(k);
            }
        }
        self.checked[mi] = basis.len() as u32;
        if let Some(k) = best {
            self.reducer[mi] = k as u32;
        }
        best
    }

    /// Full reduction of `f` by the monic polynomials `basis[active]`.
    pub fn reduce(&mut self, f: Poly, basis: &[Poly], active: &[usize]) -> Poly {
        self.reduce_impl(f, basis, active, false)
    }

    /// Full reduction by anything in `basis` (which must only ever grow).
    fn reduce_all(&mut self, f: Poly, basis: &[Poly], active: &[usize]) -> Poly {
        self.reduce_impl(f, basis, active, true)
    }

    fn reduce_impl(&mut self, f: Poly, basis: &[Poly], active: &[usize], cached: bool) -> Poly {
        let p = self.p;
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.round = 1;
        }
        let round = self.round;
        let mut heap = MonHeap(Vec::with_capacity(f.len()));
        self.fit();
        for (m, c) in f {
            self.acc[m as usize] = c as u64;
            self.stamp[m as usize] = round;
            heap.push(&self.t, m);
        }
        let mut out = Vec::new();
        while let Some(m) = heap.pop(&self.t) {
            let mi = m as usize;
            self.stamp[mi] = 0;
            let c = self.acc[mi];
            if c == 0 {
                continue;
            }
            let red = if cached { self.find_reducer_cached(m, basis) } else { self.find_reducer(m, basis, active) };
            match red {
                None => out.push((m, c as u32)),
                Some(k) => {
                    let g = &basis[k];
                    let q = self.t.quo(g[0].0, m);
                    let (start, len) = self.multiple(k, q, g);
                    let neg = p - c;
                    for (idx, &(_, cg)) in g[1..].iter().enumerate() {
                        let mm = if len == 0 { self.t.mul(g[idx + 1].0, q) } else { self.multiples[start as usize + idx] };
                        let add = neg * cg as u64 % p;
                        let i = mm as usize;
                        if i >= self.stamp.len() {
                            self.fit();
                        }
                        if self.stamp[i] == round {
                            let v = self.acc[i] + add;
                            self.acc[i] = if v >= p { v - p } else { v };
                        } else {
                            self.stamp[i] = round;
                            self.acc[i] = add;
                            heap.push(&self.t, mm);
                        }
                    }
                }
            }
        }
        out
    }

    /// Span of cached products `q * tail(g)`; `(0, 0)` once the cache is full.
    fn multiple(&mut self, k: usize, q: u32, g: &Poly) -> (u32, u32) {
        let key = (k as u64) << 32 | q as u64;
        if let Some(&span) = self.multiple_of.get(&key) {
            return span;
        }
        if g.len() <= 1 || self.multiples.len() + g.len() > MULTIPLES_CAP {
            return (0, 0);
        }
        let start = self.multiples.len() as u32;
        for &(mg, _) in &g[1..] {
            let mm = self.t.mul(mg, q);
            self.multiples.push(mm);
        }
        let span = (start, g.len() as u32 - 1);
        self.multiple_of.insert(key, span);
        span
    }

    fn fit(&mut self) {
        let n = self.t.len().next_power_of_two().max(1024);
        if self.stamp.len() < n {
            self.stamp.resize(n, 0);
            self.acc.resize(n, 0);
        }
    }

    fn spoly(&mut self, f: &Poly, g: &Poly) -> Poly {
        let l = self.t.lcm(f[0].0, g[0].0);
        let mf = self.t.quo(f[0].0, l);
        let mg = self.t.quo(g[0].0, l);
        let p = self.p as u32;
        let mut out: Poly = f[1..].iter().map(|&(m, c)| (self.t.mul(m, mf), c)).collect();
        out.extend(g[1..].iter().map(|&(m, c)| (self.t.mul(m, mg), p - c)));
        out.sort_by(|a, b| self.t.cmp(b.0, a.0));
        // Merge equal monomials.
        let mut merged: Poly = Vec::with_capacity(out.len());
        for (m, c) in out {
            match merged.last_mut() {
                Some(last) if last.0 == m => last.1 = ((last.1 as u64 + c as u64) % self.p) as u32,
                _ => merged.push((m, c)),
            }
        }
        merged.retain(|t| t.1 != 0);
        merged
    }

    fn sugar_of(&self, f: &Poly) -> u64 {
        f.iter().map(|t| self.t.wdeg(t.0)).max().unwrap_or(0)
    }

    /// Compute a reduced Gröbner basis of `input`. Returns the basis, whether
    /// the computation finished and statistics.
    pub fn buchberger(&mut self, input: Vec<Poly>, budget: &Budget) -> (Vec<Poly>, bool, GbStats) {
        let start = Instant::now();
        let mut stats = GbStats::default();
        let mut basis: Vec<Poly> = Vec::new();
        let mut sugar: Vec<u64> = Vec::new();
        let mut active: Vec<usize> = Vec::new();
        let mut heap: BinaryHeap<Reverse<PairKey>> = BinaryHeap::new();
        let mut seq = 0u64;
        let mut complete = true;

        let mut pending: Vec<Poly> = input.into_iter().filter(|f| !f.is_empty()).collect();
        pending.sort_by(|a, b| self.t.cmp(a[0].0, b[0].0));
        let mut queue: std::collections::VecDeque<Poly> = pending.into();

        loop {
            let (h, s) = if let Some(f) = queue.pop_front() {
                let s = self.sugar_of(&f);
                (self.reduce_all(f, &basis, &active), s)
            } else if let Some(Reverse((s, _, _, _, _, i, j))) = heap.pop() {
                if budget.exhausted(stats.pairs_processed, &start) {
                    complete = false;
                    break;
                }
                stats.pairs_processed += 1;
                let sp = self.spoly(&basis[i as usize], &basis[j as usize]);
                let h = self.reduce_all(sp, &basis, &active);
                if h.is_empty() {
                    stats.zero_reductions += 1;
                }
                (h, s)
            } else {
                break;
            };
            if h.is_empty() {
                continue;
            }
            let mut h = h;
            self.monic(&mut h);
            if self.t.is_one(h[0].0) {
                basis = vec![h];
                active = vec![0];
                self.reducer.clear();
                self.checked.clear();
                self.multiple_of.clear();
                self.multiples.clear();
                heap.clear();
                break;
            }
            let hi = basis.len();
            let s = s.max(self.sugar_of(&h));
            basis.push(h);
            sugar.push(s);
            self.update(&basis, &sugar, &mut active, hi, &mut heap, &mut seq, &mut stats);
            stats.max_basis_len = stats.max_basis_len.max(active.len());
        }

        // Interreduce the minimal basis.
        let mut minimal: Vec<usize> = active.clone();
        minimal.sort_by(|&a, &b| self.t.cmp(basis[a][0].0, basis[b][0].0));
        let mut out: Vec<Poly> = Vec::with_capacity(minimal.len());
        for (k, &i) in minimal.iter().enumerate() {
            let others: Vec<usize> = minimal.iter().enumerate().filter(|(k2, _)| *k2 != k).map(|(_, &j)| j).collect();
            let g = &basis[i];
            let mut r = vec![g[0]];
            r.extend(self.reduce(g[1..].to_vec(), &basis, &others));
            self.monic(&mut r);
            out.push(r);
        }
        stats.seconds = start.elapsed().as_secs_f64();
        (out, complete, stats)
    }

    /// Gebauer–Möller installation of the new element `h = basis[hi]`.
    #[allow(clippy::too_many_arguments)]
    fn update(
        &mut self,
        basis: &[Poly],
        sugar: &[u64],
        active: &mut Vec<usize>,
        hi: usize,
        heap: &mut BinaryHeap<Reverse<PairKey>>,
        seq: &mut u64,
        stats: &mut GbStats,
    ) {
        let lh = basis[hi][0].0;
        let n = self.t.n;
        // lcm(LM(g), LM(h)) for every active g, kept out of the monomial
        // table until a pair survives.
        let mut lcms: Vec<u16> = Vec::with_capacity(active.len() * n);
        let mut cands: Vec<(u64, bool, u64, usize)> = Vec::with_capacity(active.len());
        for (c, &g) in active.iter().enumerate() {
            let lg = basis[g][0].0;
            let (x, y) = (self.t.exps(lg), self.t.exps(lh));
            lcms.extend(x.iter().zip(y).map(|(a, b)| *a.max(b)));
            let e = &lcms[c * n..];
            let deg = self.t.degree_of(&e[..n]);
            let mask = self.t.mask[lg as usize] | self.t.mask[lh as usize];
            cands.push((deg, !self.t.coprime(lg, lh), mask, c));
        }
        // Chain criterion among the new pairs: drop (g, h) when another new
        // pair's lcm divides its lcm. Coprime pairs sort first among equal
        // degrees so they absorb their equal-lcm twins.
        let mut order: Vec<usize> = (0..cands.len()).collect();
        order.sort_by_key(|&c| (cands[c].0, cands[c].1, c));
        let mut kept: Vec<usize> = Vec::new();
        for &a in &order {
            let (ea, ma) = (&lcms[a * n..(a + 1) * n], cands[a].2);
            let dominated = kept.iter().any(|&b| {
                cands[b].2 & !ma == 0 && lcms[b * n..(b + 1) * n].iter().zip(ea).all(|(x, y)| x <= y)
            });
            if dominated {
                stats.pairs_skipped += 1;
            } else {
                kept.push(a);
            }
        }
        // Product criterion.
        let mut new_pairs = Vec::new();
        for &a in &kept {
            if !cands[a].1 {
                stats.pairs_skipped += 1;
                continue;
            }
            let l = self.t.intern(&lcms[a * n..(a + 1) * n]);
            new_pairs.push((active[cands[a].3], l));
        }
        // Old pairs whose lcm is a multiple of LM(h) but differs from both
        // lcms with h are superfluous.
        let before = heap.len();
        let old = std::mem::take(heap).into_vec();
        let kept: Vec<Reverse<PairKey>> = old
            .into_iter()
            .filter(|Reverse((_, _, _, _, l, i, j))| {
                !(self.t.divides(lh, *l)
                    && !self.t.lcm_is(basis[*i as usize][0].0, lh, *l)
                    && !self.t.lcm_is(basis[*j as usize][0].0, lh, *l))
            })
            .collect();
        stats.pairs_skipped += (before - kept.len()) as u64;
        *heap = BinaryHeap::from(kept);
        for (g, l) in new_pairs {
            *seq += 1;
            let dl = self.t.wdeg(l);
            let key = match self.strategy {
                Strategy::Normal => dl,
                Strategy::Sugar => {
                    let sg = sugar[g] + dl - self.t.wdeg(basis[g][0].0);
                    let sh = sugar[hi] + dl - self.t.wdeg(lh);
                    sg.max(sh)
                }
            };
            heap.push(Reverse((key, dl, self.t.key(l), *seq, l, g as u32, hi as u32)));
        }
        active.retain(|&g| !self.t.divides(lh, basis[g][0].0));
        active.push(hi);
    }
}
