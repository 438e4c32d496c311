//! Gröbner bases over `Z/pZ` and the identifiability classifier built on them.

mod classify;
mod engine;
mod export;

use std::sync::Arc;

use crate::algebra::{MonomialOrder, MultiPoly, Ring, Zp};
use crate::prolong::PolySystem;

pub use classify::{classify, ClassifyError, IdentClass, IdentReport, ParamReport};
pub use engine::{Budget, GbStats, Strategy};
pub use export::{export_system, read_export, ExportError, ExportFormat, Exported, Script};

#[derive(Debug, Clone)]
pub struct GroebnerBasis {
    ring: Arc<Ring>,
    field: Zp,
    generators: Vec<MultiPoly<Zp>>,
    complete: bool,
    stats: GbStats,
}

impl GroebnerBasis {
    pub fn generators(&self) -> &[MultiPoly<Zp>] {
        &self.generators
    }

    pub fn order(&self) -> &MonomialOrder {
        self.ring.order()
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn field(&self) -> Zp {
        self.field
    }

    /// False when the budget ran out before all pairs were processed.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn stats(&self) -> &GbStats {
        &self.stats
    }

    pub fn is_unit(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].is_constant()
    }
}

/// Reduced Gröbner basis of `polys` with respect to `order`.
pub fn buchberger_polys(polys: &[MultiPoly<Zp>], field: Zp, order: &MonomialOrder, budget: &Budget) -> GroebnerBasis {
    buchberger_with(polys, field, order, budget, Strategy::default())
}

pub fn buchberger_with(polys: &[MultiPoly<Zp>], field: Zp, order: &MonomialOrder, budget: &Budget, strategy: Strategy) -> GroebnerBasis {
    let base = polys.first().map(|p| p.ring().clone()).unwrap_or_else(|| Ring::new(Vec::new(), order.clone()));
    let ring = base.with_order(order.clone());
    let mut eng = engine::Engine::new(ring.nvars(), order, field, strategy);
    let input: Vec<_> = polys.iter().map(|p| eng.from_multipoly(&p.with_ring(ring.clone()))).collect();
    let (gb, complete, stats) = eng.buchberger(input, budget);
    let generators = gb.iter().map(|g| eng.to_multipoly(g, &ring)).collect();
    GroebnerBasis { ring, field, generators, complete, stats }
}

pub fn buchberger(sys: &PolySystem, order: &MonomialOrder, budget: &Budget) -> GroebnerBasis {
    if sys.polys().is_empty() {
        let ring = sys.ring().with_order(order.clone());
        return GroebnerBasis { ring, field: sys.field(), generators: Vec::new(), complete: true, stats: GbStats::default() };
    }
    buchberger_polys(sys.polys(), sys.field(), order, budget)
}

/// Remainder of `f` on division by `g`.
pub fn normal_form(f: &MultiPoly<Zp>, g: &GroebnerBasis) -> MultiPoly<Zp> {
    let mut eng = engine::Engine::new(g.ring.nvars(), g.order(), g.field, Strategy::default());
    let basis: Vec<_> = g.generators.iter().map(|p| eng.from_multipoly(p)).collect();
    let active: Vec<usize> = (0..basis.len()).collect();
    let ff = eng.from_multipoly(&f.with_ring(g.ring.clone()));
    let r = eng.reduce(ff, &basis, &active);
    eng.to_multipoly(&r, &g.ring)
}
