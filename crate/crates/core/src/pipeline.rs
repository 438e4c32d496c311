//! End-to-end runs and the benchmark table.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::algebra::{is_prime, MonomialOrder, DEFAULT_PRIME};
use crate::basis::{enumerate_with, Analysis, BasisCandidate, BasisError, CandidatePool, DEFAULT_POOL_CAP};
use crate::entropy::{entropy_csv, score_pool, select_best};
use crate::groebner::{buchberger, classify, export_system, Budget, ClassifyError, ExportFormat, GbStats, IdentReport, Script};
use crate::mem;
use crate::model::{parse_model, ModelError, OdeModel};
use crate::prolong::{generate_et, GenerationError, PolySystem, SpecializationConfig};
use crate::subst::{substitute_basis, SubstError, SubstitutionRecord};

pub const BUDGET_ENV: &str = "IDENTFORGE_BUDGET_SECS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Default,
    ZeroDim,
    ZeroDimWeights,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Default => "default",
            Mode::ZeroDim => "zerodim",
            Mode::ZeroDimWeights => "zerodim-weights",
        }
    }

    pub fn substitutes(self) -> bool {
        self != Mode::Default
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "default" => Ok(Mode::Default),
            "zerodim" | "zero-dim" => Ok(Mode::ZeroDim),
            "zerodim-weights" | "zero-dim-weights" => Ok(Mode::ZeroDimWeights),
            _ => Err(PipelineError::Config(format!("unknown mode \"{s}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: PathBuf,
    pub prime: u64,
    pub seed: u64,
    pub candidates: usize,
    pub mode: Mode,
    pub weights: Option<PathBuf>,
    pub export: Option<ExportFormat>,
    pub prob: BigRational,
    pub budget: Budget,
    pub report_entropy: bool,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            prime: DEFAULT_PRIME,
            seed: 1,
            candidates: DEFAULT_POOL_CAP,
            mode: Mode::Default,
            weights: None,
            export: None,
            prob: BigRational::new(99.into(), 100.into()),
            budget: Budget::default(),
            report_entropy: false,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !is_prime(self.prime) {
            return Err(PipelineError::Config(format!("{} is not prime", self.prime)));
        }
        if !self.prob.is_positive() || self.prob >= BigRational::one() {
            return Err(PipelineError::Config(format!("probability {} is not in (0, 1)", self.prob)));
        }
        if self.candidates == 0 {
            return Err(PipelineError::Config("candidate cap must be at least 1".into()));
        }
        if self.mode == Mode::ZeroDimWeights && self.weights.is_none() {
            return Err(PipelineError::Config("mode zerodim-weights needs a weight file".into()));
        }
        Ok(())
    }

    /// The budget with the time cap taken from `IDENTFORGE_BUDGET_SECS` when set.
    pub fn effective_budget(&self) -> Result<Budget, PipelineError> {
        budget_from_env(self.budget)
    }
}

pub fn budget_from_env(base: Budget) -> Result<Budget, PipelineError> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => {
            let secs: f64 = s
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite() && *v >= 0.0)
                .ok_or_else(|| PipelineError::Config(format!("{BUDGET_ENV}={s} is not a number of seconds")))?;
            Ok(Budget { max_secs: Some(secs), ..base })
        }
        Err(_) => Ok(base),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse: {0}")]
    Parse(#[from] ModelError),
    #[error("generate: {0}")]
    Generate(#[from] GenerationError),
    #[error("basis: {0}")]
    Basis(#[from] BasisError),
    #[error("select: empty candidate pool")]
    EmptyPool,
    #[error("substitute: {0}")]
    Substitute(#[from] SubstError),
    #[error("weights: {0}")]
    Weights(String),
    #[error("classify: {0}")]
    Classify(#[from] ClassifyError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings {
    pub generate: f64,
    pub basis: f64,
    pub substitute: f64,
    /// The Gröbner stage alone.
    pub groebner: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub model: String,
    pub mode: Mode,
    pub polys: usize,
    pub vars: usize,
    pub transcendence_degree: usize,
    pub pool: Option<CandidatePool>,
    pub basis: Option<BasisCandidate>,
    pub substitution: Option<SubstitutionRecord>,
    /// The system handed to the Gröbner stage or the exporter.
    pub system: PolySystem,
    pub script: Option<Script>,
    pub gb_stats: Option<GbStats>,
    pub complete: bool,
    pub report: Option<IdentReport>,
    pub peak_bytes: Option<usize>,
    pub timings: Timings,
}

impl RunOutcome {
    pub fn budget_exhausted(&self) -> bool {
        self.gb_stats.is_some() && !self.complete
    }

    /// `candidate,member,entropy` CSV of the scored pool.
    pub fn entropy_csv(&self) -> Option<String> {
        self.pool.as_ref().map(|p| entropy_csv(&p.candidates))
    }

    pub fn bench_row(&self) -> BenchRow {
        let mut row = BenchRow::new(&self.model);
        row.polys = Some(self.polys);
        row.vars = Some(self.vars);
        row.transcendence_degree = Some(self.transcendence_degree);
        row.cells.push(self.bench_cell());
        row
    }

    pub fn bench_cell(&self) -> BenchCell {
        BenchCell {
            mode: self.mode,
            seconds: self.gb_stats.as_ref().map(|_| self.timings.groebner),
            peak_bytes: self.peak_bytes,
            complete: self.gb_stats.is_some() && self.complete,
            vars: Some(self.system.vars().len()),
        }
    }

    /// Human-readable summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "model {}  mode {}\nE^t: {} polynomials, {} variables, transcendence degree {}\n",
            self.model, self.mode, self.polys, self.vars, self.transcendence_degree
        );
        if let Some(pool) = &self.pool {
            out += &format!("candidate pool: {} valid of {} tested (C = {})\n", pool.candidates.len(), pool.sampled, pool.total);
        }
        if let Some(b) = &self.basis {
            let h: Vec<String> = b.entropies.iter().map(|h| format!("{h:.3}")).collect();
            out += &format!("basis: {{{}}}  entropies ({})\n", b.members.join(", "), h.join(", "));
        }
        if let Some(s) = &self.substitution {
            let e: Vec<String> = s.entries.iter().map(|e| format!("{} => {}", e.member, e.value)).collect();
            out += &format!("substituted: {}  (range [1, {}])\n", e.join(", "), s.range_max);
        }
        out += &format!("system: {} polynomials, {} variables\n", self.system.polys().len(), self.system.vars().len());
        if let Some(st) = &self.gb_stats {
            out += &format!(
                "groebner: {} in {:.3} s, {} pairs, {} zero reductions, peak basis {}\n",
                if self.complete { "complete" } else { "budget exhausted" },
                self.timings.groebner,
                st.pairs_processed,
                st.zero_reductions,
                st.max_basis_len
            );
        }
        if let Some(r) = &self.report {
            for p in &r.params {
                out += &format!("  {:<12} {}\n", p.name, p.class);
            }
        }
        out
    }
}

fn model_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn load_model(path: &Path) -> Result<OdeModel, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    Ok(parse_model(&text)?)
}

/// `name weight` per line (`=` or `:` may separate); `#` starts a comment.
pub fn parse_weights(text: &str) -> Result<Vec<(String, u32)>, PipelineError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == '=' || c == ':').filter(|s| !s.is_empty()).collect();
        let bad = || PipelineError::Weights(format!("line {}: expected `name weight`, got \"{raw}\"", no + 1));
        if parts.len() != 2 {
            return Err(bad());
        }
        let w: u32 = parts[1].parse().map_err(|_| bad())?;
        if w == 0 {
            return Err(PipelineError::Weights(format!("line {}: weights must be positive", no + 1)));
        }
        out.push((parts[0].to_string(), w));
    }
    Ok(out)
}

/// Weighted degrevlex order for `sys`; unlisted variables weigh 1 and names
/// substituted away upstream are skipped.
pub fn weighted_order(sys: &PolySystem, weights: &[(String, u32)]) -> Result<MonomialOrder, PipelineError> {
    let mut w = vec![1u32; sys.vars().len()];
    for (name, value) in weights {
        match sys.var_index(name) {
            Some(i) => w[i] = *value,
            None if ancestor_has(sys, name) => {}
            None => return Err(PipelineError::Weights(format!("unknown variable {name}"))),
        }
    }
    MonomialOrder::weighted(w).map_err(|e| PipelineError::Weights(e.to_string()))
}

fn ancestor_has(sys: &PolySystem, name: &str) -> bool {
    let mut cur = sys.parent();
    while let Some(p) = cur {
        if p.var_index(name).is_some() {
            return true;
        }
        cur = p.parent();
    }
    false
}

/// Read the model at `cfg.model` and run it.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let model = load_model(&cfg.model)?;
    run_model(&model, &model_name(&cfg.model), cfg)
}

pub fn run_model(model: &OdeModel, name: &str, cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    cfg.validate()?;
    let budget = cfg.effective_budget()?;
    let weights = match (&cfg.weights, cfg.mode) {
        (Some(path), Mode::ZeroDimWeights) => {
            let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.clone(), source })?;
            Some(parse_weights(&text)?)
        }
        _ => None,
    };
    let start = Instant::now();
    let mut timings = Timings::default();

    let spec = SpecializationConfig { seed: cfg.seed, prime: cfg.prime, prob: cfg.prob.clone(), ..Default::default() };
    let sys = Arc::new(generate_et(model, &spec)?);
    timings.generate = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let analysis = Analysis::new(&sys, cfg.seed)?;
    let tr_deg = analysis.transcendence_degree();
    let (pool, basis) = if cfg.mode.substitutes() {
        let mut pool = enumerate_with(&analysis, &sys, cfg.candidates, cfg.seed)?;
        score_pool(&sys, &mut pool);
        let best = select_best(&pool.candidates).ok_or(PipelineError::EmptyPool)?.clone();
        (Some(pool), Some(best))
    } else {
        (None, None)
    };
    timings.basis = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (system, substitution) = match &basis {
        Some(b) => {
            let (s, rec) = substitute_basis(&sys, &b.members, cfg.seed, &cfg.prob)?;
            (s, Some(rec))
        }
        None => ((*sys).clone(), None),
    };
    timings.substitute = t.elapsed().as_secs_f64();

    let order = match &weights {
        Some(w) => weighted_order(&system, w)?,
        None => system.ring().order().clone(),
    };

    let mut out = RunOutcome {
        model: name.to_string(),
        mode: cfg.mode,
        polys: sys.polys().len(),
        vars: sys.vars().len(),
        transcendence_degree: tr_deg,
        pool,
        basis,
        substitution,
        system,
        script: None,
        gb_stats: None,
        complete: false,
        report: None,
        peak_bytes: None,
        timings,
    };

    if let Some(fmt) = cfg.export {
        out.script = Some(export_system(&out.system, fmt, &order));
    } else {
        mem::reset_peak();
        let t = Instant::now();
        let g = buchberger(&out.system, &order, &budget);
        out.timings.groebner = t.elapsed().as_secs_f64();
        out.peak_bytes = mem::peak_bytes();
        out.complete = g.is_complete();
        out.gb_stats = Some(g.stats().clone());
        if g.is_complete() {
            let mut report = classify(&g, &out.system)?;
            report.substitution = out.substitution.clone();
            out.report = Some(report);
        }
    }
    out.timings.total = start.elapsed().as_secs_f64();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCell {
    pub mode: Mode,
    /// Gröbner-stage wall time; `None` when the run failed.
    pub seconds: Option<f64>,
    pub peak_bytes: Option<usize>,
    pub complete: bool,
    pub vars: Option<usize>,
}

impl BenchCell {
    fn failed(mode: Mode) -> Self {
        BenchCell { mode, seconds: None, peak_bytes: None, complete: false, vars: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub model: String,
    pub polys: Option<usize>,
    pub vars: Option<usize>,
    pub transcendence_degree: Option<usize>,
    pub cells: Vec<BenchCell>,
}

impl BenchRow {
    pub fn new(model: &str) -> Self {
        BenchRow { model: model.to_string(), polys: None, vars: None, transcendence_degree: None, cells: Vec::new() }
    }

    pub fn cell(&self, mode: Mode) -> Option<&BenchCell> {
        self.cells.iter().find(|c| c.mode == mode)
    }

    /// Default time over `mode` time, when both runs completed.
    pub fn speedup(&self, mode: Mode) -> Option<f64> {
        let d = self.cell(Mode::Default).filter(|c| c.complete)?.seconds?;
        let m = self.cell(mode).filter(|c| c.complete)?.seconds?;
        (m > 0.0).then(|| d / m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub modes: Vec<Mode>,
    pub rows: Vec<BenchRow>,
}

fn na<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_else(|| "N/A".into())
}

impl BenchTable {
    fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["model", "polys", "vars", "tr_deg"].iter().map(|s| s.to_string()).collect();
        for m in &self.modes {
            h.push(format!("{m}_secs"));
            h.push(format!("{m}_mib"));
            if *m != Mode::Default {
                h.push(format!("{m}_speedup"));
            }
        }
        h
    }

    fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut rec = vec![
                    r.model.clone(),
                    na(r.polys, |v| v.to_string()),
                    na(r.vars, |v| v.to_string()),
                    na(r.transcendence_degree, |v| v.to_string()),
                ];
                for m in &self.modes {
                    let c = r.cell(*m).filter(|c| c.complete);
                    rec.push(na(c.and_then(|c| c.seconds), |s| format!("{s:.3}")));
                    rec.push(na(c.and_then(|c| c.peak_bytes), |b| format!("{:.1}", b as f64 / (1 << 20) as f64)));
                    if *m != Mode::Default {
                        rec.push(na(r.speedup(*m), |s| format!("{s:.2}")));
                    }
                }
                rec
            })
            .collect()
    }

    /// Aligned plain-text table.
    pub fn text(&self) -> String {
        let header = self.header();
        let records = self.records();
        let mut width: Vec<usize> = header.iter().map(String::len).collect();
        for r in &records {
            for (w, s) in width.iter_mut().zip(r) {
                *w = (*w).max(s.len());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> =
                cells.iter().zip(&width).enumerate().map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") }).collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&header);
        for r in &records {
            out += &line(r);
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.header()).expect("in-memory write");
        for r in self.records() {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Run every model under every mode; failures become N/A cells.
pub fn bench_table(models: &[PathBuf], modes: &[Mode], cfg: &RunConfig) -> BenchTable {
    let rows = models
        .iter()
        .map(|path| {
            let mut row = BenchRow::new(&model_name(path));
            for &mode in modes {
                let run = RunConfig { model: path.clone(), mode, export: None, ..cfg.clone() };
                match run_pipeline(&run) {
                    Ok(out) => {
                        row.polys = Some(out.polys);
                        row.vars = Some(out.vars);
                        row.transcendence_degree = Some(out.transcendence_degree);
                        row.cells.push(out.bench_cell());
                    }
                    Err(_) => row.cells.push(BenchCell::failed(mode)),
                }
            }
            row
        })
        .collect();
    BenchTable { modes: modes.to_vec(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_parse() {
        assert_eq!("zerodim".parse::<Mode>().unwrap(), Mode::ZeroDim);
        assert_eq!("zero-dim-weights".parse::<Mode>().unwrap(), Mode::ZeroDimWeights);
        assert!("fast".parse::<Mode>().is_err());
    }

    #[test]
    fn config_checks() {
        let mut cfg = RunConfig::new("m.ode");
        assert!(cfg.validate().is_ok());
        cfg.prime = 100;
        assert!(cfg.validate().is_err());
        cfg.prime = 101;
        cfg.prob = BigRational::one();
        assert!(cfg.validate().is_err());
        cfg.prob = BigRational::new(1.into(), 2.into());
        cfg.mode = Mode::ZeroDimWeights;
        assert!(cfg.validate().is_err());
        cfg.weights = Some("w.txt".into());
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn weight_file_syntax() {
        let w = parse_weights("# order\nx1_0 2\nb = 3\n\ngamma: 1  # trailing\n").unwrap();
        assert_eq!(w, [("x1_0".to_string(), 2), ("b".to_string(), 3), ("gamma".to_string(), 1)]);
        assert!(parse_weights("a 0").is_err());
        assert!(parse_weights("a b c").is_err());
        assert!(parse_weights("a -1").is_err());
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = bench_table(&[], &[Mode::Default, Mode::ZeroDim], &RunConfig::new(""));
        assert_eq!(t.text().lines().count(), 1);
        assert_eq!(t.csv(), "model,polys,vars,tr_deg,default_secs,default_mib,zerodim_secs,zerodim_mib,zerodim_speedup\n");
    }

    #[test]
    fn speedup_needs_both_runs() {
        let mut row = BenchRow::new("m");
        let cell = |mode, s, complete| BenchCell { mode, seconds: Some(s), peak_bytes: None, complete, vars: None };
        row.cells.push(cell(Mode::Default, 6.0, true));
        row.cells.push(cell(Mode::ZeroDim, 2.0, true));
        assert_eq!(row.speedup(Mode::ZeroDim), Some(3.0));
        row.cells[0].complete = false;
        assert_eq!(row.speedup(Mode::ZeroDim), None);
        let t = BenchTable { modes: vec![Mode::Default, Mode::ZeroDim], rows: vec![row] };
        assert!(t.csv().lines().nth(1).unwrap().starts_with("m,N/A,N/A,N/A,N/A,N/A,2.000,N/A,N/A"));
    }

    #[test]
    fn missing_model_is_an_error() {
        let err = run_pipeline(&RunConfig::new("/nonexistent/model.ode")).unwrap_err();
        assert!(matches!(err, PipelineError::Io { .. }));
    }
}
