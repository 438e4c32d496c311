//! ODE models `x' = f(x, mu, u)`, `y = g(x, mu, u)` and their text format.

mod expr;
mod parser;

use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::algebra::{MonomialOrder, Ring};

pub use expr::{ConversionError, Expr, RationalFunction};
pub use parser::greek_alias;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("invalid model: {}", join_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// One violated model invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    UnknownSymbol(String),
    DuplicateEquation(String),
    ZeroDenominator(String),
    NameClash(String),
    InputWithEquation(String),
    NoOutputs,
    NoStates,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnknownSymbol(s) => write!(f, "unknown symbol \"{s}\""),
            Diagnostic::DuplicateEquation(s) => write!(f, "duplicate equation \"{s}\""),
            Diagnostic::ZeroDenominator(s) => write!(f, "zero denominator in \"{s}\""),
            Diagnostic::NameClash(s) => write!(f, "name \"{s}\" is used for two different roles"),
            Diagnostic::InputWithEquation(s) => write!(f, "input \"{s}\" has a state equation"),
            Diagnostic::NoOutputs => write!(f, "model has no outputs"),
            Diagnostic::NoStates => write!(f, "model has no state equations"),
        }
    }
}

/// A parsed ODE model. States, parameters and inputs keep declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeModel {
    equations: Vec<(String, Expr)>,
    outputs: Vec<(String, Expr)>,
    inputs: Vec<String>,
    params: Vec<String>,
}

/// Parse and validate model source text.
pub fn parse_model(text: &str) -> Result<OdeModel, ModelError> {
    let model = parser::classify(parser::parse_raw(text)?);
    let diags = validate(&model);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(ModelError::Invalid(diags))
    }
}

/// Every violated invariant, in a stable order. Empty iff the model is well formed.
pub fn validate(model: &OdeModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if model.equations.is_empty() {
        out.push(Diagnostic::NoStates);
    }
    if model.outputs.is_empty() {
        out.push(Diagnostic::NoOutputs);
    }
    let mut seen: Vec<&str> = Vec::new();
    for (s, _) in &model.equations {
        if seen.contains(&s.as_str()) {
            let d = Diagnostic::DuplicateEquation(s.clone());
            if !out.contains(&d) {
                out.push(d);
            }
        }
        seen.push(s);
    }
    let states = model.states();
    for u in &model.inputs {
        if states.contains(&u.as_str()) {
            out.push(Diagnostic::InputWithEquation(u.clone()));
        }
    }
    for p in &model.params {
        if states.contains(&p.as_str()) || model.inputs.contains(p) {
            out.push(Diagnostic::NameClash(p.clone()));
        }
    }
    for (y, _) in &model.outputs {
        if states.contains(&y.as_str()) || model.inputs.contains(y) || model.params.contains(y) {
            out.push(Diagnostic::NameClash(y.clone()));
        }
    }
    let ring = model.symbol_ring();
    let exprs = model.equations.iter().chain(model.outputs.iter());
    for (name, e) in exprs {
        let mut unknown = false;
        for s in e.symbols() {
            if ring.index_of(&s).is_none() {
                let d = Diagnostic::UnknownSymbol(s);
                if !out.contains(&d) {
                    out.push(d);
                }
                unknown = true;
            }
        }
        if !unknown {
            if let Err(ConversionError::ZeroDenominator) = e.to_rational(&ring) {
                out.push(Diagnostic::ZeroDenominator(name.clone()));
            }
        }
    }
    out
}

impl OdeModel {
    /// Assemble a model without validating it; see [`validate`].
    pub fn from_parts(
        equations: Vec<(String, Expr)>,
        outputs: Vec<(String, Expr)>,
        inputs: Vec<String>,
        params: Vec<String>,
    ) -> Self {
        OdeModel { equations, outputs, inputs, params }
    }

    pub fn states(&self) -> Vec<&str> {
        self.equations.iter().map(|(s, _)| s.as_str()).collect()
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[(String, Expr)] {
        &self.outputs
    }

    pub fn equations(&self) -> &[(String, Expr)] {
        &self.equations
    }

    pub fn rhs(&self, state: &str) -> Option<&Expr> {
        self.equations.iter().find(|(s, _)| s == state).map(|(_, e)| e)
    }

    /// Ring over states, then parameters, then inputs (time-zero symbols).
    pub fn symbol_ring(&self) -> Arc<Ring> {
        let mut names: Vec<String> = Vec::new();
        for n in self.states().into_iter().map(str::to_string).chain(self.params.iter().cloned()).chain(self.inputs.iter().cloned()) {
            if !names.contains(&n) {
                names.push(n);
            }
        }
        Ring::new(names, MonomialOrder::DegRevLex)
    }

    /// Fix some parameters to constants everywhere in the model.
    pub fn substitute_params(&self, values: &[(String, BigRational)]) -> OdeModel {
        let sub = |list: &[(String, Expr)]| list.iter().map(|(n, e)| (n.clone(), e.substitute(values))).collect();
        OdeModel {
            equations: sub(&self.equations),
            outputs: sub(&self.outputs),
            inputs: self.inputs.clone(),
            params: self.params.iter().filter(|p| !values.iter().any(|(n, _)| n == *p)).cloned().collect(),
        }
    }
}

/// Canonical text form; parsing it yields an equal model.
impl fmt::Display for OdeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.inputs.is_empty() {
            writeln!(f, "in: {}", self.inputs.join(", "))?;
        }
        if !self.params.is_empty() {
            writeln!(f, "param: {}", self.params.join(", "))?;
        }
        for (s, e) in &self.equations {
            writeln!(f, "{s}' = {e}")?;
        }
        for (y, e) in &self.outputs {
            writeln!(f, "{y} = {e}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOODWIN: &str = include_str!("../../../../models/goodwin.ode");
    const QWWC: &str = include_str!("../../../../models/qwwc.ode");

    #[test]
    fn goodwin_shape() {
        let m = parse_model(GOODWIN).unwrap();
        assert_eq!(m.states(), vec!["x1", "x2", "x3", "x4"]);
        assert_eq!(m.params(), &["b", "c", "alpha", "beta", "gamma", "delta", "sigma"]);
        assert_eq!(m.outputs().len(), 1);
        assert!(validate(&m).is_empty());
    }

    #[test]
    fn minimal_model_with_semicolon() {
        let m = parse_model("x1' = a; y1 = x1").unwrap();
        assert_eq!(m.states(), vec!["x1"]);
        assert_eq!(m.params(), &["a"]);
        assert_eq!(m.outputs()[0].0, "y1");
        assert_eq!(m.rhs("x1"), Some(&Expr::sym("a")));
    }

    #[test]
    fn qwwc_shape() {
        let m = parse_model(QWWC).unwrap();
        assert_eq!(m.states().len(), 4);
        assert_eq!(m.params(), &["a", "e", "f", "c", "d", "b"]);
        assert_eq!(m.outputs()[0], ("g".to_string(), Expr::sym("x")));
    }

    #[test]
    fn unknown_output_symbol() {
        let err = parse_model("x1' = -a*x1\ny = x_missing").unwrap_err();
        assert_eq!(err, ModelError::Invalid(vec![Diagnostic::UnknownSymbol("x_missing".into())]));
        assert_eq!(Diagnostic::UnknownSymbol("x_missing".into()).to_string(), "unknown symbol \"x_missing\"");
    }

    #[test]
    fn duplicate_equation() {
        let err = parse_model("x1' = a\nx1' = b\ny = x1").unwrap_err();
        assert_eq!(err, ModelError::Invalid(vec![Diagnostic::DuplicateEquation("x1".into())]));
    }

    #[test]
    fn validate_programmatic_model() {
        let m = OdeModel::from_parts(
            vec![("x1".into(), Expr::sym("a")), ("x1".into(), Expr::sym("a"))],
            vec![("y".into(), Expr::sym("x1"))],
            vec![],
            vec!["a".into()],
        );
        assert_eq!(validate(&m), vec![Diagnostic::DuplicateEquation("x1".into())]);
    }

    #[test]
    fn zero_denominator_is_diagnosed() {
        let err = parse_model("x' = a/(b - b)\ny = x").unwrap_err();
        assert_eq!(err, ModelError::Invalid(vec![Diagnostic::ZeroDenominator("x".into())]));
        assert!(parse_model("x' = a/0\ny = x").is_err());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_model("x' = a\ny = (x + ").unwrap_err() {
            ModelError::Syntax { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 10);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse_model("x' = a $ b"), Err(ModelError::Syntax { line: 1, col: 8, .. })));
        assert!(matches!(parse_model("x' = a^-2\ny=x"), Err(ModelError::Syntax { .. })));
    }

    #[test]
    fn greek_names_are_normalized() {
        let m = parse_model("x' = -β*x + Λ\ny = x").unwrap();
        assert_eq!(m.params(), &["beta", "Lambda"]);
    }

    #[test]
    fn decimals_are_exact() {
        let m = parse_model("x' = 0.25*x\ny = x").unwrap();
        let half = BigRational::new(1.into(), 4.into());
        assert_eq!(m.rhs("x"), Some(&Expr::Mul(Box::new(Expr::Const(half)), Box::new(Expr::sym("x")))));
    }

    #[test]
    fn inputs_and_explicit_params() {
        let m = parse_model("in: u\nparam: k\nx' = -a*x + u\ny = k*x").unwrap();
        assert_eq!(m.inputs(), &["u"]);
        assert_eq!(m.params(), &["k", "a"]);
    }

    #[test]
    fn canonical_print_is_a_fixed_point() {
        for src in [GOODWIN, QWWC, "in: u\nx' = -(a - b)*x/(c + x^2) + u*(-2)\ny = x - 1/3"] {
            let m = parse_model(src).unwrap();
            let again = parse_model(&m.to_string()).unwrap();
            assert_eq!(m, again, "{}", m);
        }
    }

    #[test]
    fn parameter_substitution() {
        let m = parse_model("x' = -a*x + b\ny = x").unwrap();
        let s = m.substitute_params(&[("b".into(), BigRational::from_integer(5.into()))]);
        assert_eq!(s.params(), &["a"]);
        assert_eq!(s.to_string(), "param: a\nx' = -a*x + 5\ny = x\n");
    }
}
