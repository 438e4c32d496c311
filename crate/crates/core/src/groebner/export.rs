//! Input scripts for external Gröbner engines.

use std::str::FromStr;

use crate::algebra::{MonomialOrder, Ring};
use crate::prolong::PolySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Maple,
    Magma,
    Generic,
}

impl FromStr for ExportFormat {
    type Err = ExportError;
    fn from_str(s: &str) -> Result<Self, ExportError> {
        match s.to_ascii_lowercase().as_str() {
            "maple" => Ok(ExportFormat::Maple),
            "magma" => Ok(ExportFormat::Magma),
            "generic" | "psys" => Ok(ExportFormat::Generic),
            _ => Err(ExportError::UnsupportedFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExportError {
    #[error("unsupported export format {0:?} (expected maple, magma or generic)")]
    UnsupportedFormat(String),
    #[error("cannot read script: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub text: String,
    pub warnings: Vec<String>,
}

/// What [`read_export`] recovers from a script.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exported {
    pub prime: u64,
    pub vars: Vec<String>,
    pub weights: Option<Vec<u32>>,
    pub polys: Vec<String>,
}

const MAPLE_RESERVED: &[&str] = &[
    "D", "I", "O", "Pi", "gamma", "Catalan", "and", "or", "not", "xor", "implies", "in", "to", "do", "od", "if", "fi", "from",
    "by", "end", "mod", "union", "minus", "intersect", "subset", "local", "global", "option", "options", "description",
    "proc", "module", "use", "then", "else", "elif", "while", "for", "break", "next", "return", "try", "catch", "finally",
    "error", "quit", "done", "stop", "vars", "polys", "G",
];

const MAGMA_RESERVED: &[&str] = &[
    "and", "or", "not", "xor", "by", "case", "cat", "do", "else", "elif", "end", "eq", "ne", "lt", "le", "gt", "ge", "error",
    "for", "function", "if", "in", "is", "mod", "div", "print", "procedure", "repeat", "return", "then", "time", "to",
    "until", "when", "where", "while", "sub", "join", "meet", "diff", "sdiff", "subset", "notin", "notsubset", "cmpeq",
    "cmpne", "assert", "break", "continue", "default", "delete", "exists", "forall", "freeze", "import", "intrinsic",
    "local", "random", "read", "require", "restore", "save", "select", "catch", "try", "adj", "assigned", "declare",
    "eval", "exit", "load", "quit", "clear", "rep", "K", "R", "I", "G",
];

fn safe_names(names: &[String], reserved: &[&str]) -> Vec<String> {
    names
        .iter()
        .map(|n| {
            let mut s = n.clone();
            while reserved.contains(&s.as_str()) || (s != *n && names.contains(&s)) {
                s.push('_');
            }
            s
        })
        .collect()
}

pub fn export_system(sys: &PolySystem, format: ExportFormat, order: &MonomialOrder) -> Script {
    let mut warnings = Vec::new();
    if sys.polys().is_empty() {
        warnings.push("system has no polynomials; the script describes the zero ideal".to_string());
    }
    let sys = sys.with_order(order.clone());
    let p = sys.prime();
    let (reserved, list_sep): (&[&str], _) = match format {
        ExportFormat::Maple => (MAPLE_RESERVED, ",\n  "),
        ExportFormat::Magma => (MAGMA_RESERVED, ",\n  "),
        ExportFormat::Generic => return Script { text: sys.to_psys(), warnings },
    };
    let names = safe_names(sys.ring().names(), reserved);
    for (a, b) in sys.ring().names().iter().zip(&names) {
        if a != b {
            warnings.push(format!("variable {a} renamed to {b}"));
        }
    }
    let ring = Ring::new(names.clone(), order.clone());
    let polys: Vec<String> = sys.polys().iter().map(|f| f.with_ring(ring.clone()).to_string()).collect();
    let n = names.len();
    let text = match format {
        ExportFormat::Maple => {
            let ord = match order.weights() {
                None => "tdeg(op(vars))".to_string(),
                Some(w) => format!("wdeg([{}], vars)", join(w)),
            };
            format!(
                "# prime {p}\nwith(Groebner):\nvars := [{}]:\npolys := [\n  {}\n]:\nG := Groebner[Basis](polys, {ord}, characteristic = {p}):\n",
                names.join(", "),
                polys.join(list_sep)
            )
        }
        ExportFormat::Magma => {
            let decl = match order.weights() {
                None => format!("PolynomialRing(K, {n}, \"grevlex\")"),
                Some(w) => format!("PolynomialRing(K, {n}, \"grevlexw\", [{}])", join(w)),
            };
            format!(
                "K := GF({p});\nR<{}> := {decl};\nI := ideal<R |\n  {}\n>;\nG := GroebnerBasis(I);\n",
                names.join(", "),
                polys.join(list_sep)
            )
        }
        ExportFormat::Generic => unreachable!(),
    };
    Script { text, warnings }
}

fn join(w: &[u32]) -> String {
    w.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")
}

fn between<'a>(text: &'a str, open: &str, close: &str) -> Result<&'a str, ExportError> {
    let s = text.find(open).ok_or_else(|| ExportError::Parse(format!("missing {open:?}")))? + open.len();
    let e = text[s..].find(close).ok_or_else(|| ExportError::Parse(format!("missing {close:?}")))? + s;
    Ok(&text[s..e])
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect()
}

fn numbers(s: &str) -> Result<Vec<u32>, ExportError> {
    split_list(s).iter().map(|x| x.parse().map_err(|_| ExportError::Parse(format!("bad weight {x:?}")))).collect()
}

/// Read back a Maple or Magma script written by [`export_system`].
pub fn read_export(text: &str, format: ExportFormat) -> Result<Exported, ExportError> {
    let prime = |s: &str| s.trim().parse::<u64>().map_err(|_| ExportError::Parse(format!("bad prime {s:?}")));
    match format {
        ExportFormat::Maple => {
            let vars = split_list(between(text, "vars := [", "]")?);
            let polys = split_list(between(text, "polys := [", "]:")?);
            let prime = prime(between(text, "characteristic = ", ")")?)?;
            let weights = match text.find("wdeg([") {
                Some(_) => Some(numbers(between(text, "wdeg([", "]")?)?),
                None => None,
            };
            Ok(Exported { prime, vars, weights, polys })
        }
        ExportFormat::Magma => {
            let prime = prime(between(text, "GF(", ")")?)?;
            let vars = split_list(between(text, "R<", ">")?);
            let weights = match text.find("\"grevlexw\"") {
                Some(i) => Some(numbers(between(&text[i..], "[", "]")?)?),
                None => None,
            };
            let polys = split_list(between(text, "ideal<R |", ">;")?);
            Ok(Exported { prime, vars, weights, polys })
        }
        ExportFormat::Generic => {
            let sys = crate::prolong::parse_psys(text).map_err(|e| ExportError::Parse(e.to_string()))?;
            Ok(Exported {
                prime: sys.prime(),
                vars: sys.vars().iter().map(|v| v.name.clone()).collect(),
                weights: sys.ring().order().weights().map(<[u32]>::to_vec),
                polys: sys.polys().iter().map(ToString::to_string).collect(),
            })
        }
    }
}
