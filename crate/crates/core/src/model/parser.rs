//! Line-oriented parser for `.ode` model files.
//!
//! ```text
//! # comment
//! in: u1, u2          (optional input declaration)
//! param: k            (optional explicit parameters, e.g. output-only ones)
//! x1' = -a*x1 + u1    (state equation)
//! y1 = x1             (output)
//! ```
//! Statements are separated by newlines or `;`. All free symbols of the state
//! equations that are neither states nor inputs become parameters.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::expr::{rational_is_zero, Expr};
use super::{ModelError, OdeModel};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Op(char),
    Prime,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

/// ASCII alias for a Greek letter.
pub fn greek_alias(c: char) -> Option<&'static str> {
    Some(match c {
        'α' => "alpha",
        'β' => "beta",
        'γ' => "gamma",
        'δ' => "delta",
        'ε' | 'ϵ' => "epsilon",
        'ζ' => "zeta",
        'η' => "eta",
        'θ' | 'ϑ' => "theta",
        'ι' => "iota",
        'κ' => "kappa",
        'λ' => "lambda",
        'μ' | 'µ' => "mu",
        'ν' => "nu",
        'ξ' => "xi",
        'ο' => "omicron",
        'π' => "pi",
        'ρ' => "rho",
        'σ' | 'ς' => "sigma",
        'τ' => "tau",
        'υ' => "upsilon",
        'φ' | 'ϕ' => "phi",
        'χ' => "chi",
        'ψ' => "psi",
        'ω' => "omega",
        'Γ' => "Gamma",
        'Δ' => "Delta",
        'Θ' => "Theta",
        'Λ' => "Lambda",
        'Ξ' => "Xi",
        'Π' => "Pi",
        'Σ' => "Sigma",
        'Υ' => "Upsilon",
        'Φ' => "Phi",
        'Ψ' => "Psi",
        'Ω' => "Omega",
        _ => return None,
    })
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax { line, col, msg: msg.into() }
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<Token>, ModelError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut frac = String::new();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    frac.push(chars[i]);
                    i += 1;
                }
            }
            let mut exp10: i64 = 0;
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                let mut sign = 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    sign = if chars[j] == '-' { -1 } else { 1 };
                    j += 1;
                }
                let ds = j;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j > ds {
                    let digits: String = chars[ds..j].iter().collect();
                    exp10 = sign * digits.parse::<i64>().map_err(|_| syntax(line, col, "exponent too large"))?;
                    i = j;
                }
            }
            if exp10.abs() > 1000 {
                return Err(syntax(line, col, "exponent too large"));
            }
            let digits = format!("{int_part}{frac}");
            let mantissa: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().unwrap() };
            let scale = exp10 - frac.len() as i64;
            let ten = BigInt::from(10);
            let value = if scale >= 0 {
                BigRational::from_integer(mantissa * num_traits::pow(ten, scale as usize))
            } else {
                BigRational::new(mantissa, num_traits::pow(ten, (-scale) as usize))
            };
            out.push(Token { tok: Tok::Num(value), col });
        } else if c.is_alphabetic() || c == '_' {
            let mut name = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                let ch = chars[i];
                if ch.is_ascii() {
                    name.push(ch);
                } else if let Some(alias) = greek_alias(ch) {
                    name.push_str(alias);
                } else {
                    return Err(syntax(line, col0 + i, format!("unsupported character '{ch}' in identifier")));
                }
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(name), col });
        } else if c == '\'' {
            out.push(Token { tok: Tok::Prime, col });
            i += 1;
        } else if "+-*/^()=,:".contains(c) {
            out.push(Token { tok: Tok::Op(c), col });
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: &'a [Token],
    pos: usize,
    line: usize,
    end_col: usize,
}

const MAX_DEPTH: usize = 256;

impl<'a> ExprParser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.col).unwrap_or(self.end_col)
    }

    fn err(&self, msg: impl Into<String>) -> ModelError {
        syntax(self.line, self.col(), msg)
    }

    fn expr(&mut self, depth: usize) -> Result<Expr, ModelError> {
        if depth > MAX_DEPTH {
            return Err(self.err("expression nested too deeply"));
        }
        let mut lhs = self.term(depth)?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.term(depth)?;
            lhs = if c == '+' { Expr::Add(Box::new(lhs), Box::new(rhs)) } else { Expr::Sub(Box::new(lhs), Box::new(rhs)) };
        }
        Ok(lhs)
    }

    fn term(&mut self, depth: usize) -> Result<Expr, ModelError> {
        let mut lhs = self.unary(depth)?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek() {
            let c = *c;
            self.pos += 1;
            let rhs = self.unary(depth)?;
            lhs = if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                match (lhs, rhs) {
                    (Expr::Const(a), Expr::Const(b)) if !rational_is_zero(&b) => Expr::Const(a / b),
                    (a, b) => Expr::Div(Box::new(a), Box::new(b)),
                }
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self, depth: usize) -> Result<Expr, ModelError> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            if depth > MAX_DEPTH {
                return Err(self.err("expression nested too deeply"));
            }
            return Ok(match self.unary(depth + 1)? {
                Expr::Const(c) => Expr::Const(-c),
                e => Expr::Neg(Box::new(e)),
            });
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            if depth > MAX_DEPTH {
                return Err(self.err("expression nested too deeply"));
            }
            return self.unary(depth + 1);
        }
        self.power(depth)
    }

    fn power(&mut self, depth: usize) -> Result<Expr, ModelError> {
        let base = self.atom(depth)?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let (neg, col) = match self.peek() {
                Some(Tok::Op('-')) => {
                    let c = self.col();
                    self.pos += 1;
                    (true, c)
                }
                _ => (false, self.col()),
            };
            let exp = match self.peek() {
                Some(Tok::Num(n)) if n.is_integer() => n.clone(),
                _ => return Err(self.err("exponent must be a nonnegative integer")),
            };
            if neg && !exp.is_zero() {
                return Err(syntax(self.line, col, "negative exponents are not supported"));
            }
            let e: u32 = exp
                .numer()
                .try_into()
                .ok()
                .filter(|&e: &u32| e <= 1000)
                .ok_or_else(|| self.err("exponent too large"))?;
            self.pos += 1;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn atom(&mut self, depth: usize) -> Result<Expr, ModelError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Const(n))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Expr::Sym(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr(depth + 1)?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(t) => Err(self.err(format!("unexpected token {}", describe(&t)))),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Num(n) => format!("number {n}"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::Prime => "'''".into(),
    }
}

fn parse_expr(toks: &[Token], line: usize, end_col: usize) -> Result<Expr, ModelError> {
    let mut p = ExprParser { toks, pos: 0, line, end_col };
    let e = p.expr(0)?;
    if p.pos != toks.len() {
        return Err(p.err(format!("unexpected token {}", describe(&toks[p.pos].tok))));
    }
    Ok(e)
}

fn parse_name_list(toks: &[Token], line: usize, end_col: usize) -> Result<Vec<String>, ModelError> {
    let mut names = Vec::new();
    let mut expect_name = true;
    for t in toks {
        match (&t.tok, expect_name) {
            (Tok::Ident(s), true) => {
                names.push(s.clone());
                expect_name = false;
            }
            (Tok::Op(','), false) => expect_name = true,
            (other, _) => return Err(syntax(line, t.col, format!("unexpected token {}", describe(other)))),
        }
    }
    if expect_name && !names.is_empty() {
        return Err(syntax(line, end_col, "trailing ','"));
    }
    Ok(names)
}

/// Raw statements before symbol classification.
pub(crate) struct RawModel {
    pub equations: Vec<(String, Expr)>,
    pub outputs: Vec<(String, Expr)>,
    pub inputs: Vec<String>,
    pub declared_params: Vec<String>,
}

pub(crate) fn parse_raw(text: &str) -> Result<RawModel, ModelError> {
    let mut raw = RawModel { equations: Vec::new(), outputs: Vec::new(), inputs: Vec::new(), declared_params: Vec::new() };
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let code = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        };
        // Split on ';' keeping 1-based character columns.
        let mut col = 1;
        for stmt in code.split(';') {
            let width = stmt.chars().count();
            parse_statement(stmt, line_no, col, &mut raw)?;
            col += width + 1;
        }
    }
    Ok(raw)
}

fn parse_statement(stmt: &str, line: usize, col0: usize, raw: &mut RawModel) -> Result<(), ModelError> {
    let toks = tokenize(stmt, line, col0)?;
    if toks.is_empty() {
        return Ok(());
    }
    let end_col = col0 + stmt.chars().count();
    match (&toks[0].tok, toks.get(1).map(|t| &t.tok)) {
        (Tok::Ident(kw), Some(Tok::Op(':'))) => {
            let names = parse_name_list(&toks[2..], line, end_col)?;
            match kw.as_str() {
                "in" | "input" | "inputs" => raw.inputs.extend(names),
                "param" | "params" | "parameters" => raw.declared_params.extend(names),
                _ => return Err(syntax(line, toks[0].col, format!("unknown declaration '{kw}:'"))),
            }
        }
        (Tok::Ident(name), Some(Tok::Prime)) => {
            match toks.get(2).map(|t| &t.tok) {
                Some(Tok::Op('=')) => {}
                _ => return Err(syntax(line, toks.get(2).map(|t| t.col).unwrap_or(end_col), "expected '=' after derivative")),
            }
            let rhs = parse_expr(&toks[3..], line, end_col)?;
            raw.equations.push((name.clone(), rhs));
        }
        (Tok::Ident(name), Some(Tok::Op('='))) => {
            let rhs = parse_expr(&toks[2..], line, end_col)?;
            raw.outputs.push((name.clone(), rhs));
        }
        _ => {
            return Err(syntax(line, toks[0].col, "expected `name' = expr`, `name = expr` or a declaration"));
        }
    }
    Ok(())
}

/// Classify symbols: parameters are declared ones followed by the remaining
/// free symbols of the state equations in order of first appearance.
pub(crate) fn classify(raw: RawModel) -> OdeModel {
    let states: Vec<&String> = raw.equations.iter().map(|(s, _)| s).collect();
    let mut params = Vec::new();
    for p in raw.declared_params.iter() {
        if !params.contains(p) {
            params.push(p.clone());
        }
    }
    for (_, rhs) in &raw.equations {
        for s in rhs.symbols() {
            if !states.contains(&&s) && !raw.inputs.contains(&s) && !params.contains(&s) {
                params.push(s);
            }
        }
    }
    OdeModel::from_parts(raw.equations, raw.outputs, raw.inputs, params)
}
