//! Text and JSON forms of operators and symbols.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := ['+'|'-'] product (('+'|'-') product)*
//! product := power (('*'|'/')? power)*
//! power   := atom ('^' INT)?
//! atom    := INT | 'L' | 'D'INT | IDENT ('[' INT (',' INT)* ']')? ('_,' INT)* | '(' expr ')'
//! ```
//!
//! Juxtaposition composes operators; `*` multiplies when one side is a
//! coefficient; `/` divides by a nonzero constant.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{intern, DiffPolynomial, JetSymbol};
use crate::lift::VolumeForm;
use crate::operator::{mi_order, DensityOperator};
use crate::poly::Param;
use crate::proj::SymbolPoly;
use crate::scalar::Scalar;

/// Version tag of the JSON operator format.
pub const SCHEMA: &str = "denslift/1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionConfig {
    pub dim: usize,
    pub lambda0: Scalar,
    pub volume: VolumeForm,
    pub json: bool,
    /// Identifiers read as constant parameters rather than functions.
    pub params: BTreeSet<String>,
}

impl SessionConfig {
    pub fn new(dim: usize) -> Self {
        SessionConfig {
            dim,
            lambda0: Scalar::param("l0"),
            volume: VolumeForm::Coordinate,
            json: false,
            params: ["l0".to_string(), "lam".to_string()].into_iter().collect(),
        }
    }

    pub fn with_params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        self.params.extend(names.into_iter().map(str::to_string));
        self
    }
}

/// `p/q`, an integer, or `symbolic` for the formal parameter `l0`.
pub fn parse_lambda0(src: &str) -> Result<Scalar> {
    let s = src.trim();
    if s == "symbolic" {
        return Ok(Scalar::param("l0"));
    }
    let bad = || Error::Syntax { offset: 0, message: format!("expected p/q or `symbolic`, got `{src}`") };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (s.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(Error::BadDivision(s.find('/').unwrap_or(0)));
    }
    Ok(Scalar::frac(n, d))
}

/// `coordinate` or `generic`.
pub fn parse_volume(src: &str) -> Result<VolumeForm> {
    match src.trim() {
        "coordinate" => Ok(VolumeForm::Coordinate),
        "generic" => Ok(VolumeForm::generic()),
        other => Err(Error::Syntax { offset: 0, message: format!("unknown volume form `{other}`") }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Deriv,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = src[start..i]
                    .parse()
                    .map_err(|_| Error::Syntax { offset: start, message: "integer too large".into() })?;
                out.push((Tok::Int(n), start));
                continue;
            }
            b'_' if bytes.get(i + 1) == Some(&b',') => {
                i += 2;
                out.push((Tok::Deriv, start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || (bytes[i] == b'_' && bytes.get(i + 1) != Some(&b',')))
                {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return Err(Error::Syntax { offset: i, message: format!("unexpected character `{ch}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Operator,
    Symbol,
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    cfg: &'a SessionConfig,
    mode: Mode,
}

fn syntax(offset: usize, message: impl Into<String>) -> Error {
    Error::Syntax { offset, message: message.into() }
}

/// The coefficient of an operator made of a single weight-free ∂⁰ term.
fn as_function(op: &DensityOperator) -> Option<DiffPolynomial> {
    if op.terms().all(|(r, a, _)| r == 0 && mi_order(a) == 0) {
        Some(op.on_one())
    } else {
        None
    }
}

/// Product treating generators as commuting variables.
fn commutative_product(a: &DensityOperator, b: &DensityOperator) -> DensityOperator {
    let mut out = DensityOperator::zero(a.dim());
    for (r1, a1, c1) in a.terms() {
        for (r2, a2, c2) in b.terms() {
            out.add_term(r1 + r2, crate::operator::mi_add(a1, a2), c1.mul(c2));
        }
    }
    out
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.offset(), format!("expected {what}")))
        }
    }

    fn int(&mut self, what: &str) -> Result<(u64, usize)> {
        match self.bump() {
            (Tok::Int(n), off) => Ok((n, off)),
            (_, off) => Err(syntax(off, format!("expected {what}"))),
        }
    }

    fn index(&mut self) -> Result<u8> {
        let (n, off) = self.int("an index")?;
        if n == 0 || n as usize > self.cfg.dim {
            return Err(Error::IndexOutOfRange { index: n as usize, dim: self.cfg.dim, offset: off });
        }
        Ok(n as u8)
    }

    fn expr(&mut self) -> Result<DensityOperator> {
        let d = self.cfg.dim;
        let mut acc = DensityOperator::zero(d);
        let mut neg = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        loop {
            let p = self.product()?;
            acc = if neg { acc.sub(&p) } else { acc.add(&p) };
            match self.peek() {
                Tok::Plus => neg = false,
                Tok::Minus => neg = true,
                _ => return Ok(acc),
            }
            self.bump();
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Int(_) | Tok::Ident(_) | Tok::LParen)
    }

    fn product(&mut self) -> Result<DensityOperator> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    let off = self.bump().1;
                    let rhs = self.power()?;
                    acc = self.multiply(&acc, &rhs, off)?;
                }
                Tok::Slash => {
                    let off = self.bump().1;
                    let rhs = self.power()?;
                    let s = as_function(&rhs).and_then(|f| f.as_scalar()).filter(|s| !s.is_zero());
                    let s = s.ok_or(Error::BadDivision(off))?;
                    acc = acc.scale(&s.inv()?);
                }
                _ if self.starts_atom() => {
                    let rhs = self.power()?;
                    acc = self.juxtapose(&acc, &rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn juxtapose(&self, a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
        match self.mode {
            Mode::Operator => a.compose(b),
            Mode::Symbol => Ok(commutative_product(a, b)),
        }
    }

    fn multiply(&self, a: &DensityOperator, b: &DensityOperator, off: usize) -> Result<DensityOperator> {
        if self.mode == Mode::Symbol {
            return Ok(commutative_product(a, b));
        }
        if let Some(f) = as_function(a) {
            return Ok(b.mul_fn(&f));
        }
        if let Some(f) = as_function(b) {
            return Ok(a.mul_fn(&f));
        }
        Err(syntax(off, "`*` needs a coefficient on one side; compose operators by juxtaposition"))
    }

    fn power(&mut self) -> Result<DensityOperator> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (e, _) = self.int("an exponent")?;
        let mut acc = DensityOperator::identity(self.cfg.dim);
        for _ in 0..e {
            acc = self.juxtapose(&acc, &base)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<DensityOperator> {
        let d = self.cfg.dim;
        match self.bump() {
            (Tok::Int(n), off) => {
                let n = i64::try_from(n).map_err(|_| syntax(off, "integer too large"))?;
                Ok(DensityOperator::scalar(d, Scalar::int(n)))
            }
            (Tok::LParen, _) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            (Tok::Ident(name), off) => self.ident(&name, off),
            (Tok::End, off) => Err(syntax(off, "unexpected end of input")),
            (_, off) => Err(syntax(off, "expected an operand")),
        }
    }

    fn generator_axis(&self, name: &str, prefix: &str) -> Option<Option<usize>> {
        let rest = name.strip_prefix(prefix)?;
        if rest.is_empty() {
            return Some(None);
        }
        rest.parse::<usize>().ok().map(Some)
    }

    fn ident(&mut self, name: &str, off: usize) -> Result<DensityOperator> {
        let d = self.cfg.dim;
        if name == "L" {
            return Ok(DensityOperator::weight(d));
        }
        let gen = match self.mode {
            Mode::Operator => self.generator_axis(name, "D").filter(|a| a.is_some()),
            Mode::Symbol => self.generator_axis(name, "xi").filter(|a| a.is_some() || d == 1),
        };
        if let Some(axis) = gen {
            let axis = axis.unwrap_or(1);
            if axis == 0 || axis > d {
                return Err(Error::IndexOutOfRange { index: axis, dim: d, offset: off });
            }
            return Ok(DensityOperator::partial(d, axis));
        }
        if self.cfg.params.contains(name) && *self.peek() != Tok::LBracket && *self.peek() != Tok::Deriv {
            return Ok(DensityOperator::scalar(d, Scalar::param(name)));
        }
        let mut upper = Vec::new();
        if *self.peek() == Tok::LBracket {
            self.bump();
            loop {
                upper.push(self.index()?);
                match self.bump() {
                    (Tok::Comma, _) => continue,
                    (Tok::RBracket, _) => break,
                    (_, o) => return Err(syntax(o, "expected `,` or `]`")),
                }
            }
        }
        let mut deriv = Vec::new();
        while *self.peek() == Tok::Deriv {
            self.bump();
            deriv.push(self.index()?);
        }
        let base = JetSymbol::new(intern(name), &upper, &[]);
        Ok(DensityOperator::function(d, DiffPolynomial::jet(base).derive_seq(&deriv)))
    }
}

fn parse_with(src: &str, cfg: &SessionConfig, mode: Mode) -> Result<DensityOperator> {
    let mut p = Parser { toks: lex(src)?, pos: 0, cfg, mode };
    if *p.peek() == Tok::End {
        return Err(syntax(0, "empty expression"));
    }
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Parse an operator; juxtaposition is composition.
pub fn parse_operator(src: &str, cfg: &SessionConfig) -> Result<DensityOperator> {
    parse_with(src, cfg, Mode::Operator)
}

/// Parse a function (an operator of order zero without `L`).
pub fn parse_function(src: &str, cfg: &SessionConfig) -> Result<DiffPolynomial> {
    let op = parse_operator(src, cfg)?;
    as_function(&op).ok_or_else(|| syntax(0, "expected a function, got an operator"))
}

/// Parse a polynomial in `xi1..xid` (`xi` when d = 1) with function coefficients.
pub fn parse_symbol(src: &str, cfg: &SessionConfig) -> Result<SymbolPoly> {
    let op = parse_with(src, cfg, Mode::Symbol)?;
    if op.has_weight_operator() {
        return Err(syntax(0, "`L` is not allowed in a symbol"));
    }
    let mut out = SymbolPoly::zero(cfg.dim);
    for (_, a, c) in op.terms() {
        out.add_term(a.clone(), c.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub lpow: u32,
    pub dmulti: Vec<u8>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonOperator {
    pub schema: String,
    pub dim: usize,
    #[serde(default)]
    pub params: Vec<String>,
    pub terms: Vec<JsonTerm>,
    pub order: Option<usize>,
}

fn operator_params(op: &DensityOperator) -> Vec<String> {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for (_, _, c) in op.terms() {
        names.extend(c.params().into_iter().map(Param::name));
    }
    names.into_iter().collect()
}

pub fn to_json_value(op: &DensityOperator) -> JsonOperator {
    let terms = op
        .sorted_keys()
        .into_iter()
        .map(|(r, a)| JsonTerm { lpow: r, dmulti: a.to_vec(), coeff: op.coeff(r, &a).render() })
        .collect();
    JsonOperator {
        schema: SCHEMA.into(),
        dim: op.dim(),
        params: operator_params(op),
        terms,
        order: op.total_order().ok(),
    }
}

pub fn to_json(op: &DensityOperator) -> String {
    serde_json::to_string(&to_json_value(op)).expect("operator JSON is always serializable")
}

pub fn from_json(src: &str) -> Result<DensityOperator> {
    let v: JsonOperator = serde_json::from_str(src).map_err(|e| Error::Json(e.to_string()))?;
    if v.schema != SCHEMA {
        return Err(Error::Json(format!("unsupported schema `{}`", v.schema)));
    }
    let cfg = SessionConfig::new(v.dim).with_params(v.params.iter().map(String::as_str));
    let mut op = DensityOperator::zero(v.dim);
    for t in &v.terms {
        if t.dmulti.len() != v.dim {
            return Err(Error::Json(format!("multi-index {:?} has the wrong length", t.dmulti)));
        }
        let c = parse_function(&t.coeff, &cfg).map_err(|e| Error::Json(e.to_string()))?;
        op.add_term(t.lpow, t.dmulti.iter().copied().collect(), c);
    }
    Ok(op)
}

/// Bindings `k=v,…`; each value is a constant in which bare names are parameters.
pub fn parse_bindings(src: &str, cfg: &SessionConfig) -> Result<HashMap<String, Scalar>> {
    let mut out = HashMap::new();
    let mut base = 0;
    for item in src.split(',') {
        let off = base;
        base += item.len() + 1;
        if item.trim().is_empty() {
            continue;
        }
        let (k, v) = item.split_once('=').ok_or_else(|| syntax(off, format!("expected key=value in `{item}`")))?;
        let shift = |e| shift_offset(e, off + k.len() + 1);
        let names: Vec<String> = lex(v)
            .map_err(shift)?
            .into_iter()
            .filter_map(|(t, _)| if let Tok::Ident(n) = t { Some(n) } else { None })
            .collect();
        let local = cfg.clone().with_params(names.iter().map(String::as_str));
        let f = parse_function(v, &local).map_err(shift)?;
        let s = f.as_scalar().ok_or_else(|| syntax(off, format!("value of `{}` must be constant", k.trim())))?;
        out.insert(k.trim().to_string(), s);
    }
    Ok(out)
}

fn shift_offset(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax { offset: offset + by, message },
        Error::IndexOutOfRange { index, dim, offset } => Error::IndexOutOfRange { index, dim, offset: offset + by },
        Error::BadDivision(o) => Error::BadDivision(o + by),
        other => other,
    }
}
