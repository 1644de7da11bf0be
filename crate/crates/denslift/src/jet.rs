//! Differential polynomials in formal jet symbols.
//!
//! - Free symbols prolong to fresh jets under the total derivative.
//! - Coordinates `x[i]` differentiate to Kronecker deltas.
//! - Registered rules expand derivatives of symbols such as `w = 1/y_x`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::poly::Param;
use crate::scalar::Scalar;

pub type Indices = SmallVec<[u8; 4]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymId(pub u32);

#[derive(Clone, Debug)]
pub enum Rule {
    /// Derivatives are new jets.
    Free,
    /// `x[i]`: derivative along axis `j` is δ_ij.
    Coordinate,
    /// Derivative vanishes.
    Constant,
    /// Explicit derivative along each axis, starting at axis 1.
    Explicit(Vec<DiffPolynomial>),
    /// Multiplicative inverse of a jet; products with it cancel.
    Reciprocal(JetSymbol),
}

#[derive(Debug)]
struct SymInfo {
    name: String,
    rule: Rule,
}

#[derive(Default)]
struct Registry {
    infos: Vec<Arc<SymInfo>>,
    ids: HashMap<String, SymId>,
}

fn registry() -> &'static RwLock<Registry> {
    static REG: OnceLock<RwLock<Registry>> = OnceLock::new();
    REG.get_or_init(|| {
        let mut r = Registry::default();
        let mut add = |name: &str, rule: Rule| {
            let id = SymId(r.infos.len() as u32);
            r.infos.push(Arc::new(SymInfo { name: name.into(), rule }));
            r.ids.insert(name.into(), id);
            id
        };
        add("x", Rule::Coordinate);
        add(LOG_DENSITY, Rule::Free);
        let y = add(DIFFEO, Rule::Free);
        add(DIFFEO_RECIP, Rule::Reciprocal(JetSymbol::new(y, &[], &[1])));
        RwLock::new(r)
    })
}

/// Name of the jet symbol standing for log ρ.
pub const LOG_DENSITY: &str = "ell";
/// Name of the 1-D diffeomorphism y(x).
pub const DIFFEO: &str = "y";
/// Name of the reciprocal symbol w = 1/y_x.
pub const DIFFEO_RECIP: &str = "w";

fn info(id: SymId) -> Arc<SymInfo> {
    registry().read().unwrap().infos[id.0 as usize].clone()
}

/// Get or create a free symbol.
pub fn intern(name: &str) -> SymId {
    if let Some(&id) = registry().read().unwrap().ids.get(name) {
        return id;
    }
    let mut r = registry().write().unwrap();
    if let Some(&id) = r.ids.get(name) {
        return id;
    }
    let id = SymId(r.infos.len() as u32);
    r.infos.push(Arc::new(SymInfo { name: name.into(), rule: Rule::Free }));
    r.ids.insert(name.into(), id);
    id
}

pub fn lookup(name: &str) -> Option<SymId> {
    registry().read().unwrap().ids.get(name).copied()
}

/// Register a new symbol; `rule = None` makes a free symbol.
pub fn register_symbol(name: &str, rule: Option<Vec<DiffPolynomial>>) -> Result<SymId> {
    register_with(name, rule.map_or(Rule::Free, Rule::Explicit))
}

pub fn register_with(name: &str, rule: Rule) -> Result<SymId> {
    let mut r = registry().write().unwrap();
    if r.ids.contains_key(name) {
        return Err(Error::DuplicateSymbol(name.into()));
    }
    let id = SymId(r.infos.len() as u32);
    r.infos.push(Arc::new(SymInfo { name: name.into(), rule }));
    r.ids.insert(name.into(), id);
    Ok(id)
}

/// Register a symbol whose rule refers to the symbol itself.
pub fn register_self_referential(name: &str, rule: impl FnOnce(SymId) -> Rule) -> Result<SymId> {
    let mut r = registry().write().unwrap();
    if r.ids.contains_key(name) {
        return Err(Error::DuplicateSymbol(name.into()));
    }
    let id = SymId(r.infos.len() as u32);
    let rule = rule(id);
    r.infos.push(Arc::new(SymInfo { name: name.into(), rule }));
    r.ids.insert(name.into(), id);
    Ok(id)
}

impl SymId {
    pub fn name(self) -> String {
        info(self).name.clone()
    }

    pub fn is_free(self) -> bool {
        matches!(info(self).rule, Rule::Free)
    }

    pub fn is_coordinate(self) -> bool {
        matches!(info(self).rule, Rule::Coordinate)
    }
}

/// Base symbol with sorted upper indices and a sorted list of derivative axes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetSymbol {
    pub base: SymId,
    pub upper: Indices,
    pub deriv: Indices,
}

impl JetSymbol {
    pub fn new(base: SymId, upper: &[u8], deriv: &[u8]) -> JetSymbol {
        let mut u: Indices = upper.iter().copied().collect();
        u.sort_unstable();
        let mut d: Indices = deriv.iter().copied().collect();
        d.sort_unstable();
        JetSymbol { base, upper: u, deriv: d }
    }

    pub fn named(name: &str, upper: &[u8]) -> JetSymbol {
        JetSymbol::new(intern(name), upper, &[])
    }

    pub fn order(&self) -> usize {
        self.deriv.len()
    }

    fn prolong(&self, axis: u8) -> JetSymbol {
        let mut s = self.clone();
        let pos = s.deriv.partition_point(|&a| a <= axis);
        s.deriv.insert(pos, axis);
        s
    }

    /// Total derivative of a single symbol.
    pub fn derive(&self, axis: u8) -> DiffPolynomial {
        let inf = info(self.base);
        match &inf.rule {
            Rule::Free => DiffPolynomial::jet(self.prolong(axis)),
            Rule::Coordinate => {
                if self.upper.as_slice() == [axis] {
                    DiffPolynomial::one()
                } else {
                    DiffPolynomial::zero()
                }
            }
            Rule::Constant => DiffPolynomial::zero(),
            Rule::Explicit(rules) => rules.get(axis as usize - 1).cloned().unwrap_or_default(),
            Rule::Reciprocal(of) => {
                let me = DiffPolynomial::jet(self.clone());
                me.mul(&me).mul(&of.derive(axis)).neg()
            }
        }
    }

    pub fn render(&self) -> String {
        let mut s = self.base.name();
        if !self.upper.is_empty() {
            let idx: Vec<String> = self.upper.iter().map(|i| i.to_string()).collect();
            s.push('[');
            s.push_str(&idx.join(","));
            s.push(']');
        }
        for a in &self.deriv {
            s.push_str("_,");
            s.push_str(&a.to_string());
        }
        s
    }
}

/// Multiset of jet symbols with positive exponents, sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(pub SmallVec<[(JetSymbol, u32); 2]>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exp(&self, s: &JetSymbol) -> u32 {
        self.0.iter().find(|(t, _)| t == s).map_or(0, |(_, e)| *e)
    }

    fn mul_raw(&self, other: &Monomial) -> Monomial {
        let mut out: SmallVec<[(JetSymbol, u32); 2]> = SmallVec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = self.mul_raw(other);
        m.cancel_reciprocals();
        m
    }

    fn cancel_reciprocals(&mut self) {
        if self.0.len() < 2 {
            return;
        }
        let mut changed = false;
        for k in 0..self.0.len() {
            let base = self.0[k].0.base;
            if base.is_free() || base.is_coordinate() {
                continue;
            }
            if let Rule::Reciprocal(of) = &info(base).rule {
                if let Some(j) = self.0.iter().position(|(s, _)| s == of) {
                    let c = self.0[k].1.min(self.0[j].1);
                    self.0[k].1 -= c;
                    self.0[j].1 -= c;
                    changed = true;
                }
            }
        }
        if changed {
            self.0.retain(|(_, e)| *e > 0);
        }
    }

    /// Remove one power of the factor at position `k`.
    fn lower(&self, k: usize) -> Monomial {
        let mut m = self.clone();
        if m.0[k].1 == 1 {
            m.0.remove(k);
        } else {
            m.0[k].1 -= 1;
        }
        m
    }

    pub fn symbols(&self) -> impl Iterator<Item = &JetSymbol> {
        self.0.iter().map(|(s, _)| s)
    }

    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| if *e == 1 { s.render() } else { format!("{}^{}", s.render(), e) })
            .collect();
        parts.sort();
        parts.join("*")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DiffPolynomial {
    terms: BTreeMap<Monomial, Scalar>,
}

impl DiffPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(s: Scalar) -> Self {
        Self::term(Monomial::one(), s)
    }

    pub fn int(n: i64) -> Self {
        Self::constant(Scalar::int(n))
    }

    pub fn term(m: Monomial, s: Scalar) -> Self {
        let mut p = Self::zero();
        if !s.is_zero() {
            p.terms.insert(m, s);
        }
        p
    }

    pub fn jet(s: JetSymbol) -> Self {
        let mut m = Monomial::one();
        m.0.push((s, 1));
        Self::term(m, Scalar::one())
    }

    /// Free symbol by name, e.g. `sym("R", &[])` or `sym("S", &[1, 2])`.
    pub fn sym(name: &str, upper: &[u8]) -> Self {
        Self::jet(JetSymbol::named(name, upper))
    }

    /// Coordinate function x^i.
    pub fn coord(i: u8) -> Self {
        Self::jet(JetSymbol::new(lookup("x").unwrap(), &[i], &[]))
    }

    pub fn param(name: &str) -> Self {
        Self::constant(Scalar::param(name))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value when no jet symbol occurs.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, s) = self.terms.iter().next().unwrap();
                m.is_one().then(|| s.clone())
            }
            _ => None,
        }
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, s: Scalar) {
        if s.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(s);
            }
            Entry::Occupied(mut e) => {
                let v = e.get() + &s;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        if self.terms.is_empty() {
            self.terms = other.terms.clone();
            return;
        }
        for (m, s) in &other.terms {
            self.add_term(m.clone(), s.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        for (m, s) in &other.terms {
            self.add_term(m.clone(), s * c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Scalar::int(-1));
        out
    }

    pub fn neg(&self) -> Self {
        Self { terms: self.terms.iter().map(|(m, s)| (m.clone(), -s)).collect() }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Self { terms: self.terms.iter().map(|(m, s)| (m.clone(), s * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if let Some(c) = other.as_scalar() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_scalar() {
            return other.scale(&c);
        }
        let mut out = Self::zero();
        for (m1, s1) in &self.terms {
            for (m2, s2) in &other.terms {
                out.add_term(m1.mul(m2), s1 * s2);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Total derivative along `axis` (1-based).
    pub fn derive(&self, axis: u8) -> Self {
        assert!(axis >= 1, "axes are 1-based");
        let mut out = Self::zero();
        for (m, s) in &self.terms {
            for (k, (sym, e)) in m.0.iter().enumerate() {
                let d = sym.derive(axis);
                if d.is_zero() {
                    continue;
                }
                let rest = m.lower(k);
                let c = s * &Scalar::int(*e as i64);
                for (dm, ds) in &d.terms {
                    out.add_term(rest.mul(dm), &c * ds);
                }
            }
        }
        out
    }

    /// Apply `derive` once for every entry of `axes`.
    pub fn derive_seq(&self, axes: &[u8]) -> Self {
        let mut p = self.clone();
        for &a in axes {
            if p.is_zero() {
                break;
            }
            p = p.derive(a);
        }
        p
    }

    pub fn substitute_params(&self, bindings: &HashMap<Param, Scalar>) -> Result<Self> {
        let mut out = Self::zero();
        for (m, s) in &self.terms {
            out.add_term(m.clone(), s.substitute(bindings)?);
        }
        Ok(out)
    }

    /// Map every scalar coefficient.
    pub fn map_scalars(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut out = Self::zero();
        for (m, s) in &self.terms {
            out.add_term(m.clone(), f(s));
        }
        out
    }

    /// Replace jet symbols for which `f` returns a polynomial; others are kept.
    pub fn map_jets(&self, f: &dyn Fn(&JetSymbol) -> Option<Self>) -> Self {
        let mut out = Self::zero();
        for (m, s) in &self.terms {
            let mut acc = Self::constant(s.clone());
            for (sym, e) in &m.0 {
                let factor = match f(sym) {
                    Some(p) => p.pow(*e),
                    None => {
                        let mut mm = Monomial::one();
                        mm.0.push((sym.clone(), *e));
                        Self::term(mm, Scalar::one())
                    }
                };
                acc = acc.mul(&factor);
                if acc.is_zero() {
                    break;
                }
            }
            out.add_assign(&acc);
        }
        out
    }

    /// Partial derivative with respect to one jet symbol, viewed as an
    /// ordinary polynomial variable.
    pub fn partial(&self, sym: &JetSymbol) -> Self {
        let mut out = Self::zero();
        for (m, s) in &self.terms {
            if let Some(k) = m.0.iter().position(|(t, _)| t == sym) {
                let e = m.0[k].1;
                out.add_term(m.lower(k), s * &Scalar::int(e as i64));
            }
        }
        out
    }

    /// Directional derivative in jet space: replace `base ↦ base + ε·h`
    /// and keep the ε-linear part.
    pub fn linearize(&self, base: SymId, h: &Self) -> Self {
        let mut jets: Vec<JetSymbol> = self.jets().into_iter().filter(|s| s.base == base).collect();
        jets.sort();
        jets.dedup();
        let mut out = Self::zero();
        for j in jets {
            out.add_assign(&self.partial(&j).mul(&h.derive_seq(&j.deriv)));
        }
        out
    }

    pub fn jets(&self) -> Vec<JetSymbol> {
        let mut v: Vec<JetSymbol> = self.terms.keys().flat_map(|m| m.symbols().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn involves(&self, base: SymId) -> bool {
        self.terms.keys().any(|m| m.symbols().any(|s| s.base == base))
    }

    /// Split into the part containing `base` and the rest.
    pub fn split_by(&self, base: SymId) -> (Self, Self) {
        let mut with = Self::zero();
        let mut without = Self::zero();
        for (m, s) in &self.terms {
            if m.symbols().any(|t| t.base == base) {
                with.terms.insert(m.clone(), s.clone());
            } else {
                without.terms.insert(m.clone(), s.clone());
            }
        }
        (with, without)
    }

    pub fn params(&self) -> Vec<Param> {
        let mut v: Vec<Param> = self.terms.values().flat_map(|s| s.params()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut items: Vec<(u32, String, &Scalar)> =
            self.terms.iter().map(|(m, s)| (m.degree(), m.render(), s)).collect();
        items.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut out = String::new();
        for (i, (_, m, s)) in items.into_iter().enumerate() {
            let t = render_term(s, &m);
            if i == 0 {
                out.push_str(&t);
            } else if let Some(rest) = t.strip_prefix('-') {
                out.push_str(" - ");
                out.push_str(rest);
            } else {
                out.push_str(" + ");
                out.push_str(&t);
            }
        }
        out
    }
}

/// Render `s * m`; `m` may be empty.
pub fn render_term(s: &Scalar, m: &str) -> String {
    if m.is_empty() {
        return s.to_string();
    }
    if s.is_one() {
        return m.to_string();
    }
    if (-s).is_one() {
        return format!("-{m}");
    }
    let st = s.to_string();
    if s.numer().len() > 1 && s.is_polynomial() {
        format!("({st})*{m}")
    } else {
        format!("{st}*{m}")
    }
}

impl std::fmt::Display for DiffPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn y(k: usize) -> DiffPolynomial {
        DiffPolynomial::jet(JetSymbol::new(lookup(DIFFEO).unwrap(), &[], &vec![1u8; k]))
    }

    fn w() -> DiffPolynomial {
        DiffPolynomial::jet(JetSymbol::new(lookup(DIFFEO_RECIP).unwrap(), &[], &[]))
    }

    #[test]
    fn prolongation_sorts_axes() {
        let s = DiffPolynomial::sym("S", &[2, 1]);
        assert_eq!(s, DiffPolynomial::sym("S", &[1, 2]));
        assert_eq!(s.derive(2).derive(1), s.derive(1).derive(2));
        assert_eq!(DiffPolynomial::int(5).derive(2), DiffPolynomial::zero());
    }

    #[test]
    fn reciprocal_rule() {
        assert_eq!(w().derive(1), w().mul(&w()).mul(&y(2)).neg());
        assert_eq!(w().mul(&y(1)), DiffPolynomial::one());
        // Leibniz on w*y_x = 1.
        let lhs = w().derive(1).mul(&y(1)).add(&w().mul(&y(2)));
        assert!(lhs.is_zero());
        assert_eq!(w().pow(2).derive(1), w().pow(3).mul(&y(2)).scale(&Scalar::int(-2)));
    }

    #[test]
    fn coordinates() {
        let x1 = DiffPolynomial::coord(1);
        assert_eq!(x1.derive(1), DiffPolynomial::one());
        assert!(x1.derive(2).is_zero());
        assert_eq!(x1.pow(2).derive(1), x1.scale(&Scalar::int(2)));
    }

    #[test]
    fn duplicate_registration() {
        register_symbol("dup_sym_test", None).unwrap();
        assert_eq!(register_symbol("dup_sym_test", None), Err(Error::DuplicateSymbol("dup_sym_test".into())));
        assert!(register_symbol("S_dup_probe", None).is_ok());
        assert!(register_symbol(LOG_DENSITY, None).is_err());
    }

    #[test]
    fn explicit_rule() {
        let v = register_symbol("vrule_test", Some(vec![DiffPolynomial::sym("vrule_rhs", &[])])).unwrap();
        let p = DiffPolynomial::jet(JetSymbol::new(v, &[], &[]));
        assert_eq!(p.derive(1), DiffPolynomial::sym("vrule_rhs", &[]));
    }

    #[test]
    fn substitute_params_example() {
        let a = DiffPolynomial::sym("A", &[]);
        let b = DiffPolynomial::sym("B", &[]);
        let p = b.scale(&Scalar::param("k1")).add(&a.derive(1).scale(&Scalar::param("k2")));
        let mut bind = HashMap::new();
        bind.insert(Param::new("k1"), Scalar::zero());
        bind.insert(Param::new("k2"), Scalar::one());
        assert_eq!(p.substitute_params(&bind).unwrap(), a.derive(1));
    }

    #[test]
    fn linearize_matches_difference_quotient() {
        let ell = lookup(LOG_DENSITY).unwrap();
        let l = DiffPolynomial::jet(JetSymbol::new(ell, &[], &[]));
        let p = l.derive(1).pow(2).mul(&DiffPolynomial::sym("A", &[]));
        let h = DiffPolynomial::sym("h", &[]);
        let lin = p.linearize(ell, &h);
        let expect = l.derive(1).mul(&h.derive(1)).mul(&DiffPolynomial::sym("A", &[])).scale(&Scalar::int(2));
        assert_eq!(lin, expect);
    }
}
