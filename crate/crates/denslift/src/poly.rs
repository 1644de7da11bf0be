//! Multivariate polynomials over the rationals in named formal parameters,
//! with exact division and a recursive primitive-PRS gcd.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

#[derive(Default)]
struct ParamTable {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

fn params() -> &'static RwLock<ParamTable> {
    static TABLE: OnceLock<RwLock<ParamTable>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = ParamTable::default();
        // Fixed ids for the common parameters keep rendering stable across runs.
        for name in ["l0", "lam", "beta", "kappa", "eps", "x0"] {
            let id = t.names.len() as u32;
            t.names.push(name.to_string());
            t.ids.insert(name.to_string(), id);
        }
        RwLock::new(t)
    })
}

/// Interned formal parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Param(pub u32);

impl Param {
    pub fn new(name: &str) -> Param {
        if let Some(&id) = params().read().unwrap().ids.get(name) {
            return Param(id);
        }
        let mut t = params().write().unwrap();
        if let Some(&id) = t.ids.get(name) {
            return Param(id);
        }
        let id = t.names.len() as u32;
        t.names.push(name.to_string());
        t.ids.insert(name.to_string(), id);
        Param(id)
    }

    pub fn name(self) -> String {
        params().read().unwrap().names[self.0 as usize].clone()
    }
}

/// Sparse exponent vector, sorted by parameter id, exponents positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PMono(pub SmallVec<[(u32, u32); 2]>);

impl PMono {
    pub fn one() -> PMono {
        PMono(SmallVec::new())
    }

    pub fn var(v: u32, e: u32) -> PMono {
        let mut m = PMono::one();
        if e > 0 {
            m.0.push((v, e));
        }
        m
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exp(&self, v: u32) -> u32 {
        self.0.iter().find(|(w, _)| *w == v).map_or(0, |(_, e)| *e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn mul(&self, other: &PMono) -> PMono {
        let mut out = SmallVec::new();
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        PMono(out)
    }

    pub fn div(&self, other: &PMono) -> Option<PMono> {
        let mut out: SmallVec<[(u32, u32); 2]> = SmallVec::new();
        for &(v, e) in &self.0 {
            let f = other.exp(v);
            if f > e {
                return None;
            }
            if e > f {
                out.push((v, e - f));
            }
        }
        if other.0.iter().any(|(v, _)| self.exp(*v) == 0) {
            return None;
        }
        Some(PMono(out))
    }

    pub fn without(&self, v: u32) -> PMono {
        PMono(self.0.iter().copied().filter(|(w, _)| *w != v).collect())
    }
}

impl Ord for PMono {
    /// Lexicographic order with smaller parameter ids more significant.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(va, ea)), Some(&(vb, eb))) => {
                    if va < vb {
                        return Ordering::Greater;
                    }
                    if va > vb {
                        return Ordering::Less;
                    }
                    if ea != eb {
                        return ea.cmp(&eb);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
}

impl PartialOrd for PMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<PMono, Rat>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(q: Rat) -> Poly {
        let mut p = Poly::zero();
        if !q.is_zero() {
            p.terms.insert(PMono::one(), q);
        }
        p
    }

    pub fn var(p: Param) -> Poly {
        let mut out = Poly::zero();
        out.terms.insert(PMono::var(p.0, 1), Rat::one());
        out
    }

    pub fn monomial(m: PMono, q: Rat) -> Poly {
        let mut p = Poly::zero();
        if !q.is_zero() {
            p.terms.insert(m, q);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PMono, &Rat)> {
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

    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, q) = self.terms.iter().next().unwrap();
                m.is_one().then(|| q.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.as_constant().is_some_and(|q| q.is_one())
    }

    pub fn lead(&self) -> Option<(&PMono, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn vars(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| *v)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, q) in &other.terms {
            add_term(&mut self.terms, m.clone(), q.clone());
        }
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, q)| (m.clone(), -q)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, q) in &other.terms {
            add_term(&mut out.terms, m.clone(), -q);
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> Poly {
        if q.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = BTreeMap::new();
        for (m1, q1) in &self.terms {
            for (m2, q2) in &other.terms {
                add_term(&mut out, m1.mul(m2), q1 * q2);
            }
        }
        Poly { terms: out }
    }

    pub fn mul_mono(&self, m: &PMono, q: &Rat) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.mul(m), c * q)).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn degree_in(&self, v: u32) -> u32 {
        self.terms.keys().map(|m| m.exp(v)).max().unwrap_or(0)
    }

    /// Coefficients with respect to `v`, keyed by exponent.
    pub fn coeffs_in(&self, v: u32) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, q) in &self.terms {
            out.entry(m.exp(v)).or_default().terms.insert(m.without(v), q.clone());
        }
        out
    }

    fn coeff_in(&self, v: u32, e: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, q) in &self.terms {
            if m.exp(v) == e {
                out.terms.insert(m.without(v), q.clone());
            }
        }
        out
    }

    /// Exact quotient, or `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dq) = d.lead().map(|(m, q)| (m.clone(), q.clone())).unwrap();
        let mut r = self.clone();
        let mut q = Poly::zero();
        while let Some((m, c)) = r.lead().map(|(m, c)| (m.clone(), c.clone())) {
            let tm = m.div(&dm)?;
            let tc = c / &dq;
            r = r.sub(&d.mul_mono(&tm, &tc));
            q.terms.insert(tm, tc);
        }
        Some(q)
    }

    /// Scale so the leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.lead() {
            None => Poly::zero(),
            Some((_, q)) => {
                let inv = q.recip();
                self.scale(&inv)
            }
        }
    }

    fn content_in(&self, v: u32) -> Poly {
        let mut g = Poly::zero();
        for c in self.coeffs_in(v).into_values() {
            g = gcd(&g, &c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    fn prem(a: &Poly, b: &Poly, v: u32) -> Poly {
        let db = b.degree_in(v);
        let lcb = b.coeff_in(v, db);
        let mut r = a.clone();
        while !r.is_zero() {
            let dr = r.degree_in(v);
            if dr < db {
                break;
            }
            let lcr = r.coeff_in(v, dr);
            let shift = Poly::monomial(PMono::var(v, dr - db), Rat::one());
            r = r.mul(&lcb).sub(&lcr.mul(&shift).mul(b));
        }
        r
    }

    /// Evaluate with every parameter in `values` replaced by a rational.
    pub fn eval_partial(&self, values: &HashMap<u32, Rat>) -> Poly {
        let mut out = BTreeMap::new();
        for (m, q) in &self.terms {
            let mut c = q.clone();
            let mut rest = PMono::one();
            for &(v, e) in &m.0 {
                match values.get(&v) {
                    Some(x) => c *= num_traits::pow(x.clone(), e as usize),
                    None => rest = rest.mul(&PMono::var(v, e)),
                }
            }
            add_term(&mut out, rest, c);
        }
        Poly { terms: out }
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut items: Vec<(u32, String, &Rat)> =
            self.terms.iter().map(|(m, q)| (m.degree(), render_pmono(m), q)).collect();
        items.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut s = String::new();
        for (i, (_, m, q)) in items.iter().enumerate() {
            let neg = q.is_negative();
            let aq = q.abs();
            if i == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push(if neg { '-' } else { '+' });
            }
            if m.is_empty() {
                s.push_str(&aq.to_string());
            } else {
                if !aq.is_one() {
                    write!(s, "{aq}*").unwrap();
                }
                s.push_str(m);
            }
        }
        s
    }
}

fn render_pmono(m: &PMono) -> String {
    let mut parts: Vec<String> = m
        .0
        .iter()
        .map(|&(v, e)| {
            let name = Param(v).name();
            if e == 1 { name } else { format!("{name}^{e}") }
        })
        .collect();
    parts.sort();
    parts.join("*")
}

fn add_term(map: &mut BTreeMap<PMono, Rat>, m: PMono, q: Rat) {
    if q.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match map.entry(m) {
        Entry::Vacant(e) => {
            e.insert(q);
        }
        Entry::Occupied(mut e) => {
            *e.get_mut() += q;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Monic greatest common divisor.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one();
    }
    if a == b {
        return a.monic();
    }
    let va = a.vars();
    let vb = b.vars();
    let v = va[0].min(vb[0]);
    let da = a.degree_in(v);
    let db = b.degree_in(v);
    if da == 0 {
        return gcd(a, &b.content_in(v));
    }
    if db == 0 {
        return gcd(&a.content_in(v), b);
    }
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let c = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = Poly::prem(&p, &q, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            q = Poly::one();
            break;
        }
        p = q;
        let cr = r.content_in(v);
        q = r.div_exact(&cr).expect("content divides");
    }
    c.mul(&q).monic()
}
