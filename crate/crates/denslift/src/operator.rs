//! Weight-0 operators on the algebra of densities, stored in normal order
//! `Σ c_{r,α}(x) λ̂^r ∂^α` with the weight operator λ̂ central.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::jet::DiffPolynomial;
use crate::poly::Param;
use crate::scalar::Scalar;

/// Derivative multi-index as counts per axis; length equals the dimension.
pub type MultiIndex = SmallVec<[u8; 4]>;

pub fn mi_zero(d: usize) -> MultiIndex {
    SmallVec::from_elem(0, d)
}

pub fn mi_unit(d: usize, axis: usize) -> MultiIndex {
    let mut m = mi_zero(d);
    m[axis - 1] = 1;
    m
}

pub fn mi_order(a: &MultiIndex) -> usize {
    a.iter().map(|&x| x as usize).sum()
}

pub fn mi_add(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn mi_sub(a: &MultiIndex, b: &MultiIndex) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Axis list (1-based, sorted) with the multiplicities of `a`.
pub fn mi_axes(a: &MultiIndex) -> SmallVec<[u8; 4]> {
    let mut v = SmallVec::new();
    for (i, &c) in a.iter().enumerate() {
        for _ in 0..c {
            v.push(i as u8 + 1);
        }
    }
    v
}

pub fn mi_from_axes(d: usize, axes: &[u8]) -> MultiIndex {
    let mut m = mi_zero(d);
    for &a in axes {
        m[a as usize - 1] += 1;
    }
    m
}

/// All β ≤ α componentwise.
pub fn mi_below(a: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::new()];
    for &c in a {
        let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
        for b in &out {
            for k in 0..=c {
                let mut nb = b.clone();
                nb.push(k);
                next.push(nb);
            }
        }
        out = next;
    }
    out
}

/// All multi-indices of total order `n` in dimension `d`.
pub fn mi_of_order(d: usize, n: usize) -> Vec<MultiIndex> {
    fn rec(d: usize, n: usize, cur: &mut MultiIndex, out: &mut Vec<MultiIndex>) {
        if cur.len() == d - 1 {
            cur.push(n as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=n).rev() {
            cur.push(k as u8);
            rec(d, n - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n, &mut MultiIndex::new(), &mut out);
    out
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

pub fn mi_binomial(a: &MultiIndex, b: &MultiIndex) -> u64 {
    a.iter().zip(b).map(|(&x, &y)| binomial(x as u64, y as u64)).product()
}

/// |α|! / Π α_i!: number of index sequences with counts α.
pub fn multinomial(a: &MultiIndex) -> u64 {
    let mut n = 0u64;
    let mut acc = 1u64;
    for &c in a {
        for _ in 0..c {
            n += 1;
            acc *= n;
        }
    }
    let denom: u64 = a.iter().map(|&c| (1..=c as u64).product::<u64>()).product();
    acc / denom
}

/// Derivative of a fixed coefficient, cached per multi-index.
pub struct DerivCache<'a> {
    base: &'a DiffPolynomial,
    cache: HashMap<MultiIndex, DiffPolynomial>,
    deriv: &'a dyn Fn(&DiffPolynomial, u8) -> DiffPolynomial,
}

impl<'a> DerivCache<'a> {
    pub fn new(base: &'a DiffPolynomial, deriv: &'a dyn Fn(&DiffPolynomial, u8) -> DiffPolynomial) -> Self {
        DerivCache { base, cache: HashMap::new(), deriv }
    }

    pub fn get(&mut self, b: &MultiIndex) -> DiffPolynomial {
        if b.iter().all(|&x| x == 0) {
            return self.base.clone();
        }
        if let Some(p) = self.cache.get(b) {
            return p.clone();
        }
        let k = b.iter().rposition(|&x| x > 0).unwrap();
        let mut prev = b.clone();
        prev[k] -= 1;
        let p = self.get(&prev);
        let out = if p.is_zero() { p } else { (self.deriv)(&p, k as u8 + 1) };
        self.cache.insert(b.clone(), out.clone());
        out
    }
}

pub fn total_derivative(p: &DiffPolynomial, axis: u8) -> DiffPolynomial {
    p.derive(axis)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DensityOperator {
    dim: usize,
    terms: BTreeMap<(u32, MultiIndex), DiffPolynomial>,
}

/// A density `coeff·|Dx|^weight`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Density {
    pub coeff: DiffPolynomial,
    pub weight: Scalar,
}

impl DensityOperator {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        DensityOperator { dim, terms: BTreeMap::new() }
    }

    pub fn function(dim: usize, f: DiffPolynomial) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(0, mi_zero(dim), f);
        op
    }

    pub fn scalar(dim: usize, s: Scalar) -> Self {
        Self::function(dim, DiffPolynomial::constant(s))
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, Scalar::one())
    }

    /// The weight operator λ̂.
    pub fn weight(dim: usize) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(1, mi_zero(dim), DiffPolynomial::one());
        op
    }

    /// λ̂ − λ₀.
    pub fn weight_shift(dim: usize, l0: &Scalar) -> Self {
        Self::weight(dim).sub(&Self::scalar(dim, l0.clone()))
    }

    /// ∂_axis (1-based).
    pub fn partial(dim: usize, axis: usize) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(0, mi_unit(dim, axis), DiffPolynomial::one());
        op
    }

    /// c·λ̂^r·∂^α.
    pub fn monomial(dim: usize, r: u32, alpha: MultiIndex, c: DiffPolynomial) -> Self {
        let mut op = Self::zero(dim);
        op.add_term(r, alpha, c);
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &MultiIndex, &DiffPolynomial)> {
        self.terms.iter().map(|((r, a), c)| (*r, a, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, r: u32, alpha: &MultiIndex) -> DiffPolynomial {
        self.terms.get(&(r, alpha.clone())).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, r: u32, alpha: MultiIndex, c: DiffPolynomial) {
        debug_assert_eq!(alpha.len(), self.dim);
        if c.is_zero() {
            return;
        }
        match self.terms.entry((r, alpha)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = self.clone();
        for ((r, a), c) in &other.terms {
            out.add_term(*r, a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&Scalar::int(-1))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            out.add_term(*r, a.clone(), c.scale(s));
        }
        out
    }

    /// Left multiplication by a function.
    pub fn mul_fn(&self, f: &DiffPolynomial) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            out.add_term(*r, a.clone(), f.mul(c));
        }
        out
    }

    /// Multiplication by λ̂^k.
    pub fn mul_weight_pow(&self, k: u32) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            out.add_term(r + k, a.clone(), c.clone());
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&DiffPolynomial) -> DiffPolynomial) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            out.add_term(*r, a.clone(), f(c));
        }
        out
    }

    pub fn try_map_coeffs(&self, f: impl Fn(&DiffPolynomial) -> Result<DiffPolynomial>) -> Result<Self> {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            out.add_term(*r, a.clone(), f(c)?);
        }
        Ok(out)
    }

    pub fn substitute_params(&self, bindings: &HashMap<Param, Scalar>) -> Result<Self> {
        self.try_map_coeffs(|c| c.substitute_params(bindings))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.compose_with(other, &total_derivative)
    }

    /// Normal-ordered product using `deriv` as the action of ∂ on coefficients.
    pub fn compose_with(&self, other: &Self, deriv: &dyn Fn(&DiffPolynomial, u8) -> DiffPolynomial) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.dim);
        let mut caches: Vec<DerivCache> = other.terms.values().map(|c| DerivCache::new(c, deriv)).collect();
        let mut below: HashMap<MultiIndex, Vec<MultiIndex>> = HashMap::new();
        for ((r1, a1), c1) in &self.terms {
            let subs = below.entry(a1.clone()).or_insert_with(|| mi_below(a1)).clone();
            for (k, ((r2, a2), _)) in other.terms.iter().enumerate() {
                for b in &subs {
                    let db = caches[k].get(b);
                    if db.is_zero() {
                        continue;
                    }
                    let binom = mi_binomial(a1, b) as i64;
                    let coeff = c1.mul(&db).scale(&Scalar::int(binom));
                    out.add_term(r1 + r2, mi_add(&mi_sub(a1, b), a2), coeff);
                }
            }
        }
        Ok(out)
    }

    /// Formal adjoint: λ̂ ↦ 1−λ̂, ∂ ↦ −∂, order of products reversed.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            let sign = if mi_order(a).is_multiple_of(2) { 1 } else { -1 };
            let mut cache = DerivCache::new(c, &total_derivative);
            for b in mi_below(a) {
                let db = cache.get(&b);
                if db.is_zero() {
                    continue;
                }
                let rest = mi_sub(a, &b);
                let base = mi_binomial(a, &b) as i64 * sign;
                // (1 − λ̂)^r = Σ_j C(r,j)(−1)^j λ̂^j
                for j in 0..=*r {
                    let cj = binomial(*r as u64, j as u64) as i64 * if j % 2 == 0 { 1 } else { -1 };
                    out.add_term(j, rest.clone(), db.scale(&Scalar::int(base * cj)));
                }
            }
        }
        out
    }

    /// Replace λ̂ by the scalar `l`.
    pub fn restrict(&self, l: &Scalar) -> Self {
        let mut out = Self::zero(self.dim);
        let mut pows = vec![Scalar::one()];
        for ((r, a), c) in &self.terms {
            while pows.len() <= *r as usize {
                let next = pows.last().unwrap() * l;
                pows.push(next);
            }
            out.add_term(0, a.clone(), c.scale(&pows[*r as usize]));
        }
        out
    }

    pub fn apply(&self, s: &Density) -> Density {
        let mut coeff = DiffPolynomial::zero();
        let mut cache = DerivCache::new(&s.coeff, &total_derivative);
        for ((r, a), c) in &self.terms {
            let ds = cache.get(a);
            coeff.add_assign(&c.mul(&ds).scale(&s.weight.pow(*r)));
        }
        Density { coeff, weight: s.weight.clone() }
    }

    pub fn total_order(&self) -> Result<usize> {
        self.terms.keys().map(|(r, a)| *r as usize + mi_order(a)).max().ok_or(Error::ZeroOperator)
    }

    pub fn x_order(&self) -> Result<usize> {
        self.terms.keys().map(|(_, a)| mi_order(a)).max().ok_or(Error::ZeroOperator)
    }

    pub fn weight_degree(&self) -> usize {
        self.terms.keys().map(|(r, _)| *r as usize).max().unwrap_or(0)
    }

    pub fn is_vertical(&self) -> bool {
        self.terms.keys().all(|(_, a)| mi_order(a) == 0)
    }

    pub fn has_weight_operator(&self) -> bool {
        self.terms.keys().any(|(r, _)| *r > 0)
    }

    pub fn require_weight_free(&self) -> Result<()> {
        if self.has_weight_operator() {
            return Err(Error::HasWeightOperator);
        }
        Ok(())
    }

    /// Terms with |α| = k.
    pub fn x_part(&self, k: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for ((r, a), c) in &self.terms {
            if mi_order(a) == k {
                out.add_term(*r, a.clone(), c.clone());
            }
        }
        out
    }

    /// Value of the weight-0 member on the constant function 1.
    pub fn on_one(&self) -> DiffPolynomial {
        self.coeff(0, &mi_zero(self.dim))
    }

    /// Polynomial quotient by (λ̂ − λ₀), failing on a nonzero remainder.
    pub fn divide_weight_shift(&self, l0: &Scalar) -> Result<Self> {
        let mut by_alpha: BTreeMap<MultiIndex, BTreeMap<u32, DiffPolynomial>> = BTreeMap::new();
        for ((r, a), c) in &self.terms {
            by_alpha.entry(a.clone()).or_default().insert(*r, c.clone());
        }
        let mut out = Self::zero(self.dim);
        for (a, coeffs) in by_alpha {
            let top = *coeffs.keys().next_back().unwrap();
            let mut carry = DiffPolynomial::zero();
            for r in (0..=top).rev() {
                let p = coeffs.get(&r).cloned().unwrap_or_default().add(&carry.scale(l0));
                if r == 0 {
                    if !p.is_zero() {
                        return Err(Error::NotDivisible);
                    }
                } else {
                    out.add_term(r - 1, a.clone(), p.clone());
                    carry = p;
                }
            }
        }
        Ok(out)
    }

    /// Highest-order term, as a one-term operator.
    pub fn leading_term(&self) -> Option<Self> {
        let key = self.sorted_keys().pop()?;
        Some(Self::monomial(self.dim, key.0, key.1.clone(), self.terms[&key].clone()))
    }

    /// Keys sorted by (total order, r, α lex), lowest first.
    pub fn sorted_keys(&self) -> Vec<(u32, MultiIndex)> {
        let mut keys: Vec<(u32, MultiIndex)> = self.terms.keys().cloned().collect();
        keys.sort_by(|(r1, a1), (r2, a2)| {
            let t1 = *r1 as usize + mi_order(a1);
            let t2 = *r2 as usize + mi_order(a2);
            t1.cmp(&t2).then(r1.cmp(r2)).then_with(|| mi_axes(a1).cmp(&mi_axes(a2)))
        });
        keys
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (r, a)) in self.sorted_keys().into_iter().enumerate() {
            let c = &self.terms[&(r, a.clone())];
            let mut ops: Vec<String> = vec!["L".to_string(); r as usize];
            ops.extend(mi_axes(&a).iter().map(|ax| format!("D{ax}")));
            let t = render_coeff_with_ops(c, &ops.join(" "));
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

/// Render `c * ops` where `ops` is a product of generators (possibly empty).
pub fn render_coeff_with_ops(c: &DiffPolynomial, ops: &str) -> String {
    if ops.is_empty() {
        return c.render();
    }
    if c.len() == 1 {
        let (m, s) = c.terms().next().unwrap();
        let mono = m.render();
        let body = if mono.is_empty() { ops.to_string() } else { format!("{mono}*{ops}") };
        return crate::jet::render_term(s, &body);
    }
    format!("({})*{}", c.render(), ops)
}

impl std::fmt::Display for DensityOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

/// Vector field components X^1..X^d.
pub type VectorField = Vec<DiffPolynomial>;

/// X^i∂_i + λ̂ ∂_iX^i.
pub fn lie_operator(x: &[DiffPolynomial]) -> DensityOperator {
    let d = x.len();
    let mut op = DensityOperator::zero(d);
    let mut div = DiffPolynomial::zero();
    for (i, xi) in x.iter().enumerate() {
        op.add_term(0, mi_unit(d, i + 1), xi.clone());
        div.add_assign(&xi.derive(i as u8 + 1));
    }
    op.add_term(1, mi_zero(d), div);
    op
}

/// Commutator [L̂_X, A].
pub fn ad_vf(x: &[DiffPolynomial], a: &DensityOperator) -> Result<DensityOperator> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch(x.len(), a.dim()));
    }
    let l = lie_operator(x);
    Ok(l.compose(a)?.sub(&a.compose(&l)?))
}

/// Generic vector field with components `name[i]`.
pub fn generic_field(name: &str, d: usize) -> VectorField {
    (1..=d).map(|i| DiffPolynomial::sym(name, &[i as u8])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str) -> DiffPolynomial {
        DiffPolynomial::sym(name, &[])
    }

    fn d1() -> DensityOperator {
        DensityOperator::partial(1, 1)
    }

    fn fun(p: DiffPolynomial) -> DensityOperator {
        DensityOperator::function(1, p)
    }

    #[test]
    fn leibniz_examples() {
        let g = f("g");
        let lhs = d1().compose(&fun(g.clone())).unwrap();
        assert_eq!(lhs, fun(g.clone()).compose(&d1()).unwrap().add(&fun(g.derive(1))));
        let l = DensityOperator::weight(1);
        assert_eq!(l.compose(&d1()).unwrap(), d1().compose(&l).unwrap());
        // ∂∂∘g = g∂∂ + 2g'∂ + g''
        let dd = d1().compose(&d1()).unwrap();
        let got = dd.compose(&fun(g.clone())).unwrap();
        let mut expect = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), g.clone());
        expect.add_term(0, mi_unit(1, 1), g.derive(1).scale(&Scalar::int(2)));
        expect.add_term(0, mi_zero(1), g.derive(1).derive(1));
        assert_eq!(got, expect);
    }

    #[test]
    fn second_order_composition_matches_application() {
        // Independent check: apply both sides to a generic density.
        let g = f("g");
        let dd = d1().compose(&d1()).unwrap();
        let s = Density { coeff: f("s"), weight: Scalar::param("mu") };
        let lhs = dd.compose(&fun(g.clone())).unwrap().apply(&s);
        let direct = g.mul(&s.coeff).derive(1).derive(1);
        assert_eq!(lhs.coeff, direct);
    }

    #[test]
    fn adjoint_examples() {
        let l = DensityOperator::weight(1);
        assert_eq!(l.adjoint(), DensityOperator::identity(1).sub(&l));
        let (s, t, r) = (f("S"), f("T"), f("R"));
        let mut op = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), s.clone());
        op.add_term(0, mi_unit(1, 1), t.clone());
        op.add_term(0, mi_zero(1), r.clone());
        let mut expect = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), s.clone());
        expect.add_term(0, mi_unit(1, 1), s.derive(1).scale(&Scalar::int(2)).sub(&t));
        expect.add_term(0, mi_zero(1), r.sub(&t.derive(1)).add(&s.derive(1).derive(1)));
        assert_eq!(op.adjoint(), expect);
        let x = generic_field("X", 2);
        let lx = lie_operator(&x);
        assert_eq!(lx.adjoint(), lx.neg());
    }

    #[test]
    fn restrict_and_orders() {
        let l = DensityOperator::weight(1);
        let op = l.compose(&l).unwrap().compose(&d1()).unwrap().add(&l);
        let mut expect = DensityOperator::monomial(1, 0, mi_unit(1, 1), DiffPolynomial::int(4));
        expect.add_term(0, mi_zero(1), DiffPolynomial::int(2));
        assert_eq!(op.restrict(&Scalar::int(2)), expect);
        let ldd = l.compose(&d1()).unwrap().compose(&d1()).unwrap();
        assert_eq!(ldd.total_order().unwrap(), 3);
        assert_eq!(ldd.x_order().unwrap(), 2);
        assert_eq!(fun(f("q")).total_order().unwrap(), 0);
        assert_eq!(DensityOperator::zero(1).total_order(), Err(Error::ZeroOperator));
        assert!(DensityOperator::zero(1).is_vertical());
        assert!(!d1().is_vertical());
        assert!(l.compose(&l).unwrap().mul_fn(&f("c")).is_vertical());
    }

    #[test]
    fn apply_weight() {
        let s = Density { coeff: f("s"), weight: Scalar::param("mu") };
        let got = DensityOperator::weight(1).apply(&s);
        assert_eq!(got.coeff, f("s").scale(&Scalar::param("mu")));
        assert_eq!(d1().apply(&s).coeff, f("s").derive(1));
    }

    #[test]
    fn lie_examples() {
        assert_eq!(lie_operator(&[DiffPolynomial::one()]), d1());
        let lx = lie_operator(&[DiffPolynomial::coord(1)]);
        let expect = fun(DiffPolynomial::coord(1)).compose(&d1()).unwrap().add(&DensityOperator::weight(1));
        assert_eq!(lx, expect);
        let g = f("g");
        let ad = ad_vf(&[DiffPolynomial::one()], &fun(g.clone()).compose(&d1()).unwrap()).unwrap();
        assert_eq!(ad, fun(g.derive(1)).compose(&d1()).unwrap());
        let x = generic_field("X", 2);
        assert!(ad_vf(&x, &DensityOperator::identity(2)).unwrap().is_zero());
        assert!(ad_vf(&x, &DensityOperator::weight(2)).unwrap().is_zero());
        assert_eq!(ad_vf(&x, &d1()), Err(Error::DimensionMismatch(2, 1)));
    }

    #[test]
    fn weight_shift_division() {
        let l0 = Scalar::param("l0");
        let sh = DensityOperator::weight_shift(1, &l0);
        let a = sh.compose(&d1()).unwrap().add(&sh.compose(&sh).unwrap().mul_fn(&f("c")));
        let q = a.divide_weight_shift(&l0).unwrap();
        assert_eq!(sh.compose(&q).unwrap(), a);
        assert_eq!(d1().divide_weight_shift(&l0), Err(Error::NotDivisible));
    }

    #[test]
    fn multi_index_helpers() {
        assert_eq!(mi_of_order(3, 2).len(), 6);
        assert_eq!(multinomial(&mi_from_axes(3, &[1, 1, 2])), 3);
        assert_eq!(mi_below(&mi_from_axes(2, &[1, 2, 2])).len(), 6);
    }
}
