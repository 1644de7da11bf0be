//! Projectively equivariant symbol calculus, quantization and the 1-D
//! Schwarzian.

use std::collections::BTreeMap;

use smallvec::smallvec;

use crate::error::{Error, Result};
use crate::jet::{lookup, register_self_referential, register_with, DiffPolynomial, JetSymbol, Rule, DIFFEO, DIFFEO_RECIP};
use crate::lift::check_weight;
use crate::operator::{
    mi_add, mi_axes, mi_below, mi_order, mi_sub, mi_unit, multinomial, DensityOperator, MultiIndex, VectorField,
};
use crate::scalar::Scalar;
use crate::weight::{lagrange_basis, WeightPoly};

/// Polynomial in the fibre coordinates ξ with jet coefficients; keys are
/// exponent vectors of ξ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolPoly {
    dim: usize,
    terms: BTreeMap<MultiIndex, DiffPolynomial>,
}

impl SymbolPoly {
    pub fn zero(dim: usize) -> Self {
        SymbolPoly { dim, terms: BTreeMap::new() }
    }

    pub fn monomial(dim: usize, beta: MultiIndex, c: DiffPolynomial) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(beta, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &DiffPolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, beta: &MultiIndex) -> DiffPolynomial {
        self.terms.get(beta).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, beta: MultiIndex, c: DiffPolynomial) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(beta.clone()).or_default();
        slot.add_assign(&c);
        if slot.is_zero() {
            self.terms.remove(&beta);
        }
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(mi_order).max()
    }

    /// Part of ξ-degree exactly `k`.
    pub fn homogeneous(&self, k: usize) -> Self {
        let terms = self.terms.iter().filter(|(b, _)| mi_order(b) == k).map(|(b, c)| (b.clone(), c.clone())).collect();
        SymbolPoly { dim: self.dim, terms }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (b, c) in &other.terms {
            out.add_term(b.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn map_coeffs(&self, f: impl Fn(&DiffPolynomial) -> DiffPolynomial) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            out.add_term(b.clone(), f(c));
        }
        out
    }

    /// Terms by descending degree, e.g. `a*xi^2 - (2*lam+1)/2*a_,1*xi + …`.
    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut keys: Vec<&MultiIndex> = self.terms.keys().collect();
        keys.sort_by(|a, b| mi_order(b).cmp(&mi_order(a)).then_with(|| b.cmp(a)));
        let mut out = String::new();
        for (i, b) in keys.into_iter().enumerate() {
            let xi = self.render_xi(b);
            let t = crate::operator::render_coeff_with_ops(&self.terms[b], &xi);
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

    fn render_xi(&self, b: &MultiIndex) -> String {
        let mut parts = Vec::new();
        for (i, &e) in b.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = if self.dim == 1 { "xi".to_string() } else { format!("xi{}", i + 1) };
            parts.push(if e == 1 { name } else { format!("{name}^{e}") });
        }
        parts.join("*")
    }
}

impl std::fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

/// Translations, linear fields x^i∂_k, then the special fields x^ix^k∂_k.
pub fn proj_generators(d: usize) -> Vec<VectorField> {
    let x = |i: usize| DiffPolynomial::coord(i as u8);
    let mut out = Vec::with_capacity(d * (d + 2));
    for k in 1..=d {
        out.push((1..=d).map(|j| if j == k { DiffPolynomial::one() } else { DiffPolynomial::zero() }).collect());
    }
    for i in 1..=d {
        for k in 1..=d {
            out.push((1..=d).map(|j| if j == k { x(i) } else { DiffPolynomial::zero() }).collect());
        }
    }
    for i in 1..=d {
        out.push((1..=d).map(|k| x(i).mul(&x(k))).collect());
    }
    out
}

/// Generalized binomial coefficient x(x−1)…(x−k+1)/k!.
pub fn binomial_scalar(x: &Scalar, k: usize) -> Scalar {
    let mut num = Scalar::one();
    for j in 0..k {
        num = &num * &(x - &Scalar::int(j as i64));
    }
    let fact: i64 = (1..=k as i64).product();
    num.div(&Scalar::int(fact)).expect("factorial is nonzero")
}

/// Coefficient c_k^(n)(λ) of the full symbol map in dimension d.
pub fn symbol_coeff(n: usize, k: usize, lambda: &Scalar, d: usize) -> Scalar {
    let top = &(lambda * &Scalar::int(d as i64 + 1)) + &Scalar::int(n as i64 - 1);
    let num = &Scalar::int(crate::operator::binomial(n as u64, k as u64) as i64) * &binomial_scalar(&top, k);
    let den = crate::operator::binomial((2 * n - k + d) as u64, k as u64) as i64;
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    &num * &Scalar::frac(sign, den)
}

/// Projectively equivariant full symbol σ_λ(Δ).
pub fn full_symbol(delta: &DensityOperator, lambda: &Scalar) -> Result<SymbolPoly> {
    delta.require_weight_free()?;
    let d = delta.dim();
    let mut out = SymbolPoly::zero(d);
    let mut coeffs: BTreeMap<(usize, usize), Scalar> = BTreeMap::new();
    for (_, mu, c) in delta.terms() {
        let n = mi_order(mu);
        let m_mu = multinomial(mu) as i64;
        for gamma in mi_below(mu) {
            let k = mi_order(&gamma);
            let ck = coeffs.entry((n, k)).or_insert_with(|| symbol_coeff(n, k, lambda, d)).clone();
            let beta = mi_sub(mu, &gamma);
            let ratio = Scalar::frac((multinomial(&beta) * multinomial(&gamma)) as i64, m_mu);
            let axes = mi_axes(&gamma);
            out.add_term(beta, c.derive_seq(&axes).scale(&(&ck * &ratio)));
        }
    }
    Ok(out)
}

/// Inverse of the full symbol map, by descending triangular inversion.
pub fn quantize(p: &SymbolPoly, lambda: &Scalar) -> DensityOperator {
    let d = p.dim();
    let mut rest = p.clone();
    let mut out = DensityOperator::zero(d);
    while let Some(top) = rest.degree() {
        let mut piece = DensityOperator::zero(d);
        for (b, c) in rest.homogeneous(top).terms() {
            piece.add_term(0, b.clone(), c.clone());
        }
        let sym = full_symbol(&piece, lambda).expect("piece is weight free");
        rest = rest.sub(&sym);
        debug_assert!(rest.degree().is_none_or(|k| k < top));
        out = out.add(&piece);
    }
    out
}

/// Q_λ̂(P): interpolate Q_λ(P) in λ over deg P + 1 integer weights.
pub fn quantize_pencil(p: &SymbolPoly) -> Result<DensityOperator> {
    let n = p.degree().unwrap_or(0);
    let nodes: Vec<Scalar> = (0..=n as i64).map(Scalar::int).collect();
    let basis = lagrange_basis(&nodes)?;
    let mut out = DensityOperator::zero(p.dim());
    for (x, l) in nodes.iter().zip(&basis) {
        out = out.add(&l.apply_to(&quantize(p, x)));
    }
    Ok(out)
}

/// Homogeneous part of ξ-degree `n` of the operator's leading coefficients.
pub fn principal_symbol(delta: &DensityOperator, n: usize) -> SymbolPoly {
    let mut out = SymbolPoly::zero(delta.dim());
    for (r, a, c) in delta.terms() {
        if r == 0 && mi_order(a) == n {
            out.add_term(a.clone(), c.clone());
        }
    }
    out
}

/// Strictly regular projectively equivariant lifting Q_λ̂∘σ_λ₀.
pub fn proj_lift(delta: &DensityOperator, l0: &Scalar) -> Result<DensityOperator> {
    quantize_pencil(&full_symbol(delta, l0)?)
}

fn order_of(delta: &DensityOperator) -> usize {
    delta.total_order().unwrap_or(0)
}

/// Δ = Δ₀ + … + Δ_n with Δ_i = Q_λ₀ of the order-(n−i) symbol of the remainder.
pub fn proj_decompose(delta: &DensityOperator, l0: &Scalar) -> Result<Vec<DensityOperator>> {
    delta.require_weight_free()?;
    let n = order_of(delta);
    let mut rest = delta.clone();
    let mut parts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let part = quantize(&principal_symbol(&rest, n - i), l0);
        rest = rest.sub(&part);
        parts.push(part);
    }
    debug_assert!(rest.is_zero());
    Ok(parts)
}

/// Σ_k P_k(λ̂)·Q_λ̂([Δ_(k)]).
pub fn proj_regular_lift(delta: &DensityOperator, l0: &Scalar, polys: &[WeightPoly]) -> Result<DensityOperator> {
    delta.require_weight_free()?;
    let n = order_of(delta);
    if polys.len() != n + 1 {
        return Err(Error::ParameterCount(format!("expected {} polynomials for order {n}", n + 1)));
    }
    for (k, p) in polys.iter().enumerate() {
        if p.degree().unwrap_or(0) > k {
            return Err(Error::BadPolynomial(format!("P{k} has degree above {k}")));
        }
        if !p.eval(l0).is_one() {
            return Err(Error::BadPolynomial(format!("P{k} does not equal 1 at l0")));
        }
    }
    let mut rest = delta.clone();
    let mut out = DensityOperator::zero(delta.dim());
    for (k, p) in polys.iter().enumerate() {
        let sym = principal_symbol(&rest, n - k);
        rest = rest.sub(&quantize(&sym, l0));
        out = out.add(&p.apply_to(&quantize_pencil(&sym)?));
    }
    Ok(out)
}

/// (Anti-)self-adjoint normalized polynomials P_0…P_n; `params[j]` holds
/// ⌊j/2⌋ coefficients for P_j.
pub fn proj_sa_polynomials(n: usize, l0: &Scalar, params: &[Vec<Scalar>]) -> Result<Vec<WeightPoly>> {
    let t0 = l0 - &Scalar::frac(1, 2);
    check_weight(l0, std::slice::from_ref(&t0))?;
    if params.len() != n + 1 {
        return Err(Error::ParameterCount(format!("expected {} coefficient lists", n + 1)));
    }
    let t = WeightPoly::t();
    let mut out = Vec::with_capacity(n + 1);
    for (j, cs) in params.iter().enumerate() {
        if cs.len() != j / 2 {
            return Err(Error::ParameterCount(format!("P{j} takes {} coefficients", j / 2)));
        }
        let mut p = WeightPoly::one();
        for (r, c) in cs.iter().enumerate() {
            let e = 2 * (r as u32 + 1);
            p = p.add(&t.pow(e).sub(&WeightPoly::constant(t0.pow(e))).scale(c));
        }
        if j % 2 == 1 {
            p = p.mul(&t).scale(&t0.inv()?);
        }
        out.push(p);
    }
    Ok(out)
}

/// Number of free coefficients in `proj_sa_polynomials` for order n.
pub fn proj_sa_count(n: usize) -> usize {
    (0..=n).map(|j| j / 2).sum()
}

/// Lie derivative of a symbol along X (cotangent lift).
pub fn symbol_lie_derivative(x: &[DiffPolynomial], p: &SymbolPoly) -> SymbolPoly {
    let d = p.dim();
    let mut out = SymbolPoly::zero(d);
    for (b, c) in p.terms() {
        let mut transported = DiffPolynomial::zero();
        for (i, xi) in x.iter().enumerate() {
            transported.add_assign(&xi.mul(&c.derive(i as u8 + 1)));
        }
        out.add_term(b.clone(), transported);
        for i in 0..d {
            if b[i] == 0 {
                continue;
            }
            let lowered = mi_sub(b, &mi_unit(d, i + 1));
            for (j, xj) in x.iter().enumerate() {
                let dx = xj.derive(i as u8 + 1);
                if dx.is_zero() {
                    continue;
                }
                let f = Scalar::int(-(b[i] as i64));
                out.add_term(mi_add(&lowered, &mi_unit(d, j + 1)), c.mul(&dx).scale(&f));
            }
        }
    }
    out
}

fn line_coeffs(delta: &DensityOperator) -> Result<[DiffPolynomial; 3]> {
    if delta.dim() != 1 {
        return Err(Error::DimensionNotOne(delta.dim()));
    }
    delta.require_weight_free()?;
    let ord = order_of(delta);
    if ord > 2 {
        return Err(Error::OrderTooHigh { found: ord, allowed: 2 });
    }
    Ok([delta.coeff(0, &smallvec![2]), delta.coeff(0, &smallvec![1]), delta.coeff(0, &smallvec![0])])
}

/// θ − 2γ' + (2/3)a'' for Δ = a∂² + b∂ + c, with `deriv` as the derivative.
pub fn schwarzian_with(
    [a, b, c]: [&DiffPolynomial; 3],
    l0: &Scalar,
    deriv: &dyn Fn(&DiffPolynomial) -> DiffPolynomial,
) -> Result<DiffPolynomial> {
    let one = Scalar::one();
    let t = &(&Scalar::int(2) * l0) - &one;
    check_weight(l0, &[l0.clone(), t.clone(), l0 - &one])?;
    let a1 = deriv(a);
    let a2 = deriv(&a1);
    let gamma = b.sub(&a1).scale(&t.inv()?);
    let inner = deriv(b).sub(&a2).scale(&l0.div(&t)?);
    let theta = c.sub(&inner).scale(&(l0 * &(l0 - &one)).inv()?);
    Ok(theta.sub(&deriv(&gamma).scale(&Scalar::int(2))).add(&a2.scale(&Scalar::frac(2, 3))))
}

/// Projectively invariant function of a second-order operator on the line.
pub fn schwarzian_data(delta: &DensityOperator, l0: &Scalar) -> Result<DiffPolynomial> {
    let [a, b, c] = line_coeffs(delta)?;
    schwarzian_with([&a, &b, &c], l0, &|p| p.derive(1))
}

/// Jets of a 1-D diffeomorphism y(x): y' and w = 1/y'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffeoJet1D {
    pub y1: DiffPolynomial,
    pub w: DiffPolynomial,
}

impl DiffeoJet1D {
    pub fn new(y1: DiffPolynomial, w: DiffPolynomial) -> Result<Self> {
        if y1.mul(&w) != DiffPolynomial::one() {
            return Err(Error::BadPolynomial("w * y' must equal 1".into()));
        }
        Ok(DiffeoJet1D { y1, w })
    }

    pub fn generic() -> Self {
        let y = lookup(DIFFEO).unwrap();
        let w = lookup(DIFFEO_RECIP).unwrap();
        DiffeoJet1D {
            y1: DiffPolynomial::jet(JetSymbol::new(y, &[], &[1])),
            w: DiffPolynomial::jet(JetSymbol::new(w, &[], &[])),
        }
    }

    pub fn identity() -> Self {
        DiffeoJet1D { y1: DiffPolynomial::one(), w: DiffPolynomial::one() }
    }

    pub fn affine(k: &Scalar) -> Result<Self> {
        Ok(DiffeoJet1D { y1: DiffPolynomial::constant(k.clone()), w: DiffPolynomial::constant(k.inv()?) })
    }

    /// Jets of x ↦ x/(1−x) written through u = 1/(1−x): y' = u², y'' = 2u³, ….
    pub fn mobius() -> Self {
        // u' = u², so y' = u² is the derivative of a fractional linear map.
        let u = lookup("moeb_u").unwrap_or_else(|| {
            register_self_referential("moeb_u", |id| {
                Rule::Explicit(vec![DiffPolynomial::jet(JetSymbol::new(id, &[], &[])).pow(2)])
            })
            .or_else(|_| lookup("moeb_u").ok_or(Error::ZeroOperator))
            .unwrap()
        });
        let u_jet = JetSymbol::new(u, &[], &[]);
        let v = lookup("moeb_v").unwrap_or_else(|| {
            register_with("moeb_v", Rule::Reciprocal(u_jet.clone()))
                .or_else(|_| lookup("moeb_v").ok_or(Error::ZeroOperator))
                .unwrap()
        });
        let up = DiffPolynomial::jet(u_jet);
        let vp = DiffPolynomial::jet(JetSymbol::new(v, &[], &[]));
        DiffeoJet1D { y1: up.pow(2), w: vp.pow(2) }
    }

    pub fn y2(&self) -> DiffPolynomial {
        self.y1.derive(1)
    }

    pub fn y3(&self) -> DiffPolynomial {
        self.y2().derive(1)
    }

    /// y'''/y' − (3/2)(y''/y')².
    pub fn schwarzian(&self) -> DiffPolynomial {
        let y2w = self.y2().mul(&self.w);
        self.y3().mul(&self.w).sub(&y2w.mul(&y2w).scale(&Scalar::frac(3, 2)))
    }

    /// ∂_y = w·∂_x on coefficients.
    pub fn derivation(&self) -> impl Fn(&DiffPolynomial, u8) -> DiffPolynomial + '_ {
        move |p, _| self.w.mul(&p.derive(1))
    }
}

/// Express a 1-D operator in the chart y = y(x); coefficients stay x-jets.
pub fn coordinate_change_1d(op: &DensityOperator, phi: &DiffeoJet1D) -> Result<DensityOperator> {
    if op.dim() != 1 {
        return Err(Error::DimensionNotOne(op.dim()));
    }
    let deriv = phi.derivation();
    // ∂_x ↦ y'∂_y + λ̂ y''/y'
    let mut g = DensityOperator::monomial(1, 0, smallvec![1], phi.y1.clone());
    g.add_term(1, smallvec![0], phi.y2().mul(&phi.w));
    let mut powers = vec![DensityOperator::identity(1)];
    let mut out = DensityOperator::zero(1);
    for (r, a, c) in op.terms() {
        let k = a[0] as usize;
        while powers.len() <= k {
            let next = g.compose_with(powers.last().unwrap(), &deriv)?;
            powers.push(next);
        }
        out = out.add(&powers[k].mul_fn(c).mul_weight_pow(r));
    }
    Ok(out)
}

/// S̃ computed in the new chart, for Δ acting on weight λ₀.
pub fn transformed_schwarzian(delta: &DensityOperator, l0: &Scalar, phi: &DiffeoJet1D) -> Result<DiffPolynomial> {
    line_coeffs(delta)?;
    let moved = coordinate_change_1d(delta, phi)?.restrict(l0);
    let [a, b, c] = line_coeffs(&moved)?;
    schwarzian_with([&a, &b, &c], l0, &|p| phi.w.mul(&p.derive(1)))
}

/// Coefficient of Sch(y)·a in the change of S under y = y(x).
pub const SCHWARZIAN_COCYCLE_FACTOR: (i64, i64) = (-2, 3);

/// S ↦ S − (2/3)(y'''/y' − (3/2)(y''/y')²)·a under the change of chart.
pub fn schwarzian_cocycle_check(delta: &DensityOperator, l0: &Scalar, phi: &DiffeoJet1D) -> Result<bool> {
    let [a, _, _] = line_coeffs(delta)?;
    let (p, q) = SCHWARZIAN_COCYCLE_FACTOR;
    let expect = schwarzian_data(delta, l0)?.add(&phi.schwarzian().mul(&a).scale(&Scalar::frac(p, q)));
    Ok(transformed_schwarzian(delta, l0, phi)? == expect)
}
