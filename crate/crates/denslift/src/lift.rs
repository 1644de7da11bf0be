//! Liftings of operators on densities of a fixed weight λ₀ to operators on
//! the whole density algebra.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::jet::{lookup, DiffPolynomial, JetSymbol, SymId, LOG_DENSITY};
use crate::operator::{
    lie_operator, mi_add, mi_from_axes, mi_order, mi_sub, mi_unit, mi_zero, DensityOperator, MultiIndex,
    VectorField,
};
use crate::scalar::Scalar;
use crate::weight::WeightPoly;

/// Volume structure, carried by the jets of log ρ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VolumeForm {
    /// ρ = |Dx|, so Γ = 0.
    Coordinate,
    /// log ρ is the given free jet symbol.
    Generic(SymId),
}

impl VolumeForm {
    pub fn generic() -> VolumeForm {
        VolumeForm::Generic(lookup(LOG_DENSITY).unwrap())
    }

    pub fn log_density(&self) -> Option<DiffPolynomial> {
        match self {
            VolumeForm::Coordinate => None,
            VolumeForm::Generic(s) => Some(DiffPolynomial::jet(JetSymbol::new(*s, &[], &[]))),
        }
    }

    /// Γ_i = −∂_i log ρ.
    pub fn gamma(&self, i: usize) -> DiffPolynomial {
        match self.log_density() {
            None => DiffPolynomial::zero(),
            Some(l) => l.derive(i as u8).neg(),
        }
    }
}

fn sign(n: usize) -> Scalar {
    Scalar::int(if n.is_multiple_of(2) { 1 } else { -1 })
}

fn order_or_zero(op: &DensityOperator) -> usize {
    op.total_order().unwrap_or(0)
}

/// Fails when `l0` makes any of `factors` vanish.
pub(crate) fn check_weight(l0: &Scalar, factors: &[Scalar]) -> Result<()> {
    if factors.iter().any(|f| f.is_zero()) {
        return Err(Error::ExceptionalWeight(l0.to_string()));
    }
    Ok(())
}

fn two_l0_minus_one(l0: &Scalar) -> Scalar {
    &(&Scalar::int(2) * l0) - &Scalar::one()
}

/// Replace every ∂_i by ∂_i + (λ̂−λ₀)Γ_i.
pub fn canonical_lift(delta: &DensityOperator, l0: &Scalar, rho: &VolumeForm) -> Result<DensityOperator> {
    delta.require_weight_free()?;
    if *rho == VolumeForm::Coordinate {
        return Ok(delta.clone());
    }
    let d = delta.dim();
    let shift = DensityOperator::weight_shift(d, l0);
    let nabla: Vec<DensityOperator> = (1..=d)
        .map(|i| DensityOperator::partial(d, i).add(&shift.mul_fn(&rho.gamma(i))))
        .collect();
    let mut powers: HashMap<MultiIndex, DensityOperator> = HashMap::new();
    powers.insert(mi_zero(d), DensityOperator::identity(d));
    let mut out = DensityOperator::zero(d);
    let mut keys: Vec<MultiIndex> = delta.terms().map(|(_, a, _)| a.clone()).collect();
    keys.sort_by_key(mi_order);
    for a in keys {
        let p = nabla_power(&a, &nabla, &mut powers)?;
        out = out.add(&p.mul_fn(&delta.coeff(0, &a)));
    }
    Ok(out)
}

fn nabla_power(
    a: &MultiIndex,
    nabla: &[DensityOperator],
    memo: &mut HashMap<MultiIndex, DensityOperator>,
) -> Result<DensityOperator> {
    if let Some(p) = memo.get(a) {
        return Ok(p.clone());
    }
    let k = a.iter().position(|&x| x > 0).unwrap();
    let prev = mi_sub(a, &mi_unit(a.len(), k + 1));
    let p = nabla[k].compose(&nabla_power(&prev, nabla, memo)?)?;
    memo.insert(a.clone(), p.clone());
    Ok(p)
}

/// Parameters (b, c_k, d_k) of the affine family of volume-form liftings.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VolLiftParams {
    pub b: Scalar,
    pub c: Vec<Scalar>,
    pub d: Vec<Scalar>,
}

impl VolLiftParams {
    /// Parameters of the distinguished lifting, b = 1/(1−2λ₀).
    pub fn distinguished(l0: &Scalar) -> Result<VolLiftParams> {
        let t = two_l0_minus_one(l0);
        check_weight(l0, std::slice::from_ref(&t))?;
        Ok(VolLiftParams { b: (-&t).inv()?, c: vec![], d: vec![] })
    }

    /// Re-expand vertical polynomials vanishing at λ₀ in powers of (λ̂−λ₀).
    pub fn from_vertical(b: Scalar, c: &WeightPoly, d: &WeightPoly, l0: &Scalar) -> Result<VolLiftParams> {
        let split = |p: &WeightPoly| -> Result<Vec<Scalar>> {
            let mut cs = p.expand_at(l0);
            if cs.is_empty() {
                return Ok(cs);
            }
            if !cs[0].is_zero() {
                return Err(Error::BadPolynomial("vertical term must vanish at l0".into()));
            }
            cs.remove(0);
            Ok(cs)
        };
        Ok(VolLiftParams { b, c: split(c)?, d: split(d)? })
    }

    pub fn a_poly(&self, l0: &Scalar) -> WeightPoly {
        WeightPoly::one().sub(&WeightPoly::shift(l0).scale(&self.b))
    }

    pub fn b_poly(&self, l0: &Scalar, n: usize) -> WeightPoly {
        WeightPoly::shift(l0).scale(&(&sign(n) * &self.b))
    }

    fn series(cs: &[Scalar], l0: &Scalar) -> WeightPoly {
        let mut full = vec![Scalar::zero()];
        full.extend(cs.iter().cloned());
        WeightPoly::from_expansion(l0, &full)
    }

    pub fn c_poly(&self, l0: &Scalar) -> WeightPoly {
        Self::series(&self.c, l0)
    }

    pub fn d_poly(&self, l0: &Scalar) -> WeightPoly {
        Self::series(&self.d, l0)
    }
}

/// Member of the volume-form lifting family; n is the order of Δ.
pub fn vol_lift(delta: &DensityOperator, l0: &Scalar, rho: &VolumeForm, params: &VolLiftParams) -> Result<DensityOperator> {
    vol_lift_n(delta, l0, rho, params, order_or_zero(delta))
}

/// Member of the volume-form lifting family on operators of order ≤ n.
pub fn vol_lift_n(
    delta: &DensityOperator,
    l0: &Scalar,
    rho: &VolumeForm,
    params: &VolLiftParams,
    n: usize,
) -> Result<DensityOperator> {
    delta.require_weight_free()?;
    if params.c.len() > n || params.d.len() > n {
        return Err(Error::ParameterCount(format!("at most {n} vertical coefficients allowed")));
    }
    let dim = delta.dim();
    let p = canonical_lift(delta, l0, rho)?;
    let ps = p.adjoint();
    let mut out = params.a_poly(l0).apply_to(&p).add(&params.b_poly(l0, n).apply_to(&ps));
    out = out.add(&params.c_poly(l0).times_fn(dim, &p.on_one()));
    out = out.add(&params.d_poly(l0).times_fn(dim, &ps.on_one()));
    Ok(out)
}

/// (Anti-)self-adjoint member of the volume-form family; n is the order of Δ.
pub fn distinguished_lift(delta: &DensityOperator, l0: &Scalar, rho: &VolumeForm) -> Result<DensityOperator> {
    distinguished_lift_n(delta, l0, rho, order_or_zero(delta))
}

pub fn distinguished_lift_n(delta: &DensityOperator, l0: &Scalar, rho: &VolumeForm, n: usize) -> Result<DensityOperator> {
    delta.require_weight_free()?;
    let t = two_l0_minus_one(l0);
    check_weight(l0, std::slice::from_ref(&t))?;
    let inv = t.inv()?;
    let p = canonical_lift(delta, l0, rho)?;
    let first = WeightPoly::new(vec![l0 - &Scalar::one(), Scalar::one()]).scale(&inv);
    let second = WeightPoly::new(vec![l0.clone(), Scalar::int(-1)]).scale(&(&sign(n) * &inv));
    Ok(first.apply_to(&p).add(&second.apply_to(&p.adjoint())))
}

/// Self-adjoint vertical polynomials (C, D) built from t = λ̂ − ½.
pub fn sa_vertical_polynomials(n: usize, l0: &Scalar, c: &[Scalar], d: &[Scalar]) -> Result<(WeightPoly, WeightPoly)> {
    let count = sa_vertical_count(n);
    if c.len() != count || d.len() != count {
        return Err(Error::ParameterCount(format!("expected {count} coefficients for order {n}")));
    }
    let t = WeightPoly::t();
    let t0 = t.eval(l0);
    let build = |cs: &[Scalar]| {
        let mut acc = WeightPoly::zero();
        for (k, ck) in cs.iter().enumerate() {
            let e = 2 * (k as u32 + 1);
            acc = acc.add(&t.pow(e).sub(&WeightPoly::constant(t0.pow(e))).scale(ck));
        }
        t.pow((n % 2) as u32).mul(&acc)
    };
    Ok((build(c), build(d)))
}

/// Number of c_k (and of d_k) for order n.
pub fn sa_vertical_count(n: usize) -> usize {
    (n - n % 2) / 2
}

/// Split a first-order operator as L^{λ₀}_A + S.
pub fn decompose_first_order(delta: &DensityOperator, l0: &Scalar) -> Result<(VectorField, DiffPolynomial)> {
    delta.require_weight_free()?;
    let dim = delta.dim();
    let ord = order_or_zero(delta);
    if ord > 1 {
        return Err(Error::OrderTooHigh { found: ord, allowed: 1 });
    }
    let a: VectorField = (1..=dim).map(|i| delta.coeff(0, &mi_unit(dim, i))).collect();
    let div = a.iter().enumerate().fold(DiffPolynomial::zero(), |acc, (i, ai)| acc.add(&ai.derive(i as u8 + 1)));
    Ok((a, delta.on_one().sub(&div.scale(l0))))
}

/// L̂_A + (1 + c(λ̂−λ₀))·S.
pub fn first_order_lift(delta: &DensityOperator, l0: &Scalar, c: &Scalar) -> Result<DensityOperator> {
    let (a, s) = decompose_first_order(delta, l0)?;
    let factor = WeightPoly::one().add(&WeightPoly::shift(l0).scale(c));
    Ok(lie_operator(&a).add(&factor.times_fn(delta.dim(), &s)))
}

/// Symmetric coefficient array S^{ij} of the second-order part (tensor convention).
pub fn second_order_tensor(delta: &DensityOperator) -> Vec<Vec<DiffPolynomial>> {
    let d = delta.dim();
    let half = Scalar::frac(1, 2);
    let mut s = vec![vec![DiffPolynomial::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let c = delta.coeff(0, &mi_from_axes(d, &[i as u8 + 1, j as u8 + 1]));
            s[i][j] = if i == j { c } else { c.scale(&half) };
        }
    }
    s
}

/// Coefficients T^i of the first-order part.
pub fn first_order_vector(delta: &DensityOperator) -> VectorField {
    let d = delta.dim();
    (1..=d).map(|i| delta.coeff(0, &mi_unit(d, i))).collect()
}

/// (∂_jS^{ji})_i.
pub fn tensor_divergence(s: &[Vec<DiffPolynomial>]) -> VectorField {
    let d = s.len();
    (0..d)
        .map(|i| (0..d).fold(DiffPolynomial::zero(), |acc, j| acc.add(&s[j][i].derive(j as u8 + 1))))
        .collect()
}

fn vector_divergence(v: &[DiffPolynomial]) -> DiffPolynomial {
    v.iter().enumerate().fold(DiffPolynomial::zero(), |acc, (i, x)| acc.add(&x.derive(i as u8 + 1)))
}

/// Data (S, γ, θ, F) of a second-order self-adjoint pencil.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricData {
    pub s: Vec<Vec<DiffPolynomial>>,
    pub gamma: VectorField,
    pub theta: DiffPolynomial,
    pub f: DiffPolynomial,
}

impl GeometricData {
    /// S∂∂ + ∂S∂ + (2λ̂−1)γ∂ + λ̂∂γ + λ̂(λ̂−1)θ + F.
    pub fn assemble(&self) -> DensityOperator {
        let d = self.s.len();
        let mut out = DensityOperator::zero(d);
        for i in 0..d {
            for j in 0..d {
                out.add_term(0, mi_from_axes(d, &[i as u8 + 1, j as u8 + 1]), self.s[i][j].clone());
            }
        }
        let div_s = tensor_divergence(&self.s);
        let two_l_minus_one = WeightPoly::new(vec![Scalar::int(-1), Scalar::int(2)]);
        for i in 0..d {
            out.add_term(0, mi_unit(d, i + 1), div_s[i].clone());
            let g = DensityOperator::monomial(d, 0, mi_unit(d, i + 1), self.gamma[i].clone());
            out = out.add(&two_l_minus_one.apply_to(&g));
        }
        out.add_term(1, mi_zero(d), vector_divergence(&self.gamma));
        let l_l_minus_one = WeightPoly::new(vec![Scalar::zero(), Scalar::int(-1), Scalar::one()]);
        out = out.add(&l_l_minus_one.times_fn(d, &self.theta));
        out.add_term(0, mi_zero(d), self.f.clone());
        out
    }
}

fn require_second_order(delta: &DensityOperator) -> Result<()> {
    delta.require_weight_free()?;
    let ord = order_or_zero(delta);
    if ord > 2 {
        return Err(Error::OrderTooHigh { found: ord, allowed: 2 });
    }
    Ok(())
}

/// Upper connection γ and Branse–Dicke function θ of Δ at weight λ₀.
pub fn extract_geometric_data(delta: &DensityOperator, l0: &Scalar) -> Result<GeometricData> {
    require_second_order(delta)?;
    let t = two_l0_minus_one(l0);
    let q = l0 * &(l0 - &Scalar::one());
    check_weight(l0, &[l0.clone(), t.clone(), l0 - &Scalar::one()])?;
    let s = second_order_tensor(delta);
    let tv = first_order_vector(delta);
    let r = delta.on_one();
    let div_s = tensor_divergence(&s);
    let t_inv = t.inv()?;
    let gamma: VectorField = tv.iter().zip(&div_s).map(|(a, b)| a.sub(b).scale(&t_inv)).collect();
    let div_t = vector_divergence(&tv);
    let div_div_s = vector_divergence(&div_s);
    let theta = r.sub(&div_t.sub(&div_div_s).scale(&(l0 * &t_inv))).scale(&q.inv()?);
    Ok(GeometricData { s, gamma, theta, f: DiffPolynomial::zero() })
}

/// The unique self-adjoint second-order lifting with Ĥ(1) = 0.
pub fn second_order_canonical_lift(delta: &DensityOperator, l0: &Scalar) -> Result<DensityOperator> {
    Ok(extract_geometric_data(delta, l0)?.assemble())
}

/// θ − 2γ^iΓ_i + S^{ij}Γ_iΓ_j.
pub fn cocycle_rho(delta: &DensityOperator, l0: &Scalar, rho: &VolumeForm) -> Result<DiffPolynomial> {
    let g = extract_geometric_data(delta, l0)?;
    let d = delta.dim();
    let gam: Vec<DiffPolynomial> = (1..=d).map(|i| rho.gamma(i)).collect();
    let mut out = g.theta.clone();
    for i in 0..d {
        out = out.sub(&g.gamma[i].mul(&gam[i]).scale(&Scalar::int(2)));
        for j in 0..d {
            out = out.add(&g.s[i][j].mul(&gam[i]).mul(&gam[j]));
        }
    }
    Ok(out)
}

/// Coefficients Δ_k with Â = Σ (λ̂−λ₀)^k P̂(Δ_k).
pub fn taylor_expand(a: &DensityOperator, l0: &Scalar, rho: &VolumeForm) -> Result<Vec<DensityOperator>> {
    let n = order_or_zero(a);
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = a.clone();
    for _ in 0..=n {
        let dk = cur.restrict(l0);
        cur = cur.sub(&canonical_lift(&dk, l0, rho)?).divide_weight_shift(l0)?;
        out.push(dk);
    }
    debug_assert!(cur.is_zero());
    Ok(out)
}

pub fn taylor_assemble(coeffs: &[DensityOperator], l0: &Scalar, rho: &VolumeForm) -> Result<DensityOperator> {
    let dim = coeffs.first().map_or(1, |c| c.dim());
    let shift = WeightPoly::shift(l0);
    let mut out = DensityOperator::zero(dim);
    for (k, c) in coeffs.iter().enumerate() {
        out = out.add(&shift.pow(k as u32).apply_to(&canonical_lift(c, l0, rho)?));
    }
    Ok(out)
}

/// Pencil through Δ₀ with adjoint = (−1)ⁿ·pencil, parametrized by the even
/// Taylor coefficients Δ₂, Δ₄, … of its expansion around weight ½.
pub fn selfadjoint_family(
    delta0: &DensityOperator,
    l0: &Scalar,
    rho: &VolumeForm,
    evens: &[DensityOperator],
) -> Result<DensityOperator> {
    delta0.require_weight_free()?;
    let t = two_l0_minus_one(l0);
    check_weight(l0, std::slice::from_ref(&t))?;
    let n = order_or_zero(delta0);
    let dim = delta0.dim();
    let half = Scalar::frac(1, 2);
    let mut e = vec![DensityOperator::zero(dim); n + 2];
    let lifted = canonical_lift(delta0, l0, rho)?;
    e[0] = lifted.restrict(&half);
    for (k, ev) in evens.iter().enumerate() {
        ev.require_weight_free()?;
        let idx = 2 * (k + 1);
        if ev.is_zero() {
            continue;
        }
        let found = ev.total_order()?;
        if idx > n || found > n - idx {
            return Err(Error::OrderViolation { index: idx, found, allowed: n.saturating_sub(idx) });
        }
        e[idx] = ev.clone();
    }
    let s = sign(n);
    let t_inv = t.inv()?;
    let quarter_t = &t * &Scalar::frac(1, 4);
    for j in (1..=n).step_by(2) {
        let lower = e[j - 1].sub(&e[j - 1].adjoint().scale(&s)).scale(&t_inv);
        let upper = e[j + 1].add(&e[j + 1].adjoint().scale(&s)).scale(&quarter_t);
        e[j] = lower.add(&upper);
    }
    let tpoly = WeightPoly::t();
    let mut tail = DensityOperator::zero(dim);
    for (j, ej) in e.iter().enumerate().take(n + 1).skip(1) {
        tail = tail.add(&tpoly.pow(j as u32 - 1).apply_to(&canonical_lift(ej, &half, rho)?));
    }
    Ok(lifted.add(&WeightPoly::shift(l0).apply_to(&tail)))
}

/// Self-adjoint lifting at λ₀ = 0 of a second-order Δ with Δ(1) = 0.
pub fn limit_lift(delta: &DensityOperator, rho: &VolumeForm) -> Result<DensityOperator> {
    require_second_order(delta)?;
    if !delta.on_one().is_zero() {
        return Err(Error::NotNormalized);
    }
    let d = delta.dim();
    let s = second_order_tensor(delta);
    let tv = first_order_vector(delta);
    let div_s = tensor_divergence(&s);
    let gamma: VectorField = div_s.iter().zip(&tv).map(|(a, b)| a.sub(b)).collect();
    let low: Vec<DiffPolynomial> = (1..=d).map(|i| rho.gamma(i)).collect();
    let up: VectorField = (0..d)
        .map(|i| (0..d).fold(DiffPolynomial::zero(), |acc, k| acc.add(&s[i][k].mul(&low[k]))))
        .collect();
    let mut theta = vector_divergence(&gamma).sub(&vector_divergence(&up));
    for i in 0..d {
        theta = theta.add(&gamma[i].mul(&low[i]));
    }
    Ok(GeometricData { s, gamma, theta, f: DiffPolynomial::zero() }.assemble())
}

/// Total order of Ĥ is at most n.
pub fn is_regular_pair(_delta: &DensityOperator, lift: &DensityOperator, n: usize) -> bool {
    order_or_zero(lift) <= n
}

/// Total order of Ĥ does not exceed that of Δ.
pub fn is_strict_pair(delta: &DensityOperator, lift: &DensityOperator) -> bool {
    order_or_zero(lift) <= order_or_zero(delta)
}

/// Σ_I N^I ∂_I over ordered index tuples, one symmetric tensor per order.
pub fn tensor_operator(d: usize, order: usize, name: &str) -> DensityOperator {
    let mut op = DensityOperator::zero(d);
    for a in crate::operator::mi_of_order(d, order) {
        let upper = crate::operator::mi_axes(&a);
        let c = DiffPolynomial::sym(name, &upper).scale(&Scalar::int(crate::operator::multinomial(&a) as i64));
        op.add_term(0, a, c);
    }
    op
}

/// Generic operator Σ_k N_k^{I}∂_I with `names[k]` naming the order-k tensor.
pub fn generic_operator(d: usize, names: &[&str]) -> DensityOperator {
    names.iter().enumerate().fold(DensityOperator::zero(d), |acc, (k, n)| acc.add(&tensor_operator(d, k, n)))
}

/// Shift a multi-index by one axis (helper for tensor code elsewhere).
pub fn mi_plus_axis(a: &MultiIndex, axis: usize) -> MultiIndex {
    mi_add(a, &mi_unit(a.len(), axis))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{generic_field, Density};

    fn f(name: &str) -> DiffPolynomial {
        DiffPolynomial::sym(name, &[])
    }

    fn l0() -> Scalar {
        Scalar::param("l0")
    }

    fn ell() -> DiffPolynomial {
        VolumeForm::generic().log_density().unwrap()
    }

    fn shift_fn(d: usize, l: &Scalar, g: &DiffPolynomial) -> DensityOperator {
        WeightPoly::shift(l).times_fn(d, g)
    }

    /// a∂² + b∂ + c on the line.
    fn line_second_order() -> DensityOperator {
        let mut op = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), f("a"));
        op.add_term(0, mi_unit(1, 1), f("b"));
        op.add_term(0, mi_zero(1), f("c"));
        op
    }

    #[test]
    fn canonical_lift_first_order() {
        let rho = VolumeForm::generic();
        let got = canonical_lift(&DensityOperator::partial(1, 1), &Scalar::zero(), &rho).unwrap();
        let expect = DensityOperator::partial(1, 1).sub(&shift_fn(1, &Scalar::zero(), &ell().derive(1)));
        assert_eq!(got, expect);
        // Conjugation oracle: ρ^λ ∂ ρ^{-λ} s = s' − λ ℓ' s.
        let s = Density { coeff: f("s"), weight: Scalar::param("mu") };
        let out = got.apply(&s);
        let direct = f("s").derive(1).sub(&ell().derive(1).mul(&f("s")).scale(&Scalar::param("mu")));
        assert_eq!(out.coeff, direct);

        let l = l0();
        let mut delta = DensityOperator::monomial(2, 0, mi_unit(2, 1), f("A"));
        delta.add_term(0, mi_zero(2), f("B"));
        let got = canonical_lift(&delta, &l, &rho).unwrap();
        let expect = delta.add(&shift_fn(2, &l, &f("A").mul(&rho.gamma(1))));
        assert_eq!(got, expect);
        assert_eq!(canonical_lift(&DensityOperator::weight(1), &l, &rho), Err(Error::HasWeightOperator));
    }

    #[test]
    fn canonical_lift_commutes_with_adjoint() {
        let rho = VolumeForm::generic();
        let l = l0();
        let delta = generic_operator(2, &["R", "T", "S", "U"]);
        let lhs = canonical_lift(&delta, &l, &rho).unwrap().adjoint();
        let rhs = canonical_lift(&delta.adjoint(), &(&Scalar::one() - &l), &rho).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(canonical_lift(&delta, &l, &rho).unwrap().restrict(&l), delta);
    }

    #[test]
    fn vol_lift_first_order_line() {
        let rho = VolumeForm::generic();
        let l = l0();
        let (b, c, d) = (Scalar::param("b"), Scalar::param("c"), Scalar::param("d"));
        let mut delta = DensityOperator::monomial(1, 0, mi_unit(1, 1), f("A"));
        delta.add_term(0, mi_zero(1), f("B"));
        let params = VolLiftParams { b: b.clone(), c: vec![c.clone()], d: vec![d.clone()] };
        let got = vol_lift(&delta, &l, &rho, &params).unwrap();
        let k1 = &(&c + &d) - &(&Scalar::int(2) * &b);
        let k2 = &b - &d;
        let k3 = &(&Scalar::one() - &(&l * &k1)) - &k2;
        let inner = f("B")
            .scale(&k1)
            .add(&f("A").derive(1).scale(&k2))
            .add(&f("A").mul(&rho.gamma(1)).scale(&k3));
        let expect = delta.add(&shift_fn(1, &l, &inner));
        assert_eq!(got, expect);
    }

    #[test]
    fn vol_lift_defaults_to_canonical() {
        let rho = VolumeForm::generic();
        let delta = generic_operator(2, &["R", "T", "S"]);
        let p = VolLiftParams::default();
        assert_eq!(vol_lift(&delta, &l0(), &rho, &p).unwrap(), canonical_lift(&delta, &l0(), &rho).unwrap());
        let long = VolLiftParams { b: Scalar::zero(), c: vec![Scalar::one(); 3], d: vec![] };
        assert!(matches!(vol_lift(&delta, &l0(), &rho, &long), Err(Error::ParameterCount(_))));
    }

    #[test]
    fn vol_lift_of_first_order_can_be_second_order() {
        // The order-2 family applied to T∂ gives Δ − 2b(λ̂−λ₀)T∂ + ….
        let rho = VolumeForm::Coordinate;
        let delta = DensityOperator::monomial(1, 0, mi_unit(1, 1), f("A"));
        let p = VolLiftParams { b: Scalar::one(), c: vec![], d: vec![] };
        let out = vol_lift_n(&delta, &Scalar::zero(), &rho, &p, 2).unwrap();
        assert_eq!(out.coeff(1, &mi_unit(1, 1)), f("A").scale(&Scalar::int(-2)));
        assert_eq!(out.total_order().unwrap(), 2);
        assert_eq!(out.restrict(&Scalar::zero()), delta);
    }

    #[test]
    fn distinguished_third_order() {
        let l = l0();
        let t = two_l0_minus_one(&l);
        let s3 = tensor_operator(2, 3, "S");
        let g2 = tensor_operator(2, 2, "G");
        let delta = s3.add(&g2).add(&tensor_operator(2, 1, "A")).add(&tensor_operator(2, 0, "R"));
        let out = distinguished_lift(&delta, &l, &VolumeForm::Coordinate).unwrap();
        assert_eq!(out.adjoint(), out.neg());
        assert_eq!(out.x_part(3), s3);
        // ((2λ̂−1)G^{km} − 3(λ̂−λ₀)∂_iS^{ikm}) / (2λ₀−1)
        let t_inv = t.inv().unwrap();
        let two_l = WeightPoly::new(vec![Scalar::int(-1), Scalar::int(2)]).scale(&t_inv);
        let minus_three = WeightPoly::shift(&l).scale(&(&Scalar::int(-3) * &t_inv));
        let mut expect = two_l.apply_to(&g2);
        for a in crate::operator::mi_of_order(2, 2) {
            let ax = crate::operator::mi_axes(&a);
            let m = Scalar::int(crate::operator::multinomial(&a) as i64);
            let div = (1..=2u8).fold(DiffPolynomial::zero(), |acc, i| {
                let mut up = vec![i];
                up.extend(ax.iter().copied());
                up.sort();
                acc.add(&DiffPolynomial::sym("S", &up).derive(i))
            });
            expect = expect.add(&minus_three.times_fn(2, &div.scale(&m)).compose(&DensityOperator::monomial(2, 0, a, DiffPolynomial::one())).unwrap());
        }
        assert_eq!(out.x_part(2), expect);
        assert_eq!(out.restrict(&l), delta);
    }

    #[test]
    fn distinguished_parity_and_exceptional() {
        let rho = VolumeForm::generic();
        let l = l0();
        for n in 0..=3usize {
            let names = ["R", "T", "S", "U"];
            let delta = generic_operator(1, &names[..=n]);
            let out = distinguished_lift(&delta, &l, &rho).unwrap();
            assert_eq!(out.adjoint(), out.scale(&sign(n)), "order {n}");
            assert_eq!(out.restrict(&l), delta);
        }
        let err = distinguished_lift(&DensityOperator::partial(1, 1), &Scalar::frac(1, 2), &rho);
        assert!(matches!(err, Err(Error::ExceptionalWeight(_))));
    }

    #[test]
    fn vertical_polynomials() {
        let l = l0();
        let c = Scalar::param("c");
        let (cp, dp) = sa_vertical_polynomials(2, &l, std::slice::from_ref(&c), &[Scalar::zero()]).unwrap();
        let q = |x: &WeightPoly| x.clone();
        let lam = WeightPoly::new(vec![Scalar::zero(), Scalar::one()]);
        let expect = lam
            .mul(&lam.sub(&WeightPoly::one()))
            .sub(&WeightPoly::constant(&l * &(&l - &Scalar::one())))
            .scale(&c);
        assert_eq!(q(&cp), expect);
        assert!(dp.is_zero());
        let (c1, d1) = sa_vertical_polynomials(1, &l, &[], &[]).unwrap();
        assert!(c1.is_zero() && d1.is_zero());
        for n in 0..6 {
            let k = sa_vertical_count(n);
            let cs: Vec<Scalar> = (0..k).map(|i| Scalar::param(&format!("c{i}"))).collect();
            let (cp, _) = sa_vertical_polynomials(n, &l, &cs, &cs).unwrap();
            assert_eq!(cp.reflect(), cp.scale(&sign(n)));
            assert!(cp.eval(&l).is_zero());
            assert_eq!(2 * k, if n % 2 == 0 { n } else { n - 1 });
        }
        assert!(sa_vertical_polynomials(2, &l, &[], &[]).is_err());
    }

    #[test]
    fn first_order_lifts() {
        let l = l0();
        let mut delta = DensityOperator::monomial(1, 0, mi_unit(1, 1), f("A"));
        delta.add_term(0, mi_zero(1), f("B"));
        let strict = first_order_lift(&delta, &l, &Scalar::zero()).unwrap();
        let mut expect = delta.clone();
        expect.add_term(1, mi_zero(1), f("A").derive(1));
        expect.add_term(0, mi_zero(1), f("A").derive(1).scale(&(-&l)));
        assert_eq!(strict, expect);
        assert!(is_strict_pair(&delta, &strict));

        let c = two_l0_minus_one(&l).inv().unwrap().scale(&crate::poly::rat_int(2));
        let anti = first_order_lift(&delta, &l, &c).unwrap();
        assert_eq!(anti.adjoint(), anti.neg());
        assert_eq!(anti.restrict(&l), delta);

        let b = DensityOperator::function(1, f("B"));
        let lifted = first_order_lift(&b, &l, &Scalar::param("c")).unwrap();
        assert_eq!(lifted, b.add(&shift_fn(1, &l, &f("B").scale(&Scalar::param("c")))));
        assert!(!is_strict_pair(&b, &lifted));
        assert!(is_regular_pair(&b, &lifted, 1));

        let dd = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), DiffPolynomial::one());
        assert!(matches!(first_order_lift(&dd, &l, &Scalar::zero()), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn decompose_round_trip() {
        let l = l0();
        let (a, s) = decompose_first_order(&DensityOperator::partial(2, 1), &l).unwrap();
        assert_eq!(a, vec![DiffPolynomial::one(), DiffPolynomial::zero()]);
        assert!(s.is_zero());
        let delta = generic_operator(2, &["B", "A"]);
        let (a, s) = decompose_first_order(&delta, &Scalar::zero()).unwrap();
        assert_eq!(s, f("B"));
        let (a2, s2) = decompose_first_order(&delta, &l).unwrap();
        assert_eq!(a, a2);
        let back = lie_operator(&a).restrict(&l).add(&DensityOperator::function(2, s2));
        assert_eq!(back, delta);
    }

    #[test]
    fn geometric_data_on_line() {
        let l = l0();
        let t = two_l0_minus_one(&l);
        let g = extract_geometric_data(&line_second_order(), &l).unwrap();
        let (a, b, c) = (f("a"), f("b"), f("c"));
        let gamma = b.sub(&a.derive(1)).scale(&t.inv().unwrap());
        assert_eq!(g.gamma, vec![gamma]);
        let inner = b.derive(1).sub(&a.derive(1).derive(1)).scale(&(&l * &t.inv().unwrap()));
        let theta = c.sub(&inner).scale(&(&l * &(&l - &Scalar::one())).inv().unwrap());
        assert_eq!(g.theta, theta);

        let div_form = tensor_operator(2, 2, "S").add(&generic_operator(2, &["R"]));
        let s_part = tensor_operator(2, 2, "S");
        let div_form = {
            let div = tensor_divergence(&second_order_tensor(&s_part));
            let mut op = div_form;
            for (i, v) in div.into_iter().enumerate() {
                op.add_term(0, mi_unit(2, i + 1), v);
            }
            op
        };
        let g = extract_geometric_data(&div_form, &l).unwrap();
        assert!(g.gamma.iter().all(|x| x.is_zero()));
        for bad in [Scalar::zero(), Scalar::frac(1, 2), Scalar::one()] {
            assert!(matches!(extract_geometric_data(&line_second_order(), &bad), Err(Error::ExceptionalWeight(_))));
        }
    }

    #[test]
    fn second_order_canonical() {
        let l = l0();
        let lap = DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), DiffPolynomial::one());
        assert_eq!(second_order_canonical_lift(&lap, &l).unwrap(), lap);
        for d in 1..=2 {
            let delta = generic_operator(d, &["R", "T", "S"]);
            let h = second_order_canonical_lift(&delta, &l).unwrap();
            assert_eq!(h.adjoint(), h);
            assert_eq!(h.restrict(&l), delta);
            assert!(h.on_one().is_zero());
        }
    }

    #[test]
    fn cocycle_identity() {
        let l = l0();
        let rho = VolumeForm::generic();
        let q = WeightPoly::new(vec![Scalar::zero(), Scalar::int(-1), Scalar::one()])
            .sub(&WeightPoly::constant(&l * &(&l - &Scalar::one())));
        for d in 1..=2 {
            let delta = generic_operator(d, &["R", "T", "S"]);
            let diff = second_order_canonical_lift(&delta, &l)
                .unwrap()
                .sub(&distinguished_lift(&delta, &l, &rho).unwrap());
            let c = cocycle_rho(&delta, &l, &rho).unwrap();
            assert_eq!(diff, q.times_fn(d, &c), "dim {d}");
        }
        let g = extract_geometric_data(&line_second_order(), &l).unwrap();
        assert_eq!(cocycle_rho(&line_second_order(), &l, &VolumeForm::Coordinate).unwrap(), g.theta);
        let mut unit = line_second_order();
        unit = unit.sub(&DensityOperator::monomial(1, 0, mi_from_axes(1, &[1, 1]), f("a")));
        unit.add_term(0, mi_from_axes(1, &[1, 1]), DiffPolynomial::one());
        let g = extract_geometric_data(&unit, &l).unwrap();
        let lx = ell().derive(1);
        let expect = g.theta.add(&g.gamma[0].mul(&lx).scale(&Scalar::int(2))).add(&lx.mul(&lx));
        assert_eq!(cocycle_rho(&unit, &l, &rho).unwrap(), expect);
    }

    #[test]
    fn taylor_round_trip() {
        let l = l0();
        let rho = VolumeForm::generic();
        let delta = generic_operator(2, &["R", "T", "S"]);
        let p = canonical_lift(&delta, &l, &rho).unwrap();
        let cs = taylor_expand(&p, &l, &rho).unwrap();
        assert_eq!(cs[0], delta);
        assert!(cs[1..].iter().all(|c| c.is_zero()));

        let lf = DensityOperator::weight(1).mul_fn(&f("f"));
        let cs = taylor_expand(&lf, &Scalar::zero(), &VolumeForm::Coordinate).unwrap();
        assert_eq!(cs, vec![DensityOperator::zero(1), DensityOperator::function(1, f("f"))]);
        assert_eq!(taylor_assemble(&cs, &Scalar::zero(), &VolumeForm::Coordinate).unwrap(), lf);

        let h = second_order_canonical_lift(&generic_operator(1, &["R", "T", "S"]), &l).unwrap();
        let cs = taylor_expand(&h, &l, &rho).unwrap();
        for (k, c) in cs.iter().enumerate() {
            assert!(c.is_zero() || c.total_order().unwrap() <= 2 - k);
        }
        assert_eq!(taylor_assemble(&cs, &l, &rho).unwrap(), h);
    }

    #[test]
    fn selfadjoint_family_reduces_to_distinguished() {
        let l = l0();
        let rho = VolumeForm::generic();
        for n in 1..=3usize {
            let names = ["R", "T", "S", "U"];
            let delta = generic_operator(1, &names[..=n]);
            let a = selfadjoint_family(&delta, &l, &rho, &[]).unwrap();
            assert_eq!(a, distinguished_lift(&delta, &l, &rho).unwrap(), "order {n}");
        }
    }

    #[test]
    fn selfadjoint_family_second_order() {
        let l = l0();
        let rho = VolumeForm::generic();
        let delta = generic_operator(2, &["R", "T", "S"]);
        let ff = DensityOperator::function(2, f("F"));
        let h = selfadjoint_family(&delta, &l, &rho, std::slice::from_ref(&ff)).unwrap();
        assert_eq!(h.adjoint(), h);
        assert_eq!(h.restrict(&l), delta);
        // Δ₁ = (E₀ − E₀*)/(2λ₀−1) + (λ₀−½)F at the weight-½ base point.
        let half = Scalar::frac(1, 2);
        let p = canonical_lift(&delta, &l, &rho).unwrap();
        let e0 = p.restrict(&half);
        let t = two_l0_minus_one(&l);
        let d1 = e0.sub(&e0.adjoint()).scale(&t.inv().unwrap()).add(&ff.scale(&(&l - &half)));
        let inner = canonical_lift(&d1, &half, &rho)
            .unwrap()
            .add(&WeightPoly::t().apply_to(&canonical_lift(&ff, &half, &rho).unwrap()));
        assert_eq!(h, p.add(&WeightPoly::shift(&l).apply_to(&inner)));
    }

    #[test]
    fn selfadjoint_family_parity_and_bounds() {
        let l = l0();
        let rho = VolumeForm::generic();
        let delta = generic_operator(1, &["R", "T", "S", "U"]);
        let x = generic_field("X", 1);
        let even = lie_operator(&x).restrict(&Scalar::param("m")).add(&DensityOperator::function(1, f("Q")));
        let h = selfadjoint_family(&delta, &l, &rho, &[even]).unwrap();
        assert_eq!(h.adjoint(), h.neg());
        assert_eq!(h.restrict(&l), delta);
        let too_big = generic_operator(1, &["R", "T", "S"]);
        let err = selfadjoint_family(&delta, &l, &rho, &[too_big]);
        assert!(matches!(err, Err(Error::OrderViolation { index: 2, .. })));

        let d4 = generic_operator(1, &["R", "T", "S", "U", "V"]);
        let evens = [generic_operator(1, &["P", "Q", "W"]), DensityOperator::function(1, f("Z"))];
        let h = selfadjoint_family(&d4, &l, &rho, &evens).unwrap();
        assert_eq!(h.adjoint(), h);
        assert_eq!(h.restrict(&l), d4);
    }

    #[test]
    fn limit_lift_cases() {
        let s = tensor_operator(2, 2, "S");
        let delta = s.add(&tensor_operator(2, 1, "T"));
        for rho in [VolumeForm::Coordinate, VolumeForm::generic()] {
            let h = limit_lift(&delta, &rho).unwrap();
            assert_eq!(h.adjoint(), h);
            assert_eq!(h.restrict(&Scalar::zero()), delta);
        }
        // Coordinate volume: θ = ∂_iγ^i.
        let h = limit_lift(&delta, &VolumeForm::Coordinate).unwrap();
        let div_s = tensor_divergence(&second_order_tensor(&delta));
        let tv = first_order_vector(&delta);
        let gamma: Vec<_> = div_s.iter().zip(&tv).map(|(a, b)| a.sub(b)).collect();
        let theta = vector_divergence(&gamma);
        assert_eq!(h.coeff(2, &mi_zero(2)), theta);
        let with_r = delta.add(&DensityOperator::function(2, f("R")));
        assert_eq!(limit_lift(&with_r, &VolumeForm::Coordinate), Err(Error::NotNormalized));
    }

    #[test]
    fn regularity_of_ad_hoc_pencil() {
        // Δ + λ̂(aS∂∂ + b(∂S + A)∂) at weight 0.
        let (a, b) = (Scalar::param("a"), Scalar::param("b"));
        let s = tensor_operator(2, 2, "S");
        let delta = s.add(&tensor_operator(2, 1, "A")).add(&tensor_operator(2, 0, "F"));
        let mut first = DensityOperator::zero(2);
        let div = tensor_divergence(&second_order_tensor(&s));
        for i in 0..2 {
            first.add_term(0, mi_unit(2, i + 1), div[i].add(&DiffPolynomial::sym("A", &[i as u8 + 1])));
        }
        let pi = |a: &Scalar, b: &Scalar| {
            delta.add(&s.scale(a).add(&first.scale(b)).mul_weight_pow(1))
        };
        let general = pi(&a, &b);
        assert_eq!(general.restrict(&Scalar::zero()), delta);
        assert!(!is_regular_pair(&delta, &general, 2));
        assert!(is_regular_pair(&delta, &pi(&Scalar::zero(), &b), 2));
        let t = tensor_operator(2, 1, "A");
        let on_first = t.add(&first.sub(&div_only(&div)).scale(&b).mul_weight_pow(1));
        assert!(!is_strict_pair(&t, &on_first));
    }

    fn div_only(div: &[DiffPolynomial]) -> DensityOperator {
        let mut op = DensityOperator::zero(div.len());
        for (i, v) in div.iter().enumerate() {
            op.add_term(0, mi_unit(div.len(), i + 1), v.clone());
        }
        op
    }
}
