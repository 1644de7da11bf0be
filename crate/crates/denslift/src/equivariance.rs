//! Infinitesimal equivariance: ad_X of lifting maps, volume-form variations
//! and constraint systems for volume-preserving fields.

use crate::error::{Error, Result};
use crate::jet::{intern, DiffPolynomial, JetSymbol, SymId};
use crate::lift::{
    canonical_lift, distinguished_lift_n, first_order_lift, first_order_vector, second_order_canonical_lift,
    second_order_tensor, tensor_divergence, tensor_operator, vol_lift_n, VolLiftParams, VolumeForm,
};
use crate::linalg::{nullspace, operator_scalars, solve_affine};
use crate::operator::{ad_vf, generic_field, mi_from_axes, mi_unit, mi_zero, DensityOperator, VectorField};
use crate::poly::Param;
use crate::proj::{proj_lift, proj_regular_lift};
use crate::scalar::Scalar;
use crate::weight::WeightPoly;

/// ∂_iX^i + X^iℓ_{,i}.
pub fn divergence(x: &[DiffPolynomial], rho: &VolumeForm) -> DiffPolynomial {
    let mut out = DiffPolynomial::zero();
    for (i, xi) in x.iter().enumerate() {
        out.add_assign(&xi.derive(i as u8 + 1));
        if let Some(l) = rho.log_density() {
            out.add_assign(&xi.mul(&l.derive(i as u8 + 1)));
        }
    }
    out
}

/// A lifting map Δ ↦ Ĥ, reified so that ad_X can act on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftingHandle {
    Canonical { l0: Scalar, rho: VolumeForm },
    Vol { l0: Scalar, rho: VolumeForm, params: VolLiftParams },
    Distinguished { l0: Scalar, rho: VolumeForm },
    FirstOrder { l0: Scalar, c: Scalar },
    SecondOrderCanonical { l0: Scalar },
    ProjLift { l0: Scalar },
    ProjRegular { l0: Scalar, polys: Vec<WeightPoly> },
}

impl LiftingHandle {
    pub fn l0(&self) -> &Scalar {
        match self {
            LiftingHandle::Canonical { l0, .. }
            | LiftingHandle::Vol { l0, .. }
            | LiftingHandle::Distinguished { l0, .. }
            | LiftingHandle::FirstOrder { l0, .. }
            | LiftingHandle::SecondOrderCanonical { l0 }
            | LiftingHandle::ProjLift { l0 }
            | LiftingHandle::ProjRegular { l0, .. } => l0,
        }
    }

    pub fn apply(&self, delta: &DensityOperator) -> Result<DensityOperator> {
        self.apply_n(delta, delta.total_order().unwrap_or(0))
    }

    /// Apply as the lifting on operators of order ≤ n (matters for the
    /// sign of the adjoint term in the volume-form family).
    pub fn apply_n(&self, delta: &DensityOperator, n: usize) -> Result<DensityOperator> {
        match self {
            LiftingHandle::Canonical { l0, rho } => canonical_lift(delta, l0, rho),
            LiftingHandle::Vol { l0, rho, params } => vol_lift_n(delta, l0, rho, params, n),
            LiftingHandle::Distinguished { l0, rho } => distinguished_lift_n(delta, l0, rho, n),
            LiftingHandle::FirstOrder { l0, c } => first_order_lift(delta, l0, c),
            LiftingHandle::SecondOrderCanonical { l0 } => second_order_canonical_lift(delta, l0),
            LiftingHandle::ProjLift { l0 } => proj_lift(delta, l0),
            LiftingHandle::ProjRegular { l0, polys } => proj_regular_lift(delta, l0, polys),
        }
    }

    /// The volume-form variation kind, for handles that depend on ρ.
    pub fn variation_kind(&self) -> Option<(VariationKind, &Scalar, &VolumeForm)> {
        match self {
            LiftingHandle::Canonical { l0, rho } => Some((VariationKind::Canonical, l0, rho)),
            LiftingHandle::Vol { l0, rho, params } => Some((VariationKind::Vol(params.clone()), l0, rho)),
            LiftingHandle::Distinguished { l0, rho } => Some((VariationKind::Distinguished, l0, rho)),
            _ => None,
        }
    }
}

/// ad_X(Π(Δ)) − Π(ad_X Δ), with ad_X Δ taken at weight λ₀.
pub fn ad_on_lifting(h: &LiftingHandle, delta: &DensityOperator, x: &[DiffPolynomial]) -> Result<DensityOperator> {
    let n = delta.total_order().unwrap_or(0);
    let lifted = h.apply_n(delta, n)?;
    let moved = ad_vf(x, delta)?.restrict(h.l0());
    Ok(ad_vf(x, &lifted)?.sub(&h.apply_n(&moved, n)?))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VariationKind {
    Canonical,
    Vol(VolLiftParams),
    Distinguished,
}

/// First-order change of the lifting under ρ ↦ ρ(1 + εh).
pub fn volume_variation(
    kind: &VariationKind,
    delta: &DensityOperator,
    l0: &Scalar,
    rho: &VolumeForm,
    h: &DiffPolynomial,
) -> Result<DensityOperator> {
    let d = delta.dim();
    let n = delta.total_order().unwrap_or(0);
    let p = canonical_lift(delta, l0, rho)?;
    let shift = WeightPoly::shift(l0);
    let bracket = |a: &DensityOperator| -> Result<DensityOperator> {
        let f = DensityOperator::function(d, h.clone());
        Ok(f.compose(a)?.sub(&a.compose(&f)?))
    };
    match kind {
        VariationKind::Canonical => Ok(shift.apply_to(&bracket(&p)?)),
        VariationKind::Vol(params) => {
            let v = shift.apply_to(&bracket(&p)?);
            let vs = v.adjoint();
            let mut out = params.a_poly(l0).apply_to(&v).add(&params.b_poly(l0, n).apply_to(&vs));
            out = out.add(&params.c_poly(l0).times_fn(d, &v.on_one()));
            Ok(out.add(&params.d_poly(l0).times_fn(d, &vs.on_one())))
        }
        VariationKind::Distinguished => {
            let t = &(&Scalar::int(2) * l0) - &Scalar::one();
            crate::lift::check_weight(l0, std::slice::from_ref(&t))?;
            let sgn = Scalar::int(if n.is_multiple_of(2) { 1 } else { -1 });
            let defect = p.sub(&p.adjoint().scale(&sgn));
            let factor = shift.mul(&WeightPoly::new(vec![l0 - &Scalar::one(), Scalar::one()])).scale(&t.inv()?);
            Ok(factor.apply_to(&bracket(&defect)?))
        }
    }
}

/// ad_on_lifting(h, Δ, X) − volume_variation(h, div_ρX); zero when the
/// non-equivariance of h is entirely due to the change of ρ along X.
pub fn adx_variation_defect(h: &LiftingHandle, delta: &DensityOperator, x: &[DiffPolynomial]) -> Result<DensityOperator> {
    let (kind, l0, rho) = h
        .variation_kind()
        .ok_or_else(|| Error::BadPolynomial("handle does not depend on a volume form".into()))?;
    let lhs = ad_on_lifting(h, delta, x)?;
    Ok(lhs.sub(&volume_variation(&kind, delta, l0, rho, &divergence(x, rho))?))
}

pub fn check_adx_variation_identity(
    delta: &DensityOperator,
    l0: &Scalar,
    rho: &VolumeForm,
    x: &[DiffPolynomial],
) -> Result<bool> {
    let h = LiftingHandle::Canonical { l0: l0.clone(), rho: *rho };
    Ok(adx_variation_defect(&h, delta, x)?.is_zero())
}

/// The relations ∂_jN^{Jj} = 0 and their prolongations for a symmetric
/// tensor family N, solved for the jets carrying the last axis both as an
/// upper index and as a derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DivergenceConstraint {
    pub base: SymId,
    pub dim: usize,
}

impl DivergenceConstraint {
    pub fn new(name: &str, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { found: dim, needed: 2 });
        }
        Ok(DivergenceConstraint { base: intern(name), dim })
    }

    fn reduce_jet(&self, s: &JetSymbol) -> Option<DiffPolynomial> {
        let last = self.dim as u8;
        if s.base != self.base {
            return None;
        }
        let pu = s.upper.iter().position(|&a| a == last)?;
        let pd = s.deriv.iter().position(|&a| a == last)?;
        let mut upper = s.upper.clone();
        upper.remove(pu);
        let mut deriv = s.deriv.clone();
        deriv.remove(pd);
        let mut out = DiffPolynomial::zero();
        for i in 1..last {
            let mut u = upper.clone();
            u.push(i);
            let mut dv = deriv.clone();
            dv.push(i);
            let j = JetSymbol::new(self.base, &u, &dv);
            out = out.sub(&self.reduce_jet(&j).unwrap_or_else(|| DiffPolynomial::jet(j)));
        }
        Some(out)
    }

    /// Normal form modulo the constraint.
    pub fn reduce(&self, p: &DiffPolynomial) -> DiffPolynomial {
        p.map_jets(&|s| self.reduce_jet(s))
    }

    pub fn reduce_op(&self, op: &DensityOperator) -> DensityOperator {
        op.map_coeffs(|c| self.reduce(c))
    }
}

/// Generic vector field `X` together with the constraint ∂_iX^i = 0.
pub fn generic_divfree_field(d: usize) -> Result<(VectorField, DivergenceConstraint)> {
    let c = DivergenceConstraint::new("X", d)?;
    Ok((generic_field("X", d), c))
}

/// Coefficients (a₁, a₂, a₃, b₁, b₂, c) of a candidate map on second-order
/// operators S∂∂ + T∂ + R.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondOrderMap(pub [Scalar; 6]);

impl SecondOrderMap {
    pub fn identity() -> Self {
        let (o, z) = (Scalar::one(), Scalar::zero());
        SecondOrderMap([o.clone(), z.clone(), z.clone(), o.clone(), z, o])
    }

    /// a₁S∂∂ + a₂(∂_iS^{ik})∂_k + a₃∂_i∂_kS^{ik} + b₁T∂ + b₂∂_iT^i + cR.
    pub fn apply(&self, delta: &DensityOperator) -> Result<DensityOperator> {
        delta.require_weight_free()?;
        let ord = delta.total_order().unwrap_or(0);
        if ord > 2 {
            return Err(Error::OrderTooHigh { found: ord, allowed: 2 });
        }
        let [a1, a2, a3, b1, b2, c] = &self.0;
        let d = delta.dim();
        let s = second_order_tensor(delta);
        let t = first_order_vector(delta);
        let div_s = tensor_divergence(&s);
        let mut out = DensityOperator::zero(d);
        let mut zeroth = delta.on_one().scale(c);
        for i in 0..d {
            for j in 0..d {
                out.add_term(0, mi_from_axes(d, &[i as u8 + 1, j as u8 + 1]), s[i][j].scale(a1));
            }
            out.add_term(0, mi_unit(d, i + 1), div_s[i].scale(a2).add(&t[i].scale(b1)));
            zeroth.add_assign(&div_s[i].derive(i as u8 + 1).scale(a3));
            zeroth.add_assign(&t[i].derive(i as u8 + 1).scale(b2));
        }
        out.add_term(0, mi_zero(d), zeroth);
        Ok(out)
    }
}

fn generic_second_order(d: usize) -> DensityOperator {
    tensor_operator(d, 2, "S").add(&tensor_operator(d, 1, "T")).add(&tensor_operator(d, 0, "R"))
}

/// Equivariance defect of `f` on functions along a generic volume-preserving
/// field, in normal form.
pub fn classify_sdiff_map(f: &SecondOrderMap, d: usize) -> Result<DensityOperator> {
    if d < 3 {
        return Err(Error::DimensionTooSmall { found: d, needed: 3 });
    }
    let (x, constraint) = generic_divfree_field(d)?;
    let l0 = Scalar::zero();
    let delta = generic_second_order(d);
    let lhs = ad_vf(&x, &f.apply(&delta)?)?.restrict(&l0);
    let rhs = f.apply(&ad_vf(&x, &delta)?.restrict(&l0))?;
    Ok(constraint.reduce_op(&lhs.sub(&rhs)))
}

/// Basis of the coefficient vectors (a₁, a₂, a₃, b₁, b₂, c) with zero defect.
pub fn sdiff_equivariant_maps(d: usize) -> Result<Vec<Vec<Scalar>>> {
    let names = ["a1", "a2", "a3", "b1", "b2", "c"].map(|n| Param::new(&format!("sdiff_{n}")));
    let coeffs = names.map(Scalar::from_param);
    let residual = classify_sdiff_map(&SecondOrderMap(coeffs), d)?;
    let sol = solve_affine(&operator_scalars(&residual), &names)?
        .ok_or_else(|| Error::BadPolynomial("homogeneous system reported inconsistent".into()))?;
    debug_assert!(sol.particular.iter().all(Scalar::is_zero));
    Ok(sol.directions)
}

/// Whether each vector satisfies b₁ = a₁ − a₂ and b₂ = −a₃.
pub fn satisfies_sdiff_relations(v: &[Scalar]) -> bool {
    v.len() == 6 && (&(&v[0] - &v[1]) - &v[3]).is_zero() && (&v[4] + &v[2]).is_zero()
}

/// Defect of the (anti-)self-adjoint lifting on a generic rank-k tensor
/// S^{i₁…i_k}∂_{i₁}…∂_{i_k}, along an unconstrained field X; with
/// `divergenceless` the result is reduced modulo ∂_jS^{J j} = 0.
pub fn divfree_tensor_lift_residual(k: usize, d: usize, l0: &Scalar, divergenceless: bool) -> Result<DensityOperator> {
    let delta = tensor_operator(d, k, "S");
    let h = LiftingHandle::Distinguished { l0: l0.clone(), rho: VolumeForm::Coordinate };
    let x = generic_field("X", d);
    let res = ad_on_lifting(&h, &delta, &x)?;
    if divergenceless && k > 0 {
        Ok(DivergenceConstraint::new("S", d)?.reduce_op(&res))
    } else {
        Ok(res)
    }
}

pub fn divfree_tensor_lift_check(k: usize, d: usize, l0: &Scalar, divergenceless: bool) -> Result<bool> {
    Ok(divfree_tensor_lift_residual(k, d, l0, divergenceless)?.is_zero())
}

/// Dimension of the kernel of a linear system given by its rows.
pub fn kernel_dimension(rows: &[Vec<Scalar>], ncols: usize) -> Result<usize> {
    Ok(nullspace(rows, ncols)?.len())
}
