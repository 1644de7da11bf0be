//! Polynomials in the weight operator λ̂ with scalar coefficients.

use crate::error::Result;
use crate::jet::DiffPolynomial;
use crate::operator::DensityOperator;
use crate::scalar::Scalar;

/// `Σ coeffs[k] λ̂^k`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WeightPoly {
    coeffs: Vec<Scalar>,
}

impl WeightPoly {
    pub fn new(mut coeffs: Vec<Scalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        WeightPoly { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    /// λ̂ − a.
    pub fn shift(a: &Scalar) -> Self {
        Self::new(vec![-a, Scalar::one()])
    }

    /// t(λ̂) = λ̂ − ½.
    pub fn t() -> Self {
        Self::shift(&Scalar::frac(1, 2))
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = Scalar::zero();
        Self::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&z) + o.coeffs.get(k).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&Scalar::int(-1)))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Scalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
    }

    /// Substitute λ̂ ↦ q(λ̂).
    pub fn compose(&self, q: &Self) -> Self {
        self.coeffs.iter().rev().fold(Self::zero(), |acc, c| acc.mul(q).add(&Self::constant(c.clone())))
    }

    /// λ̂ ↦ 1 − λ̂, the adjoint of a vertical polynomial.
    pub fn reflect(&self) -> Self {
        self.compose(&Self::new(vec![Scalar::one(), Scalar::int(-1)]))
    }

    /// Coefficients in powers of (λ̂ − a).
    pub fn expand_at(&self, a: &Scalar) -> Vec<Scalar> {
        self.compose(&Self::new(vec![a.clone(), Scalar::one()])).coeffs
    }

    pub fn from_expansion(a: &Scalar, cs: &[Scalar]) -> Self {
        let s = Self::shift(a);
        cs.iter().enumerate().fold(Self::zero(), |acc, (k, c)| acc.add(&s.pow(k as u32).scale(c)))
    }

    pub fn to_operator(&self, dim: usize) -> DensityOperator {
        self.coeffs.iter().enumerate().fold(DensityOperator::zero(dim), |acc, (k, c)| {
            acc.add(&DensityOperator::scalar(dim, c.clone()).mul_weight_pow(k as u32))
        })
    }

    /// Product `self(λ̂)·op`; λ̂ is central.
    pub fn apply_to(&self, op: &DensityOperator) -> DensityOperator {
        self.coeffs.iter().enumerate().fold(DensityOperator::zero(op.dim()), |acc, (k, c)| {
            acc.add(&op.scale(c).mul_weight_pow(k as u32))
        })
    }

    /// Product `self(λ̂)·f` for a function f.
    pub fn times_fn(&self, dim: usize, f: &DiffPolynomial) -> DensityOperator {
        self.apply_to(&DensityOperator::function(dim, f.clone()))
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let l = match k {
                0 => String::new(),
                1 => "L".into(),
                _ => format!("L^{k}"),
            };
            let term = if l.is_empty() {
                c.to_string()
            } else if c.is_one() {
                l
            } else if (-c).is_one() {
                format!("-{l}")
            } else if c.is_compound() {
                format!("({c})*{l}")
            } else {
                format!("{c}*{l}")
            };
            parts.push(term);
        }
        if parts.is_empty() { "0".into() } else { parts.join(" + ").replace("+ -", "- ") }
    }
}

/// Lagrange basis for the nodes `xs`, as weight polynomials.
pub fn lagrange_basis(xs: &[Scalar]) -> Result<Vec<WeightPoly>> {
    let mut out = Vec::with_capacity(xs.len());
    for (j, xj) in xs.iter().enumerate() {
        let mut p = WeightPoly::one();
        for (m, xm) in xs.iter().enumerate() {
            if m != j {
                let den = (xj - xm).inv()?;
                p = p.mul(&WeightPoly::shift(xm)).scale(&den);
            }
        }
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_and_expand() {
        let l0 = Scalar::param("l0");
        let t = WeightPoly::t();
        assert_eq!(t.reflect(), t.scale(&Scalar::int(-1)));
        let p = t.pow(2).sub(&WeightPoly::constant(t.eval(&l0).pow(2)));
        assert!(p.eval(&l0).is_zero());
        let cs = p.expand_at(&l0);
        assert!(cs[0].is_zero());
        assert_eq!(WeightPoly::from_expansion(&l0, &cs), p);
    }

    #[test]
    fn lagrange_reproduces_cubic() {
        let p = WeightPoly::new(vec![Scalar::int(1), Scalar::param("l0"), Scalar::zero(), Scalar::frac(2, 3)]);
        let xs: Vec<Scalar> = (0..4).map(Scalar::int).collect();
        let basis = lagrange_basis(&xs).unwrap();
        let back = xs.iter().zip(&basis).fold(WeightPoly::zero(), |acc, (x, b)| acc.add(&b.scale(&p.eval(x))));
        assert_eq!(back, p);
    }
}
