//! Exact rational functions in formal parameters, kept gcd-reduced with a
//! primitive integer denominator so structural equality is mathematical equality.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{gcd, rat_int, PMono, Param, Poly, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    num: Poly,
    den: Poly,
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Scalar {
    pub fn zero() -> Scalar {
        Scalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Scalar {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Scalar {
        Scalar::rational(rat_int(n))
    }

    pub fn frac(n: i64, d: i64) -> Scalar {
        Scalar::rational(crate::poly::rat(n, d))
    }

    pub fn rational(q: Rat) -> Scalar {
        Scalar { num: Poly::constant(q), den: Poly::one() }
    }

    pub fn param(name: &str) -> Scalar {
        Scalar { num: Poly::var(Param::new(name)), den: Poly::one() }
    }

    pub fn from_param(p: Param) -> Scalar {
        Scalar { num: Poly::var(p), den: Poly::one() }
    }

    pub fn from_poly(p: Poly) -> Scalar {
        Scalar { num: p, den: Poly::one() }
    }

    /// Canonical form of `num / den`.
    pub fn ratio(num: Poly, den: Poly) -> Result<Scalar> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Scalar::zero());
        }
        if let Some(c) = den.as_constant() {
            return Ok(Scalar { num: num.scale(&c.recip()), den: Poly::one() });
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let f = primitive_factor(&d);
        if !f.is_one() {
            n = n.scale(&f);
            d = d.scale(&f);
        }
        if d.is_one() {
            d = Poly::one();
        }
        Ok(Scalar { num: n, den: d })
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_rational(&self) -> Option<Rat> {
        if self.den.is_one() { self.num.as_constant() } else { None }
    }

    pub fn inv(&self) -> Result<Scalar> {
        Scalar::ratio(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Scalar {
        let mut out = Scalar::one();
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> Scalar {
        if q.is_zero() {
            return Scalar::zero();
        }
        Scalar { num: self.num.scale(q), den: self.den.clone() }
    }

    pub fn params(&self) -> Vec<Param> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v.sort_unstable();
        v.dedup();
        v.into_iter().map(Param).collect()
    }

    pub fn depends_on(&self, p: Param) -> bool {
        self.num.degree_in(p.0) > 0 || self.den.degree_in(p.0) > 0
    }

    /// Replace parameters by scalars.
    pub fn substitute(&self, bindings: &HashMap<Param, Scalar>) -> Result<Scalar> {
        if bindings.is_empty() || self.params().iter().all(|p| !bindings.contains_key(p)) {
            return Ok(self.clone());
        }
        let n = eval_poly(&self.num, bindings);
        let d = eval_poly(&self.den, bindings);
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        n.div(&d)
    }

    /// Split `self = c0 + Σ c_j p_j` when it is affine in `ps` with the
    /// remaining coefficients independent of `ps`.
    pub fn affine_parts(&self, ps: &[Param]) -> Option<(Scalar, Vec<Scalar>)> {
        if ps.iter().any(|p| self.den.degree_in(p.0) > 0) {
            return None;
        }
        let mut c0 = Poly::zero();
        let mut cs = vec![Poly::zero(); ps.len()];
        for (m, q) in self.num.terms() {
            let hits: Vec<usize> = (0..ps.len()).filter(|&j| m.exp(ps[j].0) > 0).collect();
            match hits.as_slice() {
                [] => c0.add_assign(&Poly::monomial(m.clone(), q.clone())),
                [j] if m.exp(ps[*j].0) == 1 => {
                    cs[*j].add_assign(&Poly::monomial(m.without(ps[*j].0), q.clone()))
                }
                _ => return None,
            }
        }
        let mk = |p: Poly| Scalar::ratio(p, self.den.clone()).unwrap();
        Some((mk(c0), cs.into_iter().map(mk).collect()))
    }

    /// Coefficients of `self` as a polynomial in `p`, when the denominator is free of `p`.
    pub fn coeffs_in(&self, p: Param) -> Option<Vec<Scalar>> {
        if self.den.degree_in(p.0) > 0 {
            return None;
        }
        let deg = self.num.degree_in(p.0) as usize;
        let mut out = vec![Scalar::zero(); deg + 1];
        for (e, c) in self.num.coeffs_in(p.0) {
            out[e as usize] = Scalar::ratio(c, self.den.clone()).unwrap();
        }
        Some(out)
    }

    /// True when the rendering needs parentheses as a factor.
    pub fn is_compound(&self) -> bool {
        !self.den.is_one() || self.num.len() > 1
    }
}

/// Factor making `p` an integer polynomial with coprime coefficients and
/// positive leading coefficient.
fn primitive_factor(p: &Poly) -> Rat {
    use num_integer::Integer;
    let mut l = num_bigint::BigInt::one();
    let mut g = num_bigint::BigInt::zero();
    for (_, q) in p.terms() {
        l = l.lcm(q.denom());
        g = g.gcd(q.numer());
    }
    let mut f = Rat::new(l, g);
    if p.lead().is_some_and(|(_, q)| q < &Rat::zero()) {
        f = -f;
    }
    f
}

fn eval_poly(p: &Poly, bindings: &HashMap<Param, Scalar>) -> Scalar {
    let mut out = Scalar::zero();
    for (m, q) in p.terms() {
        let mut t = Scalar::rational(q.clone());
        for &(v, e) in &m.0 {
            let f = match bindings.get(&Param(v)) {
                Some(s) => s.pow(e),
                None => Scalar::from_poly(Poly::monomial(PMono::var(v, e), Rat::one())),
            };
            t = &t * &f;
        }
        out = &out + &t;
    }
    out
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: self.num.add(&o.num), den: Poly::one() };
        }
        if self.den == o.den {
            return Scalar::ratio(self.num.add(&o.num), self.den.clone()).unwrap();
        }
        let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Scalar::ratio(n, self.den.mul(&o.den)).unwrap()
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        if self.is_zero() || o.is_zero() {
            return Scalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Scalar { num: self.num.mul(&o.num), den: Poly::one() };
        }
        if let Some(q) = o.as_rational() {
            return self.scale(&q);
        }
        if let Some(q) = self.as_rational() {
            return o.scale(&q);
        }
        Scalar::ratio(self.num.mul(&o.num), self.den.mul(&o.den)).unwrap()
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Scalar {
        Scalar::int(n)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return f.write_str(&self.num.render());
        }
        use num_integer::Integer;
        let l = self.num.terms().fold(num_bigint::BigInt::one(), |l, (_, q)| l.lcm(q.denom()));
        let l = Rat::from_integer(l);
        let (num, den) = (self.num.scale(&l), self.den.scale(&l));
        let n = num.render();
        let wrap = |p: &Poly, s: String| {
            if p.len() > 1 || (p.len() == 1 && p.lead().is_some_and(|(m, q)| !m.is_one() && (!q.is_one() || m.0.len() > 1))) {
                format!("({s})")
            } else {
                s
            }
        };
        let ns = if num.len() > 1 { format!("({n})") } else { n };
        write!(f, "{}/{}", ns, wrap(&den, den.render()))
    }
}
