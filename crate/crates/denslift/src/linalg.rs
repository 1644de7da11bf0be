//! Exact linear algebra over the scalar field.

use crate::error::{Error, Result};
use crate::operator::DensityOperator;
use crate::poly::Param;
use crate::scalar::Scalar;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn row_reduce(rows: &mut Vec<Vec<Scalar>>) -> Result<Vec<usize>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..ncols {
        let Some(p) = (top..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(top, p);
        let inv = rows[top][col].inv()?;
        for x in rows[top].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = rows[top].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == top || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(col);
        top += 1;
        if top == rows.len() {
            break;
        }
    }
    rows.truncate(top);
    Ok(pivots)
}

pub fn rank(rows: &[Vec<Scalar>]) -> Result<usize> {
    let mut m = rows.to_vec();
    Ok(row_reduce(&mut m)?.len())
}

/// Basis of {v : rows·v = 0}.
pub fn nullspace(rows: &[Vec<Scalar>], ncols: usize) -> Result<Vec<Vec<Scalar>>> {
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m)?;
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Scalar::zero(); ncols];
        v[free] = Scalar::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        basis.push(v);
    }
    Ok(basis)
}

/// Rows `[coeff_1 … coeff_m | constant]` of equations affine in `params`.
pub fn affine_rows(eqs: &[Scalar], params: &[Param]) -> Result<Vec<Vec<Scalar>>> {
    let mut rows = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        let (c0, cs) = e
            .affine_parts(params)
            .ok_or_else(|| Error::BadPolynomial(format!("{e} is not affine in the unknowns")))?;
        let mut row = cs;
        row.push(c0);
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Solution set of a system affine in the unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Scalar>,
    pub directions: Vec<Vec<Scalar>>,
}

/// Solve `eqs = 0` for `params`; `None` when inconsistent.
pub fn solve_affine(eqs: &[Scalar], params: &[Param]) -> Result<Option<AffineSolution>> {
    let m = params.len();
    let mut rows = affine_rows(eqs, params)?;
    let pivots = row_reduce(&mut rows)?;
    if pivots.contains(&m) {
        return Ok(None);
    }
    let mut particular = vec![Scalar::zero(); m];
    for (row, &pc) in rows.iter().zip(&pivots) {
        particular[pc] = -&row[m];
    }
    let homogeneous: Vec<Vec<Scalar>> = rows.iter().map(|r| r[..m].to_vec()).collect();
    let directions = nullspace(&homogeneous, m)?;
    Ok(Some(AffineSolution { particular, directions }))
}

/// Every scalar coefficient appearing in the operator.
pub fn operator_scalars(op: &DensityOperator) -> Vec<Scalar> {
    op.terms().flat_map(|(_, _, c)| c.terms().map(|(_, s)| s.clone()).collect::<Vec<_>>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Scalar {
        Scalar::int(n)
    }

    #[test]
    fn rank_and_kernel() {
        let rows = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        assert_eq!(rank(&rows).unwrap(), 2);
        let ns = nullspace(&rows, 3).unwrap();
        assert_eq!(ns.len(), 1);
        for r in &rows {
            let dot = r.iter().zip(&ns[0]).fold(Scalar::zero(), |acc, (a, b)| &acc + &(a * b));
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn symbolic_solve() {
        let (b, l0) = (Param::new("b"), Scalar::param("l0"));
        // (1 + b(2λ₀−1)) = 0
        let eq = &Scalar::one() + &(&Scalar::from_param(b) * &(&(&q(2) * &l0) - &q(1)));
        let sol = solve_affine(&[eq.clone(), eq.scale(&crate::poly::rat_int(3))], &[b]).unwrap().unwrap();
        assert!(sol.directions.is_empty());
        assert_eq!(sol.particular[0], (&q(1) - &(&q(2) * &l0)).inv().unwrap());
        assert!(solve_affine(&[q(1)], &[b]).unwrap().is_none());
    }
}
