//! Fraction-free (Bareiss) elimination over exact fields.

use crate::error::{Error, Result};
use crate::padic::{Cyclotomic, Rational};

/// The exact field operations the elimination needs.
pub trait ExactField: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Exact division; `None` when `other` is zero.
    fn div(&self, other: &Self) -> Option<Self>;
}

impl ExactField for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        (!other.is_zero()).then(|| self / other)
    }
}

impl ExactField for Cyclotomic {
    fn zero_like(&self) -> Self {
        Cyclotomic::zero(self.r())
    }
    fn one_like(&self) -> Self {
        Cyclotomic::one(self.r())
    }
    fn is_zero(&self) -> bool {
        Cyclotomic::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Option<Self> {
        self.try_div(other)
    }
}

fn check_square<F>(a: &[Vec<F>]) -> Result<usize> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("matrix must be square and nonempty".into()));
    }
    Ok(n)
}

/// Solves `A X = B` for a square `A` and any number of right-hand columns.
///
/// Bareiss elimination keeps every intermediate entry a minor of the
/// augmented matrix; the divisions by the previous pivot are exact. A column
/// with no nonzero pivot means `A` is singular (`Error::Domain`).
pub fn solve_many<F: ExactField>(a: &[Vec<F>], b: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let n = check_square(a)?;
    if b.len() != n {
        return Err(Error::InvalidArgument("right-hand side has the wrong height".into()));
    }
    let cols = b.first().map_or(0, Vec::len);
    let width = n + cols;
    let mut m: Vec<Vec<F>> =
        a.iter().zip(b).map(|(row, rhs)| row.iter().chain(rhs.iter()).cloned().collect()).collect();
    let mut prev = a[0][0].one_like();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero()).ok_or_else(|| Error::Domain("singular matrix".into()))?;
        m.swap(k, pivot);
        for i in k + 1..n {
            for j in k + 1..width {
                let num = m[i][j].mul(&m[k][k]).sub(&m[i][k].mul(&m[k][j]));
                m[i][j] = num.div(&prev).expect("previous pivot is nonzero");
            }
            m[i][k] = m[i][k].zero_like();
        }
        prev = m[k][k].clone();
    }
    let mut x = vec![Vec::with_capacity(cols); n];
    for c in 0..cols {
        let mut sol: Vec<F> = vec![a[0][0].zero_like(); n];
        for i in (0..n).rev() {
            let mut acc = m[i][n + c].clone();
            for j in i + 1..n {
                acc = acc.sub(&m[i][j].mul(&sol[j]));
            }
            sol[i] = acc.div(&m[i][i]).expect("pivot is nonzero");
        }
        for (i, v) in sol.into_iter().enumerate() {
            x[i].push(v);
        }
    }
    Ok(x)
}

pub fn solve<F: ExactField>(a: &[Vec<F>], b: &[F]) -> Result<Vec<F>> {
    let rhs: Vec<Vec<F>> = b.iter().map(|v| vec![v.clone()]).collect();
    Ok(solve_many(a, &rhs)?.into_iter().map(|mut row| row.remove(0)).collect())
}

pub fn inverse<F: ExactField>(a: &[Vec<F>]) -> Result<Vec<Vec<F>>> {
    let n = check_square(a)?;
    let zero = a[0][0].zero_like();
    let one = a[0][0].one_like();
    let id: Vec<Vec<F>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    solve_many(a, &id)
}

pub fn transpose<F: Clone>(a: &[Vec<F>]) -> Vec<Vec<F>> {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j].clone()).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn matmul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        (0..a.len())
            .map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| &a[i][k] * &b[k][j]).sum()).collect())
            .collect()
    }

    #[test]
    fn solves_with_row_swaps() {
        let a = vec![vec![q(0, 1), q(2, 1), q(1, 1)], vec![q(1, 1), q(1, 1), q(0, 1)], vec![q(3, 1), q(0, 1), q(1, 2)]];
        let x = solve(&a, &[q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        let ax: Vec<Rational> = a.iter().map(|row| row.iter().zip(&x).map(|(u, v)| u * v).sum()).collect();
        assert_eq!(ax, vec![q(1, 1), q(2, 1), q(3, 1)]);
        let inv = inverse(&a).unwrap();
        let id = matmul(&a, &inv);
        for (i, row) in id.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_eq!(v, &if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(matches!(solve(&a, &[q(1, 1), q(1, 1)]), Err(Error::Domain(_))));
    }

    #[test]
    fn vandermonde_over_cyclotomics() {
        // rows ζ^(i·k) for ζ a primitive 9th root of unity: invertible
        let n = 4;
        let a: Vec<Vec<Cyclotomic>> =
            (0..n).map(|i| (0..n).map(|k| Cyclotomic::zeta_pow(3, 2, (i * k) as u64).unwrap()).collect()).collect();
        let b: Vec<Cyclotomic> = (0..n).map(|i| Cyclotomic::zeta_pow(3, 2, i as u64).unwrap()).collect();
        let x = solve(&a, &b).unwrap();
        for i in 0..n {
            let mut acc = Cyclotomic::zero(3);
            for k in 0..n {
                acc = &acc + &(&a[i][k] * &x[k]);
            }
            assert_eq!(acc, b[i]);
        }
    }
}
