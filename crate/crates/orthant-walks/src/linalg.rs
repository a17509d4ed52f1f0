//! Exact linear algebra: fraction-free elimination over big integers and
//! small Gauss-Jordan solves over the rationals.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::rational::Rational;

/// Row echelon form computed by Bareiss elimination.
#[derive(Debug, Clone)]
pub struct Echelon {
    pub rows: Vec<Vec<BigInt>>,
    pub pivots: Vec<usize>,
    pub ncols: usize,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Fraction-free elimination; every division below is exact.
pub fn bareiss(rows: &[Vec<BigInt>], ncols: usize) -> Echelon {
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (head, tail) = m.split_at_mut(r + 1);
        let piv = &head[r];
        for row in tail.iter_mut() {
            let f = std::mem::take(&mut row[c]);
            for j in c + 1..ncols {
                let num = &piv[c] * &row[j] - &f * &piv[j];
                debug_assert!((&num % &prev).is_zero());
                row[j] = num / &prev;
            }
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    Echelon { rows: m, pivots, ncols }
}

pub fn rank(rows: &[Vec<BigInt>], ncols: usize) -> usize {
    bareiss(rows, ncols).rank()
}

/// Determinant of a square integer matrix.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut prev = BigInt::one();
    let mut sign = false;
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            a.swap(p, k);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    if sign {
        -prev
    } else {
        prev
    }
}

/// Basis of the rational null space, one vector per free column with a 1 there.
pub fn nullspace(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<Rational>> {
    let e = bareiss(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !e.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (k, &c) in e.pivots.iter().enumerate().rev() {
                let row = &e.rows[k];
                let s: Rational = (c + 1..ncols)
                    .filter(|&j| !row[j].is_zero() && !x[j].is_zero())
                    .map(|j| Rational::from_integer(row[j].clone()) * &x[j])
                    .sum();
                x[c] = -s / Rational::from_integer(row[c].clone());
            }
            x
        })
        .collect()
}

/// Inverse of a square rational matrix, or `None` when singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let d = &f * &a[c][j];
                    a[i][j] -= d;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves `x^T m = b^T` for square `m` (row combination of `m` giving `b`).
pub fn solve_left(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let inv = inverse(m)?;
    let n = m.len();
    Some(
        (0..n)
            .map(|j| (0..n).map(|k| &b[k] * &inv[k][j]).sum())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
        m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn to_rat(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
        m.iter()
            .map(|r| r.iter().map(|&x| Rational::from_integer(BigInt::from(x))).collect())
            .collect()
    }

    /// Plain rational Gauss-Jordan rank, used as an oracle.
    fn rank_oracle(m: &[Vec<i64>], ncols: usize) -> usize {
        let mut a = to_rat(m);
        let mut r = 0;
        for c in 0..ncols {
            let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
            a.swap(r, p);
            for i in 0..a.len() {
                if i != r && !a[i][c].is_zero() {
                    let f = &a[i][c] / &a[r][c];
                    for j in 0..ncols {
                        let d = &f * &a[r][j];
                        a[i][j] -= d;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&big(&[vec![2, 1], vec![1, 3]])), BigInt::from(5));
        assert_eq!(determinant(&big(&[vec![0, 1], vec![1, 0]])), BigInt::from(-1));
        let m = [vec![2, 2, 1], vec![1, 1, 1], vec![-1, 0, 1]];
        assert_eq!(determinant(&big(&m)), BigInt::from(-1));
    }

    #[test]
    fn nullspace_small() {
        let ns = nullspace(&big(&[vec![1, 1, 0]]), 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&v[0] + &v[1]).is_zero());
        }
    }

    proptest! {
        #[test]
        fn bareiss_rank_matches_rational_oracle(
            m in proptest::collection::vec(proptest::collection::vec(-4i64..=4, 5), 1..8)
        ) {
            prop_assert_eq!(rank(&big(&m), 5), rank_oracle(&m, 5));
        }

        #[test]
        fn nullspace_vectors_annihilate(
            m in proptest::collection::vec(proptest::collection::vec(-3i64..=3, 4), 1..6)
        ) {
            let ns = nullspace(&big(&m), 4);
            prop_assert_eq!(ns.len(), 4 - rank_oracle(&m, 4));
            for v in &ns {
                for row in &m {
                    let s: Rational = row.iter().zip(v)
                        .map(|(&a, x)| Rational::from_integer(BigInt::from(a)) * x).sum();
                    prop_assert!(s.is_zero());
                }
            }
        }

        #[test]
        fn inverse_is_inverse(m in proptest::collection::vec(proptest::collection::vec(-5i64..=5, 3), 3)) {
            let r = to_rat(&m);
            match inverse(&r) {
                None => prop_assert!(determinant(&big(&m)).is_zero()),
                Some(inv) => for i in 0..3 { for j in 0..3 {
                    let s: Rational = (0..3).map(|k| &r[i][k] * &inv[k][j]).sum();
                    prop_assert_eq!(s, if i == j { Rational::one() } else { Rational::zero() });
                }}
            }
        }
    }
}
