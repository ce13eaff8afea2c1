//! Exact dense linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Determinant by fraction-free (Bareiss) elimination.
///
/// Each row is first cleared of denominators by its least common multiple,
/// so elimination runs over the integers; the row scales are divided out at
/// the end.
pub fn determinant(matrix: &[Vec<Rational>]) -> Rational {
    let n = matrix.len();
    if n == 0 {
        return Rational::one();
    }
    let mut scale = BigInt::one();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in matrix {
        debug_assert_eq!(row.len(), n);
        let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        m.push(row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect());
        scale *= lcm;
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return Rational::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                // exact by Sylvester's identity
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    let det = if negate { -det } else { det };
    Rational::new(det, scale)
}

/// Determinant of the principal submatrix on the rows/columns in `keep`.
pub fn principal_minor(matrix: &[Vec<Rational>], keep: &[usize]) -> Rational {
    let sub: Vec<Vec<Rational>> = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| matrix[i][j].clone()).collect())
        .collect();
    determinant(&sub)
}

/// `I - q` as a dense matrix.
pub fn identity_minus(q: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    q.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, x)| if i == j { Rational::one() - x } else { -x.clone() })
                .collect()
        })
        .collect()
}

/// Solves `A x = b` by Gaussian elimination with exact pivoting.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>> {
    let n = a.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    for k in 0..n {
        let pivot = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(Error::Singular)?;
        m.swap(k, pivot);
        let inv = m[k][k].recip();
        for j in k..=n {
            m[k][j] = &m[k][j] * &inv;
        }
        for i in 0..n {
            if i != k && !m[i][k].is_zero() {
                let factor = m[i][k].clone();
                for j in k..=n {
                    let delta = &factor * &m[k][j];
                    m[i][j] -= delta;
                }
            }
        }
    }
    Ok(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

pub fn mat_vec(a: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(Rational::zero(), |acc, (p, q)| acc + p * q))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn permutation_det(m: &[Vec<Rational>]) -> Rational {
        // Leibniz expansion; fine for n <= 6.
        fn rec(m: &[Vec<Rational>], row: usize, used: &mut Vec<bool>, perm: &mut Vec<usize>) -> Rational {
            let n = m.len();
            if row == n {
                let mut inversions = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if perm[i] > perm[j] {
                            inversions += 1;
                        }
                    }
                }
                let prod = (0..n).fold(Rational::one(), |acc, i| acc * &m[i][perm[i]]);
                return if inversions % 2 == 0 { prod } else { -prod };
            }
            let mut total = Rational::zero();
            for c in 0..n {
                if !used[c] {
                    used[c] = true;
                    perm.push(c);
                    total += rec(m, row + 1, used, perm);
                    perm.pop();
                    used[c] = false;
                }
            }
            total
        }
        rec(m, 0, &mut vec![false; m.len()], &mut Vec::new())
    }

    #[test]
    fn p3_identity_minus_q() {
        let q = vec![
            vec![int(0), int(1), int(0)],
            vec![ratio(1, 2), int(0), ratio(1, 2)],
            vec![int(0), ratio(1, 2), int(0)],
        ];
        assert_eq!(determinant(&identity_minus(&q)), ratio(1, 4));
    }

    #[test]
    fn matches_leibniz_on_small_matrices() {
        let vals = [ratio(1, 2), int(-3), ratio(2, 7), int(0), int(1), ratio(-5, 3)];
        for n in 1..=5 {
            let m: Vec<Vec<Rational>> = (0..n)
                .map(|i| (0..n).map(|j| vals[(i * 7 + j * 3 + i * j) % vals.len()].clone()).collect())
                .collect();
            assert_eq!(determinant(&m), permutation_det(&m), "n={n}");
        }
    }

    #[test]
    fn zero_pivot_needs_swap() {
        let m = vec![vec![int(0), int(2)], vec![int(3), int(1)]];
        assert_eq!(determinant(&m), int(-6));
        let singular = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert_eq!(determinant(&singular), int(0));
        assert!(solve(&singular, &[int(1), int(1)]).is_err());
    }

    #[test]
    fn solve_round_trip() {
        let a = vec![
            vec![int(2), int(1), int(0)],
            vec![ratio(1, 3), int(0), int(4)],
            vec![int(0), int(-1), int(1)],
        ];
        let b = vec![int(1), int(2), int(3)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(mat_vec(&a, &x), b);
    }
}
