//! Small dense matrices over a local field.

use crate::error::{Error, Result};
use crate::localfield::{FieldConfig, LocalNum};

pub type Matrix = Vec<Vec<LocalNum>>;

pub fn identity(field: &FieldConfig, n: usize) -> Matrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { LocalNum::one(field) } else { LocalNum::zero(field) })
                .collect()
        })
        .collect()
}

fn pivot_row(m: &Matrix, col: usize, from: usize) -> Option<usize> {
    // smallest valuation keeps the most relative precision
    (from..m.len())
        .filter(|&r| !m[r][col].is_zero())
        .min_by_key(|&r| m[r][col].ord().unwrap())
}

/// Determinant by Gaussian elimination, pivoting on the smallest valuation.
pub fn det(m: &Matrix, field: &FieldConfig) -> Result<LocalNum> {
    let n = m.len();
    let mut a = m.clone();
    let mut d = LocalNum::one(field);
    for c in 0..n {
        let Some(r) = pivot_row(&a, c, c) else {
            // no known nonzero pivot: the determinant is zero to the precision available
            let prec = a[c..].iter().filter_map(|row| row[c].abs_prec()).min();
            return Ok(match prec {
                Some(k) => d.mul_unchecked(&LocalNum::zero_to(field, k)),
                None => LocalNum::zero(field),
            });
        };
        if r != c {
            a.swap(r, c);
            d = d.neg();
        }
        let piv = a[c][c].clone();
        let piv_inv = piv.inv()?;
        d = d.mul_unchecked(&piv);
        for r in c + 1..n {
            if a[r][c].is_exact_zero() {
                continue;
            }
            let factor = a[r][c].mul_unchecked(&piv_inv);
            for k in c..n {
                let t = factor.mul_unchecked(&a[c][k]);
                a[r][k] = a[r][k].add_unchecked(&t.neg());
            }
        }
    }
    Ok(d)
}

/// Inverse by Gauss–Jordan elimination.
pub fn inverse(m: &Matrix, field: &FieldConfig) -> Result<Matrix> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(field, n);
    for c in 0..n {
        let r = pivot_row(&a, c, c).ok_or(Error::SingularJacobian)?;
        a.swap(r, c);
        inv.swap(r, c);
        let piv_inv = a[c][c].inv()?;
        for k in 0..n {
            a[c][k] = a[c][k].mul_unchecked(&piv_inv);
            inv[c][k] = inv[c][k].mul_unchecked(&piv_inv);
        }
        for r in 0..n {
            if r == c || a[r][c].is_exact_zero() {
                continue;
            }
            let factor = a[r][c].clone();
            for k in 0..n {
                let t = factor.mul_unchecked(&a[c][k]);
                a[r][k] = a[r][k].add_unchecked(&t.neg());
                let t = factor.mul_unchecked(&inv[c][k]);
                inv[r][k] = inv[r][k].add_unchecked(&t.neg());
            }
        }
    }
    Ok(inv)
}

pub fn mat_vec(m: &Matrix, v: &[LocalNum], field: &FieldConfig) -> Vec<LocalNum> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(LocalNum::zero(field), |acc, (a, b)| acc.add_unchecked(&a.mul_unchecked(b)))
        })
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix, field: &FieldConfig) -> Matrix {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| {
                    row.iter().enumerate().fold(LocalNum::zero(field), |acc, (k, x)| {
                        acc.add_unchecked(&x.mul_unchecked(&b[k][j]))
                    })
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_small_matrix() {
        let f = FieldConfig::padic(5, 10).unwrap();
        let n = |v| LocalNum::from_int(&f, v);
        let m = vec![vec![n(2), n(1)], vec![n(1), n(3)]];
        assert!(det(&m, &f).unwrap().congruent(&n(5), 10).unwrap());
        let inv = inverse(&m, &f).unwrap();
        let prod = mat_mul(&m, &inv, &f);
        assert!(prod[0][0].congruent(&n(1), 8).unwrap());
        assert!(prod[0][1].is_zero());
        assert!(prod[1][0].is_zero());
    }

    #[test]
    fn singular_matrix_detected() {
        let f = FieldConfig::padic(3, 6).unwrap();
        let z = LocalNum::zero(&f);
        let m = vec![vec![z.clone(), z.clone()], vec![z.clone(), LocalNum::one(&f)]];
        assert_eq!(inverse(&m, &f), Err(Error::SingularJacobian));
        assert!(det(&m, &f).unwrap().is_zero());
    }
}
