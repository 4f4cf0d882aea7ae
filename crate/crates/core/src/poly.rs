//! Polynomials with rational coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors, so equality is
//! structural and printing is canonical: by total degree, then with higher
//! powers of earlier variables first.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::localfield::{rational_to_local, FieldConfig, LocalNum};
use crate::series::{Mono, MultiSeries};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RatPoly {
    pub fn zero(nvars: usize) -> Self {
        RatPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, BigRational::one());
        p
    }

    /// From `(exponents, numerator, denominator)` triples.
    pub fn from_ints(nvars: usize, terms: &[(&[u32], i64, i64)]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, n, d) in terms {
            p.add_term(e.to_vec(), ratio(*n, *d));
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        assert_eq!(e.len(), self.nvars);
        let slot = self.terms.entry(e).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The constant value, if the polynomial has no variable terms.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        RatPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        RatPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, a) in &self.terms {
            for (f, b) in &other.terms {
                out.add_term(e.iter().zip(f).map(|(x, y)| x + y).collect(), a * b);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.nvars, BigRational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * BigInt::from(e[i]));
            }
        }
        out
    }

    pub fn eval(&self, x: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(c.clone(), |acc, (&k, xi)| acc * num_traits::pow(xi.clone(), k as usize)))
            .sum()
    }

    /// `f(x + c)`.
    pub fn translate(&self, c: &[BigRational]) -> Self {
        let shifted: Vec<RatPoly> =
            (0..self.nvars).map(|i| RatPoly::var(self.nvars, i).add(&RatPoly::constant(self.nvars, c[i].clone()))).collect();
        let mut out = Self::zero(self.nvars);
        for (e, a) in &self.terms {
            let mut t = Self::constant(self.nvars, a.clone());
            for (i, &k) in e.iter().enumerate() {
                t = t.mul(&shifted[i].pow(k));
            }
            out = out.add(&t);
        }
        out
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.terms.values().fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()))
    }

    /// Image in `K[[x]]`; coefficients must be integral in `K`.
    pub fn to_series(&self, field: &FieldConfig, cutoff: u32) -> Result<MultiSeries> {
        let deg = self.degree().unwrap_or(0);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let c = rational_to_local(field, c)?;
                if c.ord_lower() < 0 && !c.is_zero() {
                    return Err(Error::NotIntegral(c.to_string()));
                }
                Ok((Mono(e.clone()), c))
            })
            .collect::<Result<Vec<(Mono, LocalNum)>>>()?;
        MultiSeries::from_terms(field, self.nvars, cutoff.max(deg), terms)
    }

    fn sorted_terms(&self) -> Vec<(&Vec<u32>, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|(a, _), (b, _)| {
            let (da, db): (u32, u32) = (a.iter().sum(), b.iter().sum());
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        v
    }
}

fn write_mono(f: &mut fmt::Formatter<'_>, e: &[u32]) -> fmt::Result {
    let mut first = true;
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if !first {
            write!(f, "*")?;
        }
        first = false;
        write!(f, "x{}", i + 1)?;
        if k > 1 {
            write!(f, "^{k}")?;
        }
    }
    Ok(())
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let constant = e.iter().all(|&k| k == 0);
            let mag = c.abs();
            if idx == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if constant {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write_mono(f, e)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_printing() {
        let p = RatPoly::from_ints(2, &[(&[0, 2], 1, 1), (&[1, 1], 1, 1), (&[2, 0], 1, 1)]);
        assert_eq!(p.to_string(), "x1^2 + x1*x2 + x2^2");
        let q = RatPoly::from_ints(1, &[(&[3], 1, 1), (&[1], -3, 1), (&[0], -1, 2)]);
        assert_eq!(q.to_string(), "-1/2 - 3*x1 + x1^3");
        assert_eq!(RatPoly::zero(3).to_string(), "0");
    }

    #[test]
    fn translation_and_derivative() {
        let f = RatPoly::from_ints(1, &[(&[3], 1, 1), (&[1], -3, 1)]);
        let one = BigRational::one();
        let g = f.translate(std::slice::from_ref(&one));
        // (x+1)^3 - 3(x+1) = x^3 + 3x^2 - 2
        assert_eq!(g, RatPoly::from_ints(1, &[(&[3], 1, 1), (&[2], 3, 1), (&[0], -2, 1)]));
        assert!(f.derivative(0).eval(&[one]).is_zero());
    }

    #[test]
    fn embedding_checks_integrality() {
        let field = FieldConfig::padic(3, 10).unwrap();
        let f = RatPoly::from_ints(1, &[(&[2], 1, 3)]);
        assert!(matches!(f.to_series(&field, 4), Err(Error::NotIntegral(_))));
        let g = RatPoly::from_ints(1, &[(&[2], 1, 5)]);
        assert_eq!(g.to_series(&field, 4).unwrap().nvars(), 1);
    }
}
