//! Machine-word arithmetic in `O/ϖ^K`, used by the enumeration engine.
//!
//! Both rings also know how to turn a residue `y` into the exponent of
//! `Ψ(λ y)` for the fixed `λ` with `ord λ = 1 - K`.

use crate::error::{Error, Result};
use crate::localfield::LocalNum;

pub(crate) trait Residue: Sync {
    type E: Copy + Send + Sync;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: Self::E, b: Self::E) -> Self::E;
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E;
    /// Reduction of an integral local number.
    fn from_local(&self, x: &LocalNum) -> Result<Self::E>;
    /// `base + ϖ^d · t`, the base-`p` digits of `t` read as digits of the
    /// increment.
    fn offset(&self, base: Self::E, d: u32, t: u64) -> Self::E;
    /// `a ≡ 0 mod ϖ^k`.
    fn divisible(&self, a: Self::E, k: i64) -> bool;
    /// Level and exponent of `Ψ(λ a)`.
    fn psi_level(&self) -> u32;
    fn psi_exp(&self, a: Self::E) -> u64;
}

/// `Z/p^K`, with `λ = p^{1-K} u`.
pub(crate) struct PadicResidue {
    p: u64,
    k: u32,
    modulus: u64,
    unit: u64,
}

impl PadicResidue {
    pub fn new(lambda: &LocalNum, k: u32) -> Result<Self> {
        let p = lambda.field().p() as u64;
        let modulus = p.checked_pow(k).filter(|m| *m < 1 << 62).ok_or(Error::Overflow)?;
        let u = lambda.unit_part()?;
        let mut r = PadicResidue { p, k, modulus, unit: 1 };
        r.unit = r.from_local(&u)?;
        Ok(r)
    }
}

impl Residue for PadicResidue {
    type E = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.modulus
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }
    fn from_local(&self, x: &LocalNum) -> Result<u64> {
        let digits = x.residue_digits(self.k)?;
        Ok(digits.iter().rev().fold(0u64, |acc, &d| acc * self.p + d as u64))
    }
    fn offset(&self, base: u64, d: u32, t: u64) -> u64 {
        if d >= self.k {
            return base;
        }
        let step = self.p.pow(d);
        self.add(base, self.mul(step, t % self.modulus))
    }
    fn divisible(&self, a: u64, k: i64) -> bool {
        if k <= 0 {
            return true;
        }
        if k as u32 >= self.k {
            return a == 0;
        }
        a.is_multiple_of(self.p.pow(k as u32))
    }
    fn psi_level(&self) -> u32 {
        self.k
    }
    #[inline]
    fn psi_exp(&self, a: u64) -> u64 {
        self.mul(a, self.unit)
    }
}

pub(crate) const LAURENT_MAX: usize = 32;

/// `F_p[t]/t^K`, with `λ = t^{1-K} u`.
pub(crate) struct LaurentResidue {
    p: u32,
    k: usize,
    /// Coefficients of `u`, reversed so that `Ψ(λ y) = ζ_p^{Σ_b w_b y_b}`.
    weights: [u32; LAURENT_MAX],
}

impl LaurentResidue {
    pub fn new(lambda: &LocalNum, k: u32) -> Result<Self> {
        if k as usize > LAURENT_MAX {
            return Err(Error::Overflow);
        }
        let p = lambda.field().p();
        let u = lambda.unit_part()?.residue_digits(k)?;
        let mut weights = [0; LAURENT_MAX];
        for b in 0..k as usize {
            weights[b] = u[k as usize - 1 - b];
        }
        Ok(LaurentResidue { p, k: k as usize, weights })
    }
}

impl Residue for LaurentResidue {
    type E = [u32; LAURENT_MAX];

    fn zero(&self) -> Self::E {
        [0; LAURENT_MAX]
    }
    fn one(&self) -> Self::E {
        let mut e = [0; LAURENT_MAX];
        if self.k > 0 {
            e[0] = 1;
        }
        e
    }
    #[inline]
    fn add(&self, a: Self::E, b: Self::E) -> Self::E {
        let mut out = a;
        for i in 0..self.k {
            out[i] = (a[i] + b[i]) % self.p;
        }
        out
    }
    #[inline]
    fn mul(&self, a: Self::E, b: Self::E) -> Self::E {
        let mut acc = [0u64; LAURENT_MAX];
        for i in 0..self.k {
            if a[i] == 0 {
                continue;
            }
            for j in 0..self.k - i {
                acc[i + j] += a[i] as u64 * b[j] as u64;
            }
        }
        let mut out = [0; LAURENT_MAX];
        for i in 0..self.k {
            out[i] = (acc[i] % self.p as u64) as u32;
        }
        out
    }
    fn from_local(&self, x: &LocalNum) -> Result<Self::E> {
        let mut out = [0; LAURENT_MAX];
        for (i, d) in x.residue_digits(self.k as u32)?.into_iter().enumerate() {
            out[i] = d;
        }
        Ok(out)
    }
    fn offset(&self, base: Self::E, d: u32, mut t: u64) -> Self::E {
        let mut out = base;
        let mut pos = d as usize;
        while t > 0 && pos < self.k {
            out[pos] = (out[pos] + (t % self.p as u64) as u32) % self.p;
            t /= self.p as u64;
            pos += 1;
        }
        out
    }
    fn divisible(&self, a: Self::E, k: i64) -> bool {
        let k = k.clamp(0, self.k as i64) as usize;
        a[..k].iter().all(|&x| x == 0)
    }
    fn psi_level(&self) -> u32 {
        1
    }
    #[inline]
    fn psi_exp(&self, a: Self::E) -> u64 {
        let s: u64 = (0..self.k).map(|b| self.weights[b] as u64 * a[b] as u64).sum();
        s % self.p as u64
    }
}

/// Polynomial with coefficients reduced into a residue ring.
pub(crate) struct RingPoly<R: Residue> {
    terms: Vec<(Vec<u32>, R::E)>,
    max_exp: Vec<u32>,
}

impl<R: Residue> RingPoly<R> {
    pub fn new<'a>(
        ring: &R,
        nvars: usize,
        terms: impl IntoIterator<Item = (&'a [u32], &'a LocalNum)>,
    ) -> Result<Self> {
        let mut out = Vec::new();
        let mut max_exp = vec![0; nvars];
        for (e, c) in terms {
            let c = ring.from_local(c)?;
            for (m, &k) in max_exp.iter_mut().zip(e) {
                *m = (*m).max(k);
            }
            out.push((e.to_vec(), c));
        }
        Ok(RingPoly { terms: out, max_exp })
    }

    /// Evaluation with per-coordinate power tables.
    pub fn eval(&self, ring: &R, x: &[R::E], scratch: &mut Vec<Vec<R::E>>) -> R::E {
        scratch.resize(x.len(), Vec::new());
        for (i, xi) in x.iter().enumerate() {
            let row = &mut scratch[i];
            row.clear();
            row.push(ring.one());
            for _ in 0..self.max_exp[i] {
                let last = *row.last().unwrap();
                row.push(ring.mul(last, *xi));
            }
        }
        let mut acc = ring.zero();
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = ring.mul(t, scratch[i][k as usize]);
                }
            }
            acc = ring.add(acc, t);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localfield::FieldConfig;

    #[test]
    fn padic_ring_matches_local_arithmetic() {
        let f = FieldConfig::padic(5, 10).unwrap();
        let lam = LocalNum::from_ratio(&f, 3, 125).unwrap();
        let r = PadicResidue::new(&lam, 4).unwrap();
        let a = LocalNum::from_int(&f, 77);
        let b = LocalNum::from_ratio(&f, 2, 3).unwrap();
        let prod = r.mul(r.from_local(&a).unwrap(), r.from_local(&b).unwrap());
        assert_eq!(prod, r.from_local(&a.mul(&b).unwrap()).unwrap());
        assert_eq!(r.offset(3, 2, 7), (3 + 25 * 7));
        assert!(r.divisible(250, 1) && !r.divisible(250, 4));
    }

    #[test]
    fn laurent_psi_reads_the_constant_coefficient() {
        let f = FieldConfig::laurent(3, 10).unwrap();
        // λ = t^{-2}(1 + 2t), y = 1 + t + t^2: λy has t^0-coefficient 1 + 2 = 0 mod 3
        let lam = LocalNum::from_digits(&f, -2, &[1, 2, 0, 0, 0, 0, 0, 0, 0, 0]);
        let r = LaurentResidue::new(&lam, 3).unwrap();
        let y = LocalNum::from_digits(&f, 0, &[1, 1, 1, 0, 0, 0, 0, 0, 0, 0]);
        let ey = r.from_local(&y).unwrap();
        assert_eq!(r.psi_exp(ey), 0);
        let prod = lam.mul(&y).unwrap();
        assert_eq!(prod.digit_at(0).unwrap() as u64, r.psi_exp(ey));
        let sq = r.mul(ey, ey);
        assert_eq!(&sq[..3], &[1, 2, 0]);
    }
}
