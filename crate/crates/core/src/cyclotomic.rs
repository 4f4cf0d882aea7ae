//! Exact arithmetic in `Q(ζ_{p^M})`.
//!
//! Values are stored at their minimal level `M` in the basis
//! `1, ζ, ..., ζ^{φ(p^M)-1}` with `ζ = ζ_{p^M} = e^{2πi/p^M}`. Reduction uses
//! `Φ_{p^M}(ζ) = Σ_{b<p} ζ^{b p^{M-1}} = 0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

fn phi(p: u32, level: u32) -> u64 {
    if level == 0 {
        1
    } else {
        (p as u64 - 1) * (p as u64).pow(level - 1)
    }
}

/// Element of the cyclotomic field `Q(ζ_{p^M})`.
///
/// Only nonzero basis coefficients are stored, so high-level values with
/// few terms (single roots of unity, Gauss sums) stay cheap.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloNum {
    p: u32,
    level: u32,
    coeffs: BTreeMap<u64, BigRational>,
}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Reduces `Σ w_e ζ_{p^L}^e` to the power basis and then to the minimal
/// level. Works on any additive coefficient type.
fn reduce<T>(p: u32, mut level: u32, mut g: BTreeMap<u64, T>) -> (u32, BTreeMap<u64, T>)
where
    T: Clone + Zero + for<'a> std::ops::SubAssign<&'a T>,
{
    if level > 0 {
        let ph = phi(p, level);
        let step = (p as u64).pow(level - 1);
        let high: Vec<u64> = g.range(ph..).map(|(e, _)| *e).collect();
        for e in high {
            let c = g.remove(&e).unwrap();
            if c.is_zero() {
                continue;
            }
            let a = e - ph;
            for b in 0..p as u64 - 1 {
                let slot = g.entry(a + b * step).or_insert_with(T::zero);
                *slot -= &c;
            }
        }
    }
    g.retain(|_, c| !c.is_zero());
    loop {
        match level {
            0 => break,
            1 => {
                if g.keys().all(|&e| e == 0) {
                    level = 0;
                }
                break;
            }
            _ => {
                if g.keys().any(|&e| e % p as u64 != 0) {
                    break;
                }
                g = g.into_iter().map(|(e, c)| (e / p as u64, c)).collect();
                level -= 1;
            }
        }
    }
    (level, g)
}

/// Integer-weighted formal sum `Σ w_e [e]` over `Z/p^L`; accumulates
/// character sums before conversion to a [`CycloNum`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupRing {
    p: u32,
    level: u32,
    modulus: u64,
    store: Store,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Store {
    Dense(Vec<i64>),
    Sparse(HashMap<u64, i64>),
}

const DENSE_LIMIT: u64 = 1 << 20;

impl GroupRing {
    pub fn new(p: u32, level: u32) -> Self {
        let modulus = (p as u64).pow(level);
        let store = if modulus <= DENSE_LIMIT {
            Store::Dense(vec![0; modulus as usize])
        } else {
            Store::Sparse(HashMap::new())
        };
        GroupRing { p, level, modulus, store }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    #[inline]
    pub fn add_at(&mut self, e: u64, w: i64) {
        let e = e % self.modulus;
        match &mut self.store {
            Store::Dense(v) => v[e as usize] += w,
            Store::Sparse(m) => *m.entry(e).or_insert(0) += w,
        }
    }

    /// Adds `w · [e + shift]` for every entry `w · [e]` of `other`.
    pub fn add_shifted(&mut self, other: &GroupRing, shift: u64, scale: i64) {
        for (e, w) in other.entries() {
            self.add_at(e + shift, w * scale);
        }
    }

    pub fn entries(&self) -> Vec<(u64, i64)> {
        match &self.store {
            Store::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0)
                .map(|(e, w)| (e as u64, *w))
                .collect(),
            Store::Sparse(m) => {
                let mut out: Vec<(u64, i64)> =
                    m.iter().filter(|(_, w)| **w != 0).map(|(e, w)| (*e, *w)).collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Pointwise sum of two accumulators of the same shape.
    pub fn merge(mut self, other: &GroupRing) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        match (&mut self.store, &other.store) {
            (Store::Dense(a), Store::Dense(b)) => {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            _ => {
                for (e, w) in other.entries() {
                    self.add_at(e, w);
                }
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.entries().is_empty()
    }

    pub fn to_cyclo(&self) -> CycloNum {
        let g: BTreeMap<u64, i128> = self.entries().into_iter().map(|(e, w)| (e, w as i128)).collect();
        let (level, g) = reduce(self.p, self.level, g);
        CycloNum {
            p: self.p,
            level,
            coeffs: g.into_iter().map(|(e, w)| (e, BigRational::from_integer(BigInt::from(w)))).collect(),
        }
    }
}

impl CycloNum {
    pub fn zero(p: u32) -> Self {
        CycloNum { p, level: 0, coeffs: BTreeMap::new() }
    }

    pub fn one(p: u32) -> Self {
        Self::from_rational(p, BigRational::one())
    }

    pub fn from_rational(p: u32, q: BigRational) -> Self {
        let mut coeffs = BTreeMap::new();
        if !q.is_zero() {
            coeffs.insert(0, q);
        }
        CycloNum { p, level: 0, coeffs }
    }

    pub fn from_int(p: u32, n: i64) -> Self {
        Self::from_rational(p, BigRational::from_integer(BigInt::from(n)))
    }

    /// `p^k` for any integer `k`.
    pub fn p_power(p: u32, k: i64) -> Self {
        let base = BigRational::from_integer(BigInt::from(p));
        let v = if k >= 0 {
            num_traits::pow(base, k as usize)
        } else {
            num_traits::pow(base, (-k) as usize).recip()
        };
        Self::from_rational(p, v)
    }

    /// `ζ_{p^M}^e`.
    pub fn zeta_pow(p: u32, level: u32, e: i64) -> Self {
        let m = (p as i64).pow(level);
        Self::from_group_ring(p, level, [(e.rem_euclid(m) as u64, BigRational::one())])
    }

    /// Canonical form of `Σ c_e ζ_{p^L}^e` (exponents taken modulo `p^L`).
    pub fn from_group_ring(
        p: u32,
        level: u32,
        terms: impl IntoIterator<Item = (u64, BigRational)>,
    ) -> Self {
        let m = (p as u64).pow(level);
        let mut g: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *g.entry(e % m).or_insert_with(BigRational::zero) += c;
        }
        let (level, coeffs) = reduce(p, level, g);
        CycloNum { p, level, coeffs }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Minimal `M` with the value in `Q(ζ_{p^M})`.
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Dense coefficient vector of length `φ(p^M)`.
    pub fn coeffs(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); phi(self.p, self.level) as usize];
        for (e, c) in &self.coeffs {
            out[*e as usize] = c.clone();
        }
        out
    }

    /// Nonzero coefficients `(j, c_j)`.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &BigRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        (self.level == 0).then(|| self.coeffs.get(&0).cloned().unwrap_or_else(BigRational::zero))
    }

    fn promoted(&self, level: u32) -> impl Iterator<Item = (u64, &BigRational)> {
        let stride = (self.p as u64).pow(level - self.level);
        self.coeffs.iter().map(move |(e, c)| (e * stride, c))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(Error::PrimeMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let level = self.level.max(other.level);
        let terms: Vec<(u64, BigRational)> = self
            .promoted(level)
            .chain(other.promoted(level))
            .map(|(e, c)| (e, c.clone()))
            .collect();
        Ok(Self::from_group_ring(self.p, level, terms))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_value())
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if self.level == 0 {
            return Ok(other.scale(&self.to_rational().unwrap()));
        }
        if other.level == 0 {
            return Ok(self.scale(&other.to_rational().unwrap()));
        }
        let level = self.level.max(other.level);
        let m = (self.p as u64).pow(level);
        let b: Vec<(u64, &BigRational)> = other.promoted(level).collect();
        let mut g: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (i, x) in self.promoted(level) {
            for (j, y) in &b {
                *g.entry((i + j) % m).or_insert_with(BigRational::zero) += x * *y;
            }
        }
        let (level, coeffs) = reduce(self.p, level, g);
        Ok(CycloNum { p: self.p, level, coeffs })
    }

    pub fn neg_value(&self) -> Self {
        CycloNum {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        if q.is_zero() {
            return Self::zero(self.p);
        }
        CycloNum {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs.iter().map(|(e, c)| (*e, c * q)).collect(),
        }
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conj(&self) -> Self {
        if self.level == 0 {
            return self.clone();
        }
        let m = (self.p as u64).pow(self.level);
        Self::from_group_ring(
            self.p,
            self.level,
            self.coeffs.iter().map(|(e, c)| ((m - e) % m, c.clone())),
        )
    }

    /// Multiplicative inverse, by solving the linear system for
    /// multiplication by `self` in the power basis.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.level == 0 {
            return Ok(Self::from_rational(self.p, self.to_rational().unwrap().recip()));
        }
        let n = phi(self.p, self.level) as usize;
        // column j holds the coordinates of self · ζ^j
        let cols: Vec<Vec<BigRational>> = (0..n)
            .map(|j| {
                let z = Self::zeta_pow(self.p, self.level, j as i64);
                let prod = self.checked_mul(&z).unwrap();
                let mut full = vec![BigRational::zero(); n];
                for (e, c) in prod.promoted(self.level) {
                    full[e as usize] = c.clone();
                }
                full
            })
            .collect();
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..n).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for c in 0..n {
            let piv = (c..n).find(|&r| !a[r][c].is_zero()).ok_or(Error::DivisionByZero)?;
            a.swap(piv, c);
            let pv = a[c][c].clone();
            for k in c..=n {
                a[c][k] = &a[c][k] / &pv;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let fct = a[r][c].clone();
                    for k in c..=n {
                        let t = &fct * &a[c][k];
                        a[r][k] -= t;
                    }
                }
            }
        }
        Ok(Self::from_group_ring(
            self.p,
            self.level,
            a.into_iter().enumerate().map(|(j, row)| (j as u64, row[n].clone())),
        ))
    }

    /// Double-precision approximation, for display only.
    pub fn embed_complex(&self) -> (f64, f64) {
        let m = (self.p as f64).powi(self.level as i32);
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in &self.coeffs {
            let v = c.to_f64().unwrap_or(f64::NAN);
            let t = std::f64::consts::TAU * *j as f64 / m;
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }

    /// Sum of an iterator of values over the same prime.
    pub fn sum<'a>(p: u32, it: impl IntoIterator<Item = &'a CycloNum>) -> Self {
        it.into_iter().fold(Self::zero(p), |acc, x| &acc + x)
    }
}

impl ops::Add for &CycloNum {
    type Output = CycloNum;

    /// Panics on mixed primes; see [`CycloNum::checked_add`].
    fn add(self, rhs: &CycloNum) -> CycloNum {
        self.checked_add(rhs).expect("cyclotomic values over the same prime")
    }
}

impl ops::Sub for &CycloNum {
    type Output = CycloNum;

    fn sub(self, rhs: &CycloNum) -> CycloNum {
        self.checked_sub(rhs).expect("cyclotomic values over the same prime")
    }
}

impl ops::Mul for &CycloNum {
    type Output = CycloNum;

    fn mul(self, rhs: &CycloNum) -> CycloNum {
        self.checked_mul(rhs).expect("cyclotomic values over the same prime")
    }
}

impl ops::Neg for &CycloNum {
    type Output = CycloNum;

    fn neg(self) -> CycloNum {
        self.neg_value()
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn parse_rational(s: &str) -> Option<BigRational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (&j, c) in &self.coeffs {
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = fmt_rational(&c.abs());
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match j {
                0 => f.write_str(&mag)?,
                _ => write!(f, "{mag}*z{}^{j}", (self.p as u64).pow(self.level))?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CycloJson {
    p: u32,
    #[serde(rename = "M")]
    level: u32,
    coeffs: Vec<String>,
    #[serde(default, skip_deserializing)]
    approx: [f64; 2],
}

impl Serialize for CycloNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = self.embed_complex();
        // keep "-0" out of golden output
        let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { (v * 1e12).round() / 1e12 };
        CycloJson {
            p: self.p,
            level: self.level,
            coeffs: self.coeffs().iter().map(fmt_rational).collect(),
            approx: [clean(re), clean(im)],
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycloNum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CycloJson::deserialize(d)?;
        if j.coeffs.len() as u64 != phi(j.p, j.level) {
            return Err(D::Error::custom("coefficient vector has the wrong length"));
        }
        let coeffs = j
            .coeffs
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| D::Error::custom(format!("bad rational {s}"))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self::from_group_ring(j.p, j.level, coeffs.into_iter().enumerate().map(|(e, c)| (e as u64, c))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(CycloNum::zeta_pow(3, 1, 3), CycloNum::one(3));
        let s = &CycloNum::zeta_pow(3, 1, 1) + &CycloNum::zeta_pow(3, 1, 2);
        assert_eq!(s, CycloNum::from_int(3, -1));
        assert_eq!(CycloNum::zeta_pow(5, 2, 5), CycloNum::zeta_pow(5, 1, 1));
        let total = (0..7).fold(CycloNum::zero(7), |acc, j| &acc + &CycloNum::zeta_pow(7, 1, j));
        assert!(total.is_zero());
    }

    #[test]
    fn quadratic_gauss_sum_norm() {
        let g = (0..5).fold(CycloNum::zero(5), |acc, x| &acc + &CycloNum::zeta_pow(5, 1, x * x));
        assert_eq!(&g * &g.conj(), CycloNum::from_int(5, 5));
        // p ≡ 1 mod 4: the sum is real and squares to p
        assert_eq!(&g * &g, CycloNum::from_int(5, 5));
    }

    #[test]
    fn higher_level_products() {
        let z = CycloNum::zeta_pow(3, 2, 1);
        let mut acc = CycloNum::one(3);
        for _ in 0..9 {
            acc = &acc * &z;
        }
        assert_eq!(acc, CycloNum::one(3));
        assert_eq!(&z * &CycloNum::zeta_pow(3, 2, 2), CycloNum::zeta_pow(3, 1, 1));
    }

    #[test]
    fn inverse() {
        let a = &CycloNum::zeta_pow(5, 2, 3) + &CycloNum::from_rational(5, rat(2, 3));
        let b = a.inv().unwrap();
        assert_eq!(&a * &b, CycloNum::one(5));
        assert_eq!(CycloNum::zero(5).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn prime_mismatch() {
        assert_eq!(
            CycloNum::one(3).checked_add(&CycloNum::one(5)),
            Err(Error::PrimeMismatch)
        );
    }

    #[test]
    fn complex_embedding() {
        let (re, im) = CycloNum::one(3).embed_complex();
        assert_eq!((re, im), (1.0, 0.0));
        let (re, im) = CycloNum::zeta_pow(3, 1, 1).embed_complex();
        assert!((re + 0.5).abs() < 1e-12 && (im - 0.866025).abs() < 1e-6);
    }

    #[test]
    fn json_round_trip() {
        let a = &CycloNum::zeta_pow(7, 2, 10) + &CycloNum::from_rational(7, rat(-3, 49));
        let s = serde_json::to_string(&a).unwrap();
        assert!(s.starts_with("{\"p\":7,\"M\":2,\"coeffs\":["));
        let b: CycloNum = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn group_ring_accumulator() {
        let mut g = GroupRing::new(5, 1);
        for x in 0..5u64 {
            g.add_at(3 * x, 1);
        }
        assert!(g.to_cyclo().is_zero());
    }
}
