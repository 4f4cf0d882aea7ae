//! Truncated arithmetic in a nonarchimedean local field with odd residue
//! characteristic: either the p-adic numbers `Q_p` or the Laurent series
//! field `F_p((t))`.
//!
//! A [`LocalNum`] is stored as `ϖ^v · u` where the unit `u` is known modulo
//! `ϖ^r`; `r` is the relative precision and never exceeds the configured
//! precision `P`. The absolute precision of a value is `v + r`.
//!
//! Precision rules:
//! - `a + b`: absolute precision is the minimum of the operands' absolute
//!   precisions. When every known digit cancels the result is a zero known
//!   modulo that power of `ϖ`.
//! - `a · b`: relative precision is the minimum of the operands' relative
//!   precisions, valuations add.
//! - `a⁻¹`: same relative precision, negated valuation.
//! - Operations that need a digit that is not known (inverting a zero that is
//!   only known to some precision, reading a digit past the absolute
//!   precision) fail with [`Error::PrecisionExhausted`].

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which local field a configuration describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// `Q_p`, digits carry.
    Padic,
    /// `F_p((t))`, digits add componentwise.
    Laurent,
}

impl FieldKind {
    /// `"padic"` or `"laurent"`, as accepted by `FromStr`.
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Padic => "padic",
            FieldKind::Laurent => "laurent",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            FieldKind::Padic => "p",
            FieldKind::Laurent => "t",
        }
    }
}

impl std::str::FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "padic" => Ok(FieldKind::Padic),
            "laurent" => Ok(FieldKind::Laurent),
            other => Err(Error::InvalidConfig(format!("unknown field kind `{other}`"))),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Padic => "padic",
            FieldKind::Laurent => "laurent",
        })
    }
}

#[derive(Debug)]
struct ConfigInner {
    kind: FieldKind,
    p: u32,
    precision: u32,
    powers: Vec<BigUint>,
}

/// Field kind, residue characteristic and working precision.
///
/// Cheap to clone; equality compares `(kind, p, precision)`.
#[derive(Clone)]
pub struct FieldConfig {
    inner: Arc<ConfigInner>,
}

impl fmt::Debug for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldConfig({}, p={}, P={})", self.kind(), self.p(), self.precision())
    }
}

impl PartialEq for FieldConfig {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.kind == other.inner.kind
                && self.inner.p == other.inner.p
                && self.inner.precision == other.inner.precision)
    }
}

impl Eq for FieldConfig {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FieldConfig {
    pub fn new(kind: FieldKind, p: u32, precision: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::InvalidConfig(format!("{p} is not prime")));
        }
        if p == 2 {
            return Err(Error::InvalidConfig("residue characteristic 2 is not supported".into()));
        }
        if precision == 0 {
            return Err(Error::InvalidConfig("precision must be positive".into()));
        }
        let mut powers = Vec::with_capacity(precision as usize + 1);
        let mut acc = BigUint::one();
        for _ in 0..=precision {
            powers.push(acc.clone());
            acc *= p;
        }
        Ok(FieldConfig { inner: Arc::new(ConfigInner { kind, p, precision, powers }) })
    }

    pub fn padic(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::Padic, p, precision)
    }

    pub fn laurent(p: u32, precision: u32) -> Result<Self> {
        Self::new(FieldKind::Laurent, p, precision)
    }

    pub fn kind(&self) -> FieldKind {
        self.inner.kind
    }

    pub fn p(&self) -> u32 {
        self.inner.p
    }

    pub fn precision(&self) -> u32 {
        self.inner.precision
    }

    /// Same field with a different working precision.
    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(self.kind(), self.p(), precision)
    }

    fn pow(&self, k: u32) -> BigUint {
        match self.inner.powers.get(k as usize) {
            Some(v) => v.clone(),
            None => BigUint::from(self.p()).pow(k),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Unit {
    /// Residue modulo `p^r`, not divisible by `p`.
    Padic(BigUint),
    /// `r` digits in `[0, p)`, leading digit nonzero.
    Laurent(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Repr {
    /// `None`: exact zero. `Some(k)`: congruent to zero modulo `ϖ^k`.
    Zero(Option<i64>),
    Nonzero { val: i64, rel: u32, unit: Unit },
}

/// Element of `Q_p` or `F_p((t))` known to finite precision.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalNum {
    field: FieldConfig,
    repr: Repr,
}

impl fmt::Debug for LocalNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

// ---- Laurent unit helpers (truncated polynomials over F_p) ----

fn inv_mod_p(a: u32, p: u32) -> u32 {
    // p is prime, a != 0 mod p
    let mut result = 1u64;
    let mut base = (a % p) as u64;
    let mut e = p as u64 - 2;
    let m = p as u64;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        e >>= 1;
    }
    result as u32
}

fn laurent_mul(a: &[u32], b: &[u32], r: usize, p: u32) -> Vec<u32> {
    let m = p as u64;
    let mut out = vec![0u64; r];
    for (i, &x) in a.iter().enumerate().take(r) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(r - i) {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % m;
        }
    }
    out.into_iter().map(|v| v as u32).collect()
}

fn laurent_inv(a: &[u32], r: usize, p: u32) -> Vec<u32> {
    let m = p as u64;
    let inv0 = inv_mod_p(a[0], p) as u64;
    let mut b = vec![0u32; r];
    b[0] = inv0 as u32;
    for k in 1..r {
        let mut s = 0u64;
        for j in 1..=k.min(a.len() - 1) {
            s = (s + a[j] as u64 * b[k - j] as u64) % m;
        }
        b[k] = ((m - s) % m * inv0 % m) as u32;
    }
    b
}

fn ord_biguint(n: &BigUint, p: u32) -> (u32, BigUint) {
    let mut t = 0;
    let mut m = n.clone();
    let pb = BigUint::from(p);
    while !m.is_zero() && (&m % &pb).is_zero() {
        m /= &pb;
        t += 1;
    }
    (t, m)
}

fn ord_bigint(n: &BigInt, p: u32) -> (i64, BigInt) {
    let mut t = 0;
    let mut m = n.clone();
    let pb = BigInt::from(p);
    while !m.is_zero() && (&m % &pb).is_zero() {
        m /= &pb;
        t += 1;
    }
    (t, m)
}

impl LocalNum {
    pub fn zero(field: &FieldConfig) -> Self {
        LocalNum { field: field.clone(), repr: Repr::Zero(None) }
    }

    /// Zero known only modulo `ϖ^prec`.
    pub fn zero_to(field: &FieldConfig, prec: i64) -> Self {
        LocalNum { field: field.clone(), repr: Repr::Zero(Some(prec)) }
    }

    pub fn one(field: &FieldConfig) -> Self {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &FieldConfig, n: i64) -> Self {
        Self::from_rational(field, &BigInt::from(n), &BigInt::one()).expect("unit denominator")
    }

    /// `ϖ^k` at full precision.
    pub fn uniformizer_pow(field: &FieldConfig, k: i64) -> Self {
        let mut digits = vec![0u32; field.precision() as usize];
        digits[0] = 1;
        Self::from_digits(field, k, &digits)
    }

    /// Embeds `num/den`. In the Laurent field rationals map through their
    /// reduction modulo `p`, so `den` must be prime to `p`.
    pub fn from_rational(field: &FieldConfig, num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = field.p();
        let pb = BigInt::from(p);
        match field.kind() {
            FieldKind::Laurent => {
                let d = den.mod_floor(&pb);
                if d.is_zero() {
                    return Err(Error::DenominatorNotUnit(den.to_string()));
                }
                let n = num.mod_floor(&pb);
                if n.is_zero() {
                    return Ok(Self::zero(field));
                }
                let c = (n.to_u64().unwrap() * inv_mod_p(d.to_u32().unwrap(), p) as u64 % p as u64)
                    as u32;
                let mut digits = vec![0u32; field.precision() as usize];
                digits[0] = c;
                Ok(Self::from_digits(field, 0, &digits))
            }
            FieldKind::Padic => {
                if num.is_zero() {
                    return Ok(Self::zero(field));
                }
                let (vn, n) = ord_bigint(num, p);
                let (vd, d) = ord_bigint(den, p);
                let r = field.precision();
                let modulus = BigInt::from(field.pow(r));
                let d_inv = d
                    .mod_floor(&modulus)
                    .modinv(&modulus)
                    .expect("denominator unit after stripping p");
                let u = (n * d_inv).mod_floor(&modulus);
                let (_, u) = u.into_parts();
                Ok(LocalNum {
                    field: field.clone(),
                    repr: Repr::Nonzero { val: vn - vd, rel: r, unit: Unit::Padic(u) },
                })
            }
        }
    }

    pub fn from_ratio(field: &FieldConfig, num: i64, den: i64) -> Result<Self> {
        Self::from_rational(field, &BigInt::from(num), &BigInt::from(den))
    }

    /// Builds `ϖ^val · Σ digits[i] ϖ^i`; the relative precision is the
    /// number of digits after stripping leading zeros. An all-zero digit
    /// list yields a zero known modulo `ϖ^(val + len)`.
    pub fn from_digits(field: &FieldConfig, val: i64, digits: &[u32]) -> Self {
        let p = field.p();
        let lead = digits.iter().position(|&d| d % p != 0);
        let Some(lead) = lead else {
            return Self::zero_to(field, val + digits.len() as i64);
        };
        let digits: Vec<u32> = digits[lead..].iter().map(|d| d % p).collect();
        let rel = digits.len().min(field.precision() as usize);
        let digits = &digits[..rel];
        let unit = match field.kind() {
            FieldKind::Laurent => Unit::Laurent(digits.to_vec()),
            FieldKind::Padic => {
                let mut acc = BigUint::zero();
                for &d in digits.iter().rev() {
                    acc = acc * p + d;
                }
                Unit::Padic(acc)
            }
        };
        LocalNum {
            field: field.clone(),
            repr: Repr::Nonzero { val: val + lead as i64, rel: rel as u32, unit },
        }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero(None))
    }

    /// Valuation; `None` stands for `+∞` (zero, exact or to precision).
    pub fn ord(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(_) => None,
            Repr::Nonzero { val, .. } => Some(*val),
        }
    }

    /// Lower bound for the valuation: the valuation, or the known precision
    /// of a zero (`i64::MAX` for exact zero).
    pub fn ord_lower(&self) -> i64 {
        match &self.repr {
            Repr::Zero(None) => i64::MAX,
            Repr::Zero(Some(k)) => *k,
            Repr::Nonzero { val, .. } => *val,
        }
    }

    /// Absolute precision: the value is known modulo `ϖ^k`. `None` if exact.
    pub fn abs_prec(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero(k) => *k,
            Repr::Nonzero { val, rel, .. } => Some(val + *rel as i64),
        }
    }

    pub fn rel_prec(&self) -> u32 {
        match &self.repr {
            Repr::Zero(_) => 0,
            Repr::Nonzero { rel, .. } => *rel,
        }
    }

    /// `|a| = q^{-ord a}` reported as `(q, -ord a)`; `None` for zero.
    pub fn abs_value(&self) -> Option<(u32, i64)> {
        self.ord().map(|v| (self.field.p(), -v))
    }

    /// Angular component: the leading digit, `0` for zero.
    pub fn ac(&self) -> u32 {
        match &self.repr {
            Repr::Zero(_) => 0,
            Repr::Nonzero { unit: Unit::Padic(u), .. } => (u % self.field.p()).to_u32().unwrap(),
            Repr::Nonzero { unit: Unit::Laurent(d), .. } => d[0],
        }
    }

    /// Unit digits (length = relative precision), least significant first.
    pub fn digits(&self) -> Vec<u32> {
        match &self.repr {
            Repr::Zero(_) => Vec::new(),
            Repr::Nonzero { unit: Unit::Laurent(d), .. } => d.clone(),
            Repr::Nonzero { rel, unit: Unit::Padic(u), .. } => {
                let p = self.field.p();
                let mut out = Vec::with_capacity(*rel as usize);
                let mut m = u.clone();
                for _ in 0..*rel {
                    let (q, r) = m.div_rem(&BigUint::from(p));
                    out.push(r.to_u32().unwrap());
                    m = q;
                }
                out
            }
        }
    }

    /// Digit at absolute position `pos` (coefficient of `ϖ^pos`).
    pub fn digit_at(&self, pos: i64) -> Result<u32> {
        if let Some(k) = self.abs_prec() {
            if pos >= k {
                return Err(Error::PrecisionExhausted(format!("digit {pos} of {self}")));
            }
        }
        match &self.repr {
            Repr::Zero(_) => Ok(0),
            Repr::Nonzero { val, .. } if pos < *val => Ok(0),
            Repr::Nonzero { val, .. } => Ok(self.digits()[(pos - val) as usize]),
        }
    }

    /// Digits at positions `0..k` of an element of `O`.
    pub fn residue_digits(&self, k: u32) -> Result<Vec<u32>> {
        if self.ord_lower() < 0 {
            return Err(Error::NotIntegral(self.to_string()));
        }
        (0..k as i64).map(|i| self.digit_at(i)).collect()
    }

    /// Value modulo `p^k` of an integral p-adic number.
    pub fn residue_biguint(&self, k: u32) -> Result<BigUint> {
        let p = self.field.p();
        let digits = self.residue_digits(k)?;
        let mut acc = BigUint::zero();
        for &d in digits.iter().rev() {
            acc = acc * p + d;
        }
        Ok(acc)
    }

    /// The finite expansion made of the digits at positions `< k`, at full
    /// precision (it is an exact element).
    pub fn truncate(&self, k: i64) -> Result<Self> {
        if let Some(a) = self.abs_prec() {
            if a < k {
                return Err(Error::PrecisionExhausted(format!("truncating {self} at {k}")));
            }
        }
        match &self.repr {
            Repr::Zero(_) => Ok(Self::zero(&self.field)),
            Repr::Nonzero { val, .. } if *val >= k => Ok(Self::zero(&self.field)),
            Repr::Nonzero { val, .. } => {
                let keep = (k - val) as usize;
                let mut d = self.digits();
                d.truncate(keep);
                d.resize(self.field.precision() as usize, 0);
                Ok(Self::from_digits(&self.field, *val, &d))
            }
        }
    }

    /// Caps the absolute precision at `k`.
    pub fn with_abs_prec(&self, k: i64) -> Self {
        match &self.repr {
            Repr::Zero(None) => Self::zero_to(&self.field, k),
            Repr::Zero(Some(z)) => Self::zero_to(&self.field, (*z).min(k)),
            Repr::Nonzero { val, rel, .. } => {
                if *val >= k {
                    return Self::zero_to(&self.field, k);
                }
                let new_rel = ((k - val) as u32).min(*rel);
                if new_rel == *rel {
                    return self.clone();
                }
                let d = self.digits();
                Self::from_digits(&self.field, *val, &d[..new_rel as usize])
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            Err(Error::ConfigMismatch)
        } else {
            Ok(())
        }
    }

    pub fn neg(&self) -> Self {
        let repr = match &self.repr {
            Repr::Zero(k) => Repr::Zero(*k),
            Repr::Nonzero { val, rel, unit } => {
                let unit = match unit {
                    Unit::Padic(u) => Unit::Padic(self.field.pow(*rel) - u),
                    Unit::Laurent(d) => {
                        let p = self.field.p();
                        Unit::Laurent(d.iter().map(|&x| (p - x) % p).collect())
                    }
                };
                Repr::Nonzero { val: *val, rel: *rel, unit }
            }
        };
        LocalNum { field: self.field.clone(), repr }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub(crate) fn add_unchecked(&self, other: &Self) -> Self {
        let field = &self.field;
        match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) => other.clone(),
            (_, Repr::Zero(None)) => self.clone(),
            (Repr::Zero(Some(k)), _) => other.with_abs_prec(*k),
            (_, Repr::Zero(Some(k))) => self.with_abs_prec(*k),
            (
                Repr::Nonzero { val: va, rel: ra, unit: ua },
                Repr::Nonzero { val: vb, rel: rb, unit: ub },
            ) => {
                let v = (*va).min(*vb);
                let abs = (va + *ra as i64).min(vb + *rb as i64);
                if abs <= v {
                    return Self::zero_to(field, abs);
                }
                let w = (abs - v) as u32;
                match (ua, ub) {
                    (Unit::Padic(a), Unit::Padic(b)) => {
                        let m = field.pow(w);
                        let a = (a * field.pow((va - v) as u32)) % &m;
                        let b = (b * field.pow((vb - v) as u32)) % &m;
                        let s = (a + b) % &m;
                        if s.is_zero() {
                            return Self::zero_to(field, abs);
                        }
                        let (t, u) = ord_biguint(&s, field.p());
                        LocalNum {
                            field: field.clone(),
                            repr: Repr::Nonzero {
                                val: v + t as i64,
                                rel: w - t,
                                unit: Unit::Padic(u),
                            },
                        }
                    }
                    (Unit::Laurent(a), Unit::Laurent(b)) => {
                        let p = field.p();
                        let mut s = vec![0u32; w as usize];
                        for (i, slot) in s.iter_mut().enumerate() {
                            let ia = i as i64 - (va - v);
                            let ib = i as i64 - (vb - v);
                            let x = if ia >= 0 { a.get(ia as usize).copied().unwrap_or(0) } else { 0 };
                            let y = if ib >= 0 { b.get(ib as usize).copied().unwrap_or(0) } else { 0 };
                            *slot = (x + y) % p;
                        }
                        Self::from_digits(field, v, &s)
                    }
                    _ => unreachable!("unit kind matches field kind"),
                }
            }
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let field = &self.field;
        match (&self.repr, &other.repr) {
            (Repr::Zero(None), _) | (_, Repr::Zero(None)) => Self::zero(field),
            (Repr::Zero(Some(k)), r) | (r, Repr::Zero(Some(k))) => {
                let shift = match r {
                    Repr::Zero(Some(j)) => *j,
                    Repr::Nonzero { val, .. } => *val,
                    Repr::Zero(None) => unreachable!(),
                };
                Self::zero_to(field, k + shift)
            }
            (
                Repr::Nonzero { val: va, rel: ra, unit: ua },
                Repr::Nonzero { val: vb, rel: rb, unit: ub },
            ) => {
                let r = (*ra).min(*rb);
                let unit = match (ua, ub) {
                    (Unit::Padic(a), Unit::Padic(b)) => Unit::Padic((a * b) % field.pow(r)),
                    (Unit::Laurent(a), Unit::Laurent(b)) => {
                        Unit::Laurent(laurent_mul(a, b, r as usize, field.p()))
                    }
                    _ => unreachable!("unit kind matches field kind"),
                };
                LocalNum { field: field.clone(), repr: Repr::Nonzero { val: va + vb, rel: r, unit } }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match &self.repr {
            Repr::Zero(None) => Err(Error::DivisionByZero),
            Repr::Zero(Some(k)) => {
                Err(Error::PrecisionExhausted(format!("inverting a zero known modulo ϖ^{k}")))
            }
            Repr::Nonzero { val, rel, unit } => {
                let unit = match unit {
                    Unit::Padic(u) => {
                        let m = self.field.pow(*rel);
                        Unit::Padic(u.modinv(&m).expect("unit is invertible"))
                    }
                    Unit::Laurent(d) => Unit::Laurent(laurent_inv(d, *rel as usize, self.field.p())),
                };
                Ok(LocalNum {
                    field: self.field.clone(),
                    repr: Repr::Nonzero { val: -val, rel: *rel, unit },
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.mul(&other.inv()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.field);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplication by `ϖ^k`.
    pub fn shift(&self, k: i64) -> Self {
        let repr = match &self.repr {
            Repr::Zero(z) => Repr::Zero(z.map(|z| z + k)),
            Repr::Nonzero { val, rel, unit } => {
                Repr::Nonzero { val: val + k, rel: *rel, unit: unit.clone() }
            }
        };
        LocalNum { field: self.field.clone(), repr }
    }

    /// `ϖ^{-ord a} · a`, the unit part.
    pub fn unit_part(&self) -> Result<Self> {
        match self.ord() {
            Some(v) => Ok(self.shift(-v)),
            None => Err(Error::DivisionByZero),
        }
    }

    /// True when `ord(self - other) ≥ k`.
    pub fn congruent(&self, other: &Self, k: i64) -> Result<bool> {
        let d = self.sub(other)?;
        if let Some(a) = d.abs_prec() {
            if a < k && d.is_zero() {
                return Err(Error::PrecisionExhausted(format!(
                    "comparison modulo ϖ^{k} with difference known modulo ϖ^{a}"
                )));
            }
        }
        Ok(d.ord_lower() >= k)
    }

    /// Hensel square root; the root with `ac ∈ [1, ⌊p/2⌋]` is returned.
    pub fn sqrt(&self) -> Result<Self> {
        let field = &self.field;
        let v = match self.ord() {
            None if self.is_exact_zero() => return Ok(self.clone()),
            None => return Err(Error::PrecisionExhausted("square root of an inexact zero".into())),
            Some(v) => v,
        };
        if v % 2 != 0 {
            return Err(Error::NoSquareRoot);
        }
        let p = field.p();
        let Some(r0) = sqrt_mod_p(self.ac(), p) else {
            return Err(Error::NoSquareRoot);
        };
        let r0 = if r0 > p / 2 { p - r0 } else { r0 };
        let u = self.unit_part()?;
        let rel = u.rel_prec();
        let mut digits = vec![0u32; rel as usize];
        digits[0] = r0;
        let mut x = LocalNum::from_digits(field, 0, &digits);
        let half = LocalNum::from_int(field, 2).inv()?;
        // quadratic convergence from one correct digit
        let mut steps = 1u32;
        while (1u32 << (steps - 1)) < rel + 1 {
            steps += 1;
        }
        for _ in 0..steps + 1 {
            x = x.add_unchecked(&u.mul_unchecked(&x.inv()?)).mul_unchecked(&half);
        }
        let x = x.with_abs_prec(rel as i64);
        Ok(x.shift(v / 2))
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(field: &FieldConfig, src: &str) -> Result<Self> {
        let s = src.trim();
        let sym = field.kind().symbol();
        let bad = || Error::ParseLocal(src.to_string());
        if s == "0" {
            return Ok(Self::zero(field));
        }
        if let Some(rest) = s.strip_prefix("O(") {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            let k = inner
                .strip_prefix(sym)
                .and_then(|t| t.strip_prefix('^'))
                .ok_or_else(bad)?
                .parse::<i64>()
                .map_err(|_| bad())?;
            return Ok(Self::zero_to(field, k));
        }
        let rest = s.strip_prefix(sym).and_then(|t| t.strip_prefix('^')).ok_or_else(bad)?;
        let (v, rest) = rest.split_once('*').ok_or_else(bad)?;
        let v: i64 = v.trim().parse().map_err(|_| bad())?;
        let (body, tail) = rest.trim().strip_prefix('(').and_then(|t| t.split_once(')')).ok_or_else(bad)?;
        // digits as written; absent powers are zero
        let mut digits: Vec<u32> = Vec::new();
        for term in body.split('+') {
            let term = term.trim();
            let (d, pw) = match term.split_once('*') {
                None => (term, 0i64),
                Some((d, w)) => {
                    let w = w.trim();
                    let e = if w == sym {
                        1
                    } else {
                        w.strip_prefix(sym)
                            .and_then(|t| t.strip_prefix('^'))
                            .ok_or_else(bad)?
                            .parse::<i64>()
                            .map_err(|_| bad())?
                    };
                    (d, e)
                }
            };
            if pw < digits.len() as i64 || pw >= field.precision() as i64 {
                return Err(bad());
            }
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            if d >= field.p() {
                return Err(bad());
            }
            digits.resize(pw as usize, 0);
            digits.push(d);
        }
        if digits.is_empty() || digits[0] == 0 {
            return Err(bad());
        }
        // `+ O(ϖ^k)` fixes the precision; without it the value is taken to
        // full precision
        let tail = tail.trim();
        let rel = if tail.is_empty() {
            field.precision() as i64
        } else {
            let k = tail
                .strip_prefix('+')
                .map(str::trim)
                .and_then(|t| t.strip_prefix("O("))
                .and_then(|t| t.strip_suffix(')'))
                .and_then(|t| t.strip_prefix(sym))
                .and_then(|t| t.strip_prefix('^'))
                .ok_or_else(bad)?
                .parse::<i64>()
                .map_err(|_| bad())?;
            k - v
        };
        if rel < digits.len() as i64 {
            return Err(bad());
        }
        digits.resize(rel as usize, 0);
        Ok(Self::from_digits(field, v, &digits))
    }
}

/// Square root of `a` modulo the odd prime `p` (Tonelli–Shanks).
pub(crate) fn sqrt_mod_p(a: u32, p: u32) -> Option<u32> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    let m = p as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        b %= m;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % m;
            }
            b = b * b % m;
            e >>= 1;
        }
        r
    };
    if pow(a as u64, (m - 1) / 2) != 1 {
        return None;
    }
    let mut q = m - 1;
    let mut s = 0;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while pow(z, (m - 1) / 2) != m - 1 {
        z += 1;
    }
    let mut c = pow(z, q);
    let mut x = pow(a as u64, q.div_ceil(2));
    let mut t = pow(a as u64, q);
    let mut mm = s;
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = tt * tt % m;
            i += 1;
        }
        let b = pow(c, 1 << (mm - i - 1));
        x = x * b % m;
        c = b * b % m;
        t = t * c % m;
        mm = i;
    }
    Some(x as u32)
}

/// Legendre symbol of `a` modulo the odd prime `p`: `0`, `1` or `-1`.
pub fn legendre(a: u32, p: u32) -> i32 {
    let a = a % p;
    if a == 0 {
        0
    } else if sqrt_mod_p(a, p).is_some() {
        1
    } else {
        -1
    }
}

impl fmt::Display for LocalNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = self.field.kind().symbol();
        match &self.repr {
            Repr::Zero(None) => f.write_str("0"),
            Repr::Zero(Some(k)) => write!(f, "O({sym}^{k})"),
            Repr::Nonzero { val, rel, .. } => {
                write!(f, "{sym}^{val} * (")?;
                for (i, d) in self.digits().iter().enumerate() {
                    match (i, d) {
                        (0, _) => write!(f, "{d}")?,
                        (_, 0) => {}
                        (1, _) => write!(f, " + {d}*{sym}")?,
                        _ => write!(f, " + {d}*{sym}^{i}")?,
                    }
                }
                write!(f, ") + O({sym}^{})", val + *rel as i64)
            }
        }
    }
}

/// Rational numbers as LocalNums, handy in tests and callers.
pub fn rational_to_local(field: &FieldConfig, q: &num_rational::BigRational) -> Result<LocalNum> {
    LocalNum::from_rational(field, q.numer(), q.denom())
}

/// Valuation of a nonzero integer at `p`.
pub fn int_valuation(n: &BigInt, p: u32) -> Option<i64> {
    if n.is_zero() {
        None
    } else {
        Some(ord_bigint(n, p).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32, prec: u32) -> FieldConfig {
        FieldConfig::padic(p, prec).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(FieldConfig::padic(2, 5).is_err());
        assert!(FieldConfig::padic(9, 5).is_err());
        assert!(FieldConfig::padic(5, 0).is_err());
        assert!(FieldConfig::laurent(7, 3).is_ok());
    }

    #[test]
    fn positional_addition() {
        let f = q(3, 5);
        let a = LocalNum::one(&f).add(&LocalNum::from_int(&f, 3)).unwrap();
        assert_eq!(a.ord(), Some(0));
        assert_eq!(a.digits(), vec![1, 1, 0, 0, 0]);
    }

    #[test]
    fn valuations_add_under_multiplication() {
        let f = q(5, 6);
        let a = LocalNum::from_int(&f, 25 * 3);
        let b = LocalNum::from_ratio(&f, 2, 5).unwrap();
        assert_eq!(a.ord(), Some(2));
        assert_eq!(b.ord(), Some(-1));
        assert_eq!(a.mul(&b).unwrap().ord(), Some(1));
    }

    #[test]
    fn geometric_series_inverse() {
        let f = q(5, 4);
        let x = LocalNum::from_int(&f, 6);
        let inv = x.inv().unwrap();
        // 1 - 5 + 25 - 125 mod 5^4 = -104 mod 625 = 521 = 1 + 4*5 + 0*25 + 4*125
        assert_eq!(inv.digits(), vec![1, 4, 0, 4]);
        assert_eq!(inv.mul(&x).unwrap(), LocalNum::one(&f));
    }

    #[test]
    fn ord_and_abs() {
        let f = q(7, 5);
        assert_eq!(LocalNum::from_int(&f, 343 * 2).ord(), Some(3));
        assert_eq!(LocalNum::zero(&f).ord(), None);
        let x = LocalNum::from_ratio(&f, 1, 49).unwrap();
        assert_eq!(x.abs_value(), Some((7, 2)));
        assert_eq!(LocalNum::zero(&f).abs_value(), None);
    }

    #[test]
    fn angular_component() {
        let f = q(5, 4);
        assert_eq!(LocalNum::from_int(&f, 25 * 3 + 125).ac(), 3);
        assert_eq!(LocalNum::zero(&f).ac(), 0);
        let neg = LocalNum::from_int(&f, -1);
        assert_eq!(neg.ac(), 4);
    }

    #[test]
    fn square_roots() {
        let f = q(7, 5);
        assert_eq!(LocalNum::one(&f).sqrt().unwrap(), LocalNum::one(&f));
        let a = LocalNum::from_int(&f, 8);
        let r = a.sqrt().unwrap();
        assert_eq!(r.mul(&r).unwrap(), a);
        assert!(r.ac() >= 1 && r.ac() <= 3);
        assert_eq!(LocalNum::from_int(&f, 7 * 2).sqrt(), Err(Error::NoSquareRoot));
        // 3 is not a square mod 7
        assert_eq!(LocalNum::from_int(&f, 3).sqrt(), Err(Error::NoSquareRoot));
    }

    #[test]
    fn rational_embedding() {
        let f = q(5, 8);
        let third = LocalNum::from_ratio(&f, 1, 3).unwrap();
        assert_eq!(third.mul(&LocalNum::from_int(&f, 3)).unwrap(), LocalNum::one(&f));
        assert_eq!(LocalNum::from_int(&f, 5).ord(), Some(1));
        assert!(LocalNum::from_ratio(&f, 0, 7).unwrap().is_exact_zero());
        let l = FieldConfig::laurent(5, 4).unwrap();
        assert_eq!(
            LocalNum::from_ratio(&l, 1, 5),
            Err(Error::DenominatorNotUnit("5".into()))
        );
        assert!(LocalNum::from_ratio(&l, 5, 1).unwrap().is_zero());
    }

    #[test]
    fn cancellation_keeps_absolute_precision() {
        let f = q(3, 6);
        let a = LocalNum::from_int(&f, 10);
        let z = a.sub(&a).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.abs_prec(), Some(6));
        assert!(matches!(z.inv(), Err(Error::PrecisionExhausted(_))));
        assert_eq!(LocalNum::zero(&f).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn laurent_has_no_carries() {
        let l = FieldConfig::laurent(3, 4).unwrap();
        let a = LocalNum::from_digits(&l, 0, &[2, 2, 0, 0]);
        let s = a.add(&a).unwrap();
        assert_eq!(s.digits(), vec![1, 1, 0, 0]);
        let inv = a.inv().unwrap();
        assert_eq!(inv.mul(&a).unwrap(), LocalNum::one(&l));
    }

    #[test]
    fn mixed_configs_rejected() {
        let a = LocalNum::one(&q(3, 4));
        let b = LocalNum::one(&q(5, 4));
        assert_eq!(a.add(&b), Err(Error::ConfigMismatch));
    }

    #[test]
    fn text_round_trip() {
        let f = q(7, 4);
        for x in [
            LocalNum::from_ratio(&f, -3, 49).unwrap(),
            LocalNum::from_int(&f, 8),
            LocalNum::zero(&f),
            LocalNum::zero_to(&f, 5),
        ] {
            let s = x.to_string();
            assert_eq!(LocalNum::parse(&f, &s).unwrap(), x, "{s}");
        }
        assert_eq!(LocalNum::from_int(&f, 8).to_string(), "p^0 * (1 + 1*p) + O(p^4)");
        let l = FieldConfig::laurent(5, 3).unwrap();
        let y = LocalNum::from_digits(&l, -2, &[4, 0, 1]);
        assert_eq!(y.to_string(), "t^-2 * (4 + 1*t^2) + O(t^1)");
        let short = LocalNum::parse(&f, "p^1 * (2) + O(p^3)").unwrap();
        assert_eq!((short.ord(), short.rel_prec()), (Some(1), 2));
        assert_eq!(LocalNum::parse(&l, &y.to_string()).unwrap(), y);
    }

    #[test]
    fn tonelli_shanks() {
        for p in [3u32, 5, 7, 11, 13, 17, 41] {
            for a in 1..p {
                if let Some(r) = sqrt_mod_p(a, p) {
                    assert_eq!(r * r % p, a);
                }
            }
        }
    }
}
