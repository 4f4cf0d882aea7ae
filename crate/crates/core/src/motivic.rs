//! Uniform-in-p stationary phase.
//!
//! For a phase with rational coefficients and a rational nondegenerate
//! critical point, the data entering the closed formula — the point, the
//! critical value and the diagonal constants `a_i` of the completed square —
//! are rational and do not depend on `p`. Away from a finite computed set of
//! bad primes they specialize to the per-prime Morse data, and the formula
//!
//! ```text
//! E(λ f(x0)) · φ(x0) · Π_i G(λ a_i, α)
//! ```
//!
//! becomes a cyclotomic number once `E ↦ Ψ`, `G ↦` the closed Gauss integral
//! and `L ↦ p`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::charfun::{psi, Cell, Region, StepFunction};
use crate::cyclotomic::CycloNum;
use crate::error::{Error, Result};
use crate::integrate::{gauss_closed, BruteOptions};
use crate::localfield::{rational_to_local, FieldConfig, FieldKind, LocalNum};
use crate::poly::RatPoly;
use crate::stationary::{stationary_phase, verify_certificate};

/// Laurent polynomials in `L` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LPoly(BTreeMap<i64, BigInt>);

impl LPoly {
    pub fn zero() -> Self {
        LPoly(BTreeMap::new())
    }

    /// `c · L^k`.
    pub fn monomial(c: impl Into<BigInt>, k: i64) -> Self {
        let mut out = Self::zero();
        out.add_term(k, c.into());
        out
    }

    pub fn l_pow(k: i64) -> Self {
        Self::monomial(1, k)
    }

    fn add_term(&mut self, k: i64, c: BigInt) {
        let slot = self.0.entry(k).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&k);
        }
    }

    pub fn coeff(&self, k: i64) -> BigInt {
        self.0.get(&k).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.0 {
            out.add_term(*k, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (i, a) in &self.0 {
            for (j, b) in &other.0 {
                out.add_term(i + j, a * b);
            }
        }
        out
    }

    /// Value at `L = q`.
    pub fn eval(&self, q: u32) -> BigRational {
        let q = BigRational::from_integer(q.into());
        self.0
            .iter()
            .map(|(k, c)| BigRational::from_integer(c.clone()) * num_traits::pow::Pow::pow(&q, *k as i32))
            .sum()
    }
}

impl fmt::Display for LPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (idx, (k, c)) in self.0.iter().rev().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if idx > 0 {
                write!(f, " {sign} ")?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let mag = c.abs();
            match (*k, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (k, true) => write!(f, "L^{k}")?,
                (k, false) => write!(f, "{mag}*L^{k}")?,
            }
        }
        Ok(())
    }
}

const TRIAL_LIMIT: u64 = 1 << 20;

/// Primes where a uniform formula may fail to specialize.
///
/// Small prime factors are found by trial division; an unfactored cofactor is
/// kept whole and tested by divisibility, so membership is always exact.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BadPrimes {
    primes: BTreeSet<u64>,
    cofactors: Vec<BigInt>,
}

impl BadPrimes {
    pub fn insert_prime(&mut self, p: u64) {
        self.primes.insert(p);
    }

    /// Adds every prime factor of `n` (nothing for `n = 0`, `±1`).
    pub fn insert_factors_of(&mut self, n: &BigInt) {
        let mut n = n.abs();
        if n.is_zero() {
            return;
        }
        let mut d = 2u64;
        while d < TRIAL_LIMIT && !n.is_one() {
            let bd = BigInt::from(d);
            if &bd * &bd > n {
                break;
            }
            if n.is_multiple_of(&bd) {
                self.primes.insert(d);
                while n.is_multiple_of(&bd) {
                    n /= &bd;
                }
            }
            d += if d == 2 { 1 } else { 2 };
        }
        if n.is_one() {
            return;
        }
        match n.to_u64() {
            Some(m) if (m as u128) < (TRIAL_LIMIT as u128).pow(2) => {
                self.primes.insert(m);
            }
            _ => {
                if !self.cofactors.contains(&n) {
                    self.cofactors.push(n);
                }
            }
        }
    }

    pub fn insert_rational(&mut self, q: &BigRational) {
        self.insert_factors_of(q.numer());
        self.insert_factors_of(q.denom());
    }

    pub fn contains(&self, p: u32) -> bool {
        let p = p as u64;
        self.primes.contains(&p) || self.cofactors.iter().any(|c| c.is_multiple_of(&BigInt::from(p)))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    pub fn cofactors(&self) -> &[BigInt] {
        &self.cofactors
    }
}

/// Prime-independent stationary-phase data at one rational critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct UniformFormula {
    pub n: usize,
    pub x0: Vec<BigRational>,
    pub f_at_x0: BigRational,
    pub a: Vec<BigRational>,
    pub alpha: u32,
    pub bad_primes: BadPrimes,
}

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn rational_det(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = BigRational::one();
    for i in 0..n {
        let Some(r) = (i..n).find(|&r| !a[r][i].is_zero()) else {
            return BigRational::zero();
        };
        if r != i {
            a.swap(r, i);
            det = -det;
        }
        det *= &a[i][i];
        for r in i + 1..n {
            let factor = &a[r][i] / &a[i][i];
            for c in i..n {
                let v = &factor * &a[i][c];
                a[r][c] -= v;
            }
        }
    }
    det
}

/// Completes the square over `Q` following the same pivoting rules as the
/// per-prime construction; every entry whose vanishing decides a branch is
/// recorded so that primes dividing it count as bad.
pub fn uniform_normal_form(f: &RatPoly, x0: &[BigRational]) -> Result<UniformFormula> {
    let n = f.nvars();
    if x0.len() != n {
        return Err(Error::Invalid(format!("critical point has {} coordinates, expected {n}", x0.len())));
    }
    if (0..n).any(|i| !f.derivative(i).eval(x0).is_zero()) {
        return Err(Error::NotCriticalOverQ);
    }
    let g = f.translate(x0);
    let mut s = vec![vec![BigRational::zero(); n]; n];
    for (e, c) in g.terms() {
        if e.iter().sum::<u32>() != 2 {
            continue;
        }
        let idx: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, e[i] as usize)).collect();
        let (j, k) = (idx[0], idx[1]);
        if j == k {
            s[j][j] = c.clone();
        } else {
            s[j][k] = c * half();
            s[k][j] = c * half();
        }
    }
    let det = rational_det(&s);
    if det.is_zero() {
        return Err(Error::DegenerateHessianOverQ);
    }

    let mut bad = BadPrimes::default();
    bad.insert_prime(2);
    bad.insert_rational(&det);
    for (_, c) in f.terms() {
        bad.insert_factors_of(c.denom());
    }
    for x in x0 {
        bad.insert_factors_of(x.denom());
    }

    let mut a = Vec::with_capacity(n);
    for i in 0..n {
        if s[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !s[j][j].is_zero()) {
                s.swap(i, j);
                for row in s.iter_mut() {
                    row.swap(i, j);
                }
            } else {
                let k = (i + 1..n).find(|&k| !s[i][k].is_zero()).ok_or(Error::DegenerateHessianOverQ)?;
                bad.insert_rational(&s[i][k]);
                // x_i ← x_i + x_k: the new (i, i) entry is 2 s_ik
                let sik = s[i][k].clone();
                let skk = s[k][k].clone();
                for c in 0..n {
                    if c != i {
                        let v = s[k][c].clone();
                        s[i][c] += v;
                        s[c][i] = s[i][c].clone();
                    }
                }
                s[i][i] = &sik + &sik + &skk;
            }
        }
        let pivot = s[i][i].clone();
        bad.insert_rational(&pivot);
        for j in i + 1..n {
            for k in i + 1..n {
                let v = &s[j][i] * &s[i][k] / &pivot;
                s[j][k] -= v;
            }
        }
        a.push(pivot);
    }
    Ok(UniformFormula { n, x0: x0.to_vec(), f_at_x0: f.eval(x0), a, alpha: 1, bad_primes: bad })
}

/// A uniform formula read in one local field.
#[derive(Clone, Debug, PartialEq)]
pub struct Specialized {
    pub field: FieldConfig,
    pub x0: Vec<LocalNum>,
    pub value: LocalNum,
    pub units: Vec<LocalNum>,
    pub alpha: u32,
}

impl Specialized {
    /// `Ψ(λ f(x0)) · φ(x0) · Π_i G(λ a_i, α)`.
    pub fn rhs(&self, lambda: &LocalNum, phi: &StepFunction) -> Result<CycloNum> {
        let phi_x0 = phi.eval(&self.x0)?;
        if phi_x0.is_zero() {
            return Ok(CycloNum::zero(self.field.p()));
        }
        let mut out = &psi(&lambda.mul(&self.value)?)? * &phi_x0;
        for a in &self.units {
            out = &out * &gauss_closed(&lambda.mul(a)?, self.alpha)?;
        }
        Ok(out)
    }
}

impl UniformFormula {
    pub fn is_bad(&self, p: u32) -> bool {
        self.bad_primes.contains(p)
    }

    pub fn specialize(&self, field: &FieldConfig) -> Result<Specialized> {
        if self.is_bad(field.p()) {
            return Err(Error::BadPrime(field.p()));
        }
        let loc = |q: &BigRational| rational_to_local(field, q);
        Ok(Specialized {
            field: field.clone(),
            x0: self.x0.iter().map(loc).collect::<Result<_>>()?,
            value: loc(&self.f_at_x0)?,
            units: self.a.iter().map(loc).collect::<Result<_>>()?,
            alpha: self.alpha,
        })
    }

    /// Volume of the polydisc around `x0` as an element of `Z[L, L^-1]`.
    pub fn ball_volume(&self) -> LPoly {
        LPoly::l_pow(-(self.n as i64) * self.alpha as i64)
    }

    /// The formula with its formal symbols.
    pub fn symbolic(&self) -> String {
        let gs: Vec<String> = self.a.iter().map(|a| format!("G(λ·{a}, {})", self.alpha)).collect();
        let x0: Vec<String> = self.x0.iter().map(|x| x.to_string()).collect();
        format!("E(λ·{})·φ({})·{}", self.f_at_x0, x0.join(", "), gs.join("·"))
    }

    pub fn to_json(&self) -> Value {
        let s = |v: &[BigRational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({
            "n": self.n,
            "x0": s(&self.x0),
            "f_at_x0": self.f_at_x0.to_string(),
            "a": s(&self.a),
            "alpha": self.alpha,
            "bad_primes": self.bad_primes.primes().collect::<Vec<_>>(),
            "bad_cofactors": self.bad_primes.cofactors().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "ball_volume": self.ball_volume().to_string(),
            "formula": self.symbolic(),
        })
    }
}

/// A weighted ball `w · 1_{c + (ϖ^d O)^n}` with rational centre.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiTerm {
    pub center: Vec<BigRational>,
    pub depth: i64,
    pub weight: BigRational,
}

/// A prime-independent description of `φ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiSpec {
    pub n: usize,
    pub terms: Vec<PhiTerm>,
}

impl PhiSpec {
    /// `1_{O^n}`.
    pub fn unit_polydisc(n: usize) -> Self {
        PhiSpec { n, terms: vec![PhiTerm { center: vec![BigRational::zero(); n], depth: 0, weight: BigRational::one() }] }
    }

    /// Reads the step-function JSON layout (`{"n", "cells": [{"center",
    /// "depth", "value"}]}`) with rational centres and values.
    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("phi: {m}"));
        let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing n"))? as usize;
        let cells = v.get("cells").and_then(Value::as_array).ok_or_else(|| bad("missing cells"))?;
        let rational = |s: &str| crate::expr::parse_rational(s).map_err(|_| bad(&format!("{s:?} is not rational")));
        let terms = cells
            .iter()
            .map(|c| {
                let depth = c.get("depth").and_then(Value::as_i64).ok_or_else(|| bad("missing depth"))?;
                let center = c
                    .get("center")
                    .and_then(Value::as_array)
                    .filter(|a| a.len() == n)
                    .ok_or_else(|| bad("center must have n entries"))?
                    .iter()
                    .map(|x| x.as_str().ok_or_else(|| bad("center entries are strings")).and_then(rational))
                    .collect::<Result<Vec<_>>>()?;
                let weight = match c.get("value") {
                    None => BigRational::one(),
                    Some(Value::String(s)) => rational(s)?,
                    Some(Value::Number(x)) => BigRational::from_integer(x.as_i64().ok_or_else(|| bad("value"))?.into()),
                    Some(_) => return Err(bad("values must be rational")),
                };
                Ok(PhiTerm { center, depth, weight })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhiSpec { n, terms })
    }

    /// Primes at which some centre is not integral.
    pub fn is_bad(&self, p: u32) -> bool {
        self.terms.iter().any(|t| t.center.iter().any(|c| c.denom().is_multiple_of(&BigInt::from(p))))
    }

    pub fn to_step(&self, field: &FieldConfig) -> Result<StepFunction> {
        let cells = self
            .terms
            .iter()
            .map(|t| {
                let c = t.center.iter().map(|x| rational_to_local(field, x)).collect::<Result<Vec<_>>>()?;
                Ok((Cell::new(&c, t.depth)?, CycloNum::from_rational(field.p(), t.weight.clone())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StepFunction::from_overlapping(field, self.n, cells))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimeStatus {
    Pass,
    Fail,
    BadPrime,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeEntry {
    pub p: u32,
    pub kind: &'static str,
    pub status: PrimeStatus,
    #[serde(rename = "N")]
    pub n: Option<i64>,
    /// Number of `λ` at which all three values were compared.
    pub witnesses: usize,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformReport {
    pub entries: Vec<PrimeEntry>,
}

impl UniformReport {
    /// No failures; bad primes are skipped, not failures.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| matches!(e.status, PrimeStatus::Pass | PrimeStatus::BadPrime))
    }
}

#[derive(Clone, Debug)]
pub struct UniformOptions {
    pub precision: u32,
    pub cutoff: u32,
    /// `λ` is swept over `ord λ ∈ {N, N-1, …, N-depth+1}` and all unit digits.
    pub depth: u32,
    pub kinds: Vec<FieldKind>,
    pub brute: BruteOptions,
}

impl Default for UniformOptions {
    fn default() -> Self {
        UniformOptions {
            precision: 24,
            cutoff: 12,
            depth: 4,
            kinds: vec![FieldKind::Padic, FieldKind::Laurent],
            brute: BruteOptions::default(),
        }
    }
}

fn distinct_mod_p(formulas: &[UniformFormula], p: u32) -> bool {
    let p = BigInt::from(p);
    formulas.iter().enumerate().all(|(i, a)| {
        formulas[i + 1..].iter().all(|b| {
            a.x0.iter().zip(&b.x0).any(|(x, y)| {
                let d = x - y;
                !d.is_zero() && !d.numer().is_multiple_of(&p)
            })
        })
    })
}

fn check_one(
    f: &RatPoly,
    formulas: &[UniformFormula],
    phi: &PhiSpec,
    field: &FieldConfig,
    opts: &UniformOptions,
) -> Result<PrimeEntry> {
    let p = field.p();
    let kind = field.kind().name();
    let fail = |n, witnesses, msg: String| PrimeEntry { p, kind, status: PrimeStatus::Fail, n, witnesses, detail: Some(msg) };
    let fs = f.to_series(field, opts.cutoff)?;
    let phi_p = phi.to_step(field)?;
    let omega = Region::whole(field, f.nvars());
    let cert = stationary_phase(&fs, &phi_p, &omega)?;
    let specs = formulas.iter().map(|u| u.specialize(field)).collect::<Result<Vec<_>>>()?;

    let k = field.precision() as i64 / 2;
    if cert.critical.len() != specs.len() {
        return Ok(fail(Some(cert.n), 0, format!("{} critical points, uniform data has {}", cert.critical.len(), specs.len())));
    }
    for s in &specs {
        let found = cert.critical.iter().find(|c| {
            c.morse.center.iter().zip(&s.x0).all(|(a, b)| a.congruent(b, k).unwrap_or(false))
        });
        let Some(c) = found else {
            return Ok(fail(Some(cert.n), 0, "specialized point is not a critical point".into()));
        };
        let units_agree = c.morse.units.iter().zip(&s.units).all(|(a, b)| a.congruent(b, k).unwrap_or(false));
        if !units_agree || cert.alpha != s.alpha {
            return Ok(fail(Some(cert.n), 0, "specialized Morse data differs".into()));
        }
    }

    let ords: Vec<i64> = (0..opts.depth as i64).map(|d| cert.n - d).collect();
    let report = verify_certificate(&cert, &fs, &phi_p, &omega, &ords, None, &opts.brute)?;
    for r in &report.records {
        let lambda = crate::stationary::lambda_from(field, r.ord, r.unit);
        let uniform = specs.iter().try_fold(CycloNum::zero(p), |acc, s| Ok::<_, Error>(&acc + &s.rhs(&lambda, &phi_p)?))?;
        if !r.equal || uniform != r.rhs {
            return Ok(fail(Some(cert.n), report.records.len(), format!("mismatch at ord λ = {}, unit {}", r.ord, r.unit)));
        }
    }
    Ok(PrimeEntry { p, kind, status: PrimeStatus::Pass, n: Some(cert.n), witnesses: report.records.len(), detail: None })
}

/// Checks the uniform formulas against the per-prime certificate and the
/// enumerated integral at each prime and field kind.
///
/// `formulas` must cover every critical point of `f` in `O^n`; a prime at
/// which the local computation finds others is reported as a failure.
pub fn check_uniform(
    f: &RatPoly,
    formulas: &[UniformFormula],
    phi: &PhiSpec,
    primes: &[u32],
    opts: &UniformOptions,
) -> UniformReport {
    let jobs: Vec<(u32, FieldKind)> = primes.iter().flat_map(|&p| opts.kinds.iter().map(move |&k| (p, k))).collect();
    let run = |&(p, kind): &(u32, FieldKind)| -> PrimeEntry {
        let entry = |status, detail: Option<String>| PrimeEntry { p, kind: kind.name(), status, n: None, witnesses: 0, detail };
        let bad = p == 2 || formulas.iter().any(|u| u.is_bad(p)) || phi.is_bad(p) || !distinct_mod_p(formulas, p);
        if bad {
            return entry(PrimeStatus::BadPrime, None);
        }
        let field = match FieldConfig::new(kind, p, opts.precision) {
            Ok(field) => field,
            Err(e) => return entry(PrimeStatus::Error, Some(e.to_string())),
        };
        check_one(f, formulas, phi, &field, opts).unwrap_or_else(|e| entry(PrimeStatus::Error, Some(e.to_string())))
    };
    #[cfg(feature = "parallel")]
    let entries = {
        use rayon::prelude::*;
        jobs.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let entries = jobs.iter().map(run).collect();
    UniformReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_phase;
    use crate::integrate::gauss_shift_invariance;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn phi_spec_from_json() {
        let v = json!({"n": 1, "cells": [{"center": ["1"], "depth": 1}, {"center": ["-1/5"], "depth": 2, "value": "3/2"}]});
        let spec = PhiSpec::from_json(&v).unwrap();
        assert_eq!(spec.terms[1].weight, q(3, 2));
        assert!(spec.is_bad(5) && !spec.is_bad(7));
        let field = FieldConfig::padic(7, 10).unwrap();
        let phi = spec.to_step(&field).unwrap();
        assert_eq!(phi.eval(&[LocalNum::from_int(&field, 8)]).unwrap(), CycloNum::one(7));
    }

    #[test]
    fn lpoly_arithmetic() {
        let a = LPoly::l_pow(1).add(&LPoly::monomial(-1, 0));
        let b = LPoly::l_pow(-1);
        let ab = a.mul(&b);
        assert_eq!(ab.to_string(), "1 - L^-1");
        assert_eq!(ab.eval(5), q(4, 5));
        assert_eq!(a.mul(&LPoly::zero()), LPoly::zero());
    }

    #[test]
    fn bad_prime_sets() {
        let mut b = BadPrimes::default();
        b.insert_rational(&q(-45, 14));
        assert_eq!(b.primes().collect::<Vec<_>>(), vec![2, 3, 5, 7]);
        // a product of two primes above the trial-division range stays whole
        let big = BigInt::from(1_000_003u64) * BigInt::from(1_000_033u64) * BigInt::from(1_000_037u64);
        let mut c = BadPrimes::default();
        c.insert_factors_of(&big);
        assert!(c.contains(1_000_033) && !c.contains(1_000_039));
    }

    #[test]
    fn normal_form_examples() {
        let u = uniform_normal_form(&parse_phase("x1^2", None).unwrap(), &[q(0, 1)]).unwrap();
        assert_eq!(u.a, vec![q(1, 1)]);
        assert_eq!(u.bad_primes.primes().collect::<Vec<_>>(), vec![2]);

        let u = uniform_normal_form(&parse_phase("x1^2 + x1*x2 + x2^2", None).unwrap(), &[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(u.a, vec![q(1, 1), q(3, 4)]);
        assert_eq!(u.bad_primes.primes().collect::<Vec<_>>(), vec![2, 3]);

        let u = uniform_normal_form(&parse_phase("x1^3 - 3*x1", None).unwrap(), &[q(1, 1)]).unwrap();
        assert_eq!(u.a, vec![q(3, 1)]);
        assert_eq!(u.f_at_x0, q(-2, 1));
        assert_eq!(u.bad_primes.primes().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(u.ball_volume().eval(7), q(1, 7));
    }

    #[test]
    fn normal_form_errors() {
        let f = parse_phase("x1^2 + x1", None).unwrap();
        assert_eq!(uniform_normal_form(&f, &[q(0, 1)]), Err(Error::NotCriticalOverQ));
        let g = parse_phase("x1^3", None).unwrap();
        assert_eq!(uniform_normal_form(&g, &[q(0, 1)]), Err(Error::DegenerateHessianOverQ));
        let u = uniform_normal_form(&parse_phase("x1^2", None).unwrap(), &[q(0, 1)]).unwrap();
        let field = FieldConfig::padic(2, 8);
        assert!(field.is_err() || u.specialize(&field.unwrap()).is_err());
    }

    #[test]
    fn hyperbolic_form_matches_local_pivoting() {
        let f = parse_phase("x1*x2", None).unwrap();
        let u = uniform_normal_form(&f, &[q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(u.a, vec![q(1, 1), q(-1, 4)]);
        let field = FieldConfig::padic(5, 16).unwrap();
        let fs = f.to_series(&field, 6).unwrap();
        let zero = LocalNum::zero(&field);
        let md = crate::morse::morse_normal_form(&fs, &[zero.clone(), zero], 1).unwrap();
        let s = u.specialize(&field).unwrap();
        for (a, b) in md.units.iter().zip(&s.units) {
            assert!(a.congruent(b, 12).unwrap());
        }
    }

    #[test]
    fn gauss_shift_specializes() {
        for p in [3, 5, 7] {
            let field = FieldConfig::padic(p, 16).unwrap();
            // ord a = -3, ord b = -1 meets both hypotheses at α = 1
            let a = rational_to_local(&field, &q(2, 1)).unwrap().shift(-3);
            let b = LocalNum::uniformizer_pow(&field, -1);
            assert!(crate::integrate::gauss_shift_hypotheses(&a, &b, 1));
            assert!(gauss_shift_invariance(&a, &b, 1).unwrap());
        }
    }

    #[test]
    fn square_is_uniform() {
        let f = parse_phase("x1^2", None).unwrap();
        let u = uniform_normal_form(&f, &[q(0, 1)]).unwrap();
        let opts = UniformOptions { depth: 3, ..Default::default() };
        let report = check_uniform(&f, &[u], &PhiSpec::unit_polydisc(1), &[3, 5, 7, 2], &opts);
        assert!(report.passed(), "{report:?}");
        let bad = report.entries.iter().filter(|e| e.status == PrimeStatus::BadPrime).count();
        assert_eq!(bad, 2);
        assert_eq!(report.entries.len(), 8);
    }

    #[test]
    fn uncovered_critical_point_fails() {
        // x^2 + x^3 also has the critical point -2/3
        let f = parse_phase("x1^2 + x1^3", None).unwrap();
        let u = uniform_normal_form(&f, &[q(0, 1)]).unwrap();
        let opts = UniformOptions { depth: 1, kinds: vec![FieldKind::Padic], ..Default::default() };
        let report = check_uniform(&f, std::slice::from_ref(&u), &PhiSpec::unit_polydisc(1), &[5], &opts);
        assert_eq!(report.entries[0].status, PrimeStatus::Fail);
        let v = uniform_normal_form(&f, &[q(-2, 3)]).unwrap();
        let report = check_uniform(&f, &[u, v], &PhiSpec::unit_polydisc(1), &[3, 5], &opts);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.entries[0].status, PrimeStatus::BadPrime);
    }
}
