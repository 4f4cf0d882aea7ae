//! Multivariate power series over the valuation ring, truncated at a total
//! degree cutoff `D`.
//!
//! Monomials are kept in graded-lexicographic order (`1 < x1 < x2 < x1^2 <
//! x1*x2 < ...` with `x1` ranked first inside a degree). Only exact zeros are
//! dropped from the coefficient map, so a coefficient that cancelled to
//! working precision keeps track of how well it is known.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::localfield::{FieldConfig, LocalNum};

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(n: usize) -> Self {
        Mono(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `n` variables of total degree `d`, in graded-lex order.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Mono> {
    fn rec(n: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if i == n - 1 {
            cur[i] = left;
            out.push(Mono(cur.clone()));
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e;
            rec(n, i + 1, left - e, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(n, 0, d, &mut vec![0; n], &mut out);
    out
}

/// Truncated power series in `n` variables with coefficients in `O`.
#[derive(Clone, PartialEq)]
pub struct MultiSeries {
    field: FieldConfig,
    nvars: usize,
    cutoff: u32,
    coeffs: BTreeMap<Mono, LocalNum>,
}

impl fmt::Debug for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl MultiSeries {
    pub fn zero(field: &FieldConfig, nvars: usize, cutoff: u32) -> Self {
        assert!(nvars >= 1, "series need at least one variable");
        MultiSeries { field: field.clone(), nvars, cutoff, coeffs: BTreeMap::new() }
    }

    pub fn constant(field: &FieldConfig, nvars: usize, cutoff: u32, c: LocalNum) -> Result<Self> {
        Self::from_terms(field, nvars, cutoff, vec![(Mono::one(nvars), c)])
    }

    pub fn one(field: &FieldConfig, nvars: usize, cutoff: u32) -> Self {
        Self::constant(field, nvars, cutoff, LocalNum::one(field)).unwrap()
    }

    pub fn var(field: &FieldConfig, nvars: usize, cutoff: u32, i: usize) -> Self {
        Self::from_terms(field, nvars, cutoff, vec![(Mono::var(nvars, i), LocalNum::one(field))])
            .unwrap()
    }

    /// Builds a series from `(exponents, coefficient)` pairs; repeated
    /// monomials add, monomials beyond the cutoff are dropped.
    pub fn from_terms(
        field: &FieldConfig,
        nvars: usize,
        cutoff: u32,
        terms: impl IntoIterator<Item = (Mono, LocalNum)>,
    ) -> Result<Self> {
        let mut s = Self::zero(field, nvars, cutoff);
        for (m, c) in terms {
            if m.0.len() != nvars {
                return Err(Error::CutoffMismatch(format!("monomial {:?} in {nvars} variables", m.0)));
            }
            if c.field() != field {
                return Err(Error::ConfigMismatch);
            }
            if c.ord_lower() < 0 {
                return Err(Error::NotIntegral(c.to_string()));
            }
            if m.degree() <= cutoff {
                s.accumulate(m, c);
            }
        }
        Ok(s)
    }

    fn accumulate(&mut self, m: Mono, c: LocalNum) {
        if c.is_exact_zero() {
            return;
        }
        match self.coeffs.get_mut(&m) {
            Some(v) => {
                *v = v.add_unchecked(&c);
                if v.is_exact_zero() {
                    self.coeffs.remove(&m);
                }
            }
            None => {
                self.coeffs.insert(m, c);
            }
        }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &LocalNum)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, m: &Mono) -> LocalNum {
        self.coeffs.get(m).cloned().unwrap_or_else(|| LocalNum::zero(&self.field))
    }

    pub fn constant_term(&self) -> LocalNum {
        self.coeff(&Mono::one(self.nvars))
    }

    /// True when every coefficient is zero (exactly or to precision).
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.is_zero())
    }

    /// Largest degree carrying a coefficient that is not known to vanish.
    pub fn degree(&self) -> Option<u32> {
        self.coeffs.iter().filter(|(_, c)| !c.is_zero()).map(|(m, _)| m.degree()).max()
    }

    /// Smallest coefficient valuation among monomials of degree `≥ d`
    /// (`None` when all of them vanish).
    pub fn min_ord_from_degree(&self, d: u32) -> Option<i64> {
        self.coeffs.iter().filter(|(m, _)| m.degree() >= d).filter_map(|(_, c)| c.ord()).min()
    }

    /// Part of degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Self {
        let mut s = Self::zero(&self.field, self.nvars, self.cutoff);
        for (m, c) in &self.coeffs {
            if m.degree() == d {
                s.coeffs.insert(m.clone(), c.clone());
            }
        }
        s
    }

    /// Same coefficients with another cutoff.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let mut s = Self::zero(&self.field, self.nvars, cutoff);
        for (m, c) in &self.coeffs {
            if m.degree() <= cutoff {
                s.coeffs.insert(m.clone(), c.clone());
            }
        }
        s
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ConfigMismatch);
        }
        if self.nvars != other.nvars || self.cutoff != other.cutoff {
            return Err(Error::CutoffMismatch(format!(
                "({} vars, D={}) vs ({} vars, D={})",
                self.nvars, self.cutoff, other.nvars, other.cutoff
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut s = self.clone();
        for (m, c) in &other.coeffs {
            s.accumulate(m.clone(), c.clone());
        }
        Ok(s)
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        for c in s.coeffs.values_mut() {
            *c = c.neg();
        }
        s
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &LocalNum) -> Result<Self> {
        if c.field() != &self.field {
            return Err(Error::ConfigMismatch);
        }
        if c.ord_lower() < 0 {
            return Err(Error::NotIntegral(c.to_string()));
        }
        let mut s = Self::zero(&self.field, self.nvars, self.cutoff);
        for (m, a) in &self.coeffs {
            s.accumulate(m.clone(), a.mul_unchecked(c));
        }
        Ok(s)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut s = Self::zero(&self.field, self.nvars, self.cutoff);
        let rhs: Vec<(&Mono, &LocalNum, u32)> =
            other.coeffs.iter().map(|(m, c)| (m, c, m.degree())).collect();
        for (ma, ca) in &self.coeffs {
            let da = ma.degree();
            for (mb, cb, db) in &rhs {
                if da + db > self.cutoff {
                    break;
                }
                s.accumulate(ma.mul(mb), ca.mul_unchecked(cb));
            }
        }
        Ok(s)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.field, self.nvars, self.cutoff);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Formal partial derivative `∂/∂x_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut s = Self::zero(&self.field, self.nvars, self.cutoff);
        for (m, c) in &self.coeffs {
            let k = m.0[i];
            if k == 0 {
                continue;
            }
            let mut e = m.0.clone();
            e[i] -= 1;
            s.accumulate(Mono(e), c.mul_unchecked(&LocalNum::from_int(&self.field, k as i64)));
        }
        s
    }

    pub fn gradient(&self) -> SeriesMap {
        SeriesMap { components: (0..self.nvars).map(|i| self.derivative(i)).collect() }
    }

    pub fn hessian(&self) -> Vec<Vec<MultiSeries>> {
        let g = self.gradient();
        g.components.iter().map(|d| (0..self.nvars).map(|j| d.derivative(j)).collect()).collect()
    }

    /// Constant terms of the Hessian, i.e. the Hessian at the origin.
    pub fn hessian_at_zero(&self) -> Matrix {
        self.hessian()
            .iter()
            .map(|row| row.iter().map(|h| h.constant_term()).collect())
            .collect()
    }

    /// Substitution `s(m_1, ..., m_n)` with no check on constant terms;
    /// exact only when `s` is a polynomial of degree at most the cutoff.
    fn substitute(&self, m: &SeriesMap) -> Result<Self> {
        let first = m.components.first().ok_or(Error::CutoffMismatch("empty map".into()))?;
        if m.components.len() != self.nvars {
            return Err(Error::CutoffMismatch(format!(
                "substituting {} series into {} variables",
                m.components.len(),
                self.nvars
            )));
        }
        let (field, nv, cut) = (&first.field, first.nvars, first.cutoff);
        for c in &m.components {
            first.compatible(c)?;
        }
        if field != &self.field {
            return Err(Error::ConfigMismatch);
        }
        // products of powers are built incrementally along graded-lex order
        let mut cache: BTreeMap<Mono, MultiSeries> = BTreeMap::new();
        cache.insert(Mono::one(self.nvars), MultiSeries::one(field, nv, cut));
        let mut out = MultiSeries::zero(field, nv, cut);
        for (mono, c) in &self.coeffs {
            let val = power_product(mono, &m.components, &mut cache)?;
            out = out.add(&val.scale(c)?)?;
        }
        Ok(out)
    }

    /// Truncated composition `s ∘ m`. Every component of `m` must have zero
    /// constant term.
    pub fn compose(&self, m: &SeriesMap) -> Result<Self> {
        if m.components.iter().any(|c| !c.constant_term().is_zero()) {
            return Err(Error::NonzeroConstantTerm);
        }
        self.substitute(m)
    }

    /// `x ↦ s(c + x)` for a polynomial `s` (degree at most the cutoff) and an
    /// integral point `c`.
    pub fn translate(&self, c: &[LocalNum]) -> Result<Self> {
        if c.len() != self.nvars {
            return Err(Error::CutoffMismatch("translation vector length".into()));
        }
        let comps = (0..self.nvars)
            .map(|i| {
                MultiSeries::var(&self.field, self.nvars, self.cutoff, i).add(&MultiSeries::constant(
                    &self.field,
                    self.nvars,
                    self.cutoff,
                    c[i].clone(),
                )?)
            })
            .collect::<Result<Vec<_>>>()?;
        self.substitute(&SeriesMap { components: comps })
    }

    /// Square root of a series with constant term `1`, via the fixed point
    /// `u = (s - 1 - u²)/2`, `r = 1 + u`.
    pub fn sqrt_series(&self) -> Result<Self> {
        let one = MultiSeries::one(&self.field, self.nvars, self.cutoff);
        let c0 = self.constant_term();
        if c0.is_zero() || !c0.congruent(&LocalNum::one(&self.field), c0.abs_prec().unwrap_or(1))? {
            return Err(Error::BadConstantTerm);
        }
        let rest = self.sub(&one)?;
        let half = LocalNum::from_int(&self.field, 2).inv()?;
        let mut u = MultiSeries::zero(&self.field, self.nvars, self.cutoff);
        for _ in 0..self.cutoff {
            u = rest.sub(&u.mul(&u)?)?.scale(&half)?;
        }
        one.add(&u)
    }

    /// Evaluates at a point of `(ϖO)^n`. Returns the value together with the
    /// certified error floor: the untracked tail has valuation at least
    /// `(D + 1) · min ord x_i`, so the value is reported to that precision.
    pub fn eval(&self, point: &[LocalNum]) -> Result<(LocalNum, i64)> {
        if point.len() != self.nvars {
            return Err(Error::CutoffMismatch("evaluation point length".into()));
        }
        if point.iter().any(|x| x.ord_lower() < 1) {
            return Err(Error::ConvergenceDomain);
        }
        let min_ord = point.iter().map(|x| x.ord_lower()).min().unwrap();
        let floor = (self.cutoff as i64 + 1).saturating_mul(min_ord);
        let v = self.eval_polynomial(point)?;
        Ok((v.with_abs_prec(floor), floor))
    }

    /// Evaluates the stored terms exactly (the series read as a polynomial).
    pub fn eval_polynomial(&self, point: &[LocalNum]) -> Result<LocalNum> {
        if point.len() != self.nvars {
            return Err(Error::CutoffMismatch("evaluation point length".into()));
        }
        for x in point {
            if x.field() != &self.field {
                return Err(Error::ConfigMismatch);
            }
        }
        let max_e = self.coeffs.keys().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0);
        let powers: Vec<Vec<LocalNum>> = point
            .iter()
            .map(|x| {
                let mut v = vec![LocalNum::one(&self.field)];
                for k in 1..=max_e as usize {
                    let next = v[k - 1].mul_unchecked(x);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = LocalNum::zero(&self.field);
        for (m, c) in &self.coeffs {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    t = t.mul_unchecked(&powers[i][e as usize]);
                }
            }
            acc = acc.add_unchecked(&t);
        }
        Ok(acc)
    }
}

fn power_product(
    mono: &Mono,
    comps: &[MultiSeries],
    cache: &mut BTreeMap<Mono, MultiSeries>,
) -> Result<MultiSeries> {
    if let Some(v) = cache.get(mono) {
        return Ok(v.clone());
    }
    let i = mono.0.iter().rposition(|&e| e > 0).expect("nonconstant monomial");
    let mut lower = mono.clone();
    lower.0[i] -= 1;
    let v = power_product(&lower, comps, cache)?.mul(&comps[i])?;
    cache.insert(mono.clone(), v.clone());
    Ok(v)
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "[{c}]")?;
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, " * x{}", i + 1)?,
                    _ => write!(f, " * x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

/// An analytic map `O^n → O^n` given by `n` truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMap {
    pub components: Vec<MultiSeries>,
}

impl SeriesMap {
    pub fn identity(field: &FieldConfig, n: usize, cutoff: u32) -> Self {
        SeriesMap { components: (0..n).map(|i| MultiSeries::var(field, n, cutoff, i)).collect() }
    }

    /// Linear map `x ↦ A x`.
    pub fn linear(field: &FieldConfig, a: &Matrix, cutoff: u32) -> Result<Self> {
        let n = a.len();
        let components = a
            .iter()
            .map(|row| {
                MultiSeries::from_terms(
                    field,
                    n,
                    cutoff,
                    row.iter().enumerate().map(|(j, c)| (Mono::var(n, j), c.clone())),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMap { components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn field(&self) -> &FieldConfig {
        self.components[0].field()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SeriesMap) -> Result<Self> {
        Ok(SeriesMap {
            components: self.components.iter().map(|c| c.compose(inner)).collect::<Result<_>>()?,
        })
    }

    pub fn jacobian(&self) -> Vec<Vec<MultiSeries>> {
        self.components
            .iter()
            .map(|c| (0..c.nvars()).map(|j| c.derivative(j)).collect())
            .collect()
    }

    /// Jacobian matrix at the origin.
    pub fn jacobian_at_zero(&self) -> Matrix {
        self.jacobian()
            .iter()
            .map(|row| row.iter().map(|d| d.constant_term()).collect())
            .collect()
    }

    /// Inverse map `h` with `g ∘ h = h ∘ g = id` to the cutoff. Requires
    /// `g(0) = 0` and a unit Jacobian determinant at the origin.
    ///
    /// Writing `g = J x + q(x)`, the inverse solves `h = J⁻¹ (y - q(h))`;
    /// each pass of the fixed point fixes one more degree.
    pub fn invert(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::CutoffMismatch("empty map".into()));
        }
        let field = self.field().clone();
        let n = self.len();
        let cutoff = self.components[0].cutoff();
        if self.components.iter().any(|c| !c.constant_term().is_zero()) {
            return Err(Error::NonzeroConstantTerm);
        }
        let j = self.jacobian_at_zero();
        let d = linalg::det(&j, &field)?;
        if d.ord() != Some(0) {
            return Err(Error::SingularJacobian);
        }
        let j_inv = linalg::inverse(&j, &field)?;
        let lin = SeriesMap::linear(&field, &j_inv, cutoff)?;
        let higher = SeriesMap {
            components: self
                .components
                .iter()
                .map(|c| {
                    let mut s = c.clone();
                    s.coeffs.retain(|m, _| m.degree() >= 2);
                    s
                })
                .collect(),
        };
        let id = SeriesMap::identity(&field, n, cutoff);
        let mut h = lin.clone();
        for _ in 1..cutoff {
            let q = higher.compose(&h)?;
            let rhs = SeriesMap {
                components: id
                    .components
                    .iter()
                    .zip(&q.components)
                    .map(|(a, b)| a.sub(b))
                    .collect::<Result<_>>()?,
            };
            h = lin.compose(&rhs)?;
        }
        Ok(h)
    }

    /// `x ↦ ϖ^{-β} g(ϖ^β x)`: the coefficient of a monomial of degree `k`
    /// is multiplied by `ϖ^{β(k-1)}`; the result must stay integral.
    pub fn rescale(&self, beta: i64) -> Result<Self> {
        if beta < 0 {
            return Err(Error::Invalid("rescaling exponent must be nonnegative".into()));
        }
        let components = self
            .components
            .iter()
            .map(|c| {
                let mut s = MultiSeries::zero(c.field(), c.nvars(), c.cutoff());
                for (m, a) in c.terms() {
                    let v = a.shift(beta * (m.degree() as i64 - 1));
                    if v.ord_lower() < 0 {
                        return Err(Error::NonIntegralRescale);
                    }
                    s.accumulate(m.clone(), v);
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        Ok(SeriesMap { components })
    }

    pub fn eval(&self, point: &[LocalNum]) -> Result<Vec<(LocalNum, i64)>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }
}
