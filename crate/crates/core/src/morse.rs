//! Critical points and Morse normal forms.
//!
//! Near a critical point `c` that is nondegenerate modulo `ϖ`, a phase is
//! written as `f(c + x) = f(c) + Σ a_i T_i(x)²` with units `a_i` and an
//! analytic change of coordinates `T` with `T(0) = 0` and unit Jacobian.
//! `T` is built by completing squares one coordinate at a time on the
//! symmetric matrix `H(x)` with `f(c + x) - f(c) = Σ x_j x_k H_jk(x)`.

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use crate::charfun::{parse_point, Region};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::localfield::{FieldConfig, LocalNum};
use crate::series::{Mono, MultiSeries, SeriesMap};

/// Normal-form data around one critical point.
#[derive(Clone, Debug, PartialEq)]
pub struct MorseData {
    pub center: Vec<LocalNum>,
    pub value: LocalNum,
    /// The units `a_i` (stage pivots of the square completion).
    pub units: Vec<LocalNum>,
    /// `T`, in coordinates centred at `center`.
    pub t: SeriesMap,
    pub alpha: u32,
    /// Valuation up to which the pointwise identity is certified on the
    /// polydisc `center + (ϖ^α O)^n`.
    pub residual_floor: i64,
}

fn gradient_at(f: &MultiSeries, x: &[LocalNum]) -> Result<Vec<LocalNum>> {
    (0..f.nvars()).map(|i| f.derivative(i).eval_polynomial(x)).collect()
}

fn hessian_at(f: &MultiSeries, x: &[LocalNum]) -> Result<Matrix> {
    f.hessian().iter().map(|row| row.iter().map(|h| h.eval_polynomial(x)).collect()).collect()
}

fn is_unit(x: &LocalNum) -> bool {
    x.ord() == Some(0)
}

/// Newton iteration `x ← x - Hess(x)⁻¹ grad(x)` from a residue class with
/// nondegenerate Hessian.
fn newton_lift(f: &MultiSeries, start: Vec<LocalNum>) -> Result<Vec<LocalNum>> {
    let field = f.field();
    let mut x = start;
    let rounds = 2 + (64 - (field.precision() as u64).leading_zeros());
    for _ in 0..rounds + 2 {
        let g = gradient_at(f, &x)?;
        if g.iter().all(|v| v.is_zero()) {
            break;
        }
        let h_inv = linalg::inverse(&hessian_at(f, &x)?, field)?;
        let step = linalg::mat_vec(&h_inv, &g, field);
        x = x.iter().zip(&step).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
    }
    // the iterate keeps the working precision
    Ok(x.into_iter().map(|v| v.truncate(field.precision() as i64).unwrap_or(v)).collect())
}

/// All critical points of `f` in `Ω`, found by scanning residue classes
/// modulo `ϖ` and Newton lifting. The stored terms of `f` are read as a
/// polynomial.
pub fn find_critical_points(f: &MultiSeries, omega: &Region) -> Result<Vec<Vec<LocalNum>>> {
    if f.field() != omega.field() {
        return Err(Error::ConfigMismatch);
    }
    let field = f.field();
    let p = field.p();
    let n = f.nvars();
    // residue classes mod ϖ meeting Ω
    let mut classes: BTreeSet<Vec<u32>> = BTreeSet::new();
    for cell in omega.cells() {
        if cell.depth() >= 1 {
            classes.insert((0..n).map(|i| cell.digit(i, 0)).collect());
        } else {
            for idx in 0..(p as u64).pow(n as u32) {
                classes.insert((0..n).map(|i| ((idx / (p as u64).pow(i as u32)) % p as u64) as u32).collect());
            }
        }
    }
    let mut out: Vec<Vec<LocalNum>> = Vec::new();
    for class in classes {
        let start: Vec<LocalNum> = class.iter().map(|&d| LocalNum::from_int(field, d as i64)).collect();
        let g = gradient_at(f, &start)?;
        if g.iter().any(|v| v.ord_lower() < 1) {
            continue;
        }
        let det = linalg::det(&hessian_at(f, &start)?, field)?;
        if !is_unit(&det) {
            return Err(Error::DegenerateCriticalClass(format!("{class:?}")));
        }
        let root = newton_lift(f, start)?;
        if omega.contains(&root)? && !out.contains(&root) {
            out.push(root);
        }
    }
    Ok(out)
}

/// Symmetric `H` with `g = Σ_{j,k} x_j x_k H_jk` for a series without
/// terms of degree below 2. A monomial is charged to its first two
/// variable slots.
fn quadratic_matrix(g: &MultiSeries) -> Result<Vec<Vec<MultiSeries>>> {
    let field = g.field();
    let n = g.nvars();
    let d = g.cutoff();
    let half = LocalNum::from_int(field, 2).inv()?;
    let mut h = vec![vec![MultiSeries::zero(field, n, d); n]; n];
    for (m, c) in g.terms() {
        let mut rest = m.0.clone();
        let j = rest.iter().position(|&e| e > 0).expect("degree ≥ 2");
        rest[j] -= 1;
        let k = rest.iter().position(|&e| e > 0).expect("degree ≥ 2");
        rest[k] -= 1;
        let mono = |c: LocalNum| MultiSeries::from_terms(field, n, d, [(Mono(rest.clone()), c)]);
        if j == k {
            h[j][j] = h[j][j].add(&mono(c.clone())?)?;
        } else {
            let c2 = c.mul(&half)?;
            h[j][k] = h[j][k].add(&mono(c2.clone())?)?;
            h[k][j] = h[k][j].add(&mono(c2)?)?;
        }
    }
    Ok(h)
}

/// `1/s` for a series with unit constant term.
fn recip(s: &MultiSeries) -> Result<MultiSeries> {
    let field = s.field();
    let c0 = s.constant_term();
    let c0_inv = c0.inv()?;
    let u = s.scale(&c0_inv)?;
    let one = MultiSeries::one(field, s.nvars(), s.cutoff());
    let v = u.sub(&one)?;
    let mut r = one.clone();
    for _ in 0..s.cutoff() {
        r = one.sub(&v.mul(&r)?)?;
    }
    r.scale(&c0_inv)
}

/// Quadratic form `M^T H(M z) M` after the linear substitution `x = M z`.
fn substitute_linear(h: &[Vec<MultiSeries>], m: &Matrix, field: &FieldConfig) -> Result<Vec<Vec<MultiSeries>>> {
    let n = h.len();
    let d = h[0][0].cutoff();
    let lin = SeriesMap::linear(field, m, d)?;
    let hc: Vec<Vec<MultiSeries>> =
        h.iter().map(|row| row.iter().map(|e| e.compose(&lin)).collect()).collect::<Result<_>>()?;
    let mut out = vec![vec![MultiSeries::zero(field, n, d); n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = MultiSeries::zero(field, n, d);
            for j in 0..n {
                for k in 0..n {
                    let w = m[j][a].mul(&m[k][b])?;
                    if !w.is_zero() {
                        acc = acc.add(&hc[j][k].scale(&w)?)?;
                    }
                }
            }
            out[a][b] = acc;
        }
    }
    Ok(out)
}

/// Linear substitution bringing a unit onto the diagonal at position `i`:
/// a swap with a later unit diagonal entry, or `x_i ← x_i + x_k` for a unit
/// off-diagonal entry (then the new diagonal entry is `≡ 2 h_ik`).
fn pivot(h0: &Matrix, i: usize, field: &FieldConfig) -> Result<Option<Matrix>> {
    let n = h0.len();
    if is_unit(&h0[i][i]) {
        return Ok(None);
    }
    let mut m = linalg::identity(field, n);
    if let Some(j) = (i + 1..n).find(|&j| is_unit(&h0[j][j])) {
        m.swap(i, j);
        return Ok(Some(m));
    }
    let k = (i + 1..n).find(|&k| is_unit(&h0[i][k])).ok_or(Error::DegenerateHessian)?;
    m[k][i] = LocalNum::one(field);
    Ok(Some(m))
}

/// Morse normal form of `f` at the critical point `x0`.
pub fn morse_normal_form(f: &MultiSeries, x0: &[LocalNum], alpha: u32) -> Result<MorseData> {
    if alpha == 0 {
        return Err(Error::Invalid("the polydisc radius α must be at least 1".into()));
    }
    let field = f.field().clone();
    let n = f.nvars();
    let d = f.cutoff();
    let value = f.eval_polynomial(x0)?;
    let shifted = f.translate(x0)?;
    for (m, c) in shifted.terms() {
        if m.degree() == 1 && !c.is_zero() {
            return Err(Error::NotCritical(format!("∂f has coefficient {c} at {m:?}")));
        }
    }
    let g = MultiSeries::from_terms(
        &field,
        n,
        d,
        shifted.terms().filter(|(m, _)| m.degree() >= 2).map(|(m, c)| (m.clone(), c.clone())),
    )?;
    if !is_unit(&linalg::det(&g.hessian_at_zero(), &field)?) {
        return Err(Error::DegenerateHessian);
    }

    let mut h = quadratic_matrix(&g)?;
    let mut t = SeriesMap::identity(&field, n, d);
    let mut units = Vec::with_capacity(n);
    for i in 0..n {
        let h0: Matrix = h.iter().map(|row| row.iter().map(|e| e.constant_term()).collect()).collect();
        if let Some(m) = pivot(&h0, i, &field)? {
            // x = M z, so the new coordinates are M⁻¹ applied to the old ones
            h = substitute_linear(&h, &m, &field)?;
            let m_inv = linalg::inverse(&m, &field)?;
            t = SeriesMap::linear(&field, &m_inv, d)?.compose(&t)?;
        }
        let hii = h[i][i].clone();
        let a = hii.constant_term();
        if !is_unit(&a) {
            return Err(Error::DegenerateHessian);
        }
        let hii_inv = recip(&hii)?;
        let root = hii.scale(&a.inv()?)?.sqrt_series()?;
        // w_i = sqrt(h_ii/a) · (z_i + Σ_{j>i} z_j h_ij / h_ii)
        let mut lin = MultiSeries::var(&field, n, d, i);
        for j in i + 1..n {
            let zj = MultiSeries::var(&field, n, d, j);
            lin = lin.add(&zj.mul(&h[i][j].mul(&hii_inv)?)?)?;
        }
        let mut phi = SeriesMap::identity(&field, n, d);
        phi.components[i] = root.mul(&lin)?;
        let phi_inv = phi.invert()?;
        let mut next = vec![vec![MultiSeries::zero(&field, n, d); n]; n];
        for j in i + 1..n {
            for k in i + 1..n {
                let e = h[j][k].sub(&h[i][j].mul(&h[i][k])?.mul(&hii_inv)?)?;
                next[j][k] = e.compose(&phi_inv)?;
            }
        }
        h = next;
        t = phi.compose(&t)?;
        units.push(a);
    }

    let prec_floor = t
        .components
        .iter()
        .flat_map(|c| c.terms().filter_map(|(_, v)| v.abs_prec()).collect::<Vec<_>>())
        .chain(units.iter().filter_map(|u| u.abs_prec()))
        .min()
        .unwrap_or(i64::MAX);
    let residual_floor = ((d as i64 + 1) * alpha as i64).min(prec_floor);
    let md = MorseData { center: x0.to_vec(), value, units, t, alpha, residual_floor };
    certify(&md, &g)?;
    Ok(md)
}

/// `Σ a_i T_i²` as a series.
pub fn sum_of_squares(md: &MorseData) -> Result<MultiSeries> {
    let first = &md.t.components[0];
    let mut acc = MultiSeries::zero(first.field(), first.nvars(), first.cutoff());
    for (a, ti) in md.units.iter().zip(&md.t.components) {
        acc = acc.add(&ti.mul(ti)?.scale(a)?)?;
    }
    Ok(acc)
}

/// Residual, `T(0) = 0`, unit Jacobian and the gradient identity
/// `∇g = 2 Jac(T)ᵀ diag(a) T`.
fn certify(md: &MorseData, g: &MultiSeries) -> Result<()> {
    let field = g.field();
    if !g.sub(&sum_of_squares(md)?)?.is_zero() {
        return Err(Error::Invalid("Morse residual does not vanish".into()));
    }
    if md.t.components.iter().any(|c| !c.constant_term().is_zero()) {
        return Err(Error::NonzeroConstantTerm);
    }
    if !is_unit(&linalg::det(&md.t.jacobian_at_zero(), field)?) {
        return Err(Error::SingularJacobian);
    }
    let jac = md.t.jacobian();
    let two = LocalNum::from_int(field, 2);
    for j in 0..g.nvars() {
        let mut rhs = MultiSeries::zero(field, g.nvars(), g.cutoff());
        for (i, a) in md.units.iter().enumerate() {
            rhs = rhs.add(&jac[i][j].mul(&md.t.components[i])?.scale(&a.mul(&two)?)?)?;
        }
        // the derivative loses one degree of the truncation
        let diff = g.derivative(j).sub(&rhs)?;
        if diff.terms().any(|(m, c)| m.degree() < g.cutoff() && !c.is_zero()) {
            return Err(Error::Invalid("gradient identity fails".into()));
        }
    }
    Ok(())
}

/// Determinant of a small matrix of series (Leibniz expansion).
fn series_det(m: &[Vec<MultiSeries>]) -> Result<MultiSeries> {
    let n = m.len();
    let field = m[0][0].field();
    let (nv, d) = (m[0][0].nvars(), m[0][0].cutoff());
    let mut acc = MultiSeries::zero(field, nv, d);
    let mut perm: Vec<usize> = (0..n).collect();
    permutations(&mut perm, 0, &mut |p, sign| {
        let mut term = MultiSeries::one(field, nv, d);
        for (i, &j) in p.iter().enumerate() {
            term = term.mul(&m[i][j])?;
        }
        acc = if sign { acc.add(&term)? } else { acc.sub(&term)? };
        Ok(())
    })?;
    Ok(acc)
}

fn permutations(
    v: &mut Vec<usize>,
    k: usize,
    visit: &mut dyn FnMut(&[usize], bool) -> Result<()>,
) -> Result<()> {
    if k == v.len() {
        let mut inversions = 0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if v[i] > v[j] {
                    inversions += 1;
                }
            }
        }
        return visit(v, inversions % 2 == 0);
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit)?;
        v.swap(k, i);
    }
    Ok(())
}

/// `det Jac T⁻¹` as a series; a unit constant term with integral
/// coefficients makes it a unit on all of `(ϖO)^n`.
pub fn inverse_jacobian_det(md: &MorseData) -> Result<MultiSeries> {
    let inv = md.t.invert()?;
    series_det(&inv.jacobian())
}

#[derive(Clone, Debug, Serialize)]
pub struct MorseReport {
    pub samples: usize,
    pub failures: usize,
    /// Smallest valuation of `f(x) - f(c) - Σ a_i T_i(x - c)²` seen, capped
    /// at the certified floor.
    pub min_agreement: i64,
    pub floor: i64,
    pub first_failure: Option<Vec<String>>,
}

impl MorseReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Pointwise check of `f(x) = f(c) + Σ a_i T_i(x - c)²` at random points of
/// the polydisc `c + (ϖ^α O)^n`. Deterministic for a given `seed`.
pub fn verify_morse(md: &MorseData, f: &MultiSeries, samples: usize, seed: u64) -> Result<MorseReport> {
    let field = f.field();
    let p = field.p();
    let n = f.nvars();
    let prec = field.precision() as usize;
    let mut rng = StdRng::seed_from_u64(seed);
    let floor = md.residual_floor;
    let mut report = MorseReport { samples, failures: 0, min_agreement: floor, floor, first_failure: None };
    for _ in 0..samples {
        let y: Vec<LocalNum> = (0..n)
            .map(|_| {
                let digits: Vec<u32> = (0..prec).map(|_| rng.gen_range(0..p)).collect();
                LocalNum::from_digits(field, md.alpha as i64, &digits)
            })
            .collect();
        let x: Vec<LocalNum> = md.center.iter().zip(&y).map(|(c, v)| c.add(v)).collect::<Result<_>>()?;
        let lhs = f.eval_polynomial(&x)?;
        let mut rhs = md.value.clone();
        for (a, ti) in md.units.iter().zip(&md.t.components) {
            let (v, _) = ti.eval(&y)?;
            rhs = rhs.add(&a.mul(&v.mul(&v)?)?)?;
        }
        let diff = lhs.sub(&rhs)?;
        let agree = diff.ord_lower().min(floor);
        report.min_agreement = report.min_agreement.min(agree);
        // the difference is only meaningful up to the floor and the known digits
        let known = diff.abs_prec().unwrap_or(i64::MAX).min(floor);
        if diff.ord_lower() < known {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some(x.iter().map(|v| v.to_string()).collect());
            }
        }
    }
    Ok(report)
}

fn series_to_json(s: &MultiSeries) -> Value {
    let terms: Vec<Value> = s.terms().map(|(m, c)| json!({"exp": m.0, "coeff": c.to_string()})).collect();
    Value::Array(terms)
}

fn series_from_json(field: &FieldConfig, n: usize, cutoff: u32, v: &Value) -> Result<MultiSeries> {
    let bad = || Error::Invalid("malformed series".into());
    let terms = v
        .as_array()
        .ok_or_else(bad)?
        .iter()
        .map(|t| {
            let exp: Vec<u32> = serde_json::from_value(t.get("exp").cloned().ok_or_else(bad)?).map_err(|_| bad())?;
            let c = t.get("coeff").and_then(Value::as_str).ok_or_else(bad)?;
            Ok((Mono(exp), parse_point(field, c)?))
        })
        .collect::<Result<Vec<_>>>()?;
    MultiSeries::from_terms(field, n, cutoff, terms)
}

impl MorseData {
    pub fn to_json(&self) -> Value {
        let strs = |v: &[LocalNum]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let cutoff = self.t.components.first().map_or(0, |c| c.cutoff());
        json!({
            "center": strs(&self.center),
            "value": self.value.to_string(),
            "units": strs(&self.units),
            "T": self.t.components.iter().map(series_to_json).collect::<Vec<_>>(),
            "cutoff": cutoff,
            "alpha": self.alpha,
            "residual_floor": self.residual_floor,
        })
    }

    pub fn from_json(field: &FieldConfig, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("Morse data: {m}"));
        let points = |key: &str| -> Result<Vec<LocalNum>> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| bad(key))?
                .iter()
                .map(|s| parse_point(field, s.as_str().ok_or_else(|| bad(key))?))
                .collect()
        };
        let center = points("center")?;
        let units = points("units")?;
        let n = center.len();
        let cutoff = v.get("cutoff").and_then(Value::as_u64).ok_or_else(|| bad("cutoff"))? as u32;
        let components = v
            .get("T")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("T"))?
            .iter()
            .map(|c| series_from_json(field, n, cutoff, c))
            .collect::<Result<_>>()?;
        let value = parse_point(field, v.get("value").and_then(Value::as_str).ok_or_else(|| bad("value"))?)?;
        Ok(MorseData {
            center,
            value,
            units,
            t: SeriesMap { components },
            alpha: v.get("alpha").and_then(Value::as_u64).ok_or_else(|| bad("alpha"))? as u32,
            residual_floor: v.get("residual_floor").and_then(Value::as_i64).ok_or_else(|| bad("residual_floor"))?,
        })
    }
}
