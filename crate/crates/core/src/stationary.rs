//! The stationary-phase formula and its certificate.
//!
//! For `ord λ ≤ N`,
//!
//! ```text
//! ∫_Ω φ(x) Ψ(λ f(x)) dx = Σ_j Ψ(λ f(x_j)) φ(x_j) Π_i ∫_{ϖ^α O} Ψ(λ a_{j,i} u²) du
//! ```
//!
//! where the `x_j` are the critical points of `f` in `Ω` and `a_{j,i}` the
//! units of their Morse normal forms. `N` is the minimum of a nonstationary
//! bound `N1` for the part of `Ω` away from the critical points and of the
//! bounds `N2 = min(β - ord a - α, 2β - ord a - 1)` near each of them.
//!
//! The Jacobian factor `|det Jac T⁻¹(0)|` is 1 since `T` has a unit Jacobian.

use serde::Serialize;
use serde_json::{json, Value};

use crate::charfun::{psi, Cell, Region, StepFunction};
use crate::cyclotomic::CycloNum;
use crate::error::{Error, Result};
use crate::integrate::{fourier, gauss_closed, oscillatory_brute_with, BruteOptions};
use crate::localfield::{FieldConfig, LocalNum};
use crate::morse::{find_critical_points, morse_normal_form, MorseData};
use crate::series::MultiSeries;

/// Default cap on cosets visited when bounding the gradient.
pub const SUBDIVISION_BUDGET: usize = 1_000_000;


#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NonstationaryBound {
    /// Largest `min_i ord ∂_i f(x)` over the support (`-log_q δ`).
    pub v: i64,
    /// Smallest valuation of a coefficient of degree `≥ 2`; `None` for an
    /// affine phase.
    pub m_prime: Option<i64>,
    /// Depth of the integrand.
    pub depth: i64,
    pub n1: i64,
}

/// Largest valuation of the gradient on the support of `phi`, by
/// subdividing until the valuation is constant on each coset.
fn gradient_valuation(f: &MultiSeries, cells: &[Cell], m_prime: Option<i64>, budget: usize) -> Result<i64> {
    let field = f.field();
    let grads: Vec<MultiSeries> = (0..f.nvars()).map(|i| f.derivative(i)).collect();
    let mut stack: Vec<Cell> = cells.to_vec();
    let mut visited = 0usize;
    let mut v = i64::MIN;
    while let Some(cell) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::BudgetExhausted);
        }
        let d = cell.depth();
        let c = cell.center(field);
        let g: Vec<LocalNum> = grads.iter().map(|gi| gi.eval_polynomial(&c)).collect::<Result<_>>()?;
        let w = g.iter().filter_map(LocalNum::ord).min();
        let determinate = match (w, m_prime) {
            (Some(w), Some(m)) => w < d + m,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if determinate {
            v = v.max(w.unwrap());
        } else if d >= field.precision() as i64 {
            return Err(Error::GradientVanishes(format!("near {}", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))));
        } else {
            stack.extend(cell.children(field.p()));
        }
    }
    Ok(v)
}

/// `N1` with `∫_region φ Ψ(λ f) = 0` for all `ord λ ≤ N1`.
///
/// On a coset `c + (ϖ^β O)^n` with `β ≥ depth(φ)`, the quadratic part of
/// `f` is invisible to `Ψ(λ ·)` once `ord λ + 2β + M' ≥ 1`, and the linear part
/// then integrates to zero once `ord λ + β + V ≤ 0`. Some `β` satisfies
/// both exactly when `ord λ ≤ min(-depth - V, M' - 1 - 2V)`.
pub fn nonstationary_bound(f: &MultiSeries, phi: &StepFunction, region: &Region) -> Result<Option<NonstationaryBound>> {
    nonstationary_bound_with(f, phi, region, SUBDIVISION_BUDGET)
}

pub fn nonstationary_bound_with(
    f: &MultiSeries,
    phi: &StepFunction,
    region: &Region,
    budget: usize,
) -> Result<Option<NonstationaryBound>> {
    let integrand = phi.restrict(region)?;
    if integrand.cells().is_empty() {
        return Ok(None);
    }
    let support = integrand.support();
    match find_critical_points(f, &support) {
        Ok(pts) if !pts.is_empty() => {
            let at = pts[0].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
            return Err(Error::GradientVanishes(format!("critical point ({at})")));
        }
        Ok(_) | Err(Error::DegenerateCriticalClass(_)) => {}
        Err(e) => return Err(e),
    }
    let m_prime = f.min_ord_from_degree(2);
    let cells: Vec<Cell> = integrand.cells().iter().map(|(c, _)| c.clone()).collect();
    let v = gradient_valuation(f, &cells, m_prime, budget)?;
    let depth = integrand.max_depth();
    let n1 = match m_prime {
        Some(m) => (-depth - v).min(m - 1 - 2 * v),
        None => -depth - v,
    };
    Ok(Some(NonstationaryBound { v, m_prime, depth, n1 }))
}

/// `β` with `supp θ̂ ⊆ (ϖ^β O)^n`, where `θ(y) = φ(x_0 + T⁻¹(y))` on
/// `(ϖ^α O)^n`: `θ` is constant on cosets of depth `max(depth φ, α)` because
/// `T` is an isometry of the polydisc. The bound is checked on the computed
/// transform.
pub fn theta_support_bound(phi: &StepFunction, md: &MorseData) -> Result<i64> {
    let field = phi.field();
    let n = phi.nvars();
    let alpha = md.alpha as i64;
    let depth = phi.max_depth().max(alpha);
    let beta = 1 - depth;
    let t_inv = md.t.invert()?;
    let mut cells = Vec::new();
    for cell in Cell::polydisc(n, alpha).refine_to(field.p(), depth) {
        let y = cell.center(field);
        let y: Vec<LocalNum> = y
            .into_iter()
            .map(|v| if v.is_zero() { LocalNum::zero(field).with_abs_prec(field.precision() as i64) } else { v })
            .collect();
        let x: Vec<LocalNum> = if y.iter().all(|v| v.is_zero()) {
            md.center.clone()
        } else {
            let pre = t_inv.eval(&y)?;
            md.center.iter().zip(pre).map(|(c, (d, _))| c.add(&d)).collect::<Result<_>>()?
        };
        let v = phi.eval(&x)?;
        if !v.is_zero() {
            cells.push((cell, v));
        }
    }
    let theta = StepFunction::new(field, n, cells)?;
    let hat = fourier(&theta)?;
    let ball = Cell::polydisc(n, beta);
    if hat.cells().iter().any(|(c, _)| !ball.contains_cell(c)) {
        return Err(Error::Invalid("transform of θ leaves the predicted support".into()));
    }
    Ok(beta)
}

/// One critical point with its normal form and local bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalData {
    pub morse: MorseData,
    /// `φ(x_j)`.
    pub phi_value: CycloNum,
    pub beta: i64,
    /// `N2` for each unit `a_{j,i}`.
    pub n2: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseCertificate {
    pub field: FieldConfig,
    pub nvars: usize,
    pub critical: Vec<CriticalData>,
    pub alpha: u32,
    pub nonstationary: Option<NonstationaryBound>,
    pub n: i64,
    /// `|det Jac T⁻¹(0)|`, always 1.
    pub gamma: i64,
}

/// Smallest `α ≥ 1` with the polydiscs `x_j + (ϖ^α O)^n` inside `Ω` and
/// pairwise disjoint.
fn choose_alpha(points: &[Vec<LocalNum>], omega: &Region) -> Result<u32> {
    let field = omega.field();
    for alpha in 1..=field.precision() {
        let balls = points.iter().map(|x| Cell::new(x, alpha as i64)).collect::<Result<Vec<_>>>()?;
        let inside = balls.iter().all(|b| omega.contains_cell(b));
        let disjoint = balls.iter().enumerate().all(|(i, a)| balls[i + 1..].iter().all(|b| !a.intersects(b)));
        if inside && disjoint {
            return Ok(alpha);
        }
    }
    Err(Error::PrecisionExhausted("no polydisc radius separates the critical points".into()))
}

/// Builds the certificate for `∫_Ω φ Ψ(λ f)`.
pub fn stationary_phase(f: &MultiSeries, phi: &StepFunction, omega: &Region) -> Result<PhaseCertificate> {
    if f.field() != phi.field() || f.field() != omega.field() {
        return Err(Error::ConfigMismatch);
    }
    let field = f.field();
    let n = f.nvars();
    let mut points = find_critical_points(f, omega)?;
    points.sort_by_key(|x| x.iter().map(|v| v.digits()).collect::<Vec<_>>());
    let alpha = if points.is_empty() { 1 } else { choose_alpha(&points, omega)? };
    let mut critical = Vec::new();
    let mut rest = omega.clone();
    for x in &points {
        let morse = morse_normal_form(f, x, alpha)?;
        let beta = theta_support_bound(phi, &morse)?;
        let n2 = morse
            .units
            .iter()
            .map(|a| {
                let oa = a.ord().unwrap_or(0);
                (beta - oa - alpha as i64).min(2 * beta - oa - 1)
            })
            .collect();
        let phi_value = phi.eval(x)?;
        rest = rest.subtract_cell(&Cell::new(x, alpha as i64)?);
        critical.push(CriticalData { morse, phi_value, beta, n2 });
    }
    let nonstationary = nonstationary_bound(f, phi, &rest)?;
    let n_all = critical
        .iter()
        .flat_map(|c| c.n2.iter().copied())
        .chain(nonstationary.as_ref().map(|b| b.n1))
        .min()
        // nothing oscillates: any bound works, use the trivial one
        .unwrap_or(0);
    Ok(PhaseCertificate { field: field.clone(), nvars: n, critical, alpha, nonstationary, n: n_all, gamma: 1 })
}

impl PhaseCertificate {
    /// `Σ_j Ψ(λ f(x_j)) φ(x_j) Π_i G(λ a_{j,i}, α)`.
    pub fn closed_rhs(&self, lambda: &LocalNum) -> Result<CycloNum> {
        let p = self.field.p();
        let mut total = CycloNum::zero(p);
        for c in &self.critical {
            if c.phi_value.is_zero() {
                continue;
            }
            let mut term = &psi(&lambda.mul(&c.morse.value)?)? * &c.phi_value;
            for a in &c.morse.units {
                term = &term * &gauss_closed(&lambda.mul(a)?, self.alpha)?;
            }
            total = &total + &term;
        }
        Ok(total)
    }

    pub fn units(&self) -> Vec<Vec<LocalNum>> {
        self.critical.iter().map(|c| c.morse.units.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        let strs = |v: &[LocalNum]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let crit: Vec<Value> = self
            .critical
            .iter()
            .map(|c| {
                json!({
                    "point": strs(&c.morse.center),
                    "value": c.morse.value.to_string(),
                    "units": strs(&c.morse.units),
                    "phi": c.phi_value,
                    "beta": c.beta,
                    "N2": c.n2,
                    "residual_floor": c.morse.residual_floor,
                })
            })
            .collect();
        json!({
            "field": self.field.kind().name(),
            "p": self.field.p(),
            "precision": self.field.precision(),
            "n": self.nvars,
            "alpha": self.alpha,
            "critical_points": crit,
            "N1": self.nonstationary.as_ref().map(|b| b.n1),
            "V": self.nonstationary.as_ref().map(|b| b.v),
            "M_prime": self.nonstationary.as_ref().and_then(|b| b.m_prime),
            "N": self.n,
            "gamma": self.gamma,
        })
    }
}

/// One comparison of the closed formula with the integral.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaRecord {
    pub ord: i64,
    pub unit: u32,
    pub lhs: CycloNum,
    pub rhs: CycloNum,
    pub equal: bool,
    /// `ord λ ≤ N`, where equality is guaranteed.
    pub guaranteed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n: i64,
    pub records: Vec<LambdaRecord>,
}

impl VerifyReport {
    /// Every record inside the guaranteed range agrees.
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.equal || !r.guaranteed)
    }

    pub fn first_mismatch(&self) -> Option<&LambdaRecord> {
        self.records.iter().find(|r| r.guaranteed && !r.equal)
    }
}

/// `λ = u ϖ^k` for a residue digit `u ≠ 0`.
pub fn lambda_from(field: &FieldConfig, k: i64, u: u32) -> LocalNum {
    let mut digits = vec![0; field.precision() as usize];
    digits[0] = u;
    LocalNum::from_digits(field, k, &digits)
}

/// Compares `closed_rhs(λ)` with the enumerated integral for every
/// `ord λ` in `ords` and every unit digit in `units` (all of `1..p` when
/// `None`).
pub fn verify_certificate(
    cert: &PhaseCertificate,
    f: &MultiSeries,
    phi: &StepFunction,
    omega: &Region,
    ords: &[i64],
    units: Option<&[u32]>,
    opts: &BruteOptions,
) -> Result<VerifyReport> {
    let field = f.field();
    let all: Vec<u32> = (1..field.p()).collect();
    let units = units.unwrap_or(&all);
    let jobs: Vec<(i64, u32)> = ords.iter().flat_map(|&k| units.iter().map(move |&u| (k, u))).collect();
    let one = |&(k, u): &(i64, u32)| -> Result<LambdaRecord> {
        let lambda = lambda_from(field, k, u);
        let lhs = oscillatory_brute_with(f, phi, &lambda, omega, opts)?;
        let rhs = cert.closed_rhs(&lambda)?;
        let equal = lhs == rhs;
        Ok(LambdaRecord { ord: k, unit: u, lhs, rhs, equal, guaranteed: k <= cert.n })
    };
    #[cfg(feature = "parallel")]
    let records = {
        use rayon::prelude::*;
        jobs.par_iter().map(one).collect::<Result<Vec<_>>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let records = jobs.iter().map(one).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { n: cert.n, records })
}
