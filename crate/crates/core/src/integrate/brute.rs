//! Exact evaluation of `∫_Ω φ(x) Ψ(λ f(x)) dx` by enumerating cosets.
//!
//! With `K = 1 - ord λ`, `Ψ(λ f(x))` only sees `f(x) mod ϖ^K`, so all the
//! arithmetic happens in `O/ϖ^K` on machine words. Two enumeration schemes:
//!
//! * exhaustive: refine to depth `m ≥ K - c`, `c` the smallest valuation of a
//!   nonconstant coefficient; then `f mod ϖ^K` is constant on every coset.
//! * linear tail: refine only to `m` with `2m + M ≥ K`, `M` the smallest
//!   valuation of a coefficient of degree `≥ 2`. On `a + (ϖ^m O)^n` the phase is
//!   affine modulo `ϖ^K`, and the coset integral is `Ψ(λ f(a))` times the
//!   indicator of `∇f(a) ≡ 0 mod ϖ^{K-m}`.
//!
//! Character values are tallied in an integer group ring and converted to a
//! cyclotomic number once per cell of `φ`.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::charfun::{Region, StepFunction};
use crate::cyclotomic::{CycloNum, GroupRing};
use crate::error::{Error, Result};
use crate::localfield::{FieldKind, LocalNum};
use crate::series::MultiSeries;

use super::integrate_step;
use super::residue::{LaurentResidue, PadicResidue, Residue, RingPoly};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Exhaustive when it fits the budget, linear tail otherwise.
    Auto,
    Exhaustive,
    LinearTail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// sequentially otherwise.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BruteOptions {
    /// Maximal number of cosets visited.
    pub budget: u64,
    pub mode: Mode,
    pub exec: Exec,
    /// Extra refinement levels beyond the guaranteed depth.
    pub extra_depth: u32,
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions { budget: DEFAULT_BUDGET, mode: Mode::Auto, exec: Exec::default(), extra_depth: 0 }
    }
}

/// What the engine will do for a given integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Plan {
    /// `λ` is zero or `Ψ(λ f)` is identically 1 on `O^n`.
    Trivial,
    Enumerate {
        mode: Mode,
        /// `K = 1 - ord λ`.
        k: u32,
        /// Refinement depth before taking the cell depths of `φ` into account.
        depth: u32,
        cosets: u128,
    },
}

fn min_ord_from_degree(f: &MultiSeries, d: u32) -> Option<i64> {
    f.terms().filter(|(m, c)| m.degree() >= d && !c.is_exact_zero()).map(|(_, c)| c.ord_lower()).min()
}

fn coset_count(phi: &StepFunction, p: u32, depth: u32) -> u128 {
    let n = phi.nvars() as u32;
    phi.cells()
        .iter()
        .map(|(c, _)| {
            let free = (depth as i64 - c.depth()).max(0) as u32;
            (p as u128).checked_pow(n * free).unwrap_or(u128::MAX)
        })
        .fold(0u128, u128::saturating_add)
}

fn check_inputs(f: &MultiSeries, phi: &StepFunction, lambda: &LocalNum, omega: &Region) -> Result<()> {
    if f.field() != phi.field() || f.field() != lambda.field() || f.field() != omega.field() {
        return Err(Error::ConfigMismatch);
    }
    if f.nvars() != phi.nvars() || f.nvars() != omega.nvars() {
        return Err(Error::Invalid("phase, integrand and region differ in dimension".into()));
    }
    Ok(())
}

fn plan_for(f: &MultiSeries, phi: &StepFunction, lambda: &LocalNum, opts: &BruteOptions) -> Result<Plan> {
    if lambda.is_zero() || lambda.ord_lower() >= 1 {
        if !lambda.is_exact_zero() && lambda.ord().is_none() {
            return Err(Error::PrecisionExhausted(format!("valuation of λ = {lambda}")));
        }
        return Ok(Plan::Trivial);
    }
    let k = (1 - lambda.ord_lower()) as u32;
    let p = f.field().p();
    let exhaustive = min_ord_from_degree(f, 1).map_or(0, |c| (k as i64 - c).max(0)) as u32 + opts.extra_depth;
    let tail = min_ord_from_degree(f, 2).map_or(0, |m| ((k as i64 - m + 1) / 2).max(0)) as u32 + opts.extra_depth;
    let ex = coset_count(phi, p, exhaustive);
    let li = coset_count(phi, p, tail);
    let pick = |mode, depth, cosets| Plan::Enumerate { mode, k, depth, cosets };
    let plan = match opts.mode {
        Mode::Exhaustive => pick(Mode::Exhaustive, exhaustive, ex),
        Mode::LinearTail => pick(Mode::LinearTail, tail, li),
        Mode::Auto if ex <= opts.budget as u128 => pick(Mode::Exhaustive, exhaustive, ex),
        Mode::Auto => pick(Mode::LinearTail, tail, li),
    };
    if let Plan::Enumerate { cosets, .. } = plan {
        if cosets > opts.budget as u128 {
            return Err(Error::DepthOverflow { needed: cosets, budget: opts.budget });
        }
    }
    Ok(plan)
}

/// The plan [`oscillatory_brute_with`] would follow.
pub fn brute_plan(
    f: &MultiSeries,
    phi: &StepFunction,
    lambda: &LocalNum,
    omega: &Region,
    opts: &BruteOptions,
) -> Result<Plan> {
    check_inputs(f, phi, lambda, omega)?;
    let integrand = phi.restrict(omega)?;
    plan_for(f, &integrand, lambda, opts)
}

/// `∫_Ω φ(x) Ψ(λ f(x)) dx` with default options.
pub fn oscillatory_brute(f: &MultiSeries, phi: &StepFunction, lambda: &LocalNum, omega: &Region) -> Result<CycloNum> {
    oscillatory_brute_with(f, phi, lambda, omega, &BruteOptions::default())
}

/// `∫_Ω φ(x) Ψ(λ f(x)) dx`. The stored terms of `f` are taken as a
/// polynomial; its coefficients must be known modulo `ϖ^{1 - ord λ}`.
pub fn oscillatory_brute_with(
    f: &MultiSeries,
    phi: &StepFunction,
    lambda: &LocalNum,
    omega: &Region,
    opts: &BruteOptions,
) -> Result<CycloNum> {
    check_inputs(f, phi, lambda, omega)?;
    let integrand = phi.restrict(omega)?;
    match plan_for(f, &integrand, lambda, opts)? {
        Plan::Trivial => Ok(integrate_step(&integrand)),
        Plan::Enumerate { mode, k, depth, .. } => match f.field().kind() {
            FieldKind::Padic => run(&PadicResidue::new(lambda, k)?, f, &integrand, mode, k, depth, opts.exec),
            FieldKind::Laurent => run(&LaurentResidue::new(lambda, k)?, f, &integrand, mode, k, depth, opts.exec),
        },
    }
}

fn ring_poly<R: Residue>(ring: &R, f: &MultiSeries) -> Result<RingPoly<R>> {
    RingPoly::new(ring, f.nvars(), f.terms().map(|(m, c)| (m.0.as_slice(), c)))
}

struct Scratch<E> {
    x: Vec<E>,
    powers: Vec<Vec<E>>,
}

fn run<R: Residue>(
    ring: &R,
    f: &MultiSeries,
    phi: &StepFunction,
    mode: Mode,
    k: u32,
    depth: u32,
    exec: Exec,
) -> Result<CycloNum> {
    let p = f.field().p();
    let n = f.nvars();
    let poly = ring_poly(ring, f)?;
    let grads = match mode {
        Mode::LinearTail => (0..n).map(|i| ring_poly(ring, &f.derivative(i))).collect::<Result<Vec<_>>>()?,
        _ => Vec::new(),
    };
    let mut total = CycloNum::zero(p);
    for (cell, value) in phi.cells() {
        let d = cell.depth() as u32;
        let m = depth.max(d);
        let base: Vec<R::E> = cell
            .integral_digits()
            .iter()
            .map(|digits| {
                digits.iter().enumerate().fold(ring.zero(), |acc, (pos, &dg)| ring.offset(acc, pos as u32, dg as u64))
            })
            .collect();
        let side = (p as u64).pow(m - d);
        let count = side.pow(n as u32);
        // a coset with vanishing gradient condition contributes Ψ(λ f(a));
        // in exhaustive mode the condition is vacuous
        let need = k as i64 - m as i64;
        let point = |idx: u64, s: &mut Scratch<R::E>| -> Option<u64> {
            let mut rest = idx;
            for (i, b) in base.iter().enumerate() {
                s.x[i] = ring.offset(*b, d, rest % side);
                rest /= side;
            }
            for g in &grads {
                if !ring.divisible(g.eval(ring, &s.x, &mut s.powers), need) {
                    return None;
                }
            }
            Some(ring.psi_exp(poly.eval(ring, &s.x, &mut s.powers)))
        };
        let hist = histogram(ring, n, p, count, exec, &point);
        let vol = BigRational::new(BigInt::from(1), BigInt::from(p).pow(n as u32 * m));
        total = &total + &(value * &hist.to_cyclo().scale(&vol));
    }
    Ok(total)
}

fn tally<R: Residue>(
    ring: &R,
    n: usize,
    hist: &mut GroupRing,
    range: std::ops::Range<u64>,
    point: &(impl Fn(u64, &mut Scratch<R::E>) -> Option<u64> + Sync),
) {
    let mut s = Scratch { x: vec![ring.zero(); n], powers: Vec::new() };
    for idx in range {
        if let Some(e) = point(idx, &mut s) {
            hist.add_at(e, 1);
        }
    }
}

#[cfg(feature = "parallel")]
const PARALLEL_MIN: u64 = 1 << 14;

fn histogram<R: Residue>(
    ring: &R,
    n: usize,
    p: u32,
    count: u64,
    exec: Exec,
    point: &(impl Fn(u64, &mut Scratch<R::E>) -> Option<u64> + Sync),
) -> GroupRing {
    let level = ring.psi_level();
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel && count >= PARALLEL_MIN {
        use rayon::prelude::*;
        let chunks = (rayon::current_num_threads() as u64 * 4).min(count);
        let size = count.div_ceil(chunks);
        return (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut h = GroupRing::new(p, level);
                tally(ring, n, &mut h, c * size..((c + 1) * size).min(count), point);
                h
            })
            .reduce_with(|a, b| a.merge(&b))
            .unwrap_or_else(|| GroupRing::new(p, level));
    }
    let _ = exec;
    let mut h = GroupRing::new(p, level);
    tally(ring, n, &mut h, 0..count, point);
    h
}
