//! Integration of step functions, Fourier transforms and quadratic Gauss
//! integrals.
//!
//! Haar measure gives `O` volume 1 and `⟨x, ξ⟩ = Σ x_i ξ_i`. With this
//! normalization the Fourier transform satisfies `φ̂̂(x) = q^{-n} φ(-x)`.

mod brute;
mod residue;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::charfun::{Cell, Region, StepFunction};
use crate::cyclotomic::CycloNum;
use crate::error::{Error, Result};
use crate::localfield::{FieldConfig, FieldKind, LocalNum};
use crate::series::{Mono, MultiSeries};

pub use brute::{brute_plan, oscillatory_brute, oscillatory_brute_with, BruteOptions, Exec, Mode, Plan, DEFAULT_BUDGET};

/// `∫ φ = Σ q^{-n·depth} · value`.
pub fn integrate_step(phi: &StepFunction) -> CycloNum {
    let p = phi.field().p();
    phi.cells()
        .iter()
        .fold(CycloNum::zero(p), |acc, (c, v)| &acc + &v.scale(&c.volume(p)))
}

/// Largest grid (points × group-ring length) the transform will allocate.
const FOURIER_LIMIT: u128 = 1 << 28;

/// `φ̂(ξ) = ∫ φ(x) Ψ(⟨x, ξ⟩) dx`.
///
/// The input is sampled on the grid `ϖ^low · (O/ϖ^L)^n` of its finest cells
/// and the output lives on `ϖ^{1-d} · (O/ϖ^L)^n`, `d` the largest depth; the
/// character sum is separable and is done one coordinate at a time over
/// integer group rings.
pub fn fourier(phi: &StepFunction) -> Result<StepFunction> {
    let field = phi.field();
    let n = phi.nvars();
    let p = field.p();
    if phi.cells().is_empty() {
        return Ok(StepFunction::zero(field, n));
    }
    let low = phi.min_low();
    let dmax = phi.max_depth();
    let l = (dmax - low) as u32;
    let lg = phi.cells().iter().map(|(_, v)| v.level()).max().unwrap_or(0).max(l);
    let side = (p as u64).checked_pow(l).ok_or(Error::Overflow)?;
    let glen = (p as u64).checked_pow(lg).ok_or(Error::Overflow)?;
    let points = (side as u128).checked_pow(n as u32).ok_or(Error::Overflow)?;
    if points * glen as u128 > FOURIER_LIMIT {
        return Err(Error::DepthOverflow { needed: points * glen as u128, budget: FOURIER_LIMIT as u64 });
    }
    let (points, glen_us) = (points as usize, glen as usize);

    // common denominator of all values
    let den = phi
        .cells()
        .iter()
        .flat_map(|(_, v)| v.terms().map(|(_, c)| c.denom().clone()).collect::<Vec<_>>())
        .fold(BigInt::one(), |a, b| a.lcm(&b));

    let mut grid = vec![0i64; points * glen_us];
    for (cell, v) in phi.cells() {
        let mut vec = vec![0i64; glen_us];
        let shift = (p as u64).pow(lg - v.level());
        for (e, c) in v.terms() {
            let w = c * BigRational::from_integer(den.clone());
            let w: i64 = w.to_integer().try_into().map_err(|_| Error::Overflow)?;
            vec[(e * shift) as usize] += w;
        }
        let d = cell.depth();
        let fixed: Vec<u64> = (0..n)
            .map(|i| (low..d).rev().fold(0u64, |acc, pos| acc * p as u64 + cell.digit(i, pos) as u64))
            .collect();
        let free_side = (p as u64).pow((dmax - d) as u32);
        let step = (p as u64).pow((d - low) as u32);
        for idx in 0..free_side.pow(n as u32) {
            // coordinate 0 is the least significant grid index
            let mut rest = idx;
            let mut flat = 0usize;
            let mut mul = 1usize;
            for fi in &fixed {
                let t = rest % free_side;
                rest /= free_side;
                flat += mul * (fi + step * t) as usize;
                mul *= side as usize;
            }
            let slot = &mut grid[flat * glen_us..(flat + 1) * glen_us];
            for (s, w) in slot.iter_mut().zip(&vec) {
                *s += w;
            }
        }
    }

    // table of group-ring shifts for the 1-D pairing
    let unit = match field.kind() {
        FieldKind::Padic => glen / side.max(1),
        FieldKind::Laurent => glen / (p as u64),
    };
    let pair = |a: u64, b: u64| -> u64 {
        match field.kind() {
            FieldKind::Padic => ((a as u128 * b as u128) % side as u128) as u64 * unit,
            FieldKind::Laurent => {
                if l == 0 {
                    return 0;
                }
                let da = digits_of(a, p, l);
                let db = digits_of(b, p, l);
                let s: u64 = (0..l as usize).map(|k| da[k] as u64 * db[l as usize - 1 - k] as u64).sum();
                (s % p as u64) * unit
            }
        }
    };
    let sidu = side as usize;
    let table: Vec<u64> = (0..side * side).map(|ab| pair(ab / side, ab % side)).collect();

    let mut stride = 1usize;
    for _axis in 0..n {
        let mut out = vec![0i64; grid.len()];
        for base in 0..points {
            if !(base / stride).is_multiple_of(sidu) {
                continue;
            }
            for a in 0..sidu {
                let src = &grid[(base + a * stride) * glen_us..(base + a * stride + 1) * glen_us];
                if src.iter().all(|w| *w == 0) {
                    continue;
                }
                for b in 0..sidu {
                    let sh = table[a * sidu + b] as usize;
                    let dst = base + b * stride;
                    let dst = &mut out[dst * glen_us..(dst + 1) * glen_us];
                    // dst += src rotated by sh
                    let (head, tail) = src.split_at(glen_us - sh);
                    for (d, w) in dst[sh..].iter_mut().zip(head) {
                        *d += w;
                    }
                    for (d, w) in dst[..sh].iter_mut().zip(tail) {
                        *d += w;
                    }
                }
            }
        }
        grid = out;
        stride *= sidu;
    }

    let scale = rational_p_power(p, -(n as i64) * dmax) / BigRational::from_integer(den);
    let mut cells = Vec::new();
    for b in 0..points {
        let g = &grid[b * glen_us..(b + 1) * glen_us];
        if g.iter().all(|w| *w == 0) {
            continue;
        }
        let value = CycloNum::from_group_ring(
            p,
            lg,
            g.iter().enumerate().filter(|(_, w)| **w != 0).map(|(e, w)| {
                (e as u64, BigRational::from_integer(BigInt::from(*w)))
            }),
        )
        .scale(&scale);
        if value.is_zero() {
            continue;
        }
        let mut rest = b as u64;
        let digits = (0..n)
            .map(|_| {
                let coord = rest % side;
                rest /= side;
                digits_of(coord, p, l)
            })
            .collect();
        cells.push((Cell::from_digits(1 - dmax, digits), value));
    }
    Ok(StepFunction::from_disjoint(field, n, cells))
}

fn rational_p_power(p: u32, k: i64) -> BigRational {
    let pk = BigRational::from_integer(BigInt::from(p).pow(k.unsigned_abs() as u32));
    if k >= 0 {
        pk
    } else {
        pk.recip()
    }
}

fn digits_of(mut x: u64, p: u32, len: u32) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (x % p as u64) as u32;
            x /= p as u64;
            d
        })
        .collect()
}

/// Outcome of transforming twice.
#[derive(Clone, Debug, Serialize)]
pub struct InversionReport {
    /// `κ` with `φ̂̂(x) = κ φ(-x)`; `None` for `φ = 0`.
    pub kappa: Option<CycloNum>,
    /// `q^{-n}`.
    pub expected: CycloNum,
    pub matches_expected: bool,
}

/// Computes `φ̂̂` and the scalar relating it to `x ↦ φ(-x)`.
pub fn double_fourier_check(phi: &StepFunction) -> Result<InversionReport> {
    let p = phi.field().p();
    let expected = CycloNum::p_power(p, -(phi.nvars() as i64));
    let hh = fourier(&fourier(phi)?)?;
    let r = phi.reflect();
    let Some((_, r0)) = r.cells().first() else {
        if !hh.cells().is_empty() {
            return Err(Error::ConstantNotScalar);
        }
        return Ok(InversionReport { kappa: None, expected, matches_expected: true });
    };
    let h0 = hh.cells().first().map(|(_, v)| v.clone()).ok_or(Error::ConstantNotScalar)?;
    let kappa = h0.checked_mul(&r0.inv()?)?;
    if hh != r.scale(&kappa) {
        return Err(Error::ConstantNotScalar);
    }
    let matches_expected = kappa == expected;
    Ok(InversionReport { kappa: Some(kappa), expected, matches_expected })
}

#[derive(Clone, Debug, Serialize)]
pub struct PlancherelReport {
    /// `∫ f̂ g`.
    pub lhs: CycloNum,
    /// `∫ f ĝ`.
    pub rhs: CycloNum,
    pub equal: bool,
}

pub fn plancherel_check(f: &StepFunction, g: &StepFunction) -> Result<PlancherelReport> {
    let lhs = integrate_step(&fourier(f)?.product(g)?);
    let rhs = integrate_step(&f.product(&fourier(g)?)?);
    let equal = lhs == rhs;
    Ok(PlancherelReport { lhs, rhs, equal })
}

/// `∫_{ϖ^α O} Ψ(c u²) du` in closed form.
pub fn gauss_closed(c: &LocalNum, alpha: u32) -> Result<CycloNum> {
    let field = c.field();
    let p = field.p();
    let vol = CycloNum::p_power(p, -(alpha as i64));
    if c.is_exact_zero() {
        return Ok(vol);
    }
    if c.is_zero() {
        // only the valuation bound is known
        if c.ord_lower() + 2 * alpha as i64 >= 1 {
            return Ok(vol);
        }
        return Err(Error::PrecisionExhausted(format!("Gauss coefficient {c}")));
    }
    let s = c.ord().expect("nonzero") + 2 * alpha as i64;
    if s >= 1 {
        return Ok(vol);
    }
    // G(s) = p^{-1} G(s + 2) for s ≤ -1, down to s ∈ {0, 1}
    let steps = (1 - s) / 2;
    let s0 = s + 2 * steps;
    let base = if s0 == 1 {
        CycloNum::one(p)
    } else {
        let a = c.ac() as u64;
        let terms = (0..p as u64).map(|x| ((a * x * x) % p as u64, BigRational::one()));
        CycloNum::from_group_ring(p, 1, terms).scale(&BigRational::new(BigInt::one(), BigInt::from(p)))
    };
    Ok(&(&vol * &CycloNum::p_power(p, -steps)) * &base)
}

fn square_phase(field: &FieldConfig, a: LocalNum, b: LocalNum) -> Result<MultiSeries> {
    let mut terms = vec![(Mono(vec![2]), a)];
    if !b.is_exact_zero() {
        terms.push((Mono(vec![1]), b));
    }
    MultiSeries::from_terms(field, 1, 2, terms)
}

/// `∫_{ϖ^α O} Ψ(a u² + b u) du` by enumeration, with `λ` a power of `ϖ`
/// that makes the phase integral.
fn quadratic_brute(a: &LocalNum, b: &LocalNum, alpha: u32, opts: &BruteOptions) -> Result<CycloNum> {
    let field = a.field();
    let zero = LocalNum::zero(field);
    let ball = Region::ball(field, std::slice::from_ref(&zero), alpha as i64)?;
    let phi = ball.indicator();
    let ords: Vec<i64> = [a, b].iter().filter(|x| !x.is_exact_zero()).map(|x| x.ord_lower()).collect();
    let Some(&k) = ords.iter().min() else {
        return Ok(integrate_step(&phi));
    };
    let lam = LocalNum::uniformizer_pow(field, k);
    let f = square_phase(field, a.shift(-k), b.shift(-k))?;
    oscillatory_brute_with(&f, &phi, &lam, &ball, opts)
}

/// `∫_{ϖ^α O} Ψ(c u²) du` by enumeration.
pub fn gauss_brute(c: &LocalNum, alpha: u32) -> Result<CycloNum> {
    gauss_brute_with(c, alpha, &BruteOptions::default())
}

pub fn gauss_brute_with(c: &LocalNum, alpha: u32, opts: &BruteOptions) -> Result<CycloNum> {
    quadratic_brute(c, &LocalNum::zero(c.field()), alpha, opts)
}

/// Whether `a, b, α` satisfy `ord b - ord a ≥ α` and `2 ord b - ord a ≥ 1`.
pub fn gauss_shift_hypotheses(a: &LocalNum, b: &LocalNum, alpha: u32) -> bool {
    match (a.ord(), b.ord()) {
        (Some(oa), Some(ob)) => ob - oa >= alpha as i64 && 2 * ob - oa >= 1,
        _ => false,
    }
}

/// Exact comparison of `∫_{ϖ^α O} Ψ(a u² + b u) du` with `∫_{ϖ^α O} Ψ(a u²) du`.
pub fn gauss_shift_invariance(a: &LocalNum, b: &LocalNum, alpha: u32) -> Result<bool> {
    let opts = BruteOptions::default();
    let with = quadratic_brute(a, b, alpha, &opts)?;
    let without = quadratic_brute(a, &LocalNum::zero(a.field()), alpha, &opts)?;
    Ok(with == without)
}

/// `|G|²` as a rational, via `conj(G)·G`.
pub fn norm_squared(g: &CycloNum) -> Option<BigRational> {
    g.conj().checked_mul(g).ok()?.to_rational().filter(|q| !q.is_negative())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfun::psi;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ind(field: &FieldConfig, center: &[i64], depth: i64) -> StepFunction {
        let c: Vec<LocalNum> = center.iter().map(|&x| LocalNum::from_int(field, x)).collect();
        StepFunction::indicator(field, &c, depth).unwrap()
    }

    /// `φ̂(ξ)` by summing `Ψ(⟨x, ξ⟩)` over a grid of `x` fine enough for `ξ`.
    fn fourier_at(phi: &StepFunction, xi: &[LocalNum]) -> CycloNum {
        let field = phi.field();
        let p = field.p();
        let min_ord = xi.iter().map(|x| x.ord_lower()).min().unwrap();
        let depth = phi.max_depth().max(1 - min_ord).max(0);
        let mut acc = CycloNum::zero(p);
        for (cell, v) in phi.refine_to(depth) {
            let x = cell.center(field);
            let dot = x.iter().zip(xi).fold(LocalNum::zero(field), |s, (a, b)| s.add(&a.mul(b).unwrap()).unwrap());
            acc = &acc + &(&psi(&dot).unwrap() * &v.scale(&cell.volume(p)));
        }
        acc
    }

    fn random_step(field: &FieldConfig, n: usize, rng: &mut ChaCha8Rng) -> StepFunction {
        let p = field.p();
        let cells = (0..rng.gen_range(1..=3))
            .map(|_| {
                let depth: u32 = rng.gen_range(0..=2);
                let center: Vec<LocalNum> = (0..n)
                    .map(|_| {
                        let d: Vec<u32> = (0..field.precision()).map(|k| if k < depth { rng.gen_range(0..p) } else { 0 }).collect();
                        LocalNum::from_digits(field, 0, &d)
                    })
                    .collect();
                let value = if rng.gen_bool(0.3) {
                    CycloNum::zeta_pow(p, 1, rng.gen_range(0..p as i64))
                } else {
                    CycloNum::from_int(p, rng.gen_range(-3..=3))
                };
                (Cell::new(&center, depth as i64).unwrap(), value)
            })
            .collect();
        StepFunction::from_overlapping(field, n, cells)
    }

    #[test]
    fn step_integrals() {
        let field = FieldConfig::padic(5, 10).unwrap();
        assert_eq!(integrate_step(&ind(&field, &[0], 0)), CycloNum::one(5));
        assert_eq!(integrate_step(&ind(&field, &[0], 3)), CycloNum::p_power(5, -3));
        let parts: Vec<_> = (0..5).map(|a| ind(&field, &[a], 1)).collect();
        let total = parts.iter().fold(CycloNum::zero(5), |acc, s| &acc + &integrate_step(s));
        assert_eq!(total, CycloNum::one(5));
    }

    #[test]
    fn transforms_of_balls() {
        for kind in [FieldKind::Padic, FieldKind::Laurent] {
            let field = FieldConfig::new(kind, 3, 10).unwrap();
            let one_o = ind(&field, &[0], 0);
            let one_po = ind(&field, &[0], 1);
            assert_eq!(fourier(&one_o).unwrap(), one_po);
            assert_eq!(fourier(&one_po).unwrap(), one_o.scale(&CycloNum::p_power(3, -1)));
            let rep = double_fourier_check(&one_o).unwrap();
            assert_eq!(rep.kappa, Some(CycloNum::p_power(3, -1)));
            assert!(rep.matches_expected);
        }
    }

    #[test]
    fn reflection_is_visible_on_asymmetric_input() {
        let field = FieldConfig::padic(5, 10).unwrap();
        let phi = ind(&field, &[1], 1);
        let hh = fourier(&fourier(&phi).unwrap()).unwrap();
        assert_eq!(hh, ind(&field, &[-1], 1).scale(&CycloNum::p_power(5, -1)));
        assert!(double_fourier_check(&phi).unwrap().matches_expected);
    }

    #[test]
    fn transform_matches_pointwise_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [FieldKind::Padic, FieldKind::Laurent] {
            for (p, n) in [(3, 1), (3, 2), (5, 1)] {
                let field = FieldConfig::new(kind, p, 10).unwrap();
                for _ in 0..4 {
                    let phi = random_step(&field, n, &mut rng);
                    let hat = fourier(&phi).unwrap();
                    for _ in 0..12 {
                        let xi: Vec<LocalNum> = (0..n)
                            .map(|_| {
                                let v = rng.gen_range(-3..=1);
                                let d: Vec<u32> = (0..4).map(|_| rng.gen_range(0..p)).collect();
                                LocalNum::from_digits(&field, v, &d)
                            })
                            .collect();
                        assert_eq!(hat.eval(&xi).unwrap(), fourier_at(&phi, &xi), "{kind} p={p} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn inversion_and_plancherel_on_random_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (kind, p, n) in [(FieldKind::Padic, 3, 1), (FieldKind::Laurent, 3, 2), (FieldKind::Padic, 5, 2)] {
            let field = FieldConfig::new(kind, p, 10).unwrap();
            for _ in 0..5 {
                let f = random_step(&field, n, &mut rng);
                let g = random_step(&field, n, &mut rng);
                assert!(double_fourier_check(&f).unwrap().matches_expected);
                assert!(plancherel_check(&f, &g).unwrap().equal);
            }
        }
    }

    #[test]
    fn gauss_closed_form_examples() {
        let field = FieldConfig::padic(5, 12).unwrap();
        let unit = LocalNum::from_int(&field, 2);
        // unit coefficient, α = 0: (1/5) Σ ζ_5^{2x²}
        let want = CycloNum::from_group_ring(5, 1, (0..5u64).map(|x| ((2 * x * x) % 5, BigRational::one())))
            .scale(&BigRational::new(1.into(), 5.into()));
        assert_eq!(gauss_closed(&unit, 0).unwrap(), want);
        assert_eq!(gauss_brute(&unit, 0).unwrap(), want);
        // ord c + 2α ≥ 1
        let c = LocalNum::from_ratio(&field, 3, 5).unwrap();
        assert_eq!(gauss_closed(&c, 1).unwrap(), CycloNum::p_power(5, -1));
        assert_eq!(gauss_brute(&c, 1).unwrap(), CycloNum::p_power(5, -1));
        // one recursion step
        let c2 = unit.shift(-2);
        assert_eq!(gauss_brute(&c2, 0).unwrap(), gauss_brute(&unit, 0).unwrap().scale(&BigRational::new(1.into(), 5.into())));
        assert_eq!(gauss_closed(&LocalNum::zero(&field), 2).unwrap(), CycloNum::p_power(5, -2));
    }

    #[test]
    fn gauss_closed_matches_brute_on_a_small_grid() {
        for kind in [FieldKind::Padic, FieldKind::Laurent] {
            let field = FieldConfig::new(kind, 3, 14).unwrap();
            for s in -4..=2 {
                for alpha in 0..=2 {
                    for a in 1..3 {
                        let c = LocalNum::from_int(&field, a).shift(s);
                        let g = gauss_closed(&c, alpha).unwrap();
                        assert_eq!(g, gauss_brute(&c, alpha).unwrap(), "{kind} s={s} α={alpha}");
                        assert!(norm_squared(&g).is_some());
                    }
                }
            }
        }
    }

    #[test]
    fn shift_invariance_under_the_hypotheses() {
        let field = FieldConfig::padic(3, 14).unwrap();
        let a = LocalNum::from_int(&field, 1).shift(-3);
        let b = LocalNum::from_int(&field, 2).shift(-1);
        assert!(gauss_shift_hypotheses(&a, &b, 1));
        assert!(gauss_shift_invariance(&a, &b, 1).unwrap());
        let b = a.shift(1);
        assert!(gauss_shift_hypotheses(&a, &b, 1) == (2 * (-2) + 3 >= 1));
    }
}
