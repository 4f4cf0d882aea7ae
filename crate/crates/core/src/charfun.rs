//! The additive character `Ψ` and Schwartz–Bruhat step functions on `K^n`.
//!
//! `Ψ` is fixed as `Ψ(x) = e^{2πi·{x/p}}` on `Q_p` and `Ψ(x) = ζ_p^{c_0(x)}`
//! on `F_p((t))`, `c_0` being the coefficient of `t^0`. Both are trivial on
//! `ϖO` and nontrivial on `O`.
//!
//! Sets are finite disjoint unions of cosets `c + (ϖ^d O)^n`; `d` may be
//! negative, so a coset need not lie in `O^n`. A coset is stored by the
//! digits of its center from some lowest position up to `d`, so two cosets
//! are either nested or disjoint and nesting is a prefix test.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{json, Value};

use crate::cyclotomic::CycloNum;
use crate::error::{Error, Result};
use crate::localfield::{FieldConfig, FieldKind, LocalNum};

/// `Ψ(x)` as `(level, e)` meaning `ζ_{p^level}^e`.
pub fn psi_exponent(x: &LocalNum) -> Result<(u32, u64)> {
    let field = x.field();
    let p = field.p() as u64;
    if x.ord_lower() >= 1 {
        return Ok((0, 0));
    }
    if x.abs_prec().is_some_and(|k| k < 1) {
        return Err(Error::PrecisionExhausted(format!("Ψ({x}) needs the digit at ϖ^0")));
    }
    let v = x.ord().expect("nonzero below ϖ^1");
    match field.kind() {
        FieldKind::Laurent => Ok((1, x.digit_at(0)? as u64)),
        FieldKind::Padic => {
            let k = (1 - v) as u32;
            let digits = x.digits();
            let mut u: u64 = 0;
            for i in (0..k as usize).rev() {
                u = u
                    .checked_mul(p)
                    .and_then(|t| t.checked_add(digits[i] as u64))
                    .ok_or(Error::Overflow)?;
            }
            Ok((k, u))
        }
    }
}

/// The additive character.
pub fn psi(x: &LocalNum) -> Result<CycloNum> {
    let (level, e) = psi_exponent(x)?;
    Ok(CycloNum::zeta_pow(x.field().p(), level, e as i64))
}

/// Depth `β` such that `u ↦ Ψ(λu²)` is constant on cosets of `ϖ^β O`
/// inside `O`: `β = max{0, 1 - ord λ, ⌈(1 - ord λ)/2⌉}`, and `0` for `λ = 0`.
pub fn psi_square_depth(lambda: &LocalNum) -> i64 {
    match lambda.ord() {
        None => 0,
        Some(v) => {
            let a = 1 - v;
            0.max(a).max(a.div_euclid(2) + a.rem_euclid(2))
        }
    }
}

/// The coset `c + (ϖ^d O)^n`, recorded by the digits of each coordinate of
/// `c` at positions `low..d`. `low` is canonical: the smallest position
/// carrying a nonzero digit, but never above `min(0, d)`. Digits below `low`
/// are zero, so cosets inside `O^n` have `low = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    low: i64,
    digits: Vec<Vec<u32>>,
}

impl Cell {
    /// The whole of `O^n`.
    pub fn whole(n: usize) -> Self {
        Cell { low: 0, digits: vec![Vec::new(); n] }
    }

    /// The polydisc `(ϖ^d O)^n`.
    pub fn polydisc(n: usize, d: i64) -> Self {
        if d >= 0 {
            Cell { low: 0, digits: vec![vec![0; d as usize]; n] }
        } else {
            Cell { low: d, digits: vec![Vec::new(); n] }
        }
    }

    pub fn new(center: &[LocalNum], depth: i64) -> Result<Self> {
        let low = center.iter().map(|c| c.ord_lower()).fold(0i64.min(depth), i64::min);
        let digits = center
            .iter()
            .map(|c| (low..depth).map(|k| c.digit_at(k)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        Ok(Cell::from_digits(low, digits))
    }

    /// Builds from digits at positions `low, low+1, ...` (all coordinates
    /// carry the same number of digits).
    pub fn from_digits(low: i64, digits: Vec<Vec<u32>>) -> Self {
        let len = digits.first().map_or(0, |v| v.len());
        assert!(digits.iter().all(|v| v.len() == len), "ragged cell digits");
        let mut c = Cell { low, digits };
        c.canonicalize();
        c
    }

    fn canonicalize(&mut self) {
        let depth = self.depth();
        while self.low < 0.min(depth)
            && !self.digits[0].is_empty()
            && self.digits.iter().all(|d| d[0] == 0)
        {
            for d in self.digits.iter_mut() {
                d.remove(0);
            }
            self.low += 1;
        }
        // a coset inside O^n never needs digits below position 0
        if self.low > 0 {
            let pad = self.low as usize;
            for d in self.digits.iter_mut() {
                d.splice(0..0, std::iter::repeat_n(0, pad));
            }
            self.low = 0;
        }
    }

    pub fn nvars(&self) -> usize {
        self.digits.len()
    }

    pub fn depth(&self) -> i64 {
        self.low + self.digits.first().map_or(0, |v| v.len() as i64)
    }

    /// Lowest recorded digit position.
    pub fn low(&self) -> i64 {
        self.low
    }

    /// Digit of coordinate `i` at absolute position `pos < depth`.
    pub fn digit(&self, i: usize, pos: i64) -> u32 {
        if pos < self.low {
            0
        } else {
            self.digits[i][(pos - self.low) as usize]
        }
    }

    /// Digits at positions `0..depth` of each coordinate, for cosets in `O^n`.
    pub fn integral_digits(&self) -> &[Vec<u32>] {
        debug_assert_eq!(self.low, 0);
        &self.digits
    }

    pub fn is_integral(&self) -> bool {
        self.low == 0 && self.depth() >= 0
    }

    /// Exact center whose digits beyond the depth are zero.
    pub fn center(&self, field: &FieldConfig) -> Vec<LocalNum> {
        self.digits
            .iter()
            .map(|d| {
                let mut full = d.clone();
                full.resize(full.len().max(field.precision() as usize), 0);
                let v = LocalNum::from_digits(field, self.low, &full);
                if v.is_zero() {
                    LocalNum::zero(field)
                } else {
                    v
                }
            })
            .collect()
    }

    /// `true` when `other ⊆ self`.
    pub fn contains_cell(&self, other: &Cell) -> bool {
        let d = self.depth();
        if other.depth() < d {
            return false;
        }
        let from = self.low.min(other.low);
        (0..self.nvars()).all(|i| (from..d).all(|pos| self.digit(i, pos) == other.digit(i, pos)))
    }

    pub fn intersects(&self, other: &Cell) -> bool {
        self.contains_cell(other) || other.contains_cell(self)
    }

    pub fn contains(&self, x: &[LocalNum]) -> Result<bool> {
        let d = self.depth();
        for (i, xi) in x.iter().enumerate() {
            if xi.ord_lower() < self.low.min(d) {
                return Ok(false);
            }
            for pos in self.low..d {
                if xi.digit_at(pos)? != self.digit(i, pos) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// The `p^n` cosets one level deeper.
    pub fn children(&self, p: u32) -> Vec<Cell> {
        let n = self.nvars();
        let total = (p as usize).pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut digits = self.digits.clone();
                for d in digits.iter_mut() {
                    d.push((idx % p as usize) as u32);
                    idx /= p as usize;
                }
                Cell::from_digits(self.low, digits)
            })
            .collect()
    }

    pub fn parent(&self) -> Cell {
        if self.digits.first().is_some_and(|d| !d.is_empty()) {
            let digits = self.digits.iter().map(|d| d[..d.len() - 1].to_vec()).collect();
            Cell::from_digits(self.low, digits)
        } else {
            Cell { low: self.low - 1, digits: self.digits.clone() }
        }
    }

    /// All subcosets at depth `m ≥ depth`.
    pub fn refine_to(&self, p: u32, m: i64) -> Vec<Cell> {
        let mut cur = vec![self.clone()];
        for _ in self.depth()..m {
            cur = cur.iter().flat_map(|c| c.children(p)).collect();
        }
        cur
    }

    /// Image under `x ↦ -x`.
    pub fn negate(&self, field: &FieldConfig) -> Cell {
        let d = self.depth();
        let center: Vec<LocalNum> = self.center(field).iter().map(LocalNum::neg).collect();
        Cell::new(&center, d).expect("exact center")
    }

    /// Haar volume `p^{-n d}`.
    pub fn volume(&self, p: u32) -> BigRational {
        let k = self.nvars() as i64 * self.depth();
        let pk = BigInt::from(p).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            BigRational::new(BigInt::one(), pk)
        } else {
            BigRational::from_integer(pk)
        }
    }

    fn to_json(&self, field: &FieldConfig) -> Value {
        let center: Vec<String> = self
            .digits
            .iter()
            .map(|d| {
                if d.iter().all(|&x| x == 0) {
                    "0".to_string()
                } else {
                    LocalNum::from_digits(field, self.low, d).to_string()
                }
            })
            .collect();
        json!({"center": center, "depth": self.depth()})
    }

    fn from_json(field: &FieldConfig, n: usize, v: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("cell: {m}"));
        let depth = v.get("depth").and_then(Value::as_i64).ok_or_else(|| bad("missing depth"))?;
        let center = v.get("center").and_then(Value::as_array).ok_or_else(|| bad("missing center"))?;
        if center.len() != n {
            return Err(bad("center has the wrong length"));
        }
        let coords = center
            .iter()
            .map(|c| {
                let s = c.as_str().ok_or_else(|| bad("center entries are strings"))?;
                parse_point(field, s)
            })
            .collect::<Result<Vec<_>>>()?;
        Cell::new(&coords, depth)
    }
}

/// Parses a coordinate written either in the local-number text form or as a
/// rational `a/b`.
pub fn parse_point(field: &FieldConfig, s: &str) -> Result<LocalNum> {
    let t = s.trim();
    if let Ok(v) = LocalNum::parse(field, t) {
        return Ok(v);
    }
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::ParseLocal(s.to_string()))?;
    let d: BigInt = d.parse().map_err(|_| Error::ParseLocal(s.to_string()))?;
    LocalNum::from_rational(field, &n, &d)
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.low.cmp(&other.low))
            .then_with(|| self.digits.cmp(&other.digits))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `a ∖ b` for nested-or-disjoint cosets, as disjoint cosets.
fn cell_minus(a: &Cell, b: &Cell, p: u32) -> Vec<Cell> {
    if b.contains_cell(a) {
        return Vec::new();
    }
    if !a.contains_cell(b) {
        return vec![a.clone()];
    }
    let mut out = Vec::new();
    for child in a.children(p) {
        out.extend(cell_minus(&child, b, p));
    }
    out
}

/// Finite disjoint union of cosets in `O^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    field: FieldConfig,
    n: usize,
    cells: Vec<Cell>,
}

impl Region {
    pub fn new(field: &FieldConfig, n: usize, cells: Vec<Cell>) -> Result<Self> {
        for c in &cells {
            if c.nvars() != n {
                return Err(Error::Invalid("cell dimension differs from region".into()));
            }
            if !c.is_integral() {
                return Err(Error::Invalid("region cells must lie in O^n".into()));
            }
        }
        for (i, a) in cells.iter().enumerate() {
            if cells[i + 1..].iter().any(|b| a.intersects(b)) {
                return Err(Error::OverlappingCells);
            }
        }
        let mut cells = cells;
        cells.sort();
        Ok(Region { field: field.clone(), n, cells })
    }

    pub fn whole(field: &FieldConfig, n: usize) -> Self {
        Region { field: field.clone(), n, cells: vec![Cell::whole(n)] }
    }

    pub fn ball(field: &FieldConfig, center: &[LocalNum], depth: i64) -> Result<Self> {
        Self::new(field, center.len(), vec![Cell::new(center, depth)?])
    }

    pub fn empty(field: &FieldConfig, n: usize) -> Self {
        Region { field: field.clone(), n, cells: Vec::new() }
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn max_depth(&self) -> i64 {
        self.cells.iter().map(Cell::depth).max().unwrap_or(0)
    }

    pub fn contains(&self, x: &[LocalNum]) -> Result<bool> {
        for c in &self.cells {
            if c.contains(x)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `true` when the coset lies inside the region.
    pub fn contains_cell(&self, cell: &Cell) -> bool {
        let mut rest = vec![cell.clone()];
        for c in &self.cells {
            rest = rest.iter().flat_map(|r| cell_minus(r, c, self.field.p())).collect();
            if rest.is_empty() {
                return true;
            }
        }
        rest.is_empty()
    }

    pub fn subtract_cell(&self, ball: &Cell) -> Self {
        let p = self.field.p();
        let mut cells: Vec<Cell> = self.cells.iter().flat_map(|c| cell_minus(c, ball, p)).collect();
        cells.sort();
        Region { field: self.field.clone(), n: self.n, cells }
    }

    pub fn intersect(&self, other: &Region) -> Self {
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if a.contains_cell(b) {
                    cells.push(b.clone());
                } else if b.contains_cell(a) {
                    cells.push(a.clone());
                }
            }
        }
        cells.sort();
        cells.dedup();
        Region { field: self.field.clone(), n: self.n, cells }
    }

    pub fn volume(&self) -> BigRational {
        self.cells.iter().map(|c| c.volume(self.field.p())).sum()
    }

    pub fn indicator(&self) -> StepFunction {
        let p = self.field.p();
        StepFunction::from_disjoint(
            &self.field,
            self.n,
            self.cells.iter().map(|c| (c.clone(), CycloNum::one(p))).collect(),
        )
    }

    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "cells": self.cells.iter().map(|c| c.to_json(&self.field)).collect::<Vec<_>>()})
    }

    pub fn from_json(field: &FieldConfig, v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or(Error::Invalid("region: missing n".into()))?
            as usize;
        let cells = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or(Error::Invalid("region: missing cells".into()))?
            .iter()
            .map(|c| Cell::from_json(field, n, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, n, cells)
    }
}

/// Locally constant function with bounded support: disjoint cosets carrying
/// cyclotomic values. Stored in a normal form (no zero cells, complete
/// sibling families with equal values merged, cells sorted).
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    field: FieldConfig,
    n: usize,
    cells: Vec<(Cell, CycloNum)>,
}

impl StepFunction {
    pub fn zero(field: &FieldConfig, n: usize) -> Self {
        StepFunction { field: field.clone(), n, cells: Vec::new() }
    }

    /// Builds from disjoint cells; overlapping input is rejected.
    pub fn new(field: &FieldConfig, n: usize, cells: Vec<(Cell, CycloNum)>) -> Result<Self> {
        for (c, v) in &cells {
            if c.nvars() != n {
                return Err(Error::Invalid("cell dimension differs from function".into()));
            }
            if v.p() != field.p() {
                return Err(Error::PrimeMismatch);
            }
        }
        for (i, (a, _)) in cells.iter().enumerate() {
            if cells[i + 1..].iter().any(|(b, _)| a.intersects(b)) {
                return Err(Error::OverlappingCells);
            }
        }
        Ok(Self::from_disjoint(field, n, cells))
    }

    pub(crate) fn from_disjoint(field: &FieldConfig, n: usize, cells: Vec<(Cell, CycloNum)>) -> Self {
        let mut f = StepFunction { field: field.clone(), n, cells };
        f.normalize();
        f
    }

    /// Sum of possibly overlapping weighted indicators.
    pub fn from_overlapping(field: &FieldConfig, n: usize, cells: Vec<(Cell, CycloNum)>) -> Self {
        let p = field.p();
        let mut merged: BTreeMap<Cell, CycloNum> = BTreeMap::new();
        for (c, v) in cells {
            let slot = merged.entry(c).or_insert_with(|| CycloNum::zero(p));
            *slot = &*slot + &v;
        }
        let family: Vec<(Cell, CycloNum)> = merged.into_iter().collect();
        let mut out = Vec::new();
        for (x, _) in &family {
            let total = family
                .iter()
                .filter(|(y, _)| y.contains_cell(x))
                .fold(CycloNum::zero(p), |acc, (_, v)| &acc + v);
            let mut pieces = vec![x.clone()];
            for (y, _) in &family {
                if y != x && x.contains_cell(y) {
                    pieces = pieces.iter().flat_map(|c| cell_minus(c, y, p)).collect();
                }
            }
            out.extend(pieces.into_iter().map(|c| (c, total.clone())));
        }
        Self::from_disjoint(field, n, out)
    }

    pub fn indicator(field: &FieldConfig, center: &[LocalNum], depth: i64) -> Result<Self> {
        let cell = Cell::new(center, depth)?;
        Ok(Self::from_disjoint(field, center.len(), vec![(cell, CycloNum::one(field.p()))]))
    }

    fn normalize(&mut self) {
        let p = self.field.p();
        let siblings = (p as usize).pow(self.n as u32);
        let mut map: BTreeMap<Cell, CycloNum> =
            self.cells.drain(..).filter(|(_, v)| !v.is_zero()).collect();
        loop {
            let mut groups: BTreeMap<Cell, Vec<Cell>> = BTreeMap::new();
            for c in map.keys() {
                groups.entry(c.parent()).or_default().push(c.clone());
            }
            let mut changed = false;
            for (par, kids) in groups {
                if kids.len() != siblings {
                    continue;
                }
                let v = map[&kids[0]].clone();
                if kids.iter().all(|k| map[k] == v) {
                    for k in &kids {
                        map.remove(k);
                    }
                    map.insert(par, v);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        self.cells = map.into_iter().collect();
    }

    pub fn field(&self) -> &FieldConfig {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[(Cell, CycloNum)] {
        &self.cells
    }

    pub fn max_depth(&self) -> i64 {
        self.cells.iter().map(|(c, _)| c.depth()).max().unwrap_or(0)
    }

    /// Lowest digit position used by any cell (`≤ 0`).
    pub fn min_low(&self) -> i64 {
        self.cells.iter().map(|(c, _)| c.low()).min().unwrap_or(0)
    }

    pub fn support(&self) -> Region {
        Region {
            field: self.field.clone(),
            n: self.n,
            cells: self.cells.iter().map(|(c, _)| c.clone()).collect(),
        }
    }

    pub fn eval(&self, x: &[LocalNum]) -> Result<CycloNum> {
        for (c, v) in &self.cells {
            if c.contains(x)? {
                return Ok(v.clone());
            }
        }
        Ok(CycloNum::zero(self.field.p()))
    }

    /// Value on a coset that lies inside a single cell or outside the support.
    pub fn value_on(&self, cell: &Cell) -> CycloNum {
        self.cells
            .iter()
            .find(|(c, _)| c.contains_cell(cell))
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| CycloNum::zero(self.field.p()))
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ConfigMismatch);
        }
        if self.n != other.n {
            return Err(Error::Invalid("step functions in different dimensions".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let cells = self.cells.iter().chain(&other.cells).cloned().collect();
        Ok(Self::from_overlapping(&self.field, self.n, cells))
    }

    pub fn scale(&self, c: &CycloNum) -> Self {
        let cells = self.cells.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        Self::from_disjoint(&self.field, self.n, cells)
    }

    pub fn neg(&self) -> Self {
        self.scale(&CycloNum::from_int(self.field.p(), -1))
    }

    /// Pointwise product; on overlapping cells the deeper coset carries the
    /// product of the two values.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut cells = Vec::new();
        for (a, va) in &self.cells {
            for (b, vb) in &other.cells {
                if a.contains_cell(b) {
                    cells.push((b.clone(), va * vb));
                } else if b.contains_cell(a) {
                    cells.push((a.clone(), va * vb));
                }
            }
        }
        Ok(Self::from_disjoint(&self.field, self.n, cells))
    }

    pub fn restrict(&self, omega: &Region) -> Result<Self> {
        if omega.n != self.n {
            return Err(Error::Invalid("region dimension differs".into()));
        }
        self.product(&omega.indicator())
    }

    /// `x ↦ φ(-x)`.
    pub fn reflect(&self) -> Self {
        let cells = self.cells.iter().map(|(c, v)| (c.negate(&self.field), v.clone())).collect();
        Self::from_disjoint(&self.field, self.n, cells)
    }

    /// The same function written on cosets of depth exactly `m`.
    pub fn refine_to(&self, m: i64) -> Vec<(Cell, CycloNum)> {
        let p = self.field.p();
        self.cells
            .iter()
            .flat_map(|(c, v)| {
                if c.depth() >= m {
                    vec![(c.clone(), v.clone())]
                } else {
                    c.refine_to(p, m).into_iter().map(|k| (k, v.clone())).collect()
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let cells: Vec<Value> = self
            .cells
            .iter()
            .map(|(c, v)| {
                let mut j = c.to_json(&self.field);
                j["value"] = serde_json::to_value(v).expect("serializable");
                j
            })
            .collect();
        json!({"n": self.n, "cells": cells})
    }

    pub fn from_json(field: &FieldConfig, v: &Value) -> Result<Self> {
        let n = v.get("n").and_then(Value::as_u64).ok_or(Error::Invalid("step function: missing n".into()))?
            as usize;
        let arr = v
            .get("cells")
            .and_then(Value::as_array)
            .ok_or(Error::Invalid("step function: missing cells".into()))?;
        let cells = arr
            .iter()
            .map(|c| {
                let cell = Cell::from_json(field, n, c)?;
                let value = match c.get("value") {
                    None => CycloNum::one(field.p()),
                    Some(Value::String(s)) => CycloNum::from_rational(
                        field.p(),
                        s.parse::<BigRational>().map_err(|_| Error::Invalid(format!("value {s}")))?,
                    ),
                    Some(Value::Number(x)) => CycloNum::from_int(
                        field.p(),
                        x.as_i64().ok_or(Error::Invalid(format!("value {x}")))?,
                    ),
                    Some(obj) => serde_json::from_value(obj.clone())
                        .map_err(|e| Error::Invalid(format!("value: {e}")))?,
                };
                Ok((cell, value))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(field, n, cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: u32) -> FieldConfig {
        FieldConfig::padic(p, 10).unwrap()
    }

    #[test]
    fn character_normalization() {
        let f = q(5);
        assert_eq!(psi(&LocalNum::from_int(&f, 5 * 7)).unwrap(), CycloNum::one(5));
        assert_eq!(psi(&LocalNum::one(&f)).unwrap(), CycloNum::zeta_pow(5, 1, 1));
        let x = LocalNum::from_ratio(&f, 7, 25).unwrap();
        assert_eq!(psi(&x).unwrap(), CycloNum::zeta_pow(5, 3, 7));
        let l = FieldConfig::laurent(5, 6).unwrap();
        let y = LocalNum::from_digits(&l, -1, &[3, 2, 0, 0]);
        assert_eq!(psi(&y).unwrap(), CycloNum::zeta_pow(5, 1, 2));
    }

    #[test]
    fn character_needs_units_digit() {
        let f = q(3);
        let x = LocalNum::from_digits(&f, -3, &[1, 2]);
        assert!(matches!(psi(&x), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn square_depth_formula() {
        let f = q(3);
        assert_eq!(psi_square_depth(&LocalNum::zero(&f)), 0);
        assert_eq!(psi_square_depth(&LocalNum::from_ratio(&f, 1, 27).unwrap()), 4);
        assert_eq!(psi_square_depth(&LocalNum::from_int(&f, 9)), 0);
    }

    #[test]
    fn square_depth_guarantee_exhaustive() {
        let f = q(3);
        let lambda = LocalNum::from_ratio(&f, 2, 9).unwrap();
        let beta = psi_square_depth(&lambda);
        let m = 3i64.pow(4);
        for u in 0..m {
            let base = psi(&lambda.mul(&LocalNum::from_int(&f, u * u)).unwrap()).unwrap();
            for h in [1i64, 2] {
                let h = h * 3i64.pow(beta as u32);
                let shifted = LocalNum::from_int(&f, (u + h) * (u + h));
                assert_eq!(psi(&lambda.mul(&shifted).unwrap()).unwrap(), base);
            }
        }
    }

    #[test]
    fn indicator_products_and_eval() {
        let f = q(3);
        let zero = [LocalNum::zero(&f)];
        let o = StepFunction::indicator(&f, &zero, 0).unwrap();
        let po = StepFunction::indicator(&f, &zero, 1).unwrap();
        assert_eq!(o.product(&po).unwrap(), po);
        let deep = StepFunction::indicator(&f, &zero, 2).unwrap();
        assert_eq!(deep.eval(&[LocalNum::from_int(&f, 27)]).unwrap(), CycloNum::one(3));
        assert!(deep.eval(&[LocalNum::one(&f)]).unwrap().is_zero());
    }

    #[test]
    fn siblings_merge() {
        let f = q(3);
        let cells: Vec<(Cell, CycloNum)> = Cell::whole(1)
            .children(3)
            .into_iter()
            .map(|c| (c, CycloNum::from_int(3, 2)))
            .collect();
        let g = StepFunction::new(&f, 1, cells).unwrap();
        assert_eq!(g.cells().len(), 1);
        assert_eq!(g.cells()[0].0.depth(), 0);
    }

    #[test]
    fn overlapping_rejected_and_summed() {
        let f = q(3);
        let a = Cell::whole(1);
        let b = Cell::new(&[LocalNum::one(&f)], 1).unwrap();
        let v = CycloNum::one(3);
        assert_eq!(
            StepFunction::new(&f, 1, vec![(a.clone(), v.clone()), (b.clone(), v.clone())]),
            Err(Error::OverlappingCells)
        );
        let s = StepFunction::from_overlapping(&f, 1, vec![(a, v.clone()), (b, v)]);
        assert_eq!(s.eval(&[LocalNum::one(&f)]).unwrap(), CycloNum::from_int(3, 2));
        assert_eq!(s.eval(&[LocalNum::zero(&f)]).unwrap(), CycloNum::one(3));
    }

    #[test]
    fn region_subtraction() {
        let f = q(5);
        let o = Region::whole(&f, 1);
        let ball = Cell::new(&[LocalNum::zero(&f)], 2).unwrap();
        let r = o.subtract_cell(&ball);
        assert_eq!(r.cells().len(), 4 + 4);
        assert_eq!(r.volume(), BigRational::new(24.into(), 25.into()));
        assert!(!r.contains(&[LocalNum::from_int(&f, 25)]).unwrap());
        assert!(r.contains(&[LocalNum::from_int(&f, 5)]).unwrap());
    }

    #[test]
    fn reflection() {
        let f = q(5);
        let g = StepFunction::indicator(&f, &[LocalNum::one(&f)], 1).unwrap();
        let r = g.reflect();
        assert_eq!(r.eval(&[LocalNum::from_int(&f, -1)]).unwrap(), CycloNum::one(5));
    }

    #[test]
    fn json_round_trip() {
        let f = q(7);
        let g = StepFunction::indicator(&f, &[LocalNum::from_int(&f, 8), LocalNum::zero(&f)], 2)
            .unwrap()
            .scale(&CycloNum::zeta_pow(7, 1, 3));
        let j = g.to_json();
        assert_eq!(StepFunction::from_json(&f, &j).unwrap(), g);
        let r = Region::whole(&f, 2).subtract_cell(&Cell::whole(2).children(7)[0]);
        assert_eq!(Region::from_json(&f, &r.to_json()).unwrap(), r);
    }

    #[test]
    fn cells_outside_the_integers() {
        let f = FieldConfig::padic(3, 8).unwrap();
        let third = LocalNum::from_ratio(&f, 1, 3).unwrap();
        let c = Cell::new(std::slice::from_ref(&third), 0).unwrap();
        assert_eq!((c.low(), c.depth()), (-1, 0));
        assert!(c.contains(&[third.add(&LocalNum::from_int(&f, 5)).unwrap()]).unwrap());
        assert!(!c.contains(&[LocalNum::from_int(&f, 5)]).unwrap());
        let big = Cell::polydisc(1, -1);
        assert!(big.contains_cell(&c));
        assert!(big.contains_cell(&Cell::whole(1)));
        assert!(!c.contains_cell(&Cell::whole(1)));
        assert_eq!(big.volume(3), BigRational::from_integer(3.into()));
        assert_eq!(Cell::whole(1).parent(), big);
        // the three translates of O by k/3 merge into (3^{-1} O)
        let kids: Vec<_> = big.children(3).into_iter().map(|k| (k, CycloNum::one(3))).collect();
        let g = StepFunction::new(&f, 1, kids).unwrap();
        assert_eq!(g.cells().len(), 1);
        assert_eq!(g.cells()[0].0, big);
        let neg = c.negate(&f);
        assert_eq!(neg.digit(0, -1), 2);
        assert!(Region::new(&f, 1, vec![c]).is_err());
    }
}
