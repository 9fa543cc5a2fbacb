//! Boundary data and exact evaluation of the partition function `W_{M,N}`.
//!
//! The lattice has `N` rows and `M` columns. Horizontal line `j` (0 at the
//! top) starts at the vertex `j·ê1` and ends at `M·ê1 + j·ê2`; along the way
//! it takes exactly `j` steps `ê2`, the rest `ê1`. A line is therefore encoded
//! as a bitmask of the columns carrying an `ê2` step. The top line is empty
//! and the bottom line is `{x_1, …, x_N}`. Row `j` carries the spectral
//! parameter `u_{N-j}` and column `c` the inhomogeneity `v_c`.
//!
//! The corner vector of the lattice is the origin and `ω12 = a12`, so every
//! `a_jk` a face sees is `±(a12 + i + j)` for vertex `(column i, line j)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{relative_residual, BracketEval, EllipticContext};
use crate::error::{Error, Result};
use crate::face::{face_weight_with, FaceLabel, ModelConstants, StateVector};

/// Largest supported number of columns.
pub const MAX_COLUMNS: usize = 30;

/// Default cap on the number of chains the brute-force enumerator may visit.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundarySpec {
    m: usize,
    n: usize,
    x: Vec<usize>,
}

impl BoundarySpec {
    pub fn new(m: usize, n: usize, x: Vec<usize>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSpec(format!("M = {m} and N = {n} must be positive")));
        }
        if n > m {
            return Err(Error::InvalidSpec(format!("N = {n} exceeds M = {m}")));
        }
        if m > MAX_COLUMNS {
            return Err(Error::InvalidSpec(format!("M = {m} exceeds the supported {MAX_COLUMNS} columns")));
        }
        if x.len() != n {
            return Err(Error::InvalidSpec(format!("expected {n} boundary positions, got {}", x.len())));
        }
        if x[0] < 1 || x[n - 1] > m {
            return Err(Error::InvalidSpec(format!("boundary positions {x:?} must lie in 1..={m}")));
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSpec(format!("boundary positions {x:?} must be strictly increasing")));
        }
        Ok(Self { m, n, x })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> &[usize] {
        &self.x
    }

    /// `x^M_k` for `k = 1..=N+1`: `x_k` for `k ≤ N` and `M + 1` for `k = N + 1`.
    pub fn x_m(&self, k: usize) -> usize {
        if k == self.n + 1 {
            self.m + 1
        } else {
            self.x[k - 1]
        }
    }

    /// Whether the last bottom `ê2` step sits in the last column.
    pub fn ends_in_last_column(&self) -> bool {
        self.x[self.n - 1] == self.m
    }

    pub fn bottom_line(&self) -> LineState {
        LineState::from_positions(&self.x)
    }

    /// Every spec with `N ≤ n_max` and `M` columns, in lexicographic order.
    pub fn all_with_columns(m: usize, n_max: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for n in 1..=n_max.min(m) {
            for mask in subsets(m, n) {
                out.push(Self::new(m, n, mask_positions(mask)).expect("generated spec is valid"));
            }
        }
        out
    }
}

impl std::fmt::Display for BoundarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let xs: Vec<String> = self.x.iter().map(|x| x.to_string()).collect();
        write!(f, "({},{},[{}])", self.m, self.n, xs.join(","))
    }
}

/// Spectral parameters `u_1..u_N`, inhomogeneities `v_1..v_M` and `a12`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub a12: Complex64,
}

impl ModelParams {
    pub fn new(u: Vec<Complex64>, v: Vec<Complex64>, a12: Complex64) -> Self {
        Self { u, v, a12 }
    }

    pub fn check_against(&self, spec: &BoundarySpec) -> Result<()> {
        if self.u.len() != spec.n() || self.v.len() != spec.m() {
            return Err(Error::Params(format!(
                "spec {spec} needs {} spectral and {} inhomogeneity parameters, got {} and {}",
                spec.n(),
                spec.m(),
                self.u.len(),
                self.v.len()
            )));
        }
        Ok(())
    }

    pub fn constants(&self) -> ModelConstants {
        ModelConstants::new(self.a12)
    }

    /// Copy with `u_j` and `u_{j+1}` exchanged (0-based `j`).
    pub fn swapped(&self, j: usize) -> Self {
        let mut out = self.clone();
        out.u.swap(j, j + 1);
        out
    }

    /// Copy with the last inhomogeneity replaced.
    pub fn with_last_v(&self, value: Complex64) -> Self {
        let mut out = self.clone();
        if let Some(last) = out.v.last_mut() {
            *last = value;
        }
        out
    }
}

/// The `ê2` step positions of one horizontal line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LineState {
    mask: u32,
    level: usize,
}

impl LineState {
    pub fn new(mask: u32, level: usize) -> Result<Self> {
        if mask.count_ones() as usize != level {
            return Err(Error::Precondition(format!(
                "line with mask {mask:#b} has {} steps, expected {level}",
                mask.count_ones()
            )));
        }
        Ok(Self { mask, level })
    }

    pub fn empty() -> Self {
        Self { mask: 0, level: 0 }
    }

    /// From 1-based column positions.
    pub fn from_positions(positions: &[usize]) -> Self {
        let mask = positions.iter().fold(0u32, |acc, &p| acc | 1 << (p - 1));
        Self { mask, level: positions.len() }
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn positions(&self) -> Vec<usize> {
        mask_positions(self.mask)
    }
}

fn mask_positions(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect()
}

/// All `k`-subsets of `width` bits in increasing numeric order.
fn subsets(width: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << width;
    let first: u64 = if k > width { limit } else { (1u64 << k) - 1 };
    std::iter::successors(Some(first), move |&s| {
        if s == 0 {
            return None;
        }
        let c = s & s.wrapping_neg();
        let r = s + c;
        Some((((r ^ s) >> 2) / c) | r)
    })
    .take_while(move |&s| s < limit)
    .map(|s| s as u32)
}

/// Vertex vectors `base + level·ê1 + Σ steps` along a line.
pub fn line_vertices(s: &LineState, spec: &BoundarySpec, base: StateVector) -> Vec<StateVector> {
    Line { left: base + s.level as i64 * StateVector::E1, mask: s.mask }.vertices(spec.m())
}

/// A line of a (sub)lattice: its left vertex and `ê2` mask.
#[derive(Debug, Clone, Copy)]
struct Line {
    left: StateVector,
    mask: u32,
}

impl Line {
    fn vertices(&self, width: usize) -> Vec<StateVector> {
        let mut out = Vec::with_capacity(width + 1);
        let mut cur = self.left;
        out.push(cur);
        for col in 0..width {
            cur = cur + if self.mask >> col & 1 == 1 { StateVector::E2 } else { StateVector::E1 };
            out.push(cur);
        }
        out
    }
}

fn row_weight_lines<B: BracketEval>(
    top: &Line,
    bottom: &Line,
    u: Complex64,
    v: &[Complex64],
    consts: &ModelConstants,
    br: &mut B,
) -> Result<Complex64> {
    let width = v.len();
    let upper = top.vertices(width);
    let lower = bottom.vertices(width);
    let mut acc = Complex64::new(1.0, 0.0);
    for col in 0..width {
        let face = FaceLabel {
            a: upper[col],
            b: upper[col + 1],
            c: lower[col],
            d: lower[col + 1],
            u,
            v: v[col],
        };
        let w = face_weight_with(&face, consts, br)?;
        if w == Complex64::new(0.0, 0.0) {
            return Ok(w);
        }
        acc *= w;
    }
    Ok(acc)
}

/// Product of the `M` face weights between two consecutive lines of the full
/// lattice (corner vector at the origin, `ω12` from `consts`).
pub fn row_weight(
    top: &LineState,
    bottom: &LineState,
    u: Complex64,
    v: &[Complex64],
    consts: &ModelConstants,
    ctx: &EllipticContext,
) -> Result<Complex64> {
    if bottom.level != top.level + 1 {
        return Err(Error::Precondition(format!(
            "row needs consecutive levels, got {} and {}",
            top.level, bottom.level
        )));
    }
    let t = Line { left: top.level as i64 * StateVector::E1, mask: top.mask };
    let b = Line { left: bottom.level as i64 * StateVector::E1, mask: bottom.mask };
    let mut br = ctx;
    row_weight_lines(&t, &b, u, v, consts, &mut br)
}

/// A rectangular strip of faces with fixed top and bottom lines.
///
/// Line `i` starts at `lefts[i]` and has `steps[i]` `ê2` steps; row `i` (between
/// lines `i` and `i+1`) carries `row_u[i]`.
struct Strip<'a> {
    width: usize,
    lefts: Vec<StateVector>,
    steps: Vec<usize>,
    first: u32,
    last: u32,
    row_u: Vec<Complex64>,
    v: &'a [Complex64],
    consts: ModelConstants,
}

impl<'a> Strip<'a> {
    fn full(spec: &BoundarySpec, p: &'a ModelParams) -> Self {
        let n = spec.n();
        Self {
            width: spec.m(),
            lefts: (0..=n).map(|i| i as i64 * StateVector::E1).collect(),
            steps: (0..=n).collect(),
            first: 0,
            last: spec.bottom_line().mask,
            row_u: (0..n).map(|j| p.u[n - 1 - j]).collect(),
            v: &p.v,
            consts: p.constants(),
        }
    }

    /// The first `M-1` columns of a lattice whose last column turns right at row `j`.
    fn without_last_column(spec: &BoundarySpec, p: &'a ModelParams, j: usize) -> Self {
        let n = spec.n();
        let m = spec.m();
        Self {
            width: m - 1,
            lefts: (0..=n).map(|i| i as i64 * StateVector::E1).collect(),
            steps: (0..=n).map(|i| if i <= j { i } else { i - 1 }).collect(),
            first: 0,
            last: LineState::from_positions(&spec.x()[..n - 1]).mask,
            row_u: (0..n).map(|r| p.u[n - 1 - r]).collect(),
            v: &p.v[..m - 1],
            consts: p.constants(),
        }
    }

    fn rows(&self) -> usize {
        self.row_u.len()
    }

    fn candidates(&self, level: usize) -> Vec<u32> {
        if level == 0 {
            vec![self.first]
        } else if level == self.rows() {
            vec![self.last]
        } else {
            subsets(self.width, self.steps[level]).collect()
        }
    }

    fn chain_count(&self) -> u128 {
        (1..self.rows())
            .map(|l| binomial(self.width, self.steps[l]))
            .fold(1u128, |acc, c| acc.saturating_mul(c))
    }

    fn line(&self, level: usize, mask: u32) -> Line {
        Line { left: self.lefts[level], mask }
    }

    fn row<B: BracketEval>(&self, level: usize, top: u32, bottom: u32, br: &mut B) -> Result<Complex64> {
        row_weight_lines(
            &self.line(level, top),
            &self.line(level + 1, bottom),
            self.row_u[level],
            self.v,
            &self.consts,
            br,
        )
    }

    /// Every chain of lines with a nonzero product, in lexicographic order.
    fn enumerate<B: BracketEval>(&self, cap: u64, br: &mut B) -> Result<Vec<(Vec<u32>, Complex64)>> {
        let chains = self.chain_count();
        if chains > cap as u128 {
            return Err(Error::Capacity { chains, cap });
        }
        let levels: Vec<Vec<u32>> = (0..=self.rows()).map(|l| self.candidates(l)).collect();
        let mut out = Vec::new();
        let mut path = vec![self.first];
        self.descend(&levels, &mut path, Complex64::new(1.0, 0.0), br, &mut out)?;
        Ok(out)
    }

    fn descend<B: BracketEval>(
        &self,
        levels: &[Vec<u32>],
        path: &mut Vec<u32>,
        acc: Complex64,
        br: &mut B,
        out: &mut Vec<(Vec<u32>, Complex64)>,
    ) -> Result<()> {
        let level = path.len() - 1;
        if level == self.rows() {
            out.push((path.clone(), acc));
            return Ok(());
        }
        let top = path[level];
        for &bottom in &levels[level + 1] {
            let w = self.row(level, top, bottom, br)?;
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            path.push(bottom);
            self.descend(levels, path, acc * w, br, out)?;
            path.pop();
        }
        Ok(())
    }

    /// Signed sum over chains together with the sum of the chains' moduli.
    fn transfer<B: BracketEval>(&self, br: &mut B) -> Result<(Complex64, f64)> {
        let zero = Complex64::new(0.0, 0.0);
        let mut amplitudes: BTreeMap<u32, (Complex64, f64)> = BTreeMap::new();
        amplitudes.insert(self.first, (Complex64::new(1.0, 0.0), 1.0));
        for level in 0..self.rows() {
            let bottoms = self.candidates(level + 1);
            let mut next: BTreeMap<u32, (Complex64, f64)> = BTreeMap::new();
            for (&top, &(amp, mag)) in &amplitudes {
                for &bottom in &bottoms {
                    let w = self.row(level, top, bottom, br)?;
                    if w != zero {
                        let slot = next.entry(bottom).or_insert((zero, 0.0));
                        slot.0 += amp * w;
                        slot.1 += mag * w.norm();
                    }
                }
            }
            amplitudes = next;
        }
        Ok(amplitudes.get(&self.last).copied().unwrap_or((zero, 0.0)))
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// One nonzero inner configuration found by the enumerator.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub lines: Vec<LineState>,
    pub weight: Complex64,
}

/// Lists every chain of lines `∅ = s_0, s_1, …, s_N = {x}` with `|s_j| = j`
/// whose product of row weights is nonzero.
pub fn enumerate_configurations(
    spec: &BoundarySpec,
    p: &ModelParams,
    ctx: &EllipticContext,
    cap: u64,
) -> Result<Vec<Configuration>> {
    p.check_against(spec)?;
    let strip = Strip::full(spec, p);
    let mut br = ctx;
    let chains = strip.enumerate(cap, &mut br)?;
    Ok(chains
        .into_iter()
        .map(|(masks, weight)| Configuration {
            lines: masks.iter().enumerate().map(|(level, &mask)| LineState { mask, level }).collect(),
            weight,
        })
        .collect())
}

/// Number of chains the brute-force evaluator has to consider.
pub fn chain_count(spec: &BoundarySpec) -> u128 {
    (1..spec.n()).map(|l| binomial(spec.m(), l)).fold(1u128, |a, c| a.saturating_mul(c))
}

/// `W_{M,N}` by summing over every inner configuration.
pub fn evaluate_w_bruteforce(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Complex64> {
    evaluate_w_bruteforce_capped(spec, p, ctx, DEFAULT_ENUM_CAP)
}

pub fn evaluate_w_bruteforce_capped(
    spec: &BoundarySpec,
    p: &ModelParams,
    ctx: &EllipticContext,
    cap: u64,
) -> Result<Complex64> {
    Ok(enumerate_configurations(spec, p, ctx, cap)?.iter().map(|c| c.weight).sum())
}

/// `W_{M,N}` by line-to-line transfer: an amplitude per line state, updated
/// one row at a time in increasing mask order.
pub fn evaluate_w_dp(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Complex64> {
    p.check_against(spec)?;
    let mut br = ctx;
    Ok(Strip::full(spec, p).transfer(&mut br)?.0)
}

/// `Σ_configurations |weight| / |W|`: how much the lattice sum cancels.
/// Infinite when `W` vanishes.
pub fn lattice_condition(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<f64> {
    p.check_against(spec)?;
    let mut br = ctx;
    let (value, magnitude) = Strip::full(spec, p).transfer(&mut br)?;
    Ok(magnitude / value.norm())
}

/// One-column partition function `W̃_j(u|v_M|a12)` of the last column,
/// whose only `ê1` left edge sits on row `j`:
///
/// ```text
/// [a12+M-1+j-u_{N-j}+v_M]/[a12+M-1+j]
///   · ∏_{k=N-j+1}^{N} [u_k-v_M][a21-M+k-N] / ([1][a21-M+1+k-N])
///   · ∏_{k=1}^{N-j-1} [1-u_k+v_M]/[1]
/// ```
pub fn one_column_w(j: usize, p: &ModelParams, m: usize, ctx: &EllipticContext) -> Result<Complex64> {
    let mut br = ctx;
    one_column_w_with(j, p, m, &mut br)
}

pub(crate) fn one_column_w_with<B: BracketEval>(
    j: usize,
    p: &ModelParams,
    m: usize,
    br: &mut B,
) -> Result<Complex64> {
    let n = p.u.len();
    if j >= n {
        return Err(Error::Index(format!("row index {j} outside 0..{n}")));
    }
    if m == 0 || m > p.v.len() {
        return Err(Error::Index(format!("column {m} outside 1..={}", p.v.len())));
    }
    let one = Complex64::new(1.0, 0.0);
    let u = |k: usize| p.u[k - 1];
    let vm = p.v[m - 1];
    let a12 = p.a12;
    let a21 = -a12;
    let (mf, nf, jf) = (m as f64, n as f64, j as f64);

    let mut acc = br.ratio(a12 + mf - 1.0 + jf - u(n - j) + vm, a12 + mf - 1.0 + jf)?;
    for k in (n - j + 1)..=n {
        let kf = k as f64;
        acc *= br.ratio(u(k) - vm, one)?;
        acc *= br.ratio(a21 - mf + kf - nf, a21 - mf + 1.0 + kf - nf)?;
    }
    for k in 1..(n - j) {
        acc *= br.ratio(one - u(k) + vm, one)?;
    }
    Ok(acc)
}

/// Sub-lattice factor `P_j` of the last-column decomposition, by enumeration.
pub fn decomposition_part(
    j: usize,
    spec: &BoundarySpec,
    p: &ModelParams,
    ctx: &EllipticContext,
    cap: u64,
) -> Result<Complex64> {
    if !spec.ends_in_last_column() {
        return Err(Error::Precondition("the decomposition needs x_N = M".into()));
    }
    if j >= spec.n() {
        return Err(Error::Index(format!("row index {j} outside 0..{}", spec.n())));
    }
    p.check_against(spec)?;
    if spec.m() == 1 {
        // No columns remain: the strip is empty and contributes 1.
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut br = ctx;
    let strip = Strip::without_last_column(spec, p, j);
    Ok(strip.enumerate(cap, &mut br)?.iter().map(|(_, w)| *w).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub direct: Complex64,
    pub decomposed: Complex64,
    pub terms: usize,
    pub residual: f64,
}

/// Compares `W` (transfer evaluation) against `Σ_j P_j · W̃_j`.
pub fn decompose_check(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<DecompositionReport> {
    if !spec.ends_in_last_column() {
        return Err(Error::Precondition("the decomposition needs x_N = M".into()));
    }
    let direct = evaluate_w_dp(spec, p, ctx)?;
    let mut decomposed = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    for j in 0..spec.n() {
        let part = decomposition_part(j, spec, p, ctx, DEFAULT_ENUM_CAP)?;
        decomposed += part * one_column_w(j, p, spec.m(), ctx)?;
        terms += 1;
    }
    Ok(DecompositionReport { direct, decomposed, terms, residual: relative_residual(direct, decomposed) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::DEFAULT_TRUNC_EPS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(q: f64) -> EllipticContext {
        EllipticContext::new(q, Complex64::new(1.0, 0.0), DEFAULT_TRUNC_EPS).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ModelParams {
        let mut z = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3));
        let u = (0..n).map(|_| z()).collect();
        let v = (0..m).map(|_| z()).collect();
        ModelParams::new(u, v, z() + c(0.0, 0.4))
    }

    fn b(ctx: &EllipticContext, z: Complex64) -> Complex64 {
        ctx.bracket(z)
    }

    #[test]
    fn spec_validation() {
        assert!(BoundarySpec::new(3, 2, vec![1, 3]).is_ok());
        assert!(BoundarySpec::new(3, 2, vec![3, 1]).is_err());
        assert!(BoundarySpec::new(3, 2, vec![2, 2]).is_err());
        assert!(BoundarySpec::new(3, 2, vec![0, 3]).is_err());
        assert!(BoundarySpec::new(3, 2, vec![1, 4]).is_err());
        assert!(BoundarySpec::new(2, 3, vec![1, 2, 3]).is_err());
        assert!(BoundarySpec::new(3, 2, vec![1]).is_err());
        assert!(BoundarySpec::new(31, 1, vec![1]).is_err());
        let s = BoundarySpec::new(5, 2, vec![2, 4]).unwrap();
        assert_eq!((s.x_m(1), s.x_m(2), s.x_m(3)), (2, 4, 6));
        assert_eq!(BoundarySpec::all_with_columns(4, 4).len(), 15);
    }

    #[test]
    fn subsets_enumerate_binomially() {
        for w in 0..8 {
            for k in 0..=w {
                let all: Vec<u32> = subsets(w, k).collect();
                assert_eq!(all.len() as u128, binomial(w, k));
                assert!(all.windows(2).all(|p| p[0] < p[1]));
                assert!(all.iter().all(|s| s.count_ones() as usize == k));
            }
        }
    }

    #[test]
    fn line_vertex_reconstruction() {
        let spec = BoundarySpec::new(2, 1, vec![1]).unwrap();
        let o = StateVector::ZERO;
        let e1 = StateVector::E1;
        let e2 = StateVector::E2;
        assert_eq!(line_vertices(&LineState::empty(), &spec, o), vec![o, e1, 2 * e1]);
        let s = LineState::new(0b01, 1).unwrap();
        assert_eq!(line_vertices(&s, &spec, o), vec![e1, e1 + e2, 2 * e1 + e2]);

        // bottom line of (6,4,[1,2,4,6]) ends at M ê1 + N ê2
        let spec = BoundarySpec::new(6, 4, vec![1, 2, 4, 6]).unwrap();
        let verts = line_vertices(&spec.bottom_line(), &spec, o);
        assert_eq!(verts[0], 4 * e1);
        assert_eq!(verts[1], 4 * e1 + e2);
        assert_eq!(verts[2], 4 * e1 + 2 * e2);
        assert_eq!(verts[6], 6 * e1 + 4 * e2);
        assert!(LineState::new(0b11, 1).is_err());
    }

    #[test]
    fn single_face_row() {
        let ctx = ctx(0.3);
        let a12 = c(0.3, 0.45);
        let consts = ModelConstants::new(a12);
        let (u, v) = (c(0.2, 0.1), c(-0.5, 0.05));
        let w = row_weight(&LineState::empty(), &LineState::from_positions(&[1]), u, &[v], &consts, &ctx).unwrap();
        // top = left = ê1, bottom = right = ê2 at the origin: [a12-(u-v)]/[a12]
        let expected = b(&ctx, a12 - (u - v)) / b(&ctx, a12);
        assert!(relative_residual(w, expected) < 1e-14);
    }

    #[test]
    fn two_face_row() {
        let ctx = ctx(0.3);
        let a12 = c(0.3, 0.45);
        let consts = ModelConstants::new(a12);
        let u = c(0.2, 0.1);
        let v = [c(-0.5, 0.05), c(0.6, -0.1)];
        let one = c(1.0, 0.0);
        let w = row_weight(&LineState::empty(), &LineState::from_positions(&[1]), u, &v, &consts, &ctx).unwrap();
        let first = b(&ctx, a12 - (u - v[0])) / b(&ctx, a12);
        // second face: top ê1, left ê2 at vertex ê1 → crossing with a21 = -(a12+1)
        let a21 = -(a12 + 1.0);
        let second = b(&ctx, u - v[1]) * b(&ctx, a21 - one) / (b(&ctx, one) * b(&ctx, a21));
        assert!(relative_residual(w, first * second) < 1e-14);

        let bad = row_weight(&LineState::from_positions(&[2]), &LineState::from_positions(&[1, 2]), u, &v, &consts, &ctx);
        assert!(bad.is_ok());
        let not_adjacent = row_weight(&LineState::empty(), &LineState::from_positions(&[1, 2]), u, &v, &consts, &ctx);
        assert!(matches!(not_adjacent, Err(Error::Precondition(_))));
    }

    #[test]
    fn interlacing_violation_gives_zero() {
        let ctx = ctx(0.3);
        let consts = ModelConstants::new(c(0.3, 0.45));
        let v = [c(-0.5, 0.05), c(0.6, -0.1), c(0.1, 0.2)];
        // top {3}, bottom {1,2}: the vertical edge below column 1 would need two ê2.
        let w = row_weight(
            &LineState::from_positions(&[3]),
            &LineState::from_positions(&[1, 2]),
            c(0.2, 0.1),
            &v,
            &consts,
            &ctx,
        )
        .unwrap();
        assert_eq!(w, c(0.0, 0.0));
    }

    #[test]
    fn single_row_matches_closed_form() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let one = c(1.0, 0.0);
        for m in 1..=6 {
            let p = params(&mut rng, m, 1);
            let spec = BoundarySpec::new(m, 1, vec![m]).unwrap();
            let mf = m as f64;
            let u = p.u[0];
            let mut expected = b(&ctx, -u + p.v[m - 1] + p.a12 + mf - 1.0) / b(&ctx, p.a12 + mf - 1.0);
            for k in 0..m - 1 {
                expected *= b(&ctx, one + u - p.v[k]) / b(&ctx, one);
            }
            let bf = evaluate_w_bruteforce(&spec, &p, &ctx).unwrap();
            let dp = evaluate_w_dp(&spec, &p, &ctx).unwrap();
            assert!(relative_residual(bf, expected) < 1e-13);
            assert!(relative_residual(dp, expected) < 1e-13);
        }
    }

    #[test]
    fn dp_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for q in [0.1, 0.3] {
            let ctx = ctx(q);
            for m in 1..=5 {
                for spec in BoundarySpec::all_with_columns(m, 3) {
                    let p = params(&mut rng, m, spec.n());
                    let bf = evaluate_w_bruteforce(&spec, &p, &ctx).unwrap();
                    let dp = evaluate_w_dp(&spec, &p, &ctx).unwrap();
                    assert!(relative_residual(bf, dp) <= 1e-10, "{spec}: {bf} vs {dp}");
                }
            }
        }
    }

    #[test]
    fn three_configurations_for_w32() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = BoundarySpec::new(3, 2, vec![1, 3]).unwrap();
        let p = params(&mut rng, 3, 2);
        let configs = enumerate_configurations(&spec, &p, &ctx, DEFAULT_ENUM_CAP).unwrap();
        assert_eq!(configs.len(), 3);
        for cfg in &configs {
            assert_eq!(cfg.lines.len(), 3);
            assert_eq!(cfg.lines[2].positions(), vec![1, 3]);
        }
        assert_eq!(chain_count(&spec), 3);
    }

    #[test]
    fn capacity_is_enforced() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = BoundarySpec::new(6, 4, vec![1, 2, 4, 6]).unwrap();
        let p = params(&mut rng, 6, 4);
        assert_eq!(chain_count(&spec), 6 * 15 * 20);
        assert!(matches!(
            evaluate_w_bruteforce_capped(&spec, &p, &ctx, 100),
            Err(Error::Capacity { chains: 1800, cap: 100 })
        ));
    }

    #[test]
    fn one_column_reduces_for_single_row() {
        let ctx = ctx(0.3);
        let p = ModelParams::new(vec![c(0.3, 0.1)], vec![c(0.2, 0.0), c(-0.4, 0.1)], c(0.5, 0.3));
        let w = one_column_w(0, &p, 2, &ctx).unwrap();
        let expected = b(&ctx, p.a12 + 1.0 - p.u[0] + p.v[1]) / b(&ctx, p.a12 + 1.0);
        assert!(relative_residual(w, expected) < 1e-14);
        assert!(matches!(one_column_w(1, &p, 2, &ctx), Err(Error::Index(_))));
    }

    /// Product of the face weights of the last column, read off the lattice.
    fn one_column_from_faces(j: usize, p: &ModelParams, m: usize, ctx: &EllipticContext) -> Complex64 {
        let n = p.u.len();
        let consts = p.constants();
        let e1 = StateVector::E1;
        let e2 = StateVector::E2;
        let corner = (m as i64 - 1) * e1;
        let mut acc = c(1.0, 0.0);
        let mut face = |a, b, cc, d, u| {
            acc *= crate::face::face_weight(&FaceLabel { a, b, c: cc, d, u, v: p.v[m - 1] }, &consts, ctx).unwrap();
        };
        for k in 0..j {
            let k = k as i64;
            face(corner + k * e2, corner + e1 + k * e2, corner + (k + 1) * e2, corner + e1 + (k + 1) * e2, p.u[n - 1 - k as usize]);
        }
        let jj = j as i64;
        face(corner + jj * e2, corner + e1 + jj * e2, corner + e1 + jj * e2, corner + e1 + (jj + 1) * e2, p.u[n - 1 - j]);
        for k in j..n - 1 {
            let kk = k as i64;
            face(corner + e1 + kk * e2, corner + e1 + (kk + 1) * e2, corner + e1 + (kk + 1) * e2, corner + e1 + (kk + 2) * e2, p.u[n - 2 - k]);
        }
        acc
    }

    #[test]
    fn one_column_matches_face_product() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for n in 1..=4 {
            for m in n..=5 {
                let p = params(&mut rng, m, n);
                for j in 0..n {
                    let explicit = one_column_w(j, &p, m, &ctx).unwrap();
                    let faces = one_column_from_faces(j, &p, m, &ctx);
                    assert!(relative_residual(explicit, faces) < 1e-12, "n={n} m={m} j={j}");
                }
            }
        }
    }

    #[test]
    fn one_column_quasi_periods() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for n in 1..=3 {
            let m = 4;
            let p = params(&mut rng, m, n);
            let vm = p.v[m - 1];
            let sum_u: Complex64 = p.u.iter().sum();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for j in 0..n {
                let base = one_column_w(j, &p, m, &ctx).unwrap();
                let real = one_column_w(j, &p.with_last_v(vm + ctx.real_period()), m, &ctx).unwrap();
                assert!(relative_residual(real, base * sign) < 1e-10);
                let nf = n as f64;
                let expo = Complex64::new(0.0, -std::f64::consts::PI) * ctx.lambda() / ctx.k1()
                    * (vm * nf - sum_u + p.a12 + nf + m as f64 - 2.0);
                let mult = (-1.0 / ctx.q()).powi(n as i32) * expo.exp();
                let imag = one_column_w(j, &p.with_last_v(vm + ctx.imaginary_period()), m, &ctx).unwrap();
                assert!(relative_residual(imag, base * mult) < 1e-10);
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let ctx = ctx(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (m, n, x) in [(2, 1, vec![2]), (3, 2, vec![1, 3]), (1, 1, vec![1]), (4, 3, vec![1, 3, 4])] {
            let spec = BoundarySpec::new(m, n, x).unwrap();
            let p = params(&mut rng, m, n);
            let r = decompose_check(&spec, &p, &ctx).unwrap();
            assert_eq!(r.terms, n);
            assert!(r.residual <= 1e-10, "{spec}: {r:?}");
        }
        let spec = BoundarySpec::new(3, 1, vec![2]).unwrap();
        let p = params(&mut rng, 3, 1);
        assert!(decompose_check(&spec, &p, &ctx).is_err());
    }

    #[test]
    fn param_length_mismatch() {
        let ctx = ctx(0.3);
        let spec = BoundarySpec::new(3, 2, vec![1, 3]).unwrap();
        let p = ModelParams::new(vec![c(0.1, 0.0)], vec![c(0.0, 0.0); 3], c(0.3, 0.2));
        assert!(matches!(evaluate_w_dp(&spec, &p, &ctx), Err(Error::Params(_))));
    }
}
