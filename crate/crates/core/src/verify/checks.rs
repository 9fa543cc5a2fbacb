//! Individual checks. Each returns exactly one [`CheckRecord`]; evaluator
//! errors become failed records, capacity limits become skips.
//!
//! `w.*` checks evaluate the lattice sum, `g.*` checks only ever touch the
//! closed form.

use std::f64::consts::PI;
use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{e_perm_sum, g_closed_form, g_closed_form_with, EForm};
use crate::elliptic::{check_theta_membership, relative_residual, Character, EllipticContext};
use crate::error::{Error, Result};
use crate::face::{check_yang_baxter, Hexagon, StateVector};
use crate::partition::{decompose_check, evaluate_w_bruteforce_capped, evaluate_w_dp, BoundarySpec, ModelParams};

use super::report::{CheckRecord, CheckStatus};

pub const MEMBERSHIP_SAMPLES: usize = 4;
pub const HEXAGONS_PER_RECORD: usize = 8;
pub const THETA_POINTS_PER_RECORD: usize = 16;
/// Largest `N` for which checks iterate over all of `S_N`.
pub const FULL_PERMUTATION_ROWS: usize = 3;

/// Tolerance ladder: single brackets, single rows, whole lattices, and
/// identities that should hold to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub theta: f64,
    pub row: f64,
    pub lattice: f64,
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { theta: 1e-10, row: 1e-9, lattice: 1e-8, exact: 1e-12 }
    }
}

impl Tolerances {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            theta: self.theta * factor,
            row: self.row * factor,
            lattice: self.lattice * factor,
            exact: self.exact * factor,
        }
    }
}

/// Inputs shared by every check on one `(spec, seed)` pair.
#[derive(Debug, Clone, Copy)]
pub struct CheckInput<'a> {
    pub spec: &'a BoundarySpec,
    pub params: &'a ModelParams,
    pub seed: u64,
    pub ctx: &'a EllipticContext,
    pub enum_cap: u64,
}

enum Outcome {
    Residual(f64),
    NotApplicable(&'static str),
}

fn run(id: &str, input: &CheckInput<'_>, tol: f64, body: impl FnOnce() -> Result<Outcome>) -> CheckRecord {
    let mut record = CheckRecord::new(id, Some(input.spec), input.seed, tol);
    let start = Instant::now();
    let outcome = body();
    record.ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(Outcome::Residual(r)) => {
            record.residual = Some(r);
            record.status = if r <= tol { CheckStatus::Pass } else { CheckStatus::Fail };
        }
        Ok(Outcome::NotApplicable(why)) => {
            record.status = CheckStatus::Skip;
            record.detail = Some(why.to_string());
        }
        Err(err @ Error::Capacity { .. }) => {
            record.status = CheckStatus::Skip;
            record.detail = Some(err.to_string());
        }
        Err(err) => {
            record.status = CheckStatus::Fail;
            record.detail = Some(err.to_string());
        }
    }
    record
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Character of the partition function in `y_M = λ v_M / (2K1)`:
/// `χ(1) = (-1)^N`, `χ(τ) = (-1)^N exp((πλτ/K2)(Σu - a12 - N - M + 2))`.
pub fn last_column_character(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Character> {
    let sum_u: Complex64 = p.u.iter().sum();
    let shift = sum_u - p.a12 - (spec.n() + spec.m()) as f64 + 2.0;
    let alpha = ctx.lambda() * ctx.tau() * PI / ctx.k2() * shift;
    Character::from_alpha(spec.n(), alpha)
}

type Evaluator = fn(&BoundarySpec, &ModelParams, &EllipticContext) -> Result<Complex64>;

fn eval_w(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Complex64> {
    evaluate_w_dp(spec, p, ctx)
}

fn eval_g(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> Result<Complex64> {
    g_closed_form(spec, p, ctx)
}

fn quasi_periodicity(input: &CheckInput<'_>, eval: Evaluator) -> Result<Outcome> {
    let CheckInput { spec, params, ctx, seed, .. } = *input;
    if !spec.ends_in_last_column() {
        return Ok(Outcome::NotApplicable("needs x_N = M"));
    }
    let chi = last_column_character(spec, params, ctx)?;
    let f = |y: Complex64| eval(spec, &params.with_last_v(ctx.from_rescaled(y)), ctx);
    let report = check_theta_membership(f, &chi, ctx, MEMBERSHIP_SAMPLES, seed)?;
    Ok(Outcome::Residual(report.max()))
}

fn adjacent_exchange(input: &CheckInput<'_>, eval: Evaluator) -> Result<Outcome> {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    if spec.n() < 2 {
        return Ok(Outcome::NotApplicable("needs N >= 2"));
    }
    let base = eval(spec, p, ctx)?;
    let mut worst: f64 = 0.0;
    for j in 0..spec.n() - 1 {
        let swapped = eval(spec, &p.swapped(j), ctx)?;
        let lhs = ctx.bracket(one() + p.u[j] - p.u[j + 1]) * base;
        let rhs = ctx.bracket(one() + p.u[j + 1] - p.u[j]) * swapped;
        worst = worst.max(relative_residual(lhs, rhs));
    }
    Ok(Outcome::Residual(worst))
}

/// `∏_{j<k, σ(j)>σ(k)} [1+u_σ(k)-u_σ(j)] F(u) = ∏_{j<k, σ(j)>σ(k)} [1+u_σ(j)-u_σ(k)] F(u_σ)`
/// for every `σ ∈ S_N`.
fn permutation_relation(input: &CheckInput<'_>, eval: Evaluator) -> Result<Outcome> {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    let n = spec.n();
    if n < 2 || n > FULL_PERMUTATION_ROWS {
        return Ok(Outcome::NotApplicable("needs 2 <= N <= 3"));
    }
    let base = eval(spec, p, ctx)?;
    let mut worst: f64 = 0.0;
    for sigma in (0..n).permutations(n) {
        let mut permuted = p.clone();
        permuted.u = sigma.iter().map(|&s| p.u[s]).collect();
        let mut lhs = base;
        let mut rhs = eval(spec, &permuted, ctx)?;
        for j in 0..n {
            for k in j + 1..n {
                if sigma[j] > sigma[k] {
                    let (uj, uk) = (p.u[sigma[j]], p.u[sigma[k]]);
                    lhs *= ctx.bracket(one() + uk - uj);
                    rhs *= ctx.bracket(one() + uj - uk);
                }
            }
        }
        worst = worst.max(relative_residual(lhs, rhs));
    }
    Ok(Outcome::Residual(worst))
}

fn drop_last_column(p: &ModelParams) -> Vec<Complex64> {
    p.v[..p.v.len() - 1].to_vec()
}

/// Both recursions in the last column.
fn recursion(input: &CheckInput<'_>, eval: Evaluator) -> Result<Outcome> {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    let (m, n) = (spec.m(), spec.n());
    let (mf, nf) = (m as f64, n as f64);
    let br1 = ctx.bracket(one());
    if spec.ends_in_last_column() {
        let un = p.u[n - 1];
        let at_point = p.with_last_v(un);
        let lhs = eval(spec, &at_point, ctx)?;
        let mut rhs = one();
        for j in 0..n - 1 {
            rhs *= ctx.bracket(one() - p.u[j] + un) / br1;
        }
        for j in 0..m - 1 {
            rhs *= ctx.bracket(one() + un - p.v[j]) / br1;
        }
        if n > 1 {
            let smaller = BoundarySpec::new(m - 1, n - 1, spec.x()[..n - 1].to_vec())?;
            let q = ModelParams::new(p.u[..n - 1].to_vec(), drop_last_column(p), p.a12 + 1.0);
            rhs *= eval(&smaller, &q, ctx)?;
        }
        Ok(Outcome::Residual(relative_residual(lhs, rhs)))
    } else {
        let lhs = eval(spec, p, ctx)?;
        let a21 = -p.a12;
        let vm = p.v[m - 1];
        let den = ctx.bracket(a21 - mf + 1.0);
        let mut rhs = ctx.bracket(a21 - mf - nf + 1.0) / den;
        for &u in &p.u {
            rhs *= ctx.bracket(u - vm) / br1;
        }
        let smaller = BoundarySpec::new(m - 1, n, spec.x().to_vec())?;
        let q = ModelParams::new(p.u.clone(), drop_last_column(p), p.a12);
        rhs *= eval(&smaller, &q, ctx)?;
        Ok(Outcome::Residual(relative_residual(lhs, rhs)))
    }
}

/// `W_{M,1}(u|v|M|a12) = [-u+v_M+a12+M-1]/[a12+M-1] · ∏_{k<M} [1+u-v_k]/[1]`.
pub fn single_row_formula(p: &ModelParams, ctx: &EllipticContext) -> Complex64 {
    let m = p.v.len();
    let mf = m as f64;
    let u = p.u[0];
    let br1 = ctx.bracket(one());
    let mut acc = ctx.bracket(-u + p.v[m - 1] + p.a12 + mf - 1.0) / ctx.bracket(p.a12 + mf - 1.0);
    for k in 0..m - 1 {
        acc *= ctx.bracket(one() + u - p.v[k]) / br1;
    }
    acc
}

fn is_initial(spec: &BoundarySpec) -> bool {
    spec.n() == 1 && spec.ends_in_last_column()
}

pub fn w_property1(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("w.property1", input, tol.lattice, || quasi_periodicity(input, eval_w))
}

pub fn w_property2(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("w.property2", input, tol.row, || adjacent_exchange(input, eval_w))
}

pub fn w_property2_perm(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("w.property2.perm", input, tol.row, || permutation_relation(input, eval_w))
}

pub fn w_property3(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("w.property3", input, tol.row, || recursion(input, eval_w))
}

/// Initial condition, for both lattice evaluators.
pub fn w_property4(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, enum_cap, .. } = *input;
    run("w.property4", input, tol.exact, || {
        if !is_initial(spec) {
            return Ok(Outcome::NotApplicable("needs N = 1, x_1 = M"));
        }
        let expected = single_row_formula(p, ctx);
        let dp = evaluate_w_dp(spec, p, ctx)?;
        let bf = evaluate_w_bruteforce_capped(spec, p, ctx, enum_cap)?;
        Ok(Outcome::Residual(relative_residual(dp, expected).max(relative_residual(bf, expected))))
    })
}

pub fn g_lemma1(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("g.lemma1", input, tol.lattice, || quasi_periodicity(input, eval_g))
}

/// Every summand's `v_M`-dependent factor
/// `f_σ(v_M) = [-u_σ(N)+v_M+a12+N+M-2] ∏_{j<N} [u_σ(j)-v_M]`
/// carries the same character as the whole function.
pub fn g_lemma1_summands(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, seed, .. } = *input;
    run("g.lemma1.summand", input, tol.theta, || {
        let n = spec.n();
        if !spec.ends_in_last_column() || n > FULL_PERMUTATION_ROWS {
            return Ok(Outcome::NotApplicable("needs x_N = M and N <= 3"));
        }
        let chi = last_column_character(spec, p, ctx)?;
        let shift = p.a12 + (n + spec.m()) as f64 - 2.0;
        let mut worst: f64 = 0.0;
        for sigma in (0..n).permutations(n) {
            let f = |y: Complex64| {
                let vm = ctx.from_rescaled(y);
                let mut acc = ctx.bracket(-p.u[sigma[n - 1]] + vm + shift);
                for &s in &sigma[..n - 1] {
                    acc *= ctx.bracket(p.u[s] - vm);
                }
                Ok(acc)
            };
            worst = worst.max(check_theta_membership(f, &chi, ctx, MEMBERSHIP_SAMPLES, seed)?.max());
        }
        Ok(Outcome::Residual(worst))
    })
}

pub fn g_lemma2(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("g.lemma2", input, tol.row, || adjacent_exchange(input, eval_g))
}

pub fn g_lemma2_perm(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("g.lemma2.perm", input, tol.row, || permutation_relation(input, eval_g))
}

pub fn g_lemma3(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    run("g.lemma3", input, tol.row, || recursion(input, eval_g))
}

pub fn g_lemma4(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    run("g.lemma4", input, tol.exact, || {
        if !is_initial(spec) {
            return Ok(Outcome::NotApplicable("needs N = 1, x_1 = M"));
        }
        let g = g_closed_form(spec, p, ctx)?;
        Ok(Outcome::Residual(relative_residual(g, single_row_formula(p, ctx))))
    })
}

/// Transfer evaluation against the determinant form.
pub fn theorem_dp_det(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    run("theorem.dp_det", input, tol.lattice, || {
        let w = evaluate_w_dp(spec, p, ctx)?;
        let mut br = ctx;
        let g = g_closed_form_with(spec, p, EForm::Determinant, &mut br)?;
        Ok(Outcome::Residual(relative_residual(w, g)))
    })
}

/// Enumeration against the permutation sum.
pub fn theorem_bf_perm(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, enum_cap, .. } = *input;
    run("theorem.bf_perm", input, tol.lattice, || {
        if spec.n() > crate::closed_form::MAX_PERMUTATION_ROWS {
            return Ok(Outcome::NotApplicable("permutation sum limited to N <= 6"));
        }
        let w = evaluate_w_bruteforce_capped(spec, p, ctx, enum_cap)?;
        let mut br = ctx;
        let g = g_closed_form_with(spec, p, EForm::PermutationSum, &mut br)?;
        Ok(Outcome::Residual(relative_residual(w, g)))
    })
}

pub fn theorem_dp_bf(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, enum_cap, .. } = *input;
    run("theorem.dp_bf", input, tol.lattice, || {
        let bf = evaluate_w_bruteforce_capped(spec, p, ctx, enum_cap)?;
        let dp = evaluate_w_dp(spec, p, ctx)?;
        Ok(Outcome::Residual(relative_residual(dp, bf)))
    })
}

/// `E` is unchanged by every permutation of the spectral parameters.
pub fn e_symmetry(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    run("g.symmetry", input, tol.theta, || {
        let n = spec.n();
        if n < 2 || n > 4 {
            return Ok(Outcome::NotApplicable("needs 2 <= N <= 4"));
        }
        let mut br = ctx;
        let base = e_perm_sum(spec, p, &mut br)?;
        let mut worst: f64 = 0.0;
        for sigma in (0..n).permutations(n) {
            let mut permuted = p.clone();
            permuted.u = sigma.iter().map(|&s| p.u[s]).collect();
            worst = worst.max(relative_residual(base, e_perm_sum(spec, &permuted, &mut br)?));
        }
        Ok(Outcome::Residual(worst))
    })
}

pub fn decomposition(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { spec, params: p, ctx, .. } = *input;
    run("decomposition", input, tol.row, || {
        if !spec.ends_in_last_column() {
            return Ok(Outcome::NotApplicable("needs x_N = M"));
        }
        Ok(Outcome::Residual(decompose_check(spec, p, ctx)?.residual))
    })
}

/// A hexagon whose lower path uses the same steps as the upper one in a
/// random order.
pub fn random_hexagon(rng: &mut ChaCha8Rng) -> Hexagon {
    let e = StateVector::new(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    let steps: Vec<StateVector> =
        (0..3).map(|_| if rng.gen_bool(0.5) { StateVector::E1 } else { StateVector::E2 }).collect();
    let mut lower = steps.clone();
    for i in (1..3).rev() {
        let j = rng.gen_range(0..=i);
        lower.swap(i, j);
    }
    Hexagon::from_paths(e, [steps[0], steps[1], steps[2]], [lower[0], lower[1], lower[2]])
        .expect("equal step multisets close the hexagon")
}

/// Yang-Baxter relation on random hexagons, using `a12` and spectral
/// values drawn around the sampled parameters.
pub fn yang_baxter(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { params: p, ctx, seed, .. } = *input;
    run("ybr", input, tol.lattice, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let scale = ctx.k1() / ctx.lambda().norm();
        let draw = |rng: &mut ChaCha8Rng| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)) * scale
        };
        let consts = p.constants();
        let mut worst: f64 = 0.0;
        for _ in 0..HEXAGONS_PER_RECORD {
            let hex = random_hexagon(&mut rng);
            let (u1, u2, u3) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
            worst = worst.max(check_yang_baxter(&hex, u1, u2, u3, &consts, ctx)?.residual);
        }
        Ok(Outcome::Residual(worst))
    })
}

/// Oddness and both bracket quasi-periods at points built from the sampled
/// parameters.
pub fn theta(input: &CheckInput<'_>, tol: &Tolerances) -> CheckRecord {
    let CheckInput { params: p, ctx, seed, .. } = *input;
    run("theta", input, tol.theta, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
        let mut points: Vec<Complex64> = p.u.iter().chain(&p.v).copied().collect();
        points.push(p.a12);
        let scale = ctx.k1() / ctx.lambda().norm();
        while points.len() < THETA_POINTS_PER_RECORD {
            points.push(Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3)) * scale);
        }
        let mut worst: f64 = 0.0;
        for &z in &points {
            let b = ctx.bracket(z);
            worst = worst.max(relative_residual(ctx.bracket(-z), -b));
            worst = worst.max(relative_residual(ctx.bracket(z + ctx.real_period()), -b));
            let shifted = ctx.bracket(z + ctx.imaginary_period());
            worst = worst.max(relative_residual(shifted, ctx.imaginary_multiplier(z) * b));
        }
        Ok(Outcome::Residual(worst))
    })
}

/// Every check, in a fixed order.
pub const CHECKS: &[(&str, fn(&CheckInput<'_>, &Tolerances) -> CheckRecord)] = &[
    ("w.property1", w_property1),
    ("w.property2", w_property2),
    ("w.property2.perm", w_property2_perm),
    ("w.property3", w_property3),
    ("w.property4", w_property4),
    ("g.lemma1", g_lemma1),
    ("g.lemma1.summand", g_lemma1_summands),
    ("g.lemma2", g_lemma2),
    ("g.lemma2.perm", g_lemma2_perm),
    ("g.lemma3", g_lemma3),
    ("g.lemma4", g_lemma4),
    ("g.symmetry", e_symmetry),
    ("theorem.dp_det", theorem_dp_det),
    ("theorem.bf_perm", theorem_bf_perm),
    ("theorem.dp_bf", theorem_dp_bf),
    ("decomposition", decomposition),
    ("ybr", yang_baxter),
    ("theta", theta),
];

/// The three lattice/closed-form comparisons of the main identity.
pub const THEOREM_CHECKS: &[(&str, fn(&CheckInput<'_>, &Tolerances) -> CheckRecord)] = &[
    ("theorem.dp_det", theorem_dp_det),
    ("theorem.bf_perm", theorem_bf_perm),
    ("theorem.dp_bf", theorem_dp_bf),
];
