//! Theta function `H`, the bracket `[u] = H(λu)` and elliptic-polynomial checks.
//!
//! `H` is evaluated from its product representation
//!
//! ```text
//! H(u) = 2 q^{1/4} sin(πu / 2K1) ∏_{n≥1} (1 - 2 q^{2n} cos(πu / K1) + q^{4n}) (1 - q^{2n})
//! ```
//!
//! with quasi-periods `2K1` and `2iK2`. Both infinite products (the one above
//! and the one defining `K1`) are truncated geometrically; see
//! [`EllipticContext::with_max_terms`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TRUNC_EPS: f64 = 1e-16;
pub const DEFAULT_MAX_TERMS: usize = 256;

/// Denominator brackets smaller than this fraction of the theta amplitude are
/// treated as singular.
pub const SINGULARITY_FLOOR: f64 = 1e-12;

/// Lower clamp for the normalisation of relative residuals.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// `|lhs - rhs| / max(|lhs|, |rhs|, 1e-30)`.
pub fn relative_residual(lhs: Complex64, rhs: Complex64) -> f64 {
    let scale = lhs.norm().max(rhs.norm()).max(RESIDUAL_FLOOR);
    (lhs - rhs).norm() / scale
}

/// Evaluation environment shared by every bracket in the model.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticContext {
    q: f64,
    lambda: Complex64,
    k1: f64,
    k2: f64,
    tau: Complex64,
    trunc_eps: f64,
    max_terms: usize,
    /// `q^{2n}` for the retained theta factors.
    q2n: Vec<f64>,
    /// `2 q^{1/4} ∏ (1 - q^{2n})`.
    amplitude: f64,
}

impl EllipticContext {
    pub fn new(q: f64, lambda: Complex64, trunc_eps: f64) -> Result<Self> {
        Self::with_max_terms(q, lambda, trunc_eps, DEFAULT_MAX_TERMS)
    }

    /// Builds the context, computing `K1` from its product
    ///
    /// ```text
    /// K1 = (π/2) ∏_{n≥1} ( (1+q^{2n-1})/(1-q^{2n-1}) · (1-q^{2n})/(1+q^{2n}) )²
    /// ```
    ///
    /// and `K2 = -(K1/π) ln q`, `τ = i K2/K1`.
    ///
    /// The `K1` product stops after the first factor whose deviation from 1 is
    /// below `trunc_eps`; the theta product keeps every `n` up to the first one
    /// with `q^{2n} < trunc_eps`. Either loop hitting `max_terms` first is a
    /// convergence error.
    pub fn with_max_terms(
        q: f64,
        lambda: Complex64,
        trunc_eps: f64,
        max_terms: usize,
    ) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("nome q = {q} must lie in (0, 1)")));
        }
        if !(trunc_eps > 0.0) {
            return Err(Error::Domain(format!(
                "truncation threshold {trunc_eps} must be positive"
            )));
        }
        if lambda == Complex64::new(0.0, 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("modulus lambda = {lambda} must be nonzero")));
        }

        let mut product = 1.0;
        let mut converged = false;
        for n in 1..=max_terms {
            let odd = q.powi(2 * n as i32 - 1);
            let even = q.powi(2 * n as i32);
            let factor = ((1.0 + odd) / (1.0 - odd) * ((1.0 - even) / (1.0 + even))).powi(2);
            product *= factor;
            if (factor - 1.0).abs() < trunc_eps {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { max_terms });
        }
        let k1 = 0.5 * PI * product;
        let k2 = -(k1 / PI) * q.ln();

        let mut q2n = Vec::new();
        let mut amplitude = 2.0 * q.powf(0.25);
        converged = false;
        for n in 1..=max_terms {
            let p = q.powi(2 * n as i32);
            q2n.push(p);
            amplitude *= 1.0 - p;
            if p < trunc_eps {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Convergence { max_terms });
        }

        Ok(Self {
            q,
            lambda,
            k1,
            k2,
            tau: Complex64::new(0.0, k2 / k1),
            trunc_eps,
            max_terms,
            q2n,
            amplitude,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn tau(&self) -> Complex64 {
        self.tau
    }

    pub fn trunc_eps(&self) -> f64 {
        self.trunc_eps
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    /// Number of retained factors in the theta product.
    pub fn theta_terms(&self) -> usize {
        self.q2n.len()
    }

    /// Magnitude scale of `H` used to make the singularity floor relative.
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn theta_h(&self, u: Complex64) -> Complex64 {
        let z = u * (PI / self.k1);
        let c = z.cos();
        let mut acc = (z * 0.5).sin() * self.amplitude;
        for &p in &self.q2n {
            acc *= 1.0 - 2.0 * p * c + p * p;
        }
        acc
    }

    /// `[u] = H(λu)`.
    pub fn bracket(&self, u: Complex64) -> Complex64 {
        self.theta_h(self.lambda * u)
    }

    /// Shift of the bracket argument that flips its sign: `2K1/λ`.
    pub fn real_period(&self) -> Complex64 {
        Complex64::new(2.0 * self.k1, 0.0) / self.lambda
    }

    /// Quasi-period of the bracket argument: `2iK2/λ`.
    pub fn imaginary_period(&self) -> Complex64 {
        Complex64::new(0.0, 2.0 * self.k2) / self.lambda
    }

    /// Multiplier `m` in `[u + 2iK2/λ] = m [u]`, i.e. `-q^{-1} exp(-iπλu/K1)`.
    pub fn imaginary_multiplier(&self, u: Complex64) -> Complex64 {
        let phase = Complex64::new(0.0, -PI) * self.lambda * u / self.k1;
        -phase.exp() / self.q
    }

    /// Absolute threshold below which a denominator bracket is rejected.
    pub fn singularity_threshold(&self) -> f64 {
        SINGULARITY_FLOOR * self.amplitude
    }

    /// `v_M ↦ y_M = λ v_M / 2K1`.
    pub fn to_rescaled(&self, v: Complex64) -> Complex64 {
        self.lambda * v / (2.0 * self.k1)
    }

    /// Inverse of [`EllipticContext::to_rescaled`].
    pub fn from_rescaled(&self, y: Complex64) -> Complex64 {
        y * (2.0 * self.k1) / self.lambda
    }

    /// Distance from `y` to the nearest point of `Γ = Z + τZ`.
    pub fn lattice_distance(&self, y: Complex64) -> f64 {
        let b = y.im / self.tau.im;
        let a = y.re - b * self.tau.re;
        let residual = Complex64::new(a - a.round(), 0.0) + self.tau * (b - b.round());
        residual.norm()
    }
}

/// Source of bracket values for closed-form style evaluations.
///
/// Every bracket a formula touches goes through [`BracketEval::bracket`], so an
/// implementation can count or perturb individual bracket sites.
pub trait BracketEval {
    fn context(&self) -> &EllipticContext;

    fn bracket(&mut self, u: Complex64) -> Complex64;

    /// `[num] / [den]`, rejecting a singular denominator.
    fn ratio(&mut self, num: Complex64, den: Complex64) -> Result<Complex64> {
        let top = self.bracket(num);
        let bottom = self.denominator(den)?;
        Ok(top / bottom)
    }

    fn denominator(&mut self, den: Complex64) -> Result<Complex64> {
        let value = self.bracket(den);
        let magnitude = value.norm();
        if !(magnitude >= self.context().singularity_threshold()) {
            return Err(Error::Singular { arg: den, magnitude });
        }
        Ok(value)
    }
}

impl BracketEval for &EllipticContext {
    fn context(&self) -> &EllipticContext {
        self
    }

    fn bracket(&mut self, u: Complex64) -> Complex64 {
        EllipticContext::bracket(self, u)
    }
}

/// A character of `Γ`, recorded by its values on the generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Character {
    pub chi1: Complex64,
    pub chitau: Complex64,
    pub degree: usize,
}

impl Character {
    pub fn new(chi1: Complex64, chitau: Complex64, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain("character degree must be positive".into()));
        }
        Ok(Self { chi1, chitau, degree })
    }

    /// `χ(1) = (-1)^N`, `χ(τ) = (-1)^N e^α`.
    pub fn from_alpha(degree: usize, alpha: Complex64) -> Result<Self> {
        let sign = if degree % 2 == 0 { 1.0 } else { -1.0 };
        Self::new(Complex64::new(sign, 0.0), alpha.exp() * sign, degree)
    }

    /// Principal logarithm of `(-1)^N χ(τ)`.
    pub fn alpha(&self) -> Complex64 {
        let sign = if self.degree % 2 == 0 { 1.0 } else { -1.0 };
        (self.chitau * sign).ln()
    }
}

/// Worst normalized residuals of the two quasi-periodicity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub period_one: f64,
    pub period_tau: f64,
    pub samples: usize,
}

impl MembershipReport {
    pub fn max(&self) -> f64 {
        self.period_one.max(self.period_tau)
    }
}

/// Random point of the fundamental cell in the rescaled variable.
fn cell_point(rng: &mut ChaCha8Rng, ctx: &EllipticContext) -> Complex64 {
    let re = rng.gen_range(-0.5..0.5);
    let b = rng.gen_range(-0.5..0.5);
    Complex64::new(re, 0.0) + ctx.tau * b
}

/// Samples `f` on random points `y` and measures
/// `|f(y+1) - χ(1) f(y)|` and `|f(y+τ) - χ(τ) e^{-2πiNy - πiNτ} f(y)|`,
/// each normalized by the larger side (clamped at 1e-30).
pub fn check_theta_membership<F>(
    mut f: F,
    chi: &Character,
    ctx: &EllipticContext,
    samples: usize,
    seed: u64,
) -> Result<MembershipReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    if samples == 0 {
        return Err(Error::Precondition("at least one sample is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = chi.degree as f64;
    let tau = ctx.tau();
    let mut report = MembershipReport { period_one: 0.0, period_tau: 0.0, samples };
    for _ in 0..samples {
        let y = cell_point(&mut rng, ctx);
        let fy = f(y)?;
        let shifted_one = f(y + 1.0)?;
        let shifted_tau = f(y + tau)?;
        let factor =
            (Complex64::new(0.0, -2.0 * PI * n) * y + Complex64::new(0.0, -PI * n) * tau).exp();
        let r1 = relative_residual(shifted_one, chi.chi1 * fy);
        let r2 = relative_residual(shifted_tau, chi.chitau * factor * fy);
        report.period_one = report.period_one.max(r1);
        report.period_tau = report.period_tau.max(r2);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualityReport {
    pub at_points: f64,
    pub at_extra: f64,
    pub tolerance: f64,
    pub equal: bool,
}

/// Numerical proxy for the uniqueness of elliptic polynomials: `f` and `g`
/// are compared at the interpolation `points` and at `extra` random points.
///
/// The points must be pairwise distinct modulo `Γ` and `Σ y_k - α` must avoid
/// `Γ`; violations within `tolerance` of a lattice point are rejected.
#[allow(clippy::too_many_arguments)]
pub fn equal_as_theta_polynomials<F, G>(
    mut f: F,
    mut g: G,
    chi: &Character,
    points: &[Complex64],
    ctx: &EllipticContext,
    extra: usize,
    seed: u64,
    tolerance: f64,
) -> Result<EqualityReport>
where
    F: FnMut(Complex64) -> Result<Complex64>,
    G: FnMut(Complex64) -> Result<Complex64>,
{
    if points.len() != chi.degree {
        return Err(Error::Precondition(format!(
            "{} interpolation points supplied for degree {}",
            points.len(),
            chi.degree
        )));
    }
    for (j, &yj) in points.iter().enumerate() {
        for &yk in &points[j + 1..] {
            if ctx.lattice_distance(yj - yk) < tolerance {
                return Err(Error::Precondition(format!(
                    "points {yj} and {yk} coincide modulo the period lattice"
                )));
            }
        }
    }
    let sum: Complex64 = points.iter().sum();
    if ctx.lattice_distance(sum - chi.alpha()) < tolerance {
        return Err(Error::Precondition(
            "sum of interpolation points minus alpha lies on the period lattice".into(),
        ));
    }

    let mut at_points: f64 = 0.0;
    for &y in points {
        at_points = at_points.max(relative_residual(f(y)?, g(y)?));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut at_extra: f64 = 0.0;
    for _ in 0..extra {
        let y = cell_point(&mut rng, ctx);
        at_extra = at_extra.max(relative_residual(f(y)?, g(y)?));
    }
    Ok(EqualityReport {
        at_points,
        at_extra,
        tolerance,
        equal: at_points < tolerance && at_extra < tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: f64) -> EllipticContext {
        EllipticContext::new(q, Complex64::new(1.0, 0.0), DEFAULT_TRUNC_EPS).unwrap()
    }

    fn golden(q: f64) -> (f64, f64) {
        let text = include_str!("../fixtures/golden.txt");
        text.lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .map(|l| {
                let cols: Vec<f64> = l.split_whitespace().map(|c| c.parse().unwrap()).collect();
                (cols[0], cols[1], cols[2])
            })
            .find(|(gq, _, _)| *gq == q)
            .map(|(_, k1, k2)| (k1, k2))
            .unwrap()
    }

    fn random_u(rng: &mut ChaCha8Rng, ctx: &EllipticContext) -> Complex64 {
        let s = ctx.k1() / ctx.lambda().norm();
        Complex64::new(rng.gen_range(-1.0..1.0) * s, rng.gen_range(-0.3..0.3) * s)
    }

    #[test]
    fn rejects_bad_inputs() {
        let one = Complex64::new(1.0, 0.0);
        assert!(matches!(EllipticContext::new(0.0, one, 1e-16), Err(Error::Domain(_))));
        assert!(matches!(EllipticContext::new(1.0, one, 1e-16), Err(Error::Domain(_))));
        assert!(matches!(EllipticContext::new(-0.2, one, 1e-16), Err(Error::Domain(_))));
        assert!(matches!(
            EllipticContext::new(0.3, Complex64::new(0.0, 0.0), 1e-16),
            Err(Error::Domain(_))
        ));
        assert!(matches!(EllipticContext::new(0.3, one, 0.0), Err(Error::Domain(_))));
        assert!(matches!(
            EllipticContext::with_max_terms(0.99, one, 1e-16, 256),
            Err(Error::Convergence { max_terms: 256 })
        ));
    }

    #[test]
    fn small_nome_limit() {
        let c = ctx(1e-12);
        assert!((c.k1() - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn golden_half_periods() {
        for q in [0.1, 0.3, 0.5] {
            let c = ctx(q);
            let (k1, k2) = golden(q);
            assert!((c.k1() - k1).abs() <= 1e-14 * k1, "K1 at q={q}: {} vs {k1}", c.k1());
            assert!((c.k2() - k2).abs() <= 1e-12, "K2 at q={q}");
            assert!((c.k2() + c.k1() / PI * q.ln()).abs() < 1e-12);
            assert_eq!(c.tau(), Complex64::new(0.0, c.k2() / c.k1()));
        }
    }

    #[test]
    fn truncation_is_stable_when_halving_eps() {
        for q in [0.1, 0.3, 0.5] {
            let a = EllipticContext::new(q, Complex64::new(1.0, 0.0), 1e-16).unwrap();
            let b = EllipticContext::new(q, Complex64::new(1.0, 0.0), 5e-17).unwrap();
            assert!((a.k1() - b.k1()).abs() < 1e-16 * a.k1().max(1.0));
        }
    }

    #[test]
    fn theta_zero_and_oddness() {
        let c = ctx(0.3);
        assert_eq!(c.theta_h(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(c.bracket(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let u = random_u(&mut rng, &c);
            let h = c.theta_h(u);
            assert!((c.theta_h(-u) + h).norm() <= 1e-12 * h.norm().max(1.0));
        }
    }

    #[test]
    fn theta_quasi_periods() {
        for q in [0.1, 0.3, 0.5] {
            let c = ctx(q);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..200 {
                let u = random_u(&mut rng, &c);
                let h = c.theta_h(u);
                for m in [-2i32, -1, 1, 2] {
                    let shifted = c.theta_h(u + 2.0 * m as f64 * c.k1());
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    assert!(relative_residual(shifted, h * sign) < 1e-10);
                }
                for n in [-1i32, 1] {
                    let shift = Complex64::new(0.0, 2.0 * n as f64 * c.k2());
                    let mult = -q.powi(-n * n)
                        * (Complex64::new(0.0, -(n as f64) * PI) * u / c.k1()).exp();
                    assert!(relative_residual(c.theta_h(u + shift), mult * h) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bracket_quasi_periods_with_complex_lambda() {
        let c = EllipticContext::new(0.3, Complex64::new(0.8, 0.15), 1e-16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let u = random_u(&mut rng, &c);
            let b = c.bracket(u);
            assert!(relative_residual(c.bracket(u + c.real_period()), -b) < 1e-10);
            let shifted = c.bracket(u + c.imaginary_period());
            assert!(relative_residual(shifted, c.imaginary_multiplier(u) * b) < 1e-10);
        }
    }

    #[test]
    fn deterministic() {
        let a = ctx(0.3);
        let b = ctx(0.3);
        let u = Complex64::new(0.3, -0.7);
        assert_eq!(a.theta_h(u).re.to_bits(), b.theta_h(u).re.to_bits());
        assert_eq!(a.theta_h(u).im.to_bits(), b.theta_h(u).im.to_bits());
    }

    #[test]
    fn membership_of_theta_itself() {
        let c = ctx(0.3);
        let chi = Character::from_alpha(1, Complex64::new(0.0, 0.0)).unwrap();
        let k1 = c.k1();
        let report =
            check_theta_membership(|y| Ok(c.theta_h(y * 2.0 * k1)), &chi, &c, 50, 1).unwrap();
        assert!(report.max() < 1e-10, "{report:?}");
    }

    #[test]
    fn constant_is_not_degree_one() {
        let c = ctx(0.3);
        let chi = Character::from_alpha(1, Complex64::new(0.0, 0.0)).unwrap();
        let report =
            check_theta_membership(|_| Ok(Complex64::new(1.0, 0.0)), &chi, &c, 10, 1).unwrap();
        // |1 - (-1)·1| / max(1, 1)
        assert_eq!(report.period_one, 2.0);
        assert!(check_theta_membership(|_| Ok(Complex64::new(1.0, 0.0)), &chi, &c, 0, 1).is_err());
    }

    #[test]
    fn identical_handles_are_equal() {
        let c = ctx(0.3);
        let chi = Character::from_alpha(2, Complex64::new(0.2, 0.1)).unwrap();
        let k1 = c.k1();
        let f = |y: Complex64| Ok(c.theta_h(y * 2.0 * k1));
        let points = [Complex64::new(0.1, 0.05), Complex64::new(-0.3, 0.1)];
        let r = equal_as_theta_polynomials(f, f, &chi, &points, &c, 5, 3, 1e-10).unwrap();
        assert!(r.equal);
        assert_eq!(r.at_points, 0.0);
    }

    #[test]
    fn degenerate_points_are_rejected() {
        let c = ctx(0.3);
        let chi = Character::from_alpha(2, Complex64::new(0.2, 0.1)).unwrap();
        let f = |_: Complex64| Ok(Complex64::new(1.0, 0.0));
        let y = Complex64::new(0.1, 0.05);
        let points = [y, y + 1.0 + c.tau()];
        assert!(matches!(
            equal_as_theta_polynomials(f, f, &chi, &points, &c, 0, 0, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lattice_distance_vanishes_on_lattice() {
        let c = ctx(0.3);
        assert!(c.lattice_distance(c.tau() * 3.0 - 2.0) < 1e-12);
        assert!(c.lattice_distance(Complex64::new(0.5, 0.0)) > 0.49);
    }
}
