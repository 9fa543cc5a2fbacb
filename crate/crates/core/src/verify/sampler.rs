//! Rejection sampling of generic model parameters.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{perm_sum_condition, MAX_PERMUTATION_ROWS};
use crate::elliptic::EllipticContext;
use crate::error::{Error, Result};
use crate::partition::{lattice_condition, BoundarySpec, ModelParams};

/// Axis-aligned rectangle in units of `K1/|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl ComplexBox {
    pub const fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub fn draw(&self, rng: &mut ChaCha8Rng, ctx: &EllipticContext) -> Complex64 {
        let re = rng.gen_range(self.re.0..=self.re.1);
        let im = rng.gen_range(self.im.0..=self.im.1);
        Complex64::new(re, im) * (ctx.k1() / ctx.lambda().norm())
    }
}

impl Default for ComplexBox {
    fn default() -> Self {
        Self::new((-1.0, 1.0), (-0.3, 0.3))
    }
}

/// Which evaluations must be well conditioned for a draw to be accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionScreen {
    Off,
    /// Only the permutation sum of the closed form.
    ClosedForm,
    /// The permutation sum and the lattice sum.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericitySampler {
    pub rng_seed: u64,
    pub u_box: ComplexBox,
    pub v_box: ComplexBox,
    pub a12_box: ComplexBox,
    /// Minimum `|[z]|`, as a fraction of the theta amplitude, for every
    /// bracket in the certificate.
    pub floor: f64,
    /// Largest accepted ratio `Σ|terms| / |Σ terms|` for the screened sums.
    pub max_condition: f64,
    pub screen: ConditionScreen,
    pub max_retries: usize,
}

impl Default for GenericitySampler {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            u_box: ComplexBox::default(),
            v_box: ComplexBox::default(),
            a12_box: ComplexBox::default(),
            floor: 5e-2,
            max_condition: 1e6,
            screen: ConditionScreen::Full,
            max_retries: 1000,
        }
    }
}

impl GenericitySampler {
    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self.clone() }
    }
}

/// Smallest normalized bracket among the arguments the model divides by,
/// together with the spectral differences and exchange numerators.
///
/// Covers `[1]`, `[a12 + t]` for `t ∈ [-2, M+N+2]` (every `a_jk` on the
/// lattice, the closed-form denominators and their recursion shifts),
/// `[u_j - u_k]` and `[1 + u_j - u_k]`.
pub fn certificate_margin(spec: &BoundarySpec, p: &ModelParams, ctx: &EllipticContext) -> f64 {
    let scale = ctx.amplitude();
    let mut margin = f64::INFINITY;
    let mut check = |z: Complex64| margin = margin.min(ctx.bracket(z).norm() / scale);
    check(Complex64::new(1.0, 0.0));
    let top = (spec.m() + spec.n() + 2) as i64;
    for t in -2..=top {
        check(p.a12 + t as f64);
    }
    for j in 0..p.u.len() {
        for k in 0..p.u.len() {
            if j != k {
                check(p.u[j] - p.u[k]);
                check(p.u[j] - p.u[k] + 1.0);
            }
        }
    }
    margin
}

fn well_conditioned(spec: &BoundarySpec, p: &ModelParams, sampler: &GenericitySampler, ctx: &EllipticContext) -> bool {
    let within = |c: Result<f64>| matches!(c, Ok(c) if c <= sampler.max_condition);
    let closed_form = spec.n() > MAX_PERMUTATION_ROWS || within(perm_sum_condition(spec, p, ctx));
    match sampler.screen {
        ConditionScreen::Off => true,
        ConditionScreen::ClosedForm => closed_form,
        ConditionScreen::Full => closed_form && within(lattice_condition(spec, p, ctx)),
    }
}

/// Draws parameters for `spec` until the genericity certificate holds and
/// the screened sums are well conditioned.
/// Deterministic in `sampler.rng_seed`.
pub fn sample_generic(spec: &BoundarySpec, sampler: &GenericitySampler, ctx: &EllipticContext) -> Result<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.rng_seed);
    for _ in 0..sampler.max_retries.max(1) {
        let u = (0..spec.n()).map(|_| sampler.u_box.draw(&mut rng, ctx)).collect();
        let v = (0..spec.m()).map(|_| sampler.v_box.draw(&mut rng, ctx)).collect();
        let a12 = sampler.a12_box.draw(&mut rng, ctx);
        let p = ModelParams::new(u, v, a12);
        if certificate_margin(spec, &p, ctx) >= sampler.floor && well_conditioned(spec, &p, sampler, ctx) {
            return Ok(p);
        }
    }
    Err(Error::Exhausted(sampler.max_retries))
}
