//! Bracket-level fault injection for the closed form.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{elliptic_vandermonde, g_closed_form_with, prefactor_xm, EForm};
use crate::elliptic::{relative_residual, BracketEval, EllipticContext};
use crate::error::Result;
use crate::partition::{evaluate_w_dp, BoundarySpec, ModelParams};

use super::sampler::{sample_generic, GenericitySampler};

/// Exact brackets, counting how many were requested.
#[derive(Debug)]
pub struct CountingBrackets<'a> {
    ctx: &'a EllipticContext,
    pub count: usize,
}

impl<'a> CountingBrackets<'a> {
    pub fn new(ctx: &'a EllipticContext) -> Self {
        Self { ctx, count: 0 }
    }
}

impl BracketEval for CountingBrackets<'_> {
    fn context(&self) -> &EllipticContext {
        self.ctx
    }

    fn bracket(&mut self, u: Complex64) -> Complex64 {
        self.count += 1;
        self.ctx.bracket(u)
    }
}

/// Exact brackets except at one call site, whose argument is shifted.
#[derive(Debug)]
pub struct PerturbedBrackets<'a> {
    ctx: &'a EllipticContext,
    site: usize,
    delta: Complex64,
    seen: usize,
}

impl<'a> PerturbedBrackets<'a> {
    pub fn new(ctx: &'a EllipticContext, site: usize, delta: Complex64) -> Self {
        Self { ctx, site, delta, seen: 0 }
    }

    /// Whether the perturbed site was reached.
    pub fn fired(&self) -> bool {
        self.seen > self.site
    }
}

impl BracketEval for PerturbedBrackets<'_> {
    fn context(&self) -> &EllipticContext {
        self.ctx
    }

    fn bracket(&mut self, u: Complex64) -> Complex64 {
        let index = self.seen;
        self.seen += 1;
        if index == self.site {
            self.ctx.bracket(u + self.delta)
        } else {
            self.ctx.bracket(u)
        }
    }
}

/// Number of bracket sites one closed-form evaluation touches.
pub fn closed_form_sites(spec: &BoundarySpec, p: &ModelParams, form: EForm, ctx: &EllipticContext) -> Result<usize> {
    let mut counter = CountingBrackets::new(ctx);
    g_closed_form_with(spec, p, form, &mut counter)?;
    Ok(counter.count)
}

/// Closed form with the bracket at `site` evaluated at `argument + delta`.
pub fn perturbed_closed_form(
    spec: &BoundarySpec,
    p: &ModelParams,
    form: EForm,
    site: usize,
    delta: Complex64,
    ctx: &EllipticContext,
) -> Result<Complex64> {
    let mut br = PerturbedBrackets::new(ctx, site, delta);
    g_closed_form_with(spec, p, form, &mut br)
}

/// Closed form with `a12 + eps` in the first prefactor bracket, or `None`
/// when every prefactor range is empty.
pub fn corrupted_prefactor(
    spec: &BoundarySpec,
    p: &ModelParams,
    eps: f64,
    ctx: &EllipticContext,
) -> Result<Option<Complex64>> {
    let mut counter = CountingBrackets::new(ctx);
    prefactor_xm(spec, p, &mut counter)?;
    if counter.count == 0 {
        return Ok(None);
    }
    let mut counter = CountingBrackets::new(ctx);
    elliptic_vandermonde(&p.u, &mut counter)?;
    let site = counter.count;
    perturbed_closed_form(spec, p, EForm::Determinant, site, Complex64::new(eps, 0.0), ctx).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub seed: u64,
    pub site: usize,
    pub sites: usize,
    pub residual: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationSummary {
    pub outcomes: Vec<MutationOutcome>,
    pub detection_rate: f64,
}

/// For each seed: sample parameters, pick one bracket site of the closed
/// form at random, shift its argument by `delta`, and test whether the
/// theorem comparison against the transfer evaluation now fails at `tol`.
pub fn mutation_campaign(
    spec: &BoundarySpec,
    seeds: std::ops::Range<u64>,
    sampler: &GenericitySampler,
    delta: f64,
    tol: f64,
    ctx: &EllipticContext,
) -> Result<MutationSummary> {
    let mut outcomes = Vec::new();
    for seed in seeds {
        let p = sample_generic(spec, &sampler.with_seed(seed), ctx)?;
        let w = evaluate_w_dp(spec, &p, ctx)?;
        let sites = closed_form_sites(spec, &p, EForm::Determinant, ctx)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
        let site = rng.gen_range(0..sites);
        let residual = match perturbed_closed_form(spec, &p, EForm::Determinant, site, Complex64::new(delta, 0.0), ctx) {
            Ok(g) => relative_residual(w, g),
            // A perturbation that makes a denominator vanish is a detection too.
            Err(_) => f64::INFINITY,
        };
        outcomes.push(MutationOutcome { seed, site, sites, residual, detected: !(residual <= tol) });
    }
    let detected = outcomes.iter().filter(|o| o.detected).count();
    let detection_rate = if outcomes.is_empty() { 0.0 } else { detected as f64 / outcomes.len() as f64 };
    Ok(MutationSummary { outcomes, detection_rate })
}
