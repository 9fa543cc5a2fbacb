//! Campaign drivers.

use crate::elliptic::EllipticContext;
use crate::partition::{BoundarySpec, DEFAULT_ENUM_CAP};

use super::checks::{CheckInput, Tolerances, CHECKS, THEOREM_CHECKS};
use super::report::{CheckRecord, CheckStatus, VerificationReport};
use super::sampler::{sample_generic, GenericitySampler};

type Check = fn(&CheckInput<'_>, &Tolerances) -> CheckRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub tolerances: Tolerances,
    pub enum_cap: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { tolerances: Tolerances::default(), enum_cap: DEFAULT_ENUM_CAP }
    }
}

fn run_checks(
    checks: &[(&str, Check)],
    spec: &BoundarySpec,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    let seed = sampler.rng_seed;
    let mut report = VerificationReport::default();
    match sample_generic(spec, sampler, ctx) {
        Ok(params) => {
            let input = CheckInput { spec, params: &params, seed, ctx, enum_cap: options.enum_cap };
            for (_, check) in checks {
                report.push(check(&input, &options.tolerances));
            }
        }
        Err(err) => {
            for (id, _) in checks {
                let mut record = CheckRecord::new(id, Some(spec), seed, f64::NAN);
                record.status = CheckStatus::Fail;
                record.detail = Some(format!("sampling: {err}"));
                report.push(record);
            }
        }
    }
    report
}

/// Every check on one spec, with parameters drawn from `sampler`'s seed.
pub fn run_property_suite(
    spec: &BoundarySpec,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    let mut report = run_checks(CHECKS, spec, sampler, ctx, options);
    report.canonicalize();
    report
}

fn specs_up_to(m_max: usize, n_max: usize) -> Vec<BoundarySpec> {
    (1..=m_max).flat_map(|m| BoundarySpec::all_with_columns(m, n_max)).collect()
}

fn sweep(
    checks: &[(&str, Check)],
    specs: &[BoundarySpec],
    seeds: u64,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    let mut report = VerificationReport::default();
    for spec in specs {
        for s in 0..seeds {
            let seeded = sampler.with_seed(sampler.rng_seed.wrapping_add(s));
            report.extend(run_checks(checks, spec, &seeded, ctx, options));
        }
    }
    report.canonicalize();
    report
}

/// The full check list over every spec with `N ≤ n_max ≤ M ≤ m_max` and
/// `seeds` consecutive seeds starting at `sampler.rng_seed`.
pub fn property_campaign(
    m_max: usize,
    n_max: usize,
    seeds: u64,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    sweep(CHECKS, &specs_up_to(m_max, n_max), seeds, sampler, ctx, options)
}

/// Lattice sum against closed form (transfer vs determinant, enumeration vs
/// permutation sum, transfer vs enumeration) for every spec up to the bounds.
pub fn theorem_sweep(
    m_max: usize,
    n_max: usize,
    seeds: u64,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    theorem_sweep_specs(&specs_up_to(m_max, n_max), seeds, sampler, ctx, options)
}

pub fn theorem_sweep_specs(
    specs: &[BoundarySpec],
    seeds: u64,
    sampler: &GenericitySampler,
    ctx: &EllipticContext,
    options: &SuiteOptions,
) -> VerificationReport {
    sweep(THEOREM_CHECKS, specs, seeds, sampler, ctx, options)
}
