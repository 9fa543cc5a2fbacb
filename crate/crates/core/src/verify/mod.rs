//! Verification campaign: generic sampling, per-check records, sweeps and
//! fault injection.

pub mod checks;
pub mod mutation;
pub mod report;
pub mod sampler;
pub mod suite;

pub use checks::{last_column_character, single_row_formula, CheckInput, Tolerances, CHECKS, THEOREM_CHECKS};
pub use mutation::{corrupted_prefactor, mutation_campaign, MutationSummary};
pub use report::{canonical_float, CheckRecord, CheckStatus, VerificationReport};
pub use sampler::{certificate_margin, sample_generic, ComplexBox, ConditionScreen, GenericitySampler};
pub use suite::{property_campaign, run_property_suite, theorem_sweep, theorem_sweep_specs, SuiteOptions};
