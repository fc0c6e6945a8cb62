//! Monte Carlo oracle for the closed forms.
//!
//! Sampling is exact: inverse-Gaussian and gamma random effects, Poisson
//! counts and gamma severities, with no approximation beyond floating point.
//! Work is split into fixed chunks, each with its own derived stream, and
//! partial sums are combined in chunk order, so every estimate is a pure
//! function of the seed.

mod equivalence;
mod estimate;
mod oracle;
mod panel;
mod rng;
mod samplers;

pub use equivalence::{
    average_severity_equivalence_test, average_severity_test_with_dispersion, ks_critical, ks_statistic,
    EquivalenceCase, KsOutcome, ALPHA,
};
pub use estimate::{CompensatedSum, CovAccumulator, MeanAccumulator, SimEstimate};
pub use oracle::{empirical_premium_mse, empirical_premium_mse_curves, moment_oracle, MomentCheck, PremiumMse, MIN_MSE_SAMPLES};
pub use panel::{simulate_policyholders, simulate_policyholders_capped, Panel, PolicyholderDraw, CHUNK, DEFAULT_PANEL_CAP};
pub use rng::RngStream;
pub use samplers::{sample_gamma_mean_dispersion, sample_ig, sample_period, ModelSampler, PeriodDraw};
