//! Credibility premiums for a collective risk model with frequency–severity
//! dependence.
//!
//! Claim counts carry an inverse-Gaussian random effect `R1`, severities a
//! unit-mean random effect `R2`, and the severity mean of a period with `N`
//! claims is scaled by `exp(beta0 * N)`. On top of that model the crate offers
//!
//! - [`momentkit`]: inverse-Gaussian MGF derivatives and tilted Poisson moments,
//! - [`crm`]: parameters, calibration and closed-form conditional moments,
//! - [`credibility`]: the aggregate-severity and frequency-based Bühlmann premiums,
//! - [`risk_mse`]: their hypothetical mean-square errors and method selection,
//! - [`simlab`]: an exact Monte Carlo sampler used as an independent oracle.

pub mod credibility;
pub mod crm;
pub mod error;
pub mod momentkit;
pub mod risk_mse;
pub mod simlab;

pub use error::{Error, Result};
