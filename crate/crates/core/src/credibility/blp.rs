//! Numeric best linear predictor, used to check the closed-form weights.
//!
//! For observations `X_1..X_t` and target `T` the predictor
//! `alpha_0 + Σ alpha_k X_k` minimizing `E[(T - ·)²]` solves
//! `Cov(X) alpha = Cov(X, T)` with `alpha_0 = E[T] - Σ alpha_k E[X_k]`.
//! The second moments are assembled from the model's moment formulas,
//! not from the credibility components.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Variant;
use crate::crm::{cov_aggregate_lag, mean_aggregate, var_aggregate, ModelParams};
use crate::error::{Error, Result};
use crate::momentkit::joint_aux;

/// Largest accepted condition number of the covariance matrix.
pub const MAX_CONDITION: f64 = 1e12;

/// What the frequency predictor is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlpTarget {
    /// The observation process's own next value, `S̃_{t+1}`.
    #[default]
    OwnHypotheticalMean,
    /// The aggregate hypothetical mean `E[S_{t+1} | R, Λ]`.
    AggregateHypotheticalMean,
}

struct Moments {
    mean_x: f64,
    var_x: f64,
    cov_xx: f64,
    cov_xt: f64,
    mean_t: f64,
}

fn moments(params: &ModelParams, variant: Variant, target: BlpTarget) -> Result<Moments> {
    let spec = params.ig();
    let (l1, l2, b) = (params.lambda1(), params.lambda2(), params.beta0());
    match variant {
        Variant::AggregateSeverity => {
            let mean = mean_aggregate(params)?;
            let lag = cov_aggregate_lag(params)?;
            Ok(Moments { mean_x: mean, var_x: var_aggregate(params)?, cov_xx: lag, cov_xt: lag, mean_t: mean })
        }
        Variant::Frequency => {
            let at_b = joint_aux(b, l1, &spec)?;
            let at_2b = joint_aux(2.0 * b, l1, &spec)?;
            let mean = l2 * at_b.n_tilt;
            let cross = l2 * l2 * at_b.cross_period - mean * mean;
            let cov_xt = match target {
                BlpTarget::OwnHypotheticalMean => cross,
                // E[S̃ h] = lambda1 lambda2² e^b E[N e^{bN} R1 e^{R1 ζ1}] since E[R2] = 1
                BlpTarget::AggregateHypotheticalMean => l1 * l2 * l2 * b.exp() * at_b.n_tilt_effect - mean * mean,
            };
            Ok(Moments { mean_x: mean, var_x: l2 * l2 * at_2b.n2_tilt - mean * mean, cov_xx: cross, cov_xt, mean_t: mean })
        }
        Variant::FrequencyCount => {
            let at_0 = joint_aux(0.0, l1, &spec)?;
            let cross = at_0.cross_period - l1 * l1;
            Ok(Moments { mean_x: l1, var_x: at_0.n2_tilt - l1 * l1, cov_xx: cross, cov_xt: cross, mean_t: l1 })
        }
    }
}

/// Coefficients `[alpha_0, alpha_1, .., alpha_t]` from the normal equations.
pub fn blp_oracle(params: &ModelParams, t: u32, variant: Variant) -> Result<Vec<f64>> {
    blp_oracle_with(params, t, variant, BlpTarget::default())
}

pub fn blp_oracle_with(params: &ModelParams, t: u32, variant: Variant, target: BlpTarget) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::Usage("the predictor needs at least one observed period".into()));
    }
    let m = moments(params, variant, target)?;
    let n = t as usize;
    let gram = DMatrix::from_fn(n, n, |i, j| if i == j { m.var_x } else { m.cov_xx });
    let rhs = DVector::from_element(n, m.cov_xt);

    let eigen = SymmetricEigen::new(gram.clone()).eigenvalues;
    let (lo, hi) = eigen.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(Error::SingularSystem { condition });
    }
    let chol = gram.cholesky().ok_or(Error::SingularSystem { condition })?;
    let alpha = chol.solve(&rhs);

    let alpha0 = m.mean_t - m.mean_x * alpha.sum();
    let mut out = Vec::with_capacity(n + 1);
    out.push(alpha0);
    out.extend(alpha.iter().copied());
    Ok(out)
}
