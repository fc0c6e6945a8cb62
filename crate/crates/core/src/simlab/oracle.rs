//! Monte Carlo estimates of the closed-form moments and premium errors.

use serde::{Deserialize, Serialize};

use super::estimate::{CovAccumulator, MeanAccumulator, SimEstimate};
use super::panel::chunked;
use super::rng::RngStream;
use super::samplers::ModelSampler;
use crate::credibility::{coefficients, components, hypothetical_mean, Variant};
use crate::crm::{self, ModelParams};
use crate::error::{Error, Result};

/// Smallest number of policyholders accepted by the premium error estimator.
pub const MIN_MSE_SAMPLES: usize = 10_000;

const PILOT: usize = 4096;

/// A closed-form value next to its simulated counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: &'static str,
    pub closed_form: f64,
    pub estimate: SimEstimate,
}

impl MomentCheck {
    pub fn z_score(&self) -> f64 {
        self.estimate.z_score(self.closed_form)
    }
}

// N1, N2, S1, S2, Y11, Y12, Y21
type Draw = [f64; 7];

/// Two periods of one policyholder. Severities `Y11`, `Y12` and `Y21` are
/// drawn even when the period has fewer claims, since the severity moments
/// are defined for every index `j`; `S_t` only sums the first `N_t` of them.
fn draw(sampler: &ModelSampler, rng: &mut RngStream) -> Draw {
    let (r1, r2) = sampler.effects(rng);
    let counts = sampler.counts(r1);
    let n1 = sampler.count(&counts, rng);
    let n2 = sampler.count(&counts, rng);

    let mut s1 = 0.0;
    let mut first = [0.0; 2];
    for j in 0..n1.max(2) {
        let y = sampler.severity(n1, r2, rng);
        if j < 2 {
            first[j as usize] = y;
        }
        if j < n1 {
            s1 += y;
        }
    }
    let mut s2 = 0.0;
    let mut y21 = 0.0;
    for j in 0..n2.max(1) {
        let y = sampler.severity(n2, r2, rng);
        if j == 0 {
            y21 = y;
        }
        if j < n2 {
            s2 += y;
        }
    }
    [n1 as f64, n2 as f64, s1, s2, first[0], first[1], y21]
}

const PAIRS: [(usize, usize); 8] = [(2, 2), (2, 3), (0, 1), (4, 4), (4, 5), (4, 6), (0, 4), (0, 6)];

/// Simulates `n` policyholders over two periods and compares the nine
/// conditional moments with their closed forms.
pub fn moment_oracle(params: &ModelParams, n: usize, rng: &RngStream) -> Result<Vec<MomentCheck>> {
    if n < 2 {
        return Err(Error::Usage("the moment oracle needs at least two samples".into()));
    }
    let sampler = ModelSampler::new(params);

    let mut pilot_rng = rng.child(u64::MAX);
    let mut shift = [0.0; 7];
    for _ in 0..PILOT {
        let d = draw(&sampler, &mut pilot_rng);
        for (s, x) in shift.iter_mut().zip(d) {
            *s += x / PILOT as f64;
        }
    }
    let fresh = || PAIRS.map(|(i, j)| CovAccumulator::new(shift[i], shift[j]));

    let parts = chunked(rng, n, |mut rng, _, count| {
        let mut acc = fresh();
        for _ in 0..count {
            let d = draw(&sampler, &mut rng);
            for (a, (i, j)) in acc.iter_mut().zip(PAIRS) {
                a.push(d[i], d[j]);
            }
        }
        acc
    });
    let mut acc = fresh();
    for part in &parts {
        for (a, b) in acc.iter_mut().zip(part) {
            a.merge(b);
        }
    }

    let p = params;
    Ok(vec![
        MomentCheck { name: "mean_aggregate", closed_form: crm::mean_aggregate(p)?, estimate: acc[0].mean_x() },
        MomentCheck { name: "var_aggregate", closed_form: crm::var_aggregate(p)?, estimate: acc[0].covariance() },
        MomentCheck { name: "cov_aggregate_lag", closed_form: crm::cov_aggregate_lag(p)?, estimate: acc[1].covariance() },
        MomentCheck { name: "cov_frequency_lag", closed_form: crm::cov_frequency_lag(p)?, estimate: acc[2].covariance() },
        MomentCheck {
            name: "var_individual_severity",
            closed_form: crm::var_individual_severity(p)?,
            estimate: acc[3].covariance(),
        },
        MomentCheck {
            name: "cov_severity_same_period",
            closed_form: crm::cov_severity_same_period(p)?,
            estimate: acc[4].covariance(),
        },
        MomentCheck {
            name: "cov_severity_cross_period",
            closed_form: crm::cov_severity_cross_period(p)?,
            estimate: acc[5].covariance(),
        },
        MomentCheck {
            name: "cov_freq_severity_same_period",
            closed_form: crm::cov_freq_severity_same_period(p)?,
            estimate: acc[6].covariance(),
        },
        MomentCheck {
            name: "cov_freq_severity_cross_period",
            closed_form: crm::cov_freq_severity_cross_period(p)?,
            estimate: acc[7].covariance(),
        },
    ])
}

/// Simulated error of one premium at one horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumMse {
    pub t: u32,
    pub variant: Variant,
    /// Mean of `(target - premium)²`.
    pub mse: SimEstimate,
    /// Mean premium, which should equal the collective mean.
    pub mean_premium: SimEstimate,
}

/// `E[(E[S_{t+1} | R, Λ] - Prem)²]` estimated over `n` simulated policyholders.
pub fn empirical_premium_mse(
    params: &ModelParams,
    t: u32,
    n: usize,
    variant: Variant,
    rng: &RngStream,
) -> Result<SimEstimate> {
    Ok(empirical_premium_mse_curves(params, &[t], n, &[variant], rng)?[0].mse)
}

/// Errors of several premiums at several horizons from one simulation.
///
/// Every policyholder's history is drawn once up to the largest horizon and
/// each premium at horizon `t` uses the first `t` periods, so the estimates
/// share random numbers. Results are ordered by variant, then horizon. The
/// claim-count premium is scored against `E[N | R1, Λ] = lambda1 R1`.
pub fn empirical_premium_mse_curves(
    params: &ModelParams,
    horizons: &[u32],
    n: usize,
    variants: &[Variant],
    rng: &RngStream,
) -> Result<Vec<PremiumMse>> {
    if n < MIN_MSE_SAMPLES {
        return Err(Error::Usage(format!("at least {MIN_MSE_SAMPLES} policyholders are required, got {n}")));
    }
    if horizons.is_empty() || horizons.contains(&0) || variants.is_empty() {
        return Err(Error::Usage("horizons must be positive and variants non-empty".into()));
    }
    let t_max = *horizons.iter().max().expect("non-empty");
    let mut coef = Vec::with_capacity(variants.len() * horizons.len());
    for &v in variants {
        for &t in horizons {
            coef.push(coefficients(&components(params, t, v)?)?);
        }
    }
    let sampler = ModelSampler::new(params);
    let cells = coef.len();
    let l1 = params.lambda1();

    let parts = chunked(rng, n, |mut rng, _, count| {
        let mut mse = vec![MeanAccumulator::default(); cells];
        let mut prem = vec![MeanAccumulator::default(); cells];
        let mut sums = vec![0.0; variants.len()];
        for _ in 0..count {
            let (r1, r2) = sampler.effects(&mut rng);
            let counts = sampler.counts(r1);
            let h = hypothetical_mean(params, r1, r2);
            sums.iter_mut().for_each(|s| *s = 0.0);
            for k in 1..=t_max {
                let nk = sampler.count(&counts, &mut rng);
                let sk = sampler.aggregate(nk, r2, &mut rng);
                for (s, v) in sums.iter_mut().zip(variants) {
                    *s += match v {
                        Variant::AggregateSeverity => sk,
                        Variant::Frequency => crate::credibility::buhlmann_observation(nk, params),
                        Variant::FrequencyCount => nk as f64,
                    };
                }
                for (hi, &t) in horizons.iter().enumerate() {
                    if t != k {
                        continue;
                    }
                    for (vi, v) in variants.iter().enumerate() {
                        let cell = vi * horizons.len() + hi;
                        let (a0, a) = coef[cell];
                        let premium = a0 + a * sums[vi];
                        let target = if *v == Variant::FrequencyCount { l1 * r1 } else { h };
                        mse[cell].push((target - premium) * (target - premium));
                        prem[cell].push(premium);
                    }
                }
            }
        }
        (mse, prem)
    });

    let mut mse = vec![MeanAccumulator::default(); cells];
    let mut prem = vec![MeanAccumulator::default(); cells];
    for (m, p) in &parts {
        for c in 0..cells {
            mse[c].merge(&m[c]);
            prem[c].merge(&p[c]);
        }
    }
    let mut out = Vec::with_capacity(cells);
    for (vi, &variant) in variants.iter().enumerate() {
        for (hi, &t) in horizons.iter().enumerate() {
            let cell = vi * horizons.len() + hi;
            out.push(PremiumMse { t, variant, mse: mse[cell].estimate(), mean_premium: prem[cell].estimate() });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_heterogeneity_has_no_error() {
        let p = ModelParams::new(0.3, 100.0, 0.0, 1.0, 0.0, 0.0).unwrap();
        let rng = RngStream::new(4, 0);
        let e = empirical_premium_mse(&p, 3, MIN_MSE_SAMPLES, Variant::AggregateSeverity, &rng).unwrap();
        assert!(e.value < 1e-20 && e.std_error < 1e-20);
    }

    #[test]
    fn small_samples_rejected() {
        let p = ModelParams::new(0.3, 100.0, 0.0, 1.0, 0.5, 0.0).unwrap();
        let rng = RngStream::new(4, 0);
        assert!(empirical_premium_mse(&p, 3, 100, Variant::Frequency, &rng).is_err());
    }

    #[test]
    fn oracle_is_deterministic() {
        let p = ModelParams::new(0.3, 100.0, -0.1, 1.0, 0.5, 0.2).unwrap();
        let rng = RngStream::new(9, 2);
        let a = moment_oracle(&p, 20_000, &rng).unwrap();
        let b = moment_oracle(&p, 20_000, &rng).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        for check in &a[..8] {
            assert!(check.z_score().abs() < 5.0, "{} z={}", check.name, check.z_score());
        }
        let exact = crm::cov_freq_severity_cross_period_exact(&p).unwrap();
        assert!(a[8].estimate.z_score(exact).abs() < 5.0);
    }
}
