//! Bühlmann premiums built from aggregate claims or from claim counts.
//!
//! The aggregate-severity premium credibility-weights the observed mean of
//! `S_t`. The frequency premium instead weights the mean of the Bühlmann
//! observation `S̃_t = lambda2 N_t e^{beta0 N_t}`, the conditional expected
//! aggregate given the count, so it only needs the frequency column of a
//! history. Under independence (`beta0 = 0`) the frequency premium is exactly
//! `lambda2` times the classical Bühlmann premium for claim counts.

mod blp;

pub use blp::{blp_oracle, blp_oracle_with, BlpTarget};

use serde::{Deserialize, Serialize};

use crate::crm::{zeta, ClaimHistory, ModelParams};
use crate::error::{Error, Result};
use crate::momentkit::{ig_mgf_d1, ig_mgf_d2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Credibility on observed aggregate claims `S_t`.
    AggregateSeverity,
    /// Credibility on `S̃_t = lambda2 N_t e^{beta0 N_t}`.
    Frequency,
    /// Classical Bühlmann premium for the claim count `N_t` (independence only).
    FrequencyCount,
}

/// Structural parameters of one premium at horizon `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibilityComponents {
    /// Collective mean.
    pub u: f64,
    /// Expected process variance.
    pub v: f64,
    /// Variance of the hypothetical means.
    pub a: f64,
    /// Credibility factor `t a / (t a + v)`.
    pub z: f64,
    pub t: u32,
    pub variant: Variant,
}

impl CredibilityComponents {
    pub fn new(u: f64, v: f64, a: f64, t: u32, variant: Variant) -> Result<Self> {
        if !(u.is_finite() && v.is_finite() && a.is_finite()) {
            return Err(Error::Range(format!("non-finite credibility components u={u} v={v} a={a}")));
        }
        if v <= 0.0 {
            return Err(Error::Invalid(format!("process variance must be positive, got {v}")));
        }
        // rounding can leave a at -1 ulp when both effects are degenerate
        let a = a.max(0.0);
        let z = if t == 0 || a == 0.0 {
            0.0
        } else {
            let ta = t as f64 * a;
            ta / (ta + v)
        };
        Ok(Self { u, v, a, z, t, variant })
    }
}

/// Coefficients `(alpha_0, alpha)` of the premium `alpha_0 + alpha Σ X_k`.
pub fn coefficients(c: &CredibilityComponents) -> Result<(f64, f64)> {
    if c.t == 0 {
        return Err(Error::Usage("coefficients need at least one observed period".into()));
    }
    Ok(((1.0 - c.z) * c.u, c.z / c.t as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiumQuote {
    pub premium: f64,
    pub components: CredibilityComponents,
    /// Mean of the observations the premium was credibility-weighted on.
    pub observation_mean: f64,
}

/// `E[S_{t+1} | R1 = r1, R2 = r2, Λ] = lambda1 lambda2 r1 r2 e^{beta0} exp(lambda1 r1 (e^{beta0} - 1))`.
pub fn hypothetical_mean(params: &ModelParams, r1: f64, r2: f64) -> f64 {
    let (l1, l2, b) = (params.lambda1(), params.lambda2(), params.beta0());
    l1 * l2 * r1 * r2 * b.exp() * (l1 * r1 * b.exp_m1()).exp()
}

/// `S̃ = lambda2 n e^{beta0 n}`.
pub fn buhlmann_observation(n: u32, params: &ModelParams) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    params.lambda2() * n * (params.beta0() * n).exp()
}

pub fn components_agg(params: &ModelParams, t: u32) -> Result<CredibilityComponents> {
    let spec = params.ig();
    let (z1, z2) = zeta(params);
    let (l1, l2, b2) = (params.lambda1(), params.lambda2(), params.b2());
    let e2b = (2.0 * params.beta0()).exp();
    let d1 = ig_mgf_d1(z1, &spec)?;
    let d1_z2 = ig_mgf_d1(z2, &spec)?;
    let d2_z2 = ig_mgf_d2(z2, &spec)?;
    let d2_2z1 = ig_mgf_d2(2.0 * z1, &spec)?;

    let u = l1 * l2 * params.beta0().exp() * d1;
    let v = l1 * l2 * l2 * e2b * (1.0 + b2) * ((1.0 + params.psi2()) * d1_z2 + l1 * e2b * d2_z2 - l1 * d2_2z1);
    let a = (l1 * l2).powi(2) * e2b * ((1.0 + b2) * d2_2z1 - d1 * d1);
    CredibilityComponents::new(u, v, a, t, Variant::AggregateSeverity)
}

pub fn components_freq(params: &ModelParams, t: u32) -> Result<CredibilityComponents> {
    let spec = params.ig();
    let (z1, z2) = zeta(params);
    let (l1, l2) = (params.lambda1(), params.lambda2());
    let e2b = (2.0 * params.beta0()).exp();
    let d1 = ig_mgf_d1(z1, &spec)?;
    let d1_z2 = ig_mgf_d1(z2, &spec)?;
    let d2_z2 = ig_mgf_d2(z2, &spec)?;
    let d2_2z1 = ig_mgf_d2(2.0 * z1, &spec)?;

    let u = l1 * l2 * params.beta0().exp() * d1;
    let v = l1 * l2 * l2 * e2b * (l1 * e2b * d2_z2 + d1_z2 - l1 * d2_2z1);
    let a = e2b * (l1 * l2).powi(2) * (d2_2z1 - d1 * d1);
    CredibilityComponents::new(u, v, a, t, Variant::Frequency)
}

/// Bühlmann components for the claim count: `u = lambda1`, `v = lambda1`,
/// `a = lambda1² b1`. Only meaningful when `beta0 = 0`.
pub fn components_freq_count(params: &ModelParams, t: u32) -> Result<CredibilityComponents> {
    if params.beta0() != 0.0 {
        return Err(Error::Usage(format!(
            "the claim-count premium requires beta0 = 0, got {}",
            params.beta0()
        )));
    }
    let l1 = params.lambda1();
    CredibilityComponents::new(l1, l1, l1 * l1 * params.b1(), t, Variant::FrequencyCount)
}

pub fn components(params: &ModelParams, t: u32, variant: Variant) -> Result<CredibilityComponents> {
    match variant {
        Variant::AggregateSeverity => components_agg(params, t),
        Variant::Frequency => components_freq(params, t),
        Variant::FrequencyCount => components_freq_count(params, t),
    }
}

fn quote(components: CredibilityComponents, observations: impl Iterator<Item = f64>) -> Result<PremiumQuote> {
    let t = components.t;
    let observation_mean = if t == 0 { 0.0 } else { observations.sum::<f64>() / t as f64 };
    let premium = components.z * observation_mean + (1.0 - components.z) * components.u;
    if premium < 0.0 {
        return Err(Error::NegativePremium(premium));
    }
    Ok(PremiumQuote { premium, components, observation_mean })
}

fn horizon(history: &ClaimHistory) -> Result<u32> {
    u32::try_from(history.len()).map_err(|_| Error::Invalid("history too long".into()))
}

/// `Z1 S̄ + (1 - Z1) u1`; the collective mean for an empty history.
pub fn premium_agg(history: &ClaimHistory, params: &ModelParams) -> Result<PremiumQuote> {
    quote(components_agg(params, horizon(history)?)?, history.aggregates())
}

/// `Z2 mean(S̃) + (1 - Z2) u2`, using only the claim counts.
pub fn premium_freq(history: &ClaimHistory, params: &ModelParams) -> Result<PremiumQuote> {
    let obs = history.frequencies().map(|n| buhlmann_observation(n, params));
    quote(components_freq(params, horizon(history)?)?, obs)
}

/// Bühlmann premium for next period's claim count.
pub fn premium_freq_count(history: &ClaimHistory, params: &ModelParams) -> Result<PremiumQuote> {
    quote(components_freq_count(params, horizon(history)?)?, history.frequencies().map(f64::from))
}

pub fn premium(history: &ClaimHistory, params: &ModelParams, variant: Variant) -> Result<PremiumQuote> {
    match variant {
        Variant::AggregateSeverity => premium_agg(history, params),
        Variant::Frequency => premium_freq(history, params),
        Variant::FrequencyCount => premium_freq_count(history, params),
    }
}
