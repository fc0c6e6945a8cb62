//! Hypothetical mean-square errors of the two premiums.
//!
//! `HMSE_i(t) = E[(E[S_{t+1} | R, Λ] - Prem_i)² | Λ]`. Each premium has an
//! expanded form (the expectation multiplied out term by term) and a reduced
//! form; both are kept and compared.
//!
//! The aggregate-severity error decays like `a1 v1 / (t a1 + v1)`. The
//! frequency error does not vanish: counts carry no information about `R2`,
//! so it tends to `b2 E[(lambda1 lambda2 e^{beta0} R1 e^{R1 ζ1})²]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::credibility::{coefficients, components_agg, components_freq, CredibilityComponents, Variant};
use crate::crm::{cov_aggregate_lag, var_aggregate, zeta, ModelParams, Portfolio};
use crate::error::{Error, Result};
use crate::momentkit::{ig_mgf_d2, joint_aux};

/// Default end of the crossover scan.
pub const DEFAULT_T_MAX: u32 = 100;
/// Relative gap under which two errors count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    AggregateSeverity,
    Frequency,
    Tie,
}

impl Method {
    pub fn compare(hmse1: f64, hmse2: f64) -> Method {
        let scale = hmse1.abs().max(hmse2.abs());
        if (hmse1 - hmse2).abs() <= TIE_TOLERANCE * scale {
            Method::Tie
        } else if hmse1 < hmse2 {
            Method::AggregateSeverity
        } else {
            Method::Frequency
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AggregateSeverity => "AggregateSeverity",
            Method::Frequency => "Frequency",
            Method::Tie => "Tie",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_horizon(t: u32) -> Result<()> {
    if t == 0 {
        Err(Error::Usage("HMSE is defined for t >= 1".into()))
    } else {
        Ok(())
    }
}

/// `(lambda1 lambda2 e^{beta0})² M''(2 ζ1)`, the second moment of the
/// frequency hypothetical mean `E[S̃ | R1, Λ]`.
fn freq_hypothetical_second_moment(params: &ModelParams) -> Result<f64> {
    let (z1, _) = zeta(params);
    let scale = params.lambda1() * params.lambda2() * params.beta0().exp();
    Ok(scale * scale * ig_mgf_d2(2.0 * z1, &params.ig())?)
}

pub fn hmse_agg_expanded(params: &ModelParams, t: u32) -> Result<f64> {
    check_horizon(t)?;
    let c = components_agg(params, t)?;
    let (a0, a1) = coefficients(&c)?;
    let u = c.u;
    let var_s = var_aggregate(params)?;
    let cov_s = cov_aggregate_lag(params)?;
    let h2 = (1.0 + params.b2()) * freq_hypothetical_second_moment(params)?;
    let tf = t as f64;
    let value = h2 + a0 * a0 + tf * a1 * a1 * (var_s + u * u) + 2.0 * tf * a0 * a1 * u
        + tf * (tf - 1.0) * a1 * a1 * (cov_s + u * u)
        - 2.0 * a0 * u
        - 2.0 * tf * a1 * h2;
    Ok(value.max(0.0))
}

/// `a1 v1 / (t a1 + v1)`.
pub fn hmse_agg_simplified(params: &ModelParams, t: u32) -> Result<f64> {
    check_horizon(t)?;
    Ok(reduced(&components_agg(params, t)?))
}

fn reduced(c: &CredibilityComponents) -> f64 {
    if c.a == 0.0 {
        0.0
    } else {
        c.a * c.v / (c.t as f64 * c.a + c.v)
    }
}

pub fn hmse_freq_expanded(params: &ModelParams, t: u32) -> Result<f64> {
    check_horizon(t)?;
    let c = components_freq(params, t)?;
    let (a0, a1) = coefficients(&c)?;
    let u = c.u;
    let (l1, l2, b) = (params.lambda1(), params.lambda2(), params.beta0());
    let spec = params.ig();
    let at_b = joint_aux(b, l1, &spec)?;
    let at_2b = joint_aux(2.0 * b, l1, &spec)?;
    let obs_second = l2 * l2 * at_2b.n2_tilt;
    let obs_mean = l2 * at_b.n_tilt;
    let obs_cross = l2 * l2 * at_b.cross_period;
    let obs_target = l1 * l2 * l2 * b.exp() * at_b.n_tilt_effect;
    let h2 = (1.0 + params.b2()) * obs_target;
    let tf = t as f64;
    let value = h2 + a0 * a0 + tf * a1 * a1 * obs_second + 2.0 * tf * a0 * a1 * obs_mean
        + tf * (tf - 1.0) * a1 * a1 * obs_cross
        - 2.0 * a0 * u
        - 2.0 * tf * a1 * obs_target;
    Ok(value.max(0.0))
}

/// `b2 (lambda1 lambda2 e^{beta0})² M''(2 ζ1) + a2 v2 / (t a2 + v2)`.
pub fn hmse_freq_simplified(params: &ModelParams, t: u32) -> Result<f64> {
    check_horizon(t)?;
    Ok(params.b2() * freq_hypothetical_second_moment(params)? + reduced(&components_freq(params, t)?))
}

/// `lim_{t→∞} HMSE_2(t) = b2 e^{2 beta0} (lambda1 lambda2)² M''(2 ζ1)`.
pub fn hmse_freq_limit(params: &ModelParams) -> Result<f64> {
    let (z1, _) = zeta(params);
    let ll = params.lambda1() * params.lambda2();
    Ok(params.b2() * (2.0 * params.beta0()).exp() * ll * ll * ig_mgf_d2(2.0 * z1, &params.ig())?)
}

pub fn hmse(params: &ModelParams, t: u32, variant: Variant) -> Result<f64> {
    match variant {
        Variant::AggregateSeverity => hmse_agg_expanded(params, t),
        Variant::Frequency => hmse_freq_expanded(params, t),
        Variant::FrequencyCount => Err(Error::Usage(
            "the claim-count premium predicts counts; its error is not comparable".into(),
        )),
    }
}

/// `Σ_κ w_κ HMSE(Λ_κ, t)`.
pub fn weighted_hmse(portfolio: &Portfolio, t: u32, variant: Variant) -> Result<f64> {
    portfolio
        .classes()
        .iter()
        .try_fold(0.0, |acc, class| Ok(acc + class.weight * hmse(&class.params, t, variant)?))
}

/// One (scenario, horizon) line of a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRow {
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t: u32,
    pub hmse1: f64,
    pub hmse2: f64,
    pub hmse1_simplified: f64,
    pub hmse2_simplified: f64,
    pub hmse2_limit: f64,
    pub recommended: Method,
}

pub fn mse_row(params: &ModelParams, t: u32) -> Result<MseRow> {
    let hmse1 = hmse_agg_expanded(params, t)?;
    let hmse2 = hmse_freq_expanded(params, t)?;
    Ok(MseRow {
        beta0: params.beta0(),
        b1: params.b1(),
        b2: params.b2(),
        t,
        hmse1,
        hmse2,
        hmse1_simplified: hmse_agg_simplified(params, t)?,
        hmse2_simplified: hmse_freq_simplified(params, t)?,
        hmse2_limit: hmse_freq_limit(params)?,
        recommended: Method::compare(hmse1, hmse2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub row: MseRow,
    /// Smallest horizon at which the preferred method differs from the one
    /// preferred the period before.
    pub crossover: Option<u32>,
}

pub fn recommend(params: &ModelParams, t: u32) -> Result<Recommendation> {
    recommend_with(params, t, DEFAULT_T_MAX)
}

pub fn recommend_with(params: &ModelParams, t: u32, t_max: u32) -> Result<Recommendation> {
    Ok(Recommendation { row: mse_row(params, t)?, crossover: crossover(params, t_max)? })
}

/// Scans `t = 1..=t_max` for the first change of the preferred method.
///
/// Once the frequency limit exceeds `HMSE_1(t)` the aggregate premium stays
/// ahead for good, so the scan stops there.
pub fn crossover(params: &ModelParams, t_max: u32) -> Result<Option<u32>> {
    let limit = hmse_freq_limit(params)?;
    let mut previous: Option<Method> = None;
    for t in 1..=t_max {
        let h1 = hmse_agg_expanded(params, t)?;
        let method = Method::compare(h1, hmse_freq_expanded(params, t)?);
        if let Some(prev) = previous {
            if method != prev && method != Method::Tie && prev != Method::Tie {
                return Ok(Some(t));
            }
        }
        if method == Method::AggregateSeverity && limit > h1 {
            return Ok(None);
        }
        if method != Method::Tie {
            previous = Some(method);
        }
    }
    Ok(None)
}

/// Rows for a set of scenarios, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MseReport {
    pub rows: Vec<MseRow>,
}

pub const CSV_HEADER: [&str; 8] = ["beta0", "b1", "b2", "t", "hmse1", "hmse2", "hmse2_limit", "recommended"];

impl MseReport {
    pub fn for_params(params: &ModelParams, horizons: &[u32]) -> Result<Self> {
        let rows = horizons.iter().map(|&t| mse_row(params, t)).collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    /// Writes the report as CSV, with every value divided by `scale`.
    pub fn write_csv<W: Write>(&self, out: W, scale: f64) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.beta0.to_string(),
                r.b1.to_string(),
                r.b2.to_string(),
                r.t.to_string(),
                (r.hmse1 / scale).to_string(),
                (r.hmse2 / scale).to_string(),
                (r.hmse2_limit / scale).to_string(),
                r.recommended.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
