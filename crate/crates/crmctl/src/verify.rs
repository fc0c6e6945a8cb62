//! Closed form against simulation for one parameter record.

use std::io::Write;

use anyhow::{bail, Result};
use crm_core::credibility::Variant;
use crm_core::crm::{self, ModelParams};
use crm_core::risk_mse::{hmse_agg_expanded, hmse_freq_expanded, hmse_freq_limit};
use crm_core::simlab::{empirical_premium_mse_curves, moment_oracle, RngStream, SimEstimate, MIN_MSE_SAMPLES};
use serde::Serialize;

/// Checks pass when `|z| < Z_LIMIT`. Standard errors shrink like `1/sqrt(n)`,
/// so the absolute tolerance widens automatically for small `n`.
pub const Z_LIMIT: f64 = 4.0;

pub const HORIZONS: [u32; 3] = [1, 5, 10];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub closed_form: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub pass: bool,
}

impl CheckLine {
    fn new(name: impl Into<String>, closed_form: f64, est: SimEstimate) -> Self {
        let z = est.z_score(closed_form);
        Self { name: name.into(), closed_form, estimate: est.value, std_error: est.std_error, z, pass: z.abs() < Z_LIMIT }
    }
}

pub fn run_checks(params: &ModelParams, n: usize, seed: u64) -> Result<Vec<CheckLine>> {
    if n < MIN_MSE_SAMPLES {
        bail!("--n must be at least {MIN_MSE_SAMPLES}, got {n}");
    }
    let mut lines = Vec::new();
    let moments = moment_oracle(params, n, &RngStream::new(seed, 0))?;
    for m in &moments {
        lines.push(CheckLine::new(m.name, m.closed_form, m.estimate));
    }
    lines.push(CheckLine::new(
        "cov_freq_severity_cross_period_exact",
        crm::cov_freq_severity_cross_period_exact(params)?,
        moments[8].estimate,
    ));

    let u = crm::mean_aggregate(params)?;
    let variants = [Variant::AggregateSeverity, Variant::Frequency];
    for r in empirical_premium_mse_curves(params, &HORIZONS, n, &variants, &RngStream::new(seed, 1))? {
        let (label, closed) = match r.variant {
            Variant::AggregateSeverity => ("hmse1", hmse_agg_expanded(params, r.t)?),
            _ => ("hmse2", hmse_freq_expanded(params, r.t)?),
        };
        lines.push(CheckLine::new(format!("{label}(t={})", r.t), closed, r.mse));
        lines.push(CheckLine::new(format!("mean_premium_{label}(t={})", r.t), u, r.mean_premium));
    }
    if params.b2() == 0.0 {
        let limit = hmse_freq_limit(params)?;
        lines.push(CheckLine {
            name: "hmse2_limit_vanishes".into(),
            closed_form: 0.0,
            estimate: limit,
            std_error: 0.0,
            z: if limit == 0.0 { 0.0 } else { f64::INFINITY },
            pass: limit == 0.0,
        });
    }
    Ok(lines)
}

pub fn print_checks<W: Write>(out: &mut W, lines: &[CheckLine]) -> std::io::Result<()> {
    writeln!(out, "{:<40} {:>16} {:>16} {:>12} {:>8}  result", "check", "closed form", "estimate", "std error", "z")?;
    for l in lines {
        writeln!(
            out,
            "{:<40} {:>16.6e} {:>16.6e} {:>12.4e} {:>8.2}  {}",
            l.name,
            l.closed_form,
            l.estimate,
            l.std_error,
            l.z,
            if l.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}
