//! Parameter and history loading plus premium quotes.

use std::path::Path;

use anyhow::{bail, Context, Result};
use crm_core::credibility::{coefficients, premium, Variant};
use crm_core::crm::{ClaimHistory, ModelParams, Period};
use crm_core::risk_mse::{crossover, hmse_freq_limit, mse_row, Method};
use serde::{Deserialize, Serialize};

pub fn load_params(path: &Path) -> Result<ModelParams> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[derive(Deserialize)]
struct HistoryRecord {
    #[serde(alias = "N")]
    n: u32,
    #[serde(alias = "S")]
    s: f64,
}

/// Reads a history from JSON (`{"periods":[{"n":..,"s":..}]}`) or, for a
/// `.csv` file, from columns `N,S` with one row per period.
pub fn load_history(path: &Path) -> Result<ClaimHistory> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv {
        return serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let mut periods = Vec::new();
    for (k, rec) in csv::Reader::from_reader(text.as_bytes()).deserialize::<HistoryRecord>().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), k + 1))?;
        periods.push(Period::new(rec.n, rec.s).with_context(|| format!("{}: period {}", path.display(), k + 1))?);
    }
    Ok(ClaimHistory::new(periods)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuoteOutput {
    pub variant: Variant,
    pub premium: f64,
    pub z: f64,
    pub u: f64,
    pub v: f64,
    pub a: f64,
    pub t: u32,
    pub observation_mean: f64,
    pub alpha0: f64,
    /// Weight on each observed period, oldest first.
    pub alpha: Vec<f64>,
}

pub fn quote(history: &ClaimHistory, params: &ModelParams, variant: Variant) -> Result<QuoteOutput> {
    let q = premium(history, params, variant)?;
    let c = q.components;
    let (alpha0, alpha) = if c.t == 0 {
        (c.u, Vec::new())
    } else {
        let (a0, a) = coefficients(&c)?;
        (a0, vec![a; c.t as usize])
    };
    Ok(QuoteOutput {
        variant,
        premium: q.premium,
        z: c.z,
        u: c.u,
        v: c.v,
        a: c.a,
        t: c.t,
        observation_mean: q.observation_mean,
        alpha0,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendLine {
    pub t: u32,
    pub hmse1: f64,
    pub hmse2: f64,
    pub recommended: Method,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecommendReport {
    pub lines: Vec<RecommendLine>,
    /// First horizon at which the preferred premium changes.
    pub crossover: Option<u32>,
    pub hmse2_limit: f64,
}

pub fn recommend_report(params: &ModelParams, t_max: u32) -> Result<RecommendReport> {
    if t_max == 0 {
        bail!("--t-max must be at least 1");
    }
    let lines = (1..=t_max)
        .map(|t| {
            let r = mse_row(params, t)?;
            Ok(RecommendLine { t, hmse1: r.hmse1, hmse2: r.hmse2, recommended: r.recommended })
        })
        .collect::<crm_core::Result<Vec<_>>>()?;
    Ok(RecommendReport { lines, crossover: crossover(params, t_max)?, hmse2_limit: hmse_freq_limit(params)? })
}
