//! Scenario grid runner.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use crm_core::credibility::Variant;
use crm_core::risk_mse::{hmse_agg_expanded, hmse_freq_expanded, hmse_freq_limit, mse_row, MseReport, MseRow};
use crm_core::simlab::{empirical_premium_mse_curves, RngStream};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{scenario_seed, Scenario, ScenarioGrid};
use crate::published::{compare, read_published, write_comparison, Comparison};

/// Horizons of the long-run curve file.
pub const ASYMPTOTIC_HORIZONS: [u32; 13] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfeasibleCell {
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    pub constraint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McRow {
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t: u32,
    pub variant: &'static str,
    pub closed_form: f64,
    pub mse: f64,
    pub std_error: f64,
    pub rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticRow {
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t: u32,
    pub hmse1: f64,
    pub hmse2: f64,
    pub hmse2_limit: f64,
}

#[derive(Debug, Default)]
pub struct ScenarioOutcome {
    pub report: MseReport,
    pub infeasible: Vec<InfeasibleCell>,
    pub asymptotic: Vec<AsymptoticRow>,
    pub mc: Vec<McRow>,
    pub comparison: Vec<Comparison>,
}

struct CellResult {
    rows: Vec<MseRow>,
    asymptotic: Vec<AsymptoticRow>,
    mc: Vec<McRow>,
}

fn constraint_name(err: &crm_core::Error) -> String {
    match err {
        crm_core::Error::Calibration(msg) => format!("psi2 calibration: {msg}"),
        crm_core::Error::Domain(msg) => format!("IG MGF domain: {msg}"),
        other => other.to_string(),
    }
}

fn run_cell(grid: &ScenarioGrid, cell: &Scenario) -> crm_core::Result<CellResult> {
    let params = cell.params(grid)?;
    let rows = grid.t.iter().map(|&t| mse_row(&params, t)).collect::<crm_core::Result<Vec<_>>>()?;
    let limit = hmse_freq_limit(&params)?;
    let asymptotic = ASYMPTOTIC_HORIZONS
        .iter()
        .map(|&t| {
            Ok(AsymptoticRow {
                beta0: params.beta0(),
                b1: params.b1(),
                b2: params.b2(),
                t,
                hmse1: hmse_agg_expanded(&params, t)?,
                hmse2: hmse_freq_expanded(&params, t)?,
                hmse2_limit: limit,
            })
        })
        .collect::<crm_core::Result<Vec<_>>>()?;
    let mut mc = Vec::new();
    if let Some(cfg) = &grid.mc {
        let rng = RngStream::new(scenario_seed(grid.seed, cell.index), 0);
        let variants = [Variant::AggregateSeverity, Variant::Frequency];
        for r in empirical_premium_mse_curves(&params, &cfg.t, cfg.n, &variants, &rng)? {
            let closed_form = match r.variant {
                Variant::AggregateSeverity => hmse_agg_expanded(&params, r.t)?,
                _ => hmse_freq_expanded(&params, r.t)?,
            };
            mc.push(McRow {
                beta0: params.beta0(),
                b1: params.b1(),
                b2: params.b2(),
                t: r.t,
                variant: if r.variant == Variant::AggregateSeverity { "AggregateSeverity" } else { "Frequency" },
                closed_form,
                mse: r.mse.value,
                std_error: r.mse.std_error,
                rel_dev: (r.mse.value - closed_form) / closed_form,
            });
        }
    }
    Ok(CellResult { rows, asymptotic, mc })
}

/// Evaluates every grid cell on a pool of `jobs` workers. Results are
/// reassembled in grid order, so the outcome does not depend on `jobs`.
pub fn evaluate(grid: &ScenarioGrid, jobs: usize, published: Option<&Path>) -> Result<ScenarioOutcome> {
    let cells = grid.scenarios()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
    let mut results: Vec<(usize, std::result::Result<CellResult, String>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| (cell.index, run_cell(grid, cell).map_err(|e| constraint_name(&e))))
            .collect()
    });
    results.sort_by_key(|(index, _)| *index);

    let mut outcome = ScenarioOutcome::default();
    for (index, result) in results {
        match result {
            Ok(cell) => {
                outcome.report.rows.extend(cell.rows);
                outcome.asymptotic.extend(cell.asymptotic);
                outcome.mc.extend(cell.mc);
            }
            Err(constraint) => {
                let base = cells[index].base;
                outcome.infeasible.push(InfeasibleCell { beta0: base.beta0, b1: base.b1, b2: base.b2, constraint });
            }
        }
    }
    if let Some(path) = published {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let reference = read_published(file)?;
        outcome.comparison = compare(&reference, &outcome.report.rows);
    }
    Ok(outcome)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path: PathBuf = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_rows<T: Serialize>(dir: &Path, name: &str, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(dir, name)?);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes every output file of a run into `dir`.
pub fn write_outputs(outcome: &ScenarioOutcome, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    outcome.report.write_csv(create(dir, "hmse.csv")?, 1.0)?;
    let mut json = create(dir, "hmse.json")?;
    json.write_all(outcome.report.to_json()?.as_bytes())?;
    json.flush()?;

    write_rows(dir, "infeasible.csv", &outcome.infeasible, &["beta0", "b1", "b2", "constraint"])?;

    let mut betas: Vec<f64> = Vec::new();
    for r in &outcome.report.rows {
        if !betas.contains(&r.beta0) {
            betas.push(r.beta0);
        }
    }
    for beta0 in betas {
        let mut w = csv::Writer::from_writer(create(dir, &format!("figure_beta0_{beta0}.csv"))?);
        w.write_record(["b1", "b2", "t", "hmse1", "hmse2"])?;
        for r in outcome.report.rows.iter().filter(|r| r.beta0 == beta0) {
            w.write_record([r.b1.to_string(), r.b2.to_string(), r.t.to_string(), r.hmse1.to_string(), r.hmse2.to_string()])?;
        }
        w.flush()?;
    }
    write_rows(
        dir,
        "figure_asymptotic.csv",
        &outcome.asymptotic,
        &["beta0", "b1", "b2", "t", "hmse1", "hmse2", "hmse2_limit"],
    )?;
    if !outcome.mc.is_empty() {
        write_rows(
            dir,
            "hmse_mc.csv",
            &outcome.mc,
            &["beta0", "b1", "b2", "t", "variant", "closed_form", "mse", "std_error", "rel_dev"],
        )?;
    }
    if !outcome.comparison.is_empty() {
        write_comparison(create(dir, "comparison_vs_published.csv")?, &outcome.comparison)?;
    }
    Ok(())
}

/// Human-readable table with values divided by `scale`.
pub fn print_summary<W: Write>(out: &mut W, outcome: &ScenarioOutcome, scale: f64) -> std::io::Result<()> {
    writeln!(out, "{:>7} {:>5} {:>5} {:>4} {:>12} {:>12} {:>12}  recommended", "beta0", "b2", "b1", "t", "hmse1", "hmse2", "limit")?;
    for r in &outcome.report.rows {
        writeln!(
            out,
            "{:>7} {:>5} {:>5} {:>4} {:>12.4} {:>12.4} {:>12.4}  {}",
            r.beta0,
            r.b2,
            r.b1,
            r.t,
            r.hmse1 / scale,
            r.hmse2 / scale,
            r.hmse2_limit / scale,
            r.recommended
        )?;
    }
    for cell in &outcome.infeasible {
        writeln!(out, "infeasible: beta0={} b1={} b2={}: {}", cell.beta0, cell.b1, cell.b2, cell.constraint)?;
    }
    if !outcome.comparison.is_empty() {
        let matched = outcome.comparison.iter().filter(|c| c.order_match).count();
        writeln!(out, "reference orderings reproduced: {matched}/{}", outcome.comparison.len())?;
    }
    Ok(())
}
