use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use crm_core::credibility::Variant;
use crmctl::config::ScenarioGrid;
use crmctl::{exit, quote, scenario, verify};

#[derive(Parser)]
#[command(name = "crmctl", version, about = "Credibility premiums under frequency-severity dependence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Agg,
    Freq,
    FreqCount,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Agg => Variant::AggregateSeverity,
            VariantArg::Freq => Variant::Frequency,
            VariantArg::FreqCount => Variant::FrequencyCount,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate HMSE curves over a scenario grid and write CSV reports.
    Scenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Divisor for the printed summary; CSV files always hold raw values.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Transcribed reference table to compare orderings against.
        #[arg(long)]
        published: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Quote a credibility premium for one claim history.
    #[command(alias = "quote")]
    Premium {
        #[arg(long)]
        params: PathBuf,
        /// JSON history or CSV with columns N,S.
        #[arg(long)]
        history: PathBuf,
        #[arg(long, value_enum, default_value_t = VariantArg::Agg)]
        variant: VariantArg,
    },
    /// Compare closed-form moments and MSEs with simulation.
    Verify {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Preferred premium per horizon and the long-run frequency error.
    Recommend {
        #[arg(long)]
        params: PathBuf,
        #[arg(long, default_value_t = crm_core::risk_mse::DEFAULT_T_MAX)]
        t_max: u32,
    },
}

fn run(command: Command) -> Result<u8> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Scenario { config, out: dir, jobs, scale, published, seed } => {
            let mut grid = ScenarioGrid::load(&config)?;
            if let Some(seed) = seed {
                grid.seed = seed;
            }
            if !(scale.is_finite() && scale > 0.0) {
                anyhow::bail!("--scale must be positive, got {scale}");
            }
            let outcome = scenario::evaluate(&grid, jobs, published.as_deref())?;
            scenario::write_outputs(&outcome, &dir)?;
            scenario::print_summary(&mut out, &outcome, scale)?;
            Ok(if outcome.infeasible.is_empty() { exit::OK } else { exit::INFEASIBLE })
        }
        Command::Premium { params, history, variant } => {
            let params = quote::load_params(&params)?;
            let history = quote::load_history(&history)?;
            let q = quote::quote(&history, &params, variant.into())?;
            writeln!(out, "{}", serde_json::to_string_pretty(&q)?)?;
            Ok(exit::OK)
        }
        Command::Verify { params, n, seed } => {
            let params = quote::load_params(&params)?;
            let lines = verify::run_checks(&params, n, seed)?;
            verify::print_checks(&mut out, &lines)?;
            let failed = lines.iter().filter(|l| !l.pass).count();
            writeln!(out, "{} checks, {failed} failed", lines.len())?;
            Ok(if failed == 0 { exit::OK } else { exit::VERIFICATION_FAILED })
        }
        Command::Recommend { params, t_max } => {
            let params = quote::load_params(&params)?;
            let report = quote::recommend_report(&params, t_max)?;
            writeln!(out, "{:>5} {:>16} {:>16}  recommended", "t", "hmse1", "hmse2")?;
            for l in &report.lines {
                writeln!(out, "{:>5} {:>16.6} {:>16.6}  {}", l.t, l.hmse1, l.hmse2, l.recommended)?;
            }
            match report.crossover {
                Some(t) => writeln!(out, "crossover: t = {t}")?,
                None => writeln!(out, "crossover: none up to t = {t_max}")?,
            }
            writeln!(out, "hmse2 limit: {:.6}", report.hmse2_limit)?;
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::USAGE)
        }
    }
}
