use std::path::Path;

use anyhow::{bail, Context, Result};
use crm_core::crm::{BaseParams, CUnits, ModelParams, RateSpec};
use serde::{Deserialize, Serialize};

/// Optional Monte Carlo cross-check attached to a scenario run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Simulated policyholders per scenario.
    pub n: usize,
    pub t: Vec<u32>,
}

/// Cartesian scenario grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioGrid {
    pub beta0: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub t: Vec<u32>,
    pub lambda1: RateSpec,
    pub lambda2: RateSpec,
    /// Severity-variance calibration constant; deliberately has no default.
    pub c: f64,
    #[serde(default)]
    pub c_units: CUnits,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mc: Option<McConfig>,
}

/// One cell of the grid, identified by its position in the product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub index: usize,
    pub base: BaseParams,
}

impl ScenarioGrid {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let grid: ScenarioGrid = serde_json::from_str(text)?;
        grid.validate()?;
        Ok(grid)
    }

    fn validate(&self) -> Result<()> {
        if self.beta0.is_empty() || self.b1.is_empty() || self.b2.is_empty() || self.t.is_empty() {
            bail!("grid axes beta0, b1, b2 and t must all be non-empty");
        }
        if self.t.contains(&0) {
            bail!("horizons must be at least 1");
        }
        if let Some(mc) = &self.mc {
            if mc.t.is_empty() || mc.t.contains(&0) {
                bail!("mc.t must list positive horizons");
            }
        }
        Ok(())
    }

    /// Cells ordered by beta0, then b2, then b1.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let lambda1 = self.lambda1.resolve()?;
        let lambda2 = self.lambda2.resolve()?;
        let mut out = Vec::new();
        for &beta0 in &self.beta0 {
            for &b2 in &self.b2 {
                for &b1 in &self.b1 {
                    let base = BaseParams { lambda1, lambda2, beta0, b1, b2 };
                    out.push(Scenario { index: out.len(), base });
                }
            }
        }
        Ok(out)
    }
}

impl Scenario {
    pub fn params(&self, grid: &ScenarioGrid) -> crm_core::Result<ModelParams> {
        self.base.calibrated(grid.c, grid.c_units)
    }
}

/// Seed for scenario `index`: `seed ^ hash(index)`.
pub fn scenario_seed(seed: u64, index: usize) -> u64 {
    let mut x = (index as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    seed ^ x ^ (x >> 31)
}
