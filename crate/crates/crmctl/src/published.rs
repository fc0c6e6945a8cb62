//! Reference table comparison.

use std::io::{Read, Write};

use anyhow::{Context, Result};
use crm_core::risk_mse::{Method, MseRow};
use serde::{Deserialize, Serialize};

/// One transcribed reference cell. Values are in units of `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedRow {
    pub beta0: f64,
    pub b2: f64,
    pub b1: f64,
    pub t: u32,
    pub hmse1: f64,
    pub hmse2: f64,
    pub scale: f64,
}

impl PublishedRow {
    pub fn preferred(&self) -> Method {
        Method::compare(self.hmse1, self.hmse2)
    }

    fn same_cell(&self, row: &MseRow) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        self.t == row.t && close(self.beta0, row.beta0) && close(self.b1, row.b1) && close(self.b2, row.b2)
    }
}

pub fn read_published<R: Read>(input: R) -> Result<Vec<PublishedRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (k, record) in reader.deserialize().enumerate() {
        rows.push(record.with_context(|| format!("reference table record {}", k + 1))?);
    }
    Ok(rows)
}

/// Computed values next to a reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    pub t: u32,
    pub published_hmse1: f64,
    pub computed_hmse1: f64,
    pub rel_dev_hmse1: f64,
    pub published_hmse2: f64,
    pub computed_hmse2: f64,
    pub rel_dev_hmse2: f64,
    pub published_order: Method,
    pub computed_order: Method,
    pub order_match: bool,
}

/// Pairs every reference cell with the computed row of the same scenario and
/// horizon; reference cells without a computed counterpart are skipped.
pub fn compare(published: &[PublishedRow], computed: &[MseRow]) -> Vec<Comparison> {
    published
        .iter()
        .filter_map(|p| {
            let row = computed.iter().find(|r| p.same_cell(r))?;
            let (h1, h2) = (row.hmse1 / p.scale, row.hmse2 / p.scale);
            Some(Comparison {
                beta0: p.beta0,
                b1: p.b1,
                b2: p.b2,
                t: p.t,
                published_hmse1: p.hmse1,
                computed_hmse1: h1,
                rel_dev_hmse1: (h1 - p.hmse1) / p.hmse1,
                published_hmse2: p.hmse2,
                computed_hmse2: h2,
                rel_dev_hmse2: (h2 - p.hmse2) / p.hmse2,
                published_order: p.preferred(),
                computed_order: row.recommended,
                order_match: p.preferred() == row.recommended,
            })
        })
        .collect()
}

pub fn write_comparison<W: Write>(out: W, rows: &[Comparison]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
