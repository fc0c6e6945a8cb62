use std::io::Write;

use rayon::prelude::*;

use super::rng::RngStream;
use super::samplers::ModelSampler;
use crate::crm::{ClaimHistory, ModelParams, Period};
use crate::error::{Error, Result};

/// Policyholders simulated per independent stream.
pub const CHUNK: usize = 4096;

/// Default cap on `n * t` for materialized panels.
pub const DEFAULT_PANEL_CAP: u64 = 50_000_000;

/// Runs `work(stream, first_index, count)` on consecutive chunks of `n`
/// items in parallel. Chunk `k` always receives `rng.child(k)` and results
/// come back in chunk order.
pub(crate) fn chunked<A, F>(rng: &RngStream, n: usize, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(RngStream, usize, usize) -> A + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let start = k * CHUNK;
            work(rng.child(k as u64), start, CHUNK.min(n - start))
        })
        .collect()
}

/// One simulated policyholder with its latent effects.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyholderDraw {
    pub r1: f64,
    pub r2: f64,
    pub history: ClaimHistory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub policyholders: Vec<PolicyholderDraw>,
}

pub fn simulate_policyholders(params: &ModelParams, t: u32, n: usize, rng: &RngStream) -> Result<Panel> {
    simulate_policyholders_capped(params, t, n, rng, DEFAULT_PANEL_CAP)
}

/// Simulates `n` independent histories of length `t`. The random effects
/// are drawn once per policyholder; periods are i.i.d. given them.
pub fn simulate_policyholders_capped(
    params: &ModelParams,
    t: u32,
    n: usize,
    rng: &RngStream,
    cap: u64,
) -> Result<Panel> {
    if n == 0 || t == 0 {
        return Err(Error::Usage("a panel needs n >= 1 and t >= 1".into()));
    }
    let requested = n as u64 * t as u64;
    if requested > cap {
        return Err(Error::SizeLimit { requested, cap });
    }
    let sampler = ModelSampler::new(params);
    let chunks = chunked(rng, n, |mut rng, _, count| {
        (0..count)
            .map(|_| {
                let (r1, r2) = sampler.effects(&mut rng);
                let counts = sampler.counts(r1);
                let periods = (0..t)
                    .map(|_| {
                        let n = sampler.count(&counts, &mut rng);
                        Period { n, s: sampler.aggregate(n, r2, &mut rng) }
                    })
                    .collect();
                let history = ClaimHistory::new(periods).expect("simulated periods satisfy the history invariants");
                PolicyholderDraw { r1, r2, history }
            })
            .collect::<Vec<_>>()
    });
    Ok(Panel { policyholders: chunks.into_iter().flatten().collect() })
}

impl Panel {
    /// Writes `policyholder_id,t,N,S` rows, periods numbered from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["policyholder_id", "t", "N", "S"])?;
        for (id, ph) in self.policyholders.iter().enumerate() {
            for (k, p) in ph.history.periods().iter().enumerate() {
                w.write_record([id.to_string(), (k + 1).to_string(), p.n.to_string(), p.s.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.5, 100.0, -0.05, 1.0, 1.5, 0.2).unwrap()
    }

    #[test]
    fn reproducible_panels() {
        let rng = RngStream::new(42, 0);
        let a = simulate_policyholders(&params(), 1, 1, &rng).unwrap();
        let b = simulate_policyholders(&params(), 1, 1, &rng).unwrap();
        assert_eq!(a, b);
        let big_a = simulate_policyholders(&params(), 3, 10_000, &rng).unwrap();
        let big_b = simulate_policyholders(&params(), 3, 10_000, &rng).unwrap();
        assert_eq!(big_a, big_b);
        assert_eq!(big_a.policyholders.len(), 10_000);
        // extending the panel keeps the leading policyholders of each chunk stream
        assert_eq!(big_a.policyholders[0].r1, simulate_policyholders(&params(), 3, 5, &rng).unwrap().policyholders[0].r1);
    }

    #[test]
    fn size_guard() {
        let rng = RngStream::new(1, 0);
        let err = simulate_policyholders_capped(&params(), 10, 1000, &rng, 5000).unwrap_err();
        assert_eq!(err, Error::SizeLimit { requested: 10_000, cap: 5000 });
        assert!(simulate_policyholders(&params(), 0, 10, &rng).is_err());
    }

    #[test]
    fn csv_export() {
        let rng = RngStream::new(3, 0);
        let panel = simulate_policyholders(&params(), 2, 3, &rng).unwrap();
        let mut buf = Vec::new();
        panel.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "policyholder_id,t,N,S");
        assert_eq!(lines.len(), 7);
        assert!(lines[1].starts_with("0,1,"));
        assert!(lines[6].starts_with("2,2,"));
    }
}
