//! Average-severity law check.
//!
//! With `n0` i.i.d. severities from `Gamma(mean μ, dispersion ψ)`, their
//! average is `Gamma(mean μ, dispersion ψ / n0)`. The test draws both sides
//! and compares them with a two-sample Kolmogorov–Smirnov statistic.

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use super::rng::RngStream;
use crate::crm::ModelParams;
use crate::error::{Error, Result};

/// Significance level of the test.
pub const ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCase {
    pub mean: f64,
    pub dispersion: f64,
    pub n0: u32,
}

impl EquivalenceCase {
    /// Severity law of a period with `n0` claims and severity effect `r2`.
    pub fn from_params(params: &ModelParams, n0: u32, r2: f64) -> Self {
        Self {
            mean: params.lambda2() * (params.beta0() * n0 as f64).exp() * r2,
            dispersion: params.psi2(),
            n0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// `sup |F_a - F_b|` of two empirical distributions. Sorts its inputs.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic two-sample critical value `sqrt(ln(2/alpha)/2) sqrt((n+m)/(nm))`.
pub fn ks_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ((2.0 / alpha).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

pub fn average_severity_equivalence_test(case: &EquivalenceCase, n: usize, rng: &RngStream) -> Result<KsOutcome> {
    average_severity_test_with_dispersion(case, case.dispersion / case.n0 as f64, n, rng)
}

/// Compares averages of `n0` severities with direct draws from
/// `Gamma(mean, reduced_dispersion)`. Passing a wrong dispersion gives a
/// negative control.
pub fn average_severity_test_with_dispersion(
    case: &EquivalenceCase,
    reduced_dispersion: f64,
    n: usize,
    rng: &RngStream,
) -> Result<KsOutcome> {
    if case.n0 == 0 || n < 2 {
        return Err(Error::Usage("need n0 >= 1 and at least two samples".into()));
    }
    let gamma = |dispersion: f64| {
        Gamma::new(1.0 / dispersion, dispersion * case.mean)
            .map_err(|e| Error::Invalid(format!("gamma law with mean {} dispersion {dispersion}: {e}", case.mean)))
    };
    let single = gamma(case.dispersion)?;
    let reduced = gamma(reduced_dispersion)?;

    let mut left = rng.child(0);
    let mut averages: Vec<f64> = (0..n)
        .map(|_| (0..case.n0).map(|_| single.sample(&mut left)).sum::<f64>() / case.n0 as f64)
        .collect();
    let mut right = rng.child(1);
    let mut direct: Vec<f64> = (0..n).map(|_| reduced.sample(&mut right)).collect();

    let statistic = ks_statistic(&mut averages, &mut direct);
    let critical = ks_critical(n, n, ALPHA);
    Ok(KsOutcome { statistic, critical, pass: statistic < critical })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistic_of_known_samples() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        let mut b = vec![5.0, 6.0, 7.0, 8.0];
        assert_eq!(ks_statistic(&mut a, &mut b), 1.0);
        let mut c = vec![4.0, 1.0, 3.0, 2.0];
        let mut d = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_statistic(&mut c, &mut d), 0.0);
    }

    #[test]
    fn critical_value() {
        let c = ks_critical(100_000, 100_000, 0.01);
        assert!((c - 1.627_624 * (2.0f64 / 100_000.0).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn gamma_averages() {
        let rng = RngStream::new(77, 0);
        let case = EquivalenceCase { mean: 100.0, dispersion: 1.0, n0: 5 };
        assert!(average_severity_equivalence_test(&case, 20_000, &rng).unwrap().pass);
        let wrong = average_severity_test_with_dispersion(&case, 1.0 / 25.0, 20_000, &rng).unwrap();
        assert!(!wrong.pass);
    }
}
