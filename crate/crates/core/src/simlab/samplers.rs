//! Exact samplers for the model's random effects, counts and severities.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::crm::ModelParams;
use crate::momentkit::{IgSpec, DEGENERATE_VARIANCE};

/// Inverse-Gaussian draw by the Michael–Schucany–Haas transformation.
///
/// The smaller root is formed as `mean² / larger_root`, which avoids the
/// cancellation of the textbook expression when the variance is small.
pub fn sample_ig<R: Rng + ?Sized>(spec: &IgSpec, rng: &mut R) -> f64 {
    let mu = spec.mean();
    if spec.is_degenerate() {
        return mu;
    }
    let shape = spec.shape();
    let nu: f64 = rng.sample(StandardNormal);
    let y = nu * nu;
    let my = mu * y;
    let larger = mu + mu * (my + (4.0 * shape * my + my * my).sqrt()) / (2.0 * shape);
    let smaller = mu * mu / larger;
    let u: f64 = rng.random();
    if u * (mu + smaller) <= mu {
        smaller
    } else {
        larger
    }
}

/// Gamma variate with given mean and dispersion (`var = dispersion * mean²`).
pub fn sample_gamma_mean_dispersion<R: Rng + ?Sized>(mean: f64, dispersion: f64, rng: &mut R) -> f64 {
    Gamma::new(1.0 / dispersion, dispersion * mean).expect("positive gamma parameters").sample(rng)
}

/// One simulated period.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodDraw {
    pub n: u32,
    pub severities: Vec<f64>,
    pub s: f64,
    /// Average severity `S / N`, zero without claims.
    pub m: f64,
}

/// Sampler bound to one parameter record; caches the distribution objects.
#[derive(Debug, Clone)]
pub struct ModelSampler {
    params: ModelParams,
    ig: IgSpec,
    unit_severity: Gamma<f64>,
    severity_effect: Option<Gamma<f64>>,
}

impl ModelSampler {
    pub fn new(params: &ModelParams) -> Self {
        let psi = params.psi2();
        let b2 = params.b2();
        Self {
            params: *params,
            ig: params.ig(),
            unit_severity: Gamma::new(1.0 / psi, 1.0).expect("psi2 validated"),
            severity_effect: (b2 >= DEGENERATE_VARIANCE).then(|| Gamma::new(1.0 / b2, b2).expect("b2 validated")),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `(R1, R2)`: inverse Gaussian and gamma, both with unit mean.
    pub fn effects<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let r1 = sample_ig(&self.ig, rng);
        let r2 = self.severity_effect.as_ref().map_or(1.0, |g| g.sample(rng));
        (r1, r2)
    }

    /// Count distribution given `R1 = r1`; `None` when the rate is zero.
    pub fn counts(&self, r1: f64) -> Option<Poisson<f64>> {
        let rate = self.params.lambda1() * r1;
        (rate > 0.0).then(|| Poisson::new(rate).expect("finite positive rate"))
    }

    pub fn count<R: Rng + ?Sized>(&self, counts: &Option<Poisson<f64>>, rng: &mut R) -> u32 {
        counts.as_ref().map_or(0, |p| p.sample(rng) as u32)
    }

    /// Mean of each severity in a period with `n` claims.
    pub fn severity_mean(&self, n: u32, r2: f64) -> f64 {
        self.params.lambda2() * (self.params.beta0() * n as f64).exp() * r2
    }

    /// One severity given the period's count.
    pub fn severity<R: Rng + ?Sized>(&self, n: u32, r2: f64, rng: &mut R) -> f64 {
        let scale = self.params.psi2() * self.severity_mean(n, r2);
        scale * self.unit_severity.sample(rng)
    }

    /// Aggregate claim of a period with `n` claims, drawing each severity.
    pub fn aggregate<R: Rng + ?Sized>(&self, n: u32, r2: f64, rng: &mut R) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let scale = self.params.psi2() * self.severity_mean(n, r2);
        let mut s = 0.0;
        for _ in 0..n {
            s += self.unit_severity.sample(rng);
        }
        s * scale
    }

    /// A full period with the individual severities kept.
    pub fn period_with_count<R: Rng + ?Sized>(&self, n: u32, r2: f64, rng: &mut R) -> PeriodDraw {
        let severities: Vec<f64> = (0..n).map(|_| self.severity(n, r2, rng)).collect();
        let s: f64 = severities.iter().sum();
        let m = if n == 0 { 0.0 } else { s / n as f64 };
        PeriodDraw { n, severities, s, m }
    }
}

/// Draws one period given the random effects: `N ~ Pois(lambda1 r1)` and
/// `N` severities from `Gamma(mean lambda2 e^{beta0 N} r2, dispersion psi2)`.
pub fn sample_period<R: Rng + ?Sized>(params: &ModelParams, r1: f64, r2: f64, rng: &mut R) -> PeriodDraw {
    let sampler = ModelSampler::new(params);
    let counts = sampler.counts(r1);
    let n = sampler.count(&counts, rng);
    sampler.period_with_count(n, r2, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentkit::ig_mgf;
    use crate::simlab::{MeanAccumulator, RngStream};

    #[test]
    fn degenerate_ig_is_constant() {
        let mut rng = RngStream::new(1, 0);
        let spec = IgSpec::unit_mean(0.0).unwrap();
        assert_eq!(sample_ig(&spec, &mut rng), 1.0);
    }

    #[test]
    fn ig_moments() {
        for (k, &b) in [0.01, 0.5, 1.5, 3.0].iter().enumerate() {
            let spec = IgSpec::unit_mean(b).unwrap();
            let mut rng = RngStream::new(99, k as u64);
            let mut mean = MeanAccumulator::default();
            let mut sq = MeanAccumulator::default();
            let mut mgf = MeanAccumulator::default();
            let z = 0.2f64.min(0.4 / (2.0 * b));
            for _ in 0..400_000 {
                let r = sample_ig(&spec, &mut rng);
                assert!(r > 0.0);
                mean.push(r);
                sq.push((r - 1.0) * (r - 1.0));
                mgf.push((z * r).exp());
            }
            assert!(mean.estimate().z_score(1.0).abs() < 4.0, "mean b={b}");
            assert!(sq.estimate().z_score(b).abs() < 4.0, "var b={b}");
            assert!(mgf.estimate().z_score(ig_mgf(z, &spec).unwrap()).abs() < 4.0, "mgf b={b}");
        }
    }

    #[test]
    fn zero_count_period() {
        let p = ModelParams::new(1.0, 100.0, 0.0, 1.0, 0.5, 0.2).unwrap();
        let sampler = ModelSampler::new(&p);
        let mut rng = RngStream::new(5, 0);
        let d = sampler.period_with_count(0, 1.0, &mut rng);
        assert_eq!(d, PeriodDraw { n: 0, severities: vec![], s: 0.0, m: 0.0 });
    }

    #[test]
    fn severity_mean_and_dispersion() {
        let p = ModelParams::new(1.0, 100.0, 0.0, 0.6, 0.5, 0.2).unwrap();
        let sampler = ModelSampler::new(&p);
        let mut rng = RngStream::new(6, 0);
        let (mut m, mut v) = (MeanAccumulator::default(), MeanAccumulator::default());
        for _ in 0..400_000 {
            let y = sampler.severity(3, 1.0, &mut rng);
            m.push(y);
            v.push((y - 100.0).powi(2));
        }
        assert!(m.estimate().z_score(100.0).abs() < 4.0);
        assert!(v.estimate().z_score(0.6 * 100.0 * 100.0).abs() < 4.0);
    }

    #[test]
    fn dependence_scales_mean_per_claim() {
        let p = ModelParams::new(1.0, 100.0, -0.1, 0.5, 0.5, 0.2).unwrap();
        let sampler = ModelSampler::new(&p);
        let mut rng = RngStream::new(8, 0);
        for n in 1..=4u32 {
            let mut acc = MeanAccumulator::default();
            for _ in 0..100_000 {
                acc.push(sampler.severity(n, 1.0, &mut rng));
            }
            let expect = 100.0 * (-0.1 * n as f64).exp();
            assert!(acc.estimate().z_score(expect).abs() < 4.0, "n={n}");
        }
    }

    #[test]
    fn sampled_period_is_consistent() {
        let p = ModelParams::new(3.0, 10.0, -0.05, 1.0, 0.5, 0.2).unwrap();
        let mut rng = RngStream::new(2, 0);
        for _ in 0..100 {
            let d = sample_period(&p, 1.2, 0.9, &mut rng);
            assert_eq!(d.severities.len(), d.n as usize);
            assert_eq!(d.s, d.severities.iter().sum::<f64>());
            assert_eq!(d.s == 0.0, d.n == 0);
        }
    }
}
