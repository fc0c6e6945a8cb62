//! The dependent collective risk model.
//!
//! Given a priori rates `Λ = (lambda1, lambda2)`:
//!
//! - `N_t | R1 ~ Poisson(lambda1 R1)` with `R1 ~ IG(1, b1)`,
//! - `Y_{t,j} | R2, N_t ~ Gamma(mean = lambda2 e^{beta0 N_t} R2, dispersion psi2)`
//!   i.i.d. over `j`, where `E[R2] = 1`, `var R2 = b2`,
//! - `S_t = Σ_{j ≤ N_t} Y_{t,j}`.
//!
//! Gamma severities are parameterized by mean `μ` and dispersion `ψ`, so that
//! `var Y = ψ μ²` (shape `1/ψ`, scale `ψ μ`).
//!
//! All moments below are conditional on `Λ` and expressed through the IG MGF
//! evaluated at `ζ1 = lambda1 (e^{beta0} - 1)`, `ζ2 = lambda1 (e^{2 beta0} - 1)`
//! and `2 ζ1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::momentkit::{ig_mgf, ig_mgf_d1, ig_mgf_d2, IgSpec};

/// Tolerance on the sum of portfolio weights.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// Model parameters without the severity dispersion, which is usually
/// calibrated from a target severity variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseParams {
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BaseParams {
    pub fn with_psi(self, psi2: f64) -> Result<ModelParams> {
        ModelParams::new(self.lambda1, self.lambda2, self.beta0, psi2, self.b1, self.b2)
    }

    /// Calibrates `psi2` from the severity variance `c` and builds the full record.
    pub fn calibrated(self, c: f64, units: CUnits) -> Result<ModelParams> {
        self.with_psi(calibrate_psi(c, &self, units)?)
    }

    pub fn ig(&self) -> Result<IgSpec> {
        IgSpec::unit_mean(self.b1)
    }

    pub fn zeta(&self) -> (f64, f64) {
        (self.lambda1 * self.beta0.exp_m1(), self.lambda1 * (2.0 * self.beta0).exp_m1())
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let nonnegative = |v: f64, name: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{name} must be nonnegative and finite, got {v}")))
            }
        };
        positive(self.lambda1, "lambda1")?;
        positive(self.lambda2, "lambda2")?;
        nonnegative(self.b1, "b1")?;
        nonnegative(self.b2, "b2")?;
        if !self.beta0.is_finite() {
            return Err(Error::Invalid(format!("beta0 must be finite, got {}", self.beta0)));
        }
        let spec = self.ig()?;
        let (z1, z2) = self.zeta();
        let edge = spec.branch_point();
        if z2 >= edge {
            return Err(Error::Domain(format!(
                "zeta2 = {z2} reaches the IG branch point 1/(2 b1) = {edge}"
            )));
        }
        if 2.0 * z1 >= edge {
            return Err(Error::Domain(format!(
                "2 zeta1 = {} reaches the IG branch point 1/(2 b1) = {edge}",
                2.0 * z1
            )));
        }
        Ok(())
    }
}

/// Full parameter record. Construction checks positivity and that every MGF
/// argument used by the closed forms lies strictly inside the IG domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsDoc")]
pub struct ModelParams {
    lambda1: f64,
    lambda2: f64,
    beta0: f64,
    psi2: f64,
    b1: f64,
    b2: f64,
}

impl ModelParams {
    pub fn new(lambda1: f64, lambda2: f64, beta0: f64, psi2: f64, b1: f64, b2: f64) -> Result<Self> {
        let base = BaseParams { lambda1, lambda2, beta0, b1, b2 };
        base.validate()?;
        if !(psi2 > 0.0 && psi2.is_finite()) {
            return Err(Error::Invalid(format!("psi2 must be positive and finite, got {psi2}")));
        }
        Ok(Self { lambda1, lambda2, beta0, psi2, b1, b2 })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }
    pub fn beta0(&self) -> f64 {
        self.beta0
    }
    pub fn psi2(&self) -> f64 {
        self.psi2
    }
    pub fn b1(&self) -> f64 {
        self.b1
    }
    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn base(&self) -> BaseParams {
        BaseParams {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            beta0: self.beta0,
            b1: self.b1,
            b2: self.b2,
        }
    }

    /// Law of the frequency random effect `R1`.
    pub fn ig(&self) -> IgSpec {
        // validated at construction
        IgSpec::unit_mean(self.b1).expect("b1 validated")
    }
}

/// How the calibration constant `c` is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CUnits {
    /// `c` is `var[Y | Λ]` itself.
    #[default]
    Raw,
    /// `c` is `var[Y | Λ] / lambda2²`.
    PerLambda2Squared,
}

/// Link from the linear predictor to the rate. Only the log link is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub x: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub link: Link,
}

/// `exp(x · beta)`.
pub fn a_priori_rate(spec: &CovariateSpec) -> Result<f64> {
    if spec.x.len() != spec.beta.len() {
        return Err(Error::LengthMismatch { left: spec.x.len(), right: spec.beta.len() });
    }
    let eta: f64 = spec.x.iter().zip(&spec.beta).map(|(x, b)| x * b).sum();
    match spec.link {
        Link::Log => {
            let rate = eta.exp();
            if rate.is_finite() && rate > 0.0 {
                Ok(rate)
            } else {
                Err(Error::Range(format!("a priori rate exp({eta}) is not a positive finite number")))
            }
        }
    }
}

/// A rate as it appears in configuration files: a plain number, `{"exp": eta}`,
/// or a covariate vector with coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSpec {
    Value(f64),
    Exp {
        exp: f64,
    },
    Covariates(CovariateSpec),
}

impl RateSpec {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            RateSpec::Value(v) => Ok(*v),
            RateSpec::Exp { exp } => a_priori_rate(&CovariateSpec { x: vec![1.0], beta: vec![*exp], link: Link::Log }),
            RateSpec::Covariates(spec) => a_priori_rate(spec),
        }
    }
}

/// On-disk form of [`ModelParams`]: either `psi2` or the calibration
/// constant `c` (with optional `c_units`) must be given, not both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub lambda1: RateSpec,
    pub lambda2: RateSpec,
    pub beta0: f64,
    pub b1: f64,
    pub b2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_units: Option<CUnits>,
}

impl TryFrom<ParamsDoc> for ModelParams {
    type Error = Error;

    fn try_from(doc: ParamsDoc) -> Result<Self> {
        let base = BaseParams {
            lambda1: doc.lambda1.resolve()?,
            lambda2: doc.lambda2.resolve()?,
            beta0: doc.beta0,
            b1: doc.b1,
            b2: doc.b2,
        };
        match (doc.psi2, doc.c) {
            (Some(psi), None) => base.with_psi(psi),
            (None, Some(c)) => base.calibrated(c, doc.c_units.unwrap_or_default()),
            (Some(_), Some(_)) => Err(Error::Invalid("give either psi2 or c, not both".into())),
            (None, None) => Err(Error::Invalid("one of psi2 or c is required".into())),
        }
    }
}

impl From<ModelParams> for ParamsDoc {
    fn from(p: ModelParams) -> Self {
        ParamsDoc {
            lambda1: RateSpec::Value(p.lambda1),
            lambda2: RateSpec::Value(p.lambda2),
            beta0: p.beta0,
            b1: p.b1,
            b2: p.b2,
            psi2: Some(p.psi2),
            c: None,
            c_units: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskClass {
    pub params: ModelParams,
    pub weight: f64,
}

impl RiskClass {
    pub fn new(params: ModelParams, weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Invalid(format!("class weight must lie in [0, 1], got {weight}")));
        }
        Ok(Self { params, weight })
    }
}

/// Weighted collection of risk classes. Weights must already sum to one;
/// they are never renormalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PortfolioDoc")]
pub struct Portfolio {
    classes: Vec<RiskClass>,
}

#[derive(Deserialize)]
struct PortfolioDoc {
    classes: Vec<RiskClass>,
}

impl TryFrom<PortfolioDoc> for Portfolio {
    type Error = Error;
    fn try_from(doc: PortfolioDoc) -> Result<Self> {
        Portfolio::new(doc.classes)
    }
}

impl Portfolio {
    pub fn new(classes: Vec<RiskClass>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Invalid("portfolio has no classes".into()));
        }
        for class in &classes {
            RiskClass::new(class.params, class.weight)?;
        }
        let total: f64 = classes.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::Invalid(format!("class weights sum to {total}, expected 1")));
        }
        Ok(Self { classes })
    }

    pub fn classes(&self) -> &[RiskClass] {
        &self.classes
    }
}

/// Claim count and aggregate amount of one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub n: u32,
    pub s: f64,
}

impl Period {
    pub fn new(n: u32, s: f64) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Invalid(format!("aggregate claim must be finite and nonnegative, got {s}")));
        }
        if n == 0 && s != 0.0 {
            return Err(Error::Invalid(format!("aggregate claim {s} recorded with zero claims")));
        }
        if n > 0 && s == 0.0 {
            return Err(Error::Invalid(format!("{n} claims recorded with zero aggregate amount")));
        }
        Ok(Self { n, s })
    }

    /// Average severity `S / N`, zero without claims.
    pub fn average_severity(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.s / self.n as f64
        }
    }
}

/// Observed history of one policyholder.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HistoryDoc")]
pub struct ClaimHistory {
    periods: Vec<Period>,
}

#[derive(Deserialize)]
struct HistoryDoc {
    periods: Vec<Period>,
}

impl TryFrom<HistoryDoc> for ClaimHistory {
    type Error = Error;
    fn try_from(doc: HistoryDoc) -> Result<Self> {
        ClaimHistory::new(doc.periods)
    }
}

impl ClaimHistory {
    pub fn new(periods: Vec<Period>) -> Result<Self> {
        for (k, p) in periods.iter().enumerate() {
            Period::new(p.n, p.s).map_err(|e| Error::Invalid(format!("period {}: {e}", k + 1)))?;
        }
        Ok(Self { periods })
    }

    pub fn from_pairs(pairs: &[(u32, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(n, s)| Period { n, s }).collect())
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = u32> + '_ {
        self.periods.iter().map(|p| p.n)
    }

    pub fn aggregates(&self) -> impl Iterator<Item = f64> + '_ {
        self.periods.iter().map(|p| p.s)
    }
}

/// `(ζ1, ζ2)`.
pub fn zeta(params: &ModelParams) -> (f64, f64) {
    params.base().zeta()
}

/// Gamma dispersion that makes `var[Y | Λ]` equal to `c`:
/// `ψ = (c/lambda2² + M(ζ1)²) / ((1 + b2) M(ζ2)) - 1`.
pub fn calibrate_psi(c: f64, base: &BaseParams, units: CUnits) -> Result<f64> {
    base.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Invalid(format!("calibration constant must be positive, got {c}")));
    }
    let spec = base.ig()?;
    let (z1, z2) = base.zeta();
    let scaled = match units {
        CUnits::Raw => c / (base.lambda2 * base.lambda2),
        CUnits::PerLambda2Squared => c,
    };
    let m1 = ig_mgf(z1, &spec)?;
    let psi = (scaled + m1 * m1) / ((1.0 + base.b2) * ig_mgf(z2, &spec)?) - 1.0;
    if psi > 0.0 && psi.is_finite() {
        Ok(psi)
    } else {
        Err(Error::Calibration(format!(
            "c = {c} ({units:?}) gives dispersion {psi} for b2 = {}, beta0 = {}",
            base.b2, base.beta0
        )))
    }
}

struct Mgf {
    m_z1: f64,
    m_z2: f64,
    m_2z1: f64,
    d1_z1: f64,
    d1_z2: f64,
    d2_z2: f64,
    d2_2z1: f64,
}

fn mgf(params: &ModelParams) -> Result<Mgf> {
    let spec = params.ig();
    let (z1, z2) = zeta(params);
    Ok(Mgf {
        m_z1: ig_mgf(z1, &spec)?,
        m_z2: ig_mgf(z2, &spec)?,
        m_2z1: ig_mgf(2.0 * z1, &spec)?,
        d1_z1: ig_mgf_d1(z1, &spec)?,
        d1_z2: ig_mgf_d1(z2, &spec)?,
        d2_z2: ig_mgf_d2(z2, &spec)?,
        d2_2z1: ig_mgf_d2(2.0 * z1, &spec)?,
    })
}

/// `E[S_t | Λ] = lambda1 lambda2 e^{beta0} M'(ζ1)`.
pub fn mean_aggregate(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    Ok(params.lambda1 * params.lambda2 * params.beta0.exp() * m.d1_z1)
}

/// `var[S_t | Λ]`.
pub fn var_aggregate(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    let (l1, l2) = (params.lambda1, params.lambda2);
    let e2b = (2.0 * params.beta0).exp();
    let second = l1 * l2 * l2 * (1.0 + params.b2) * e2b * ((1.0 + params.psi2) * m.d1_z2 + l1 * e2b * m.d2_z2);
    let mean = l1 * l2 * params.beta0.exp() * m.d1_z1;
    Ok(second - mean * mean)
}

/// `cov[S_{t1}, S_{t2} | Λ]` for `t1 != t2`.
pub fn cov_aggregate_lag(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    let ll = params.lambda1 * params.lambda2;
    Ok(ll * ll * (2.0 * params.beta0).exp() * ((1.0 + params.b2) * m.d2_2z1 - m.d1_z1 * m.d1_z1))
}

/// `cov[N_{t1}, N_{t2} | Λ] = lambda1² b1` for `t1 != t2`.
pub fn cov_frequency_lag(params: &ModelParams) -> Result<f64> {
    Ok(params.lambda1 * params.lambda1 * params.b1)
}

/// `var[Y_{t,j} | Λ]`.
pub fn var_individual_severity(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    let l2 = params.lambda2;
    Ok(l2 * l2 * ((1.0 + params.b2) * (1.0 + params.psi2) * m.m_z2 - m.m_z1 * m.m_z1))
}

/// `cov[Y_{t,j1}, Y_{t,j2} | Λ]` for `j1 != j2`.
pub fn cov_severity_same_period(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    let l2 = params.lambda2;
    Ok(l2 * l2 * ((1.0 + params.b2) * m.m_z2 - m.m_z1 * m.m_z1))
}

/// `cov[Y_{t1,j1}, Y_{t2,j2} | Λ]` for `t1 != t2`.
pub fn cov_severity_cross_period(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    let l2 = params.lambda2;
    Ok(l2 * l2 * ((1.0 + params.b2) * m.m_2z1 - m.m_z1 * m.m_z1))
}

/// `cov[N_t, Y_{t,j} | Λ]`.
pub fn cov_freq_severity_same_period(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    Ok(params.lambda1 * params.lambda2 * (params.beta0.exp() * m.d1_z1 - m.m_z1))
}

/// `cov[N_{t1}, Y_{t2,j} | Λ]` for `t1 != t2`, taken as zero.
///
/// The zero treats `N_{t1}` as carrying no information on `N_{t2}`. Both
/// counts share `R1`, so whenever `beta0 != 0` and `b1 > 0` the actual
/// covariance is [`cov_freq_severity_cross_period_exact`].
pub fn cov_freq_severity_cross_period(_params: &ModelParams) -> Result<f64> {
    Ok(0.0)
}

/// `lambda1 lambda2 (M'(ζ1) - M(ζ1))`, the covariance of a count with a
/// severity of another period under the model.
pub fn cov_freq_severity_cross_period_exact(params: &ModelParams) -> Result<f64> {
    let m = mgf(params)?;
    Ok(params.lambda1() * params.lambda2() * (m.d1_z1 - m.m_z1))
}
