//! Exact special functions behind every closed form in the engine.
//!
//! Three families live here:
//!
//! - the moment generating function of an inverse-Gaussian random effect
//!   `R ~ IG(mean, b)` together with `E[R e^{zR}]` and `E[R² e^{zR}]`;
//! - exponentially tilted Poisson moments `E[N^k e^{zN}]` for `N ~ Pois(rate)`;
//! - the mixed expectations of a Poisson count whose rate is scaled by an
//!   inverse-Gaussian effect ([`joint_aux`]).
//!
//! With unit mean the MGF is `M(z) = exp((1 - sqrt(1 - 2bz)) / b)`, finite for
//! `z <= 1/(2b)`. The exponent is evaluated as `2z / (1 + sqrt(1 - 2bz))`,
//! which is algebraically identical and stays accurate as `b -> 0`.

use crate::error::{Error, Result};

/// Variance threshold below which the random effect is treated as the
/// constant `mean` (so `M(z) = e^{mean z}`).
pub const DEGENERATE_VARIANCE: f64 = 1e-12;

/// Law of an inverse-Gaussian random effect, parameterized by mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgSpec {
    mean: f64,
    b: f64,
}

impl IgSpec {
    pub fn new(mean: f64, b: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::Invalid(format!("IG mean must be positive, got {mean}")));
        }
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::Invalid(format!("IG variance must be nonnegative, got {b}")));
        }
        Ok(Self { mean, b })
    }

    /// Unit-mean effect with variance `b`.
    pub fn unit_mean(b: f64) -> Result<Self> {
        Self::new(1.0, b)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.b < DEGENERATE_VARIANCE
    }

    /// Shape parameter of the classical `IG(mean, shape)` form.
    pub fn shape(&self) -> f64 {
        self.mean.powi(3) / self.b
    }

    /// Right end of the MGF domain, `mean / (2b)`; infinite when degenerate.
    pub fn branch_point(&self) -> f64 {
        if self.is_degenerate() {
            f64::INFINITY
        } else {
            self.mean / (2.0 * self.b)
        }
    }

    /// `sqrt(1 - 2bz/mean)`, rejecting arguments past the branch point.
    /// `strict` additionally rejects the branch point itself.
    fn root(&self, z: f64, strict: bool) -> Result<f64> {
        if z.is_nan() {
            return Err(Error::Domain("MGF argument is NaN".into()));
        }
        let w = 1.0 - 2.0 * self.b * z / self.mean;
        if w < 0.0 || (strict && w <= 0.0) {
            return Err(Error::Domain(format!(
                "MGF argument {z} is beyond the branch point {} (b = {})",
                self.branch_point(),
                self.b
            )));
        }
        Ok(w.sqrt())
    }
}

fn finite(value: f64, what: &str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Range(format!("{what} overflowed")))
    }
}

/// `M(z) = E[e^{zR}]`.
pub fn ig_mgf(z: f64, spec: &IgSpec) -> Result<f64> {
    let mu = spec.mean;
    if spec.is_degenerate() {
        return finite((mu * z).exp(), "IG MGF");
    }
    let s = spec.root(z, false)?;
    finite((2.0 * mu * z / (1.0 + s)).exp(), "IG MGF")
}

/// `M'(z) = E[R e^{zR}] = M(z) * mean / sqrt(1 - 2bz/mean)`.
pub fn ig_mgf_d1(z: f64, spec: &IgSpec) -> Result<f64> {
    let mu = spec.mean;
    if spec.is_degenerate() {
        return finite(mu * (mu * z).exp(), "IG MGF derivative");
    }
    let s = spec.root(z, true)?;
    let m = (2.0 * mu * z / (1.0 + s)).exp();
    finite(m * mu / s, "IG MGF derivative")
}

/// `M''(z) = E[R² e^{zR}] = M'(z) * (mean/s + b/(mean s²))`.
pub fn ig_mgf_d2(z: f64, spec: &IgSpec) -> Result<f64> {
    let mu = spec.mean;
    if spec.is_degenerate() {
        return finite(mu * mu * (mu * z).exp(), "IG MGF second derivative");
    }
    let s = spec.root(z, true)?;
    let d1 = (2.0 * mu * z / (1.0 + s)).exp() * mu / s;
    finite(d1 * (mu / s + spec.b / (mu * s * s)), "IG MGF second derivative")
}

/// Exponential tilt `z` applied to a Poisson count with mean `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltArgument {
    pub z: f64,
    pub rate: f64,
}

impl TiltArgument {
    pub fn new(z: f64, rate: f64) -> Result<Self> {
        if !z.is_finite() {
            return Err(Error::Invalid(format!("tilt exponent must be finite, got {z}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Invalid(format!("Poisson rate must be positive, got {rate}")));
        }
        Ok(Self { z, rate })
    }
}

/// `E[e^{zN}] = exp(rate (e^z - 1))`.
pub fn poisson_tilt_m0(arg: TiltArgument) -> Result<f64> {
    finite((arg.rate * arg.z.exp_m1()).exp(), "Poisson tilt m0")
}

/// `E[N e^{zN}] = rate e^z E[e^{zN}]`.
pub fn poisson_tilt_m1(arg: TiltArgument) -> Result<f64> {
    let m0 = poisson_tilt_m0(arg)?;
    finite(arg.rate * arg.z.exp() * m0, "Poisson tilt m1")
}

/// `E[N² e^{zN}] = ((rate e^z)² + rate e^z) E[e^{zN}]`.
pub fn poisson_tilt_m2(arg: TiltArgument) -> Result<f64> {
    let m0 = poisson_tilt_m0(arg)?;
    let tilted = arg.rate * arg.z.exp();
    finite((tilted * tilted + tilted) * m0, "Poisson tilt m2")
}

/// Mixed expectations of `N | R ~ Pois(lambda R)` with `R ~ IG`, tilted by `e^{zN}`.
///
/// `N1`, `N2` denote counts of two different periods sharing one `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAux {
    /// `E[N² e^{zN}]`
    pub n2_tilt: f64,
    /// `E[N e^{zN} R e^{R lambda (e^z - 1)}]`
    pub n_tilt_effect: f64,
    /// `E[N1 N2 e^{z(N1 + N2)}]`
    pub cross_period: f64,
    /// `E[e^{zN}]`
    pub m0: f64,
    /// `E[N e^{zN}]`
    pub n_tilt: f64,
}

pub fn joint_aux(z: f64, lambda: f64, spec: &IgSpec) -> Result<JointAux> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid(format!("frequency rate must be positive, got {lambda}")));
    }
    let ez = z.exp();
    let shift = lambda * z.exp_m1();
    let d1 = ig_mgf_d1(shift, spec)?;
    let d2 = ig_mgf_d2(shift, spec)?;
    let d2_double = ig_mgf_d2(2.0 * shift, spec)?;
    Ok(JointAux {
        n2_tilt: lambda * lambda * ez * ez * d2 + lambda * ez * d1,
        n_tilt_effect: lambda * ez * d2_double,
        cross_period: lambda * lambda * ez * ez * d2_double,
        m0: ig_mgf(shift, spec)?,
        n_tilt: lambda * ez * d1,
    })
}
