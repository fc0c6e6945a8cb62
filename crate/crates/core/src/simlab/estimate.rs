use serde::{Deserialize, Serialize};

/// Monte Carlo estimate with its standard error `sd / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

impl SimEstimate {
    /// `(value - reference) / std_error`; zero when both the error and the
    /// gap vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let gap = self.value - reference;
        if self.std_error == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(gap)
            }
        } else {
            gap / self.std_error
        }
    }

    pub fn relative_error(&self, reference: f64) -> f64 {
        if reference == 0.0 {
            self.value.abs()
        } else {
            (self.value - reference).abs() / reference.abs()
        }
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Running sums of `x` and `x²` for a mean and its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanAccumulator {
    n: u64,
    s1: CompensatedSum,
    s2: CompensatedSum,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.s1.add(x);
        self.s2.add(x * x);
    }

    pub fn merge(&mut self, other: &MeanAccumulator) {
        self.n += other.n;
        self.s1.merge(&other.s1);
        self.s2.merge(&other.s2);
    }

    pub fn estimate(&self) -> SimEstimate {
        let n = self.n as f64;
        let mean = self.s1.value() / n;
        let var = if self.n > 1 { ((self.s2.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        SimEstimate { value: mean, std_error: (var / n).sqrt(), n: self.n }
    }
}

/// Covariance of a pair `(x, y)` with the standard error of the mean of the
/// centered products. Values are shifted by fixed pilot values to keep the
/// raw power sums well conditioned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovAccumulator {
    shift: (f64, f64),
    n: u64,
    // sums of dx^i dy^j
    s10: CompensatedSum,
    s01: CompensatedSum,
    s11: CompensatedSum,
    s20: CompensatedSum,
    s02: CompensatedSum,
    s21: CompensatedSum,
    s12: CompensatedSum,
    s22: CompensatedSum,
}

impl CovAccumulator {
    pub fn new(shift_x: f64, shift_y: f64) -> Self {
        Self {
            shift: (shift_x, shift_y),
            n: 0,
            s10: Default::default(),
            s01: Default::default(),
            s11: Default::default(),
            s20: Default::default(),
            s02: Default::default(),
            s21: Default::default(),
            s12: Default::default(),
            s22: Default::default(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64) {
        let dx = x - self.shift.0;
        let dy = y - self.shift.1;
        self.n += 1;
        self.s10.add(dx);
        self.s01.add(dy);
        self.s11.add(dx * dy);
        self.s20.add(dx * dx);
        self.s02.add(dy * dy);
        self.s21.add(dx * dx * dy);
        self.s12.add(dx * dy * dy);
        self.s22.add(dx * dx * dy * dy);
    }

    pub fn merge(&mut self, other: &CovAccumulator) {
        debug_assert_eq!(self.shift, other.shift);
        self.n += other.n;
        for (a, b) in [
            (&mut self.s10, &other.s10),
            (&mut self.s01, &other.s01),
            (&mut self.s11, &other.s11),
            (&mut self.s20, &other.s20),
            (&mut self.s02, &other.s02),
            (&mut self.s21, &other.s21),
            (&mut self.s12, &other.s12),
            (&mut self.s22, &other.s22),
        ] {
            a.merge(b);
        }
    }

    /// Sample mean of `x`, with its standard error.
    pub fn mean_x(&self) -> SimEstimate {
        let n = self.n as f64;
        let a = self.s10.value() / n;
        let var = (self.s20.value() / n - a * a).max(0.0) * n / (n - 1.0);
        SimEstimate { value: a + self.shift.0, std_error: (var / n).sqrt(), n: self.n }
    }

    /// Covariance estimate `mean((x - x̄)(y - ȳ))`.
    pub fn covariance(&self) -> SimEstimate {
        let n = self.n as f64;
        let m = |s: &CompensatedSum| s.value() / n;
        let (a, b) = (m(&self.s10), m(&self.s01));
        let mean_p = m(&self.s11) - a * b;
        let second_p = m(&self.s22) + b * b * m(&self.s20) + a * a * m(&self.s02)
            - 2.0 * b * m(&self.s21)
            - 2.0 * a * m(&self.s12)
            + 4.0 * a * b * m(&self.s11)
            - 3.0 * a * a * b * b;
        let var_p = (second_p - mean_p * mean_p).max(0.0) * n / (n - 1.0);
        SimEstimate { value: mean_p, std_error: (var_p / n).sqrt(), n: self.n }
    }
}
