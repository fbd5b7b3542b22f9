use serde::{Deserialize, Serialize};
use std::fmt;

/// How an [`Estimate`] was obtained, ordered from most to least exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl EstimateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateMethod::ClosedForm => "closed-form",
            EstimateMethod::Quadrature => "quadrature",
            EstimateMethod::MonteCarlo => "monte-carlo",
        }
    }
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A numeric result with its uncertainty.
///
/// `stderr` is zero exactly when the method is closed-form. Approximate
/// methods always report a strictly positive uncertainty, floored at the
/// smallest normal `f64` when the raw error estimate vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub method: EstimateMethod,
    /// Samples drawn or integrand evaluations spent.
    pub effort: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            method: EstimateMethod::ClosedForm,
            effort: 0,
        }
    }

    pub fn quadrature(value: f64, error: f64, evaluations: u64) -> Self {
        Self::approximate(value, error, EstimateMethod::Quadrature, evaluations)
    }

    pub fn monte_carlo(value: f64, stderr: f64, samples: u64) -> Self {
        Self::approximate(value, stderr, EstimateMethod::MonteCarlo, samples)
    }

    fn approximate(value: f64, stderr: f64, method: EstimateMethod, effort: u64) -> Self {
        let stderr = if stderr.is_nan() {
            stderr
        } else {
            stderr.abs().max(f64::MIN_POSITIVE)
        };
        Estimate {
            value,
            stderr,
            method,
            effort,
        }
    }

    /// First-order propagation through a function of independent estimates.
    ///
    /// `terms` pairs each input with the partial derivative of the output
    /// with respect to it. The method is the least exact one among inputs
    /// with a non-zero partial derivative.
    pub fn propagate(value: f64, terms: &[(f64, &Estimate)]) -> Self {
        let mut variance = 0.0;
        let mut method = EstimateMethod::ClosedForm;
        let mut effort = 0u64;
        for (partial, est) in terms {
            effort = effort.saturating_add(est.effort);
            if *partial == 0.0 {
                continue;
            }
            variance += (partial * est.stderr).powi(2);
            method = method.max(est.method);
        }
        match method {
            EstimateMethod::ClosedForm => Estimate {
                value,
                stderr: 0.0,
                method,
                effort,
            },
            _ => Self::approximate(value, variance.sqrt(), method, effort),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Estimate::propagate(self.value * factor, &[(factor, self)])
    }

    /// Whether `other` lies within `k` combined standard errors (or `abs_tol`).
    pub fn agrees_with(&self, other: &Estimate, k: f64, abs_tol: f64) -> bool {
        let combined = self.stderr.hypot(other.stderr);
        (self.value - other.value).abs() <= abs_tol.max(k * combined)
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {} ({})", self.value, self.stderr, self.method)
    }
}
