use crate::error::{Error, Result};

/// Evaluation strategy requested by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Closed forms for boxes, Monte Carlo for anything else.
    #[default]
    Auto,
    /// Closed forms wherever they exist. Terms that involve two smeared
    /// detectors integrate the outer displacement numerically around an
    /// exact inner expectation.
    Closed,
    /// Gauss–Legendre quadrature for every smeared box integral.
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engine {
    pub method: Method,
    /// Monte Carlo samples per integral.
    pub samples: u64,
    /// Gauss–Legendre points per panel.
    pub nodes: usize,
    /// Gaussian truncation, in per-axis standard deviations.
    pub n_sigma: f64,
    pub seed: u64,
    /// Run Monte Carlo batches and sweep records on the rayon pool. Has no
    /// effect on results, and no effect at all without the `parallel` feature.
    pub parallel: bool,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            method: Method::Auto,
            samples: 100_000,
            nodes: 16,
            n_sigma: 8.0,
            seed: 0,
            parallel: true,
        }
    }
}

impl Engine {
    pub fn with_method(self, method: Method) -> Self {
        Engine { method, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Engine { seed, ..self }
    }

    pub fn with_samples(self, samples: u64) -> Self {
        Engine { samples, ..self }
    }

    pub fn sequential(self) -> Self {
        Engine {
            parallel: false,
            ..self
        }
    }

    pub(crate) fn check_quadrature(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(Error::NonPositiveEffort("quadrature nodes"));
        }
        if !(self.n_sigma.is_finite() && self.n_sigma > 0.0) {
            return Err(Error::NonPositiveEffort("n_sigma"));
        }
        Ok(())
    }

    pub(crate) fn check_samples(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::NonPositiveEffort("samples"));
        }
        Ok(())
    }
}
