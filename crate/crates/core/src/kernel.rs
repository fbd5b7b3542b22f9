//! Rod-reading probability density.
//!
//! `P_u(X) = (π D)^{-3/2} exp(-|X - u|² / D)` with `D = D(X)` taken at the
//! reading, not at the fiducial point. Each axis is Gaussian with variance
//! `D/2`. A zero dispersion is the ideal (delta) rod.

use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Planck length in meters (CODATA 2018).
pub const PLANCK_LENGTH_SI: f64 = 1.616_255e-35;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispersionLaw {
    /// Ideal rods: the reading is the fiducial position.
    Delta,
    /// Position-independent variance `D`, in length².
    FixedWidth { variance: f64 },
    /// `D(X) = ℓ_P^{4/3} |X|^{2/3}`.
    NgVanDam { planck_length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmearingKernel {
    law: DispersionLaw,
    dispersion_floor: f64,
}

impl SmearingKernel {
    pub fn new(law: DispersionLaw) -> Result<Self> {
        Self::with_floor(law, 0.0)
    }

    /// `floor` is a lower bound on the Ng–van Dam dispersion, which otherwise
    /// vanishes at the rod origin.
    pub fn with_floor(law: DispersionLaw, floor: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match law {
            DispersionLaw::FixedWidth { variance } if !positive(variance) => {
                return Err(Error::InvalidParameter(format!(
                    "variance must be positive and finite, got {variance}"
                )))
            }
            DispersionLaw::NgVanDam { planck_length } if !positive(planck_length) => {
                return Err(Error::InvalidParameter(format!(
                    "planck_length must be positive and finite, got {planck_length}"
                )))
            }
            _ => {}
        }
        if !(floor.is_finite() && floor >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dispersion_floor must be finite and non-negative, got {floor}"
            )));
        }
        Ok(SmearingKernel {
            law,
            dispersion_floor: floor,
        })
    }

    pub fn delta() -> Self {
        SmearingKernel {
            law: DispersionLaw::Delta,
            dispersion_floor: 0.0,
        }
    }

    pub fn fixed_width(variance: f64) -> Result<Self> {
        Self::new(DispersionLaw::FixedWidth { variance })
    }

    pub fn ng_van_dam(planck_length: f64) -> Result<Self> {
        Self::new(DispersionLaw::NgVanDam { planck_length })
    }

    pub fn law(&self) -> DispersionLaw {
        self.law
    }

    pub fn dispersion_floor(&self) -> f64 {
        self.dispersion_floor
    }

    /// Whether `density(u + a, X + a) == density(u, X)` for every shift.
    pub fn is_translation_invariant(&self) -> bool {
        !matches!(self.law, DispersionLaw::NgVanDam { .. })
    }

    /// `D(X)` in length².
    pub fn dispersion(&self, reading: Vec3) -> f64 {
        match self.law {
            DispersionLaw::Delta => 0.0,
            DispersionLaw::FixedWidth { variance } => variance,
            DispersionLaw::NgVanDam { planck_length } => {
                // ℓ^{4/3}|X|^{2/3} = (ℓ² |X|)^{2/3}, computed in a form that
                // neither underflows for SI-scale ℓ nor loses the cube root
                let d = planck_length.cbrt().powi(4) * reading.norm().cbrt().powi(2);
                d.max(self.dispersion_floor)
            }
        }
    }

    /// Per-axis standard deviation `sqrt(D/2)`.
    pub fn axis_sigma(&self, reading: Vec3) -> f64 {
        (self.dispersion(reading) / 2.0).sqrt()
    }

    /// `P_u(X)` in length⁻³.
    pub fn density(&self, u: Vec3, reading: Vec3) -> Result<f64> {
        let d = self.dispersion(reading);
        if d <= 0.0 {
            return Err(Error::DeltaKernelHasNoDensity);
        }
        let r2 = (reading - u).norm_squared();
        Ok((PI * d).powf(-1.5) * (-r2 / d).exp())
    }

    /// Draws a fiducial position for the given reading.
    pub fn sample<R: Rng + ?Sized>(&self, reading: Vec3, rng: &mut R) -> Vec3 {
        sample_gaussian(reading, self.axis_sigma(reading), rng)
    }

    /// `n_sigma` per-axis standard deviations.
    pub fn truncation_radius(&self, reading: Vec3, n_sigma: f64) -> f64 {
        n_sigma * self.axis_sigma(reading)
    }
}

pub(crate) fn sample_gaussian<R: Rng + ?Sized>(center: Vec3, sigma: f64, rng: &mut R) -> Vec3 {
    if sigma == 0.0 {
        return center;
    }
    let n = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    center + n * sigma
}
