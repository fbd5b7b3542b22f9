//! CHSH assembly, entanglement-loss sweeps and the four-particle suppression estimate.
//!
//! With `Q = σᶻ(X)`, `R = σˣ(X)`, `S = (-σᶻ(Y) + σˣ(Y))/√2`, `T = (σᶻ(Y) + σˣ(Y))/√2`
//! and `⟨σᶻσˣ⟩ = 0`:
//!
//! ```text
//! ⟨QS⟩ = -⟨σᶻσᶻ⟩/√2   ⟨RS⟩ = ⟨RT⟩ = ⟨σˣσˣ⟩/√2   ⟨QT⟩ = ⟨σᶻσᶻ⟩/√2
//! ⟨QS + RS + RT - QT⟩ = √2 (⟨σˣσˣ⟩ - ⟨σᶻσᶻ⟩)
//! ```

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::correlators::{CorrelatorTerms, ExperimentConfig};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::geometry::Vec3;
use crate::seed;

/// `2√2`, the quantum-mechanical maximum of the CHSH combination.
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshResult {
    pub corr_zz: Estimate,
    pub corr_xx: Estimate,
    pub qs: Estimate,
    pub rs: Estimate,
    pub rt: Estimate,
    pub qt: Estimate,
    /// `√2 (⟨σˣσˣ⟩ - ⟨σᶻσᶻ⟩)`.
    pub chsh: Estimate,
    /// The cross-term formula, which never touches the same-site integrals.
    pub chsh_direct: Estimate,
    /// `2√2 - chsh`.
    pub deficit: f64,
}

/// Both CHSH routes, cross-checked.
///
/// Fails with [`Error::InternalInconsistency`] if the correlator route and the
/// direct cross-term formula disagree by more than `max(1e-9, 4σ)`.
pub fn chsh_value(cfg: &ExperimentConfig, engine: &Engine) -> Result<ChshResult> {
    let terms = CorrelatorTerms::evaluate(cfg, engine)?;
    let zz = terms.corr_zz();
    let xx = terms.corr_xx();
    let chsh = terms.chsh_from_correlators();
    let direct = terms.chsh_direct();
    if !chsh.agrees_with(&direct, 4.0, 1e-9) {
        return Err(Error::InternalInconsistency(format!(
            "CHSH routes disagree: correlators give {chsh}, cross terms give {direct}"
        )));
    }
    Ok(ChshResult {
        corr_zz: zz,
        corr_xx: xx,
        qs: zz.scale(-FRAC_1_SQRT_2),
        rs: xx.scale(FRAC_1_SQRT_2),
        rt: xx.scale(FRAC_1_SQRT_2),
        qt: zz.scale(FRAC_1_SQRT_2),
        chsh,
        chsh_direct: direct,
        deficit: TSIRELSON_BOUND - chsh.value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacelikeReport {
    pub separated: bool,
    pub diameter_x: f64,
    pub diameter_y: f64,
    /// Half the distance between the particle-region centers.
    pub half_separation: f64,
}

/// Both detector diameters must be strictly below half the particle separation.
pub fn spacelike_check(cfg: &ExperimentConfig) -> SpacelikeReport {
    let diameter_x = cfg.detector_x.template().diameter();
    let diameter_y = cfg.detector_y.template().diameter();
    let half_separation = 0.5 * cfg.state.separation();
    SpacelikeReport {
        separated: diameter_x < half_separation && diameter_y < half_separation,
        diameter_x,
        diameter_y,
        half_separation,
    }
}

/// Two entangled pairs: intra-pair separation `delta`, inter-pair separation `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourPairConfig {
    delta: f64,
    d: f64,
    planck_length: f64,
}

impl FourPairConfig {
    pub fn new(delta: f64, d: f64, planck_length: f64) -> Result<Self> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(delta) && positive(d) && positive(planck_length)) {
            return Err(Error::InvalidParameter(format!(
                "delta, d and planck_length must be positive and finite, got {delta}, {d}, {planck_length}"
            )));
        }
        if d < delta {
            return Err(Error::InvalidParameter(format!(
                "inter-pair separation d = {d} must be at least delta = {delta}"
            )));
        }
        Ok(FourPairConfig {
            delta,
            d,
            planck_length,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn planck_length(&self) -> f64 {
        self.planck_length
    }

    /// `(δ / (d^{1/3} ℓ_P^{2/3}))²`.
    pub fn exponent(&self) -> f64 {
        let scale = self.d.cbrt() * self.planck_length.cbrt().powi(2);
        (self.delta / scale).powi(2)
    }

    /// `1 - exp(-exponent)`, accurate when the factor is close to 1.
    pub fn deviation(&self) -> f64 {
        -(-self.exponent()).exp_m1()
    }
}

/// `exp[-(δ / (d^{1/3} ℓ_P^{2/3}))²]`.
pub fn suppression_factor(fp: &FourPairConfig) -> f64 {
    (-fp.exponent()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub origin_distance: f64,
    pub chsh: Estimate,
    pub deficit: f64,
    pub seed: u64,
    pub result: ChshResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRecord {
    pub scale: f64,
    pub chsh: Estimate,
    pub deficit: f64,
    pub seed: u64,
    pub result: ChshResult,
}

/// A sweep point that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub index: usize,
    pub parameter: f64,
    pub seed: u64,
    pub error: Error,
}

fn map_indexed<T, U, F>(items: &[T], parallel: bool, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let _ = parallel;
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Moves the rod origin away from the experiment along `direction`.
///
/// Record `i` is evaluated with seed `seed::mix(engine.seed, i)`. A record
/// that fails carries its error and the remaining records are still
/// evaluated.
pub fn origin_sweep(
    base: &ExperimentConfig,
    distances: &[f64],
    direction: Vec3,
    engine: &Engine,
) -> Result<Vec<std::result::Result<SweepRecord, SweepFailure>>> {
    if distances.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one distance".into(),
        ));
    }
    if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::InvalidParameter(
            "sweep distances must be finite and non-negative".into(),
        ));
    }
    if distances.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "sweep distances must be sorted ascending".into(),
        ));
    }
    let unit = direction
        .normalized()
        .ok_or_else(|| Error::InvalidParameter("sweep direction must be non-zero".into()))?;
    Ok(map_indexed(distances, engine.parallel, |i, &distance| {
        let seed = seed::mix(engine.seed, i as u64);
        let cfg = base.with_origin_offset(unit * distance);
        chsh_value(&cfg, &engine.with_seed(seed))
            .map(|result| SweepRecord {
                origin_distance: distance,
                chsh: result.chsh,
                deficit: result.deficit,
                seed,
                result,
            })
            .map_err(|error| SweepFailure {
                index: i,
                parameter: distance,
                seed,
                error,
            })
    }))
}

/// Scales both detector templates isotropically by each factor.
pub fn detector_size_study(
    base: &ExperimentConfig,
    scale_factors: &[f64],
    engine: &Engine,
) -> Result<Vec<std::result::Result<ScaleRecord, SweepFailure>>> {
    if scale_factors.is_empty() {
        return Err(Error::InvalidParameter(
            "size study needs at least one scale".into(),
        ));
    }
    if scale_factors.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidParameter(
            "scale factors must be positive and finite".into(),
        ));
    }
    Ok(map_indexed(scale_factors, engine.parallel, |i, &scale| {
        let seed = seed::mix(engine.seed, i as u64);
        let fail = |error| SweepFailure {
            index: i,
            parameter: scale,
            seed,
            error,
        };
        let cfg = ExperimentConfig {
            detector_x: base.detector_x.scaled(scale).map_err(fail)?,
            detector_y: base.detector_y.scaled(scale).map_err(fail)?,
            ..*base
        };
        chsh_value(&cfg, &engine.with_seed(seed))
            .map(|result| ScaleRecord {
                scale,
                chsh: result.chsh,
                deficit: result.deficit,
                seed,
                result,
            })
            .map_err(fail)
    }))
}
