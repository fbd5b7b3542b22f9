//! Smeared spin correlators of the two-particle state.
//!
//! The state `(|v₁,+;v₂,-⟩ + |v₁,-;v₂,+⟩)/√(2V₁V₂)` is never materialized.
//! Every expectation value reduces to overlap-volume ratios:
//!
//! * `S(d; v) = ∫ d³x P_x(X) V(v_x ∩ v)`, a single smeared detector,
//! * `T(v) = ∫∫ d³x d³y P_x(X) P_y(Y) V(v_x ∩ v_y ∩ v)`, both detectors,
//!
//! and
//!
//! ```text
//! ⟨σᶻσᶻ⟩ = T(v₁)/V₁ + T(v₂)/V₂ - [S(x;v₁)S(y;v₂) + S(x;v₂)S(y;v₁)]/(V₁V₂)
//! ⟨σˣσˣ⟩ = T(v₁)/V₁ + T(v₂)/V₂ + [S(x;v₁)S(y;v₂) + S(x;v₂)S(y;v₁)]/(V₁V₂)
//! ⟨σᶻσˣ⟩ = 0
//! ```

use crate::engine::{Engine, Method};
use crate::error::{Error, Result};
use crate::estimate::Estimate;
use crate::geometry::{self, McParams, Region, Vec3};
use crate::kernel::{sample_gaussian, SmearingKernel};
use crate::montecarlo;
use crate::quadrature::{Quad, Rule};
use crate::seed;
use crate::smearing::{self, Inner, TripleAxis};

/// Two disjoint particle supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    v1: Region,
    v2: Region,
}

impl PairState {
    pub fn new(v1: Region, v2: Region) -> Result<Self> {
        if v1.intersects(&v2) {
            return Err(Error::OverlappingParticles);
        }
        Ok(PairState { v1, v2 })
    }

    pub fn v1(&self) -> &Region {
        &self.v1
    }

    pub fn v2(&self) -> &Region {
        &self.v2
    }

    pub fn swapped(&self) -> PairState {
        PairState {
            v1: self.v2,
            v2: self.v1,
        }
    }

    pub fn separation(&self) -> f64 {
        (self.v2.center() - self.v1.center()).norm()
    }
}

/// A detector: the shape of its sensitive region and the rod reading at which it sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    template: Region,
    pub reading: Vec3,
}

impl DetectorSpec {
    /// The template is re-centered at the origin; only its shape matters.
    pub fn new(template: Region, reading: Vec3) -> Result<Self> {
        if !reading.is_finite() {
            return Err(Error::InvalidParameter(
                "detector reading must be finite".into(),
            ));
        }
        Ok(DetectorSpec {
            template: template.centered_at(Vec3::ZERO),
            reading,
        })
    }

    pub fn template(&self) -> &Region {
        &self.template
    }

    /// Sensitive region when the detector's fiducial center is `at`.
    pub fn region_at(&self, at: Vec3) -> Region {
        self.template.centered_at(at)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DetectorSpec::new(self.template.scaled(factor)?, self.reading)
    }
}

/// A full two-detector experiment.
///
/// Particle regions and readings live in a local frame. `origin_offset` is
/// the position of that frame relative to the rod origin: it enters only
/// through the dispersion `D(X + origin_offset)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub state: PairState,
    pub detector_x: DetectorSpec,
    pub detector_y: DetectorSpec,
    pub kernel: SmearingKernel,
    pub origin_offset: Vec3,
}

impl ExperimentConfig {
    pub fn new(
        state: PairState,
        detector_x: DetectorSpec,
        detector_y: DetectorSpec,
        kernel: SmearingKernel,
        origin_offset: Vec3,
    ) -> Result<Self> {
        if !origin_offset.is_finite() {
            return Err(Error::InvalidParameter(
                "origin offset must be finite".into(),
            ));
        }
        Ok(ExperimentConfig {
            state,
            detector_x,
            detector_y,
            kernel,
            origin_offset,
        })
    }

    pub fn with_origin_offset(&self, origin_offset: Vec3) -> Self {
        ExperimentConfig {
            origin_offset,
            ..*self
        }
    }

    /// Exchanges the particles and the detectors together.
    pub fn swapped(&self) -> Self {
        ExperimentConfig {
            state: self.state.swapped(),
            detector_x: self.detector_y,
            detector_y: self.detector_x,
            ..*self
        }
    }

    pub fn rod_reading_x(&self) -> Vec3 {
        self.detector_x.reading + self.origin_offset
    }

    pub fn rod_reading_y(&self) -> Vec3 {
        self.detector_y.reading + self.origin_offset
    }

    fn smeared_x(&self) -> Smeared<'_> {
        Smeared {
            template: &self.detector_x.template,
            reading: self.detector_x.reading,
            sigma: self.kernel.axis_sigma(self.rod_reading_x()),
        }
    }

    fn smeared_y(&self) -> Smeared<'_> {
        Smeared {
            template: &self.detector_y.template,
            reading: self.detector_y.reading,
            sigma: self.kernel.axis_sigma(self.rod_reading_y()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }

    pub fn from_value(v: i64) -> Option<Spin> {
        match v {
            1 => Some(Spin::Up),
            -1 => Some(Spin::Down),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub region: Region,
    pub spin: Spin,
    pub weight: f64,
}

/// A one-particle mixture of spatially localized spin states.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleState {
    components: Vec<Component>,
}

impl SingleParticleState {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter(
                "state needs at least one component".into(),
            ));
        }
        if let Some(c) = components
            .iter()
            .find(|c| !(c.weight.is_finite() && c.weight > 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "component weights must be positive, got {}",
                c.weight
            )));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "component weights must sum to 1, got {total}"
            )));
        }
        Ok(SingleParticleState { components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }
}

// Stream tags for the sub-integrals of one evaluation.
const TAG_S_X1: u64 = 1;
const TAG_S_X2: u64 = 2;
const TAG_S_Y1: u64 = 3;
const TAG_S_Y2: u64 = 4;
const TAG_T1: u64 = 5;
const TAG_T2: u64 = 6;
const TAG_COMPONENT: u64 = 1 << 32;

/// A detector template placed at a local reading with per-axis smearing `sigma`.
#[derive(Debug, Clone, Copy)]
struct Smeared<'a> {
    template: &'a Region,
    reading: Vec3,
    sigma: f64,
}

impl Smeared<'_> {
    fn region_at(&self, at: Vec3) -> Region {
        self.template.centered_at(at)
    }
}

fn box_halves(r: &Region) -> Option<[f64; 3]> {
    r.half_extents().map(Vec3::to_array)
}

/// ∫ d³x P_x(X) V(v_x ∩ target).
fn single_term(det: Smeared<'_>, target: &Region, engine: &Engine, seed: u64) -> Result<Estimate> {
    let boxes = box_halves(det.template).zip(box_halves(target));
    if det.sigma == 0.0 {
        let regions = [det.region_at(det.reading), *target];
        if let Some(v) = geometry::overlap_exact(&regions) {
            return Ok(Estimate::exact(v));
        }
        if engine.method == Method::Closed {
            return Err(Error::ClosedFormUnavailable("box–sphere overlap"));
        }
        engine.check_samples()?;
        let mc = McParams {
            samples: engine.samples,
            seed,
        };
        return geometry::overlap_volume(&regions, Some(mc));
    }
    match (engine.method, boxes) {
        (Method::Auto | Method::Closed, Some((h, w))) => {
            let rel = (target.center() - det.reading).to_array();
            let v = (0..3)
                .map(|k| smearing::smeared_len(rel[k] - w[k], rel[k] + w[k], h[k], det.sigma))
                .product();
            Ok(Estimate::exact(v))
        }
        (Method::Quadrature, Some((h, w))) => {
            engine.check_quadrature()?;
            let rule = Rule::gauss_legendre(engine.nodes);
            let rel = (target.center() - det.reading).to_array();
            let axes: Vec<Quad> = (0..3)
                .map(|k| {
                    smearing::smeared_len_quadrature(
                        rel[k] - w[k],
                        rel[k] + w[k],
                        h[k],
                        det.sigma,
                        engine.n_sigma,
                        &rule,
                    )
                })
                .collect();
            Ok(product_estimate(&axes))
        }
        (Method::Closed, None) => Err(Error::ClosedFormUnavailable(
            "smeared overlaps need box detectors and box targets",
        )),
        (Method::Quadrature, None) => Err(Error::QuadratureUnavailable(
            "smeared overlaps need box detectors and box targets",
        )),
        (Method::Auto | Method::MonteCarlo, _) => {
            engine.check_samples()?;
            let m = montecarlo::average(engine.samples, seed, engine.parallel, |rng| {
                let x = sample_gaussian(det.reading, det.sigma, rng);
                geometry::overlap_sample(&[det.region_at(x), *target], rng)
            });
            Ok(Estimate::monte_carlo(m.mean, m.stderr(), m.count))
        }
    }
}

/// ∫∫ d³x d³y P_x(X) P_y(Y) V(v_x ∩ v_y ∩ target).
fn triple_term(
    dx: Smeared<'_>,
    dy: Smeared<'_>,
    target: &Region,
    engine: &Engine,
    seed: u64,
) -> Result<Estimate> {
    let boxes = match (
        box_halves(dx.template),
        box_halves(dy.template),
        box_halves(target),
    ) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        _ => None,
    };
    if dx.sigma == 0.0 && dy.sigma == 0.0 {
        let regions = [dx.region_at(dx.reading), dy.region_at(dy.reading), *target];
        if let Some(v) = geometry::overlap_exact(&regions) {
            return Ok(Estimate::exact(v));
        }
        if engine.method == Method::Closed {
            return Err(Error::ClosedFormUnavailable("mixed-shape triple overlap"));
        }
        engine.check_samples()?;
        let mc = McParams {
            samples: engine.samples,
            seed,
        };
        return geometry::overlap_volume(&regions, Some(mc));
    }
    match (engine.method, boxes) {
        (Method::Auto | Method::Closed | Method::Quadrature, Some((h1, h2, w))) => {
            engine.check_quadrature()?;
            let rule = Rule::gauss_legendre(engine.nodes);
            let inner = match engine.method {
                Method::Quadrature => Inner::Quadrature {
                    rule: &rule,
                    n_sigma: engine.n_sigma,
                },
                _ => Inner::Closed,
            };
            let rel = (target.center() - dx.reading).to_array();
            let offset = (dy.reading - dx.reading).to_array();
            let mut all_exact = true;
            let axes: Vec<Quad> = (0..3)
                .map(|k| {
                    let axis = TripleAxis {
                        lo: rel[k] - w[k],
                        hi: rel[k] + w[k],
                        offset: offset[k],
                        h1: h1[k],
                        sigma1: dx.sigma,
                        h2: h2[k],
                        sigma2: dy.sigma,
                    };
                    let (q, exact) = axis.expectation(engine.n_sigma, &rule, inner);
                    all_exact &= exact;
                    q
                })
                .collect();
            if all_exact {
                Ok(Estimate::exact(axes.iter().map(|q| q.value).product()))
            } else {
                Ok(product_estimate(&axes))
            }
        }
        (Method::Closed, None) => Err(Error::ClosedFormUnavailable(
            "smeared overlaps need box detectors and box targets",
        )),
        (Method::Quadrature, None) => Err(Error::QuadratureUnavailable(
            "smeared overlaps need box detectors and box targets",
        )),
        (Method::Auto | Method::MonteCarlo, _) => {
            engine.check_samples()?;
            let m = montecarlo::average(engine.samples, seed, engine.parallel, |rng| {
                let x = sample_gaussian(dx.reading, dx.sigma, rng);
                let y = sample_gaussian(dy.reading, dy.sigma, rng);
                geometry::overlap_sample(&[dx.region_at(x), dy.region_at(y), *target], rng)
            });
            Ok(Estimate::monte_carlo(m.mean, m.stderr(), m.count))
        }
    }
}

fn product_estimate(axes: &[Quad]) -> Estimate {
    let value: f64 = axes.iter().map(|q| q.value).product();
    let error: f64 = (0..axes.len())
        .map(|k| {
            axes.iter()
                .enumerate()
                .map(|(j, q)| if j == k { q.error } else { q.value.abs() })
                .product::<f64>()
        })
        .sum();
    let evaluations = axes.iter().map(|q| q.evaluations).sum();
    Estimate::quadrature(value, error, evaluations)
}

/// `∫ d³x P_x(X) V(v_x ∩ target)` for a detector whose reading is measured
/// from the rod origin.
pub fn smeared_overlap(
    detector: &DetectorSpec,
    target: &Region,
    kernel: &SmearingKernel,
    engine: &Engine,
) -> Result<Estimate> {
    let det = Smeared {
        template: &detector.template,
        reading: detector.reading,
        sigma: kernel.axis_sigma(detector.reading),
    };
    single_term(det, target, engine, engine.seed)
}

/// `∫∫ d³x d³y P_x(X) P_y(Y) V(v_x ∩ v_y ∩ target)`.
pub fn triple_overlap_term(
    dx: &DetectorSpec,
    dy: &DetectorSpec,
    target: &Region,
    kernel: &SmearingKernel,
    engine: &Engine,
) -> Result<Estimate> {
    let sx = Smeared {
        template: &dx.template,
        reading: dx.reading,
        sigma: kernel.axis_sigma(dx.reading),
    };
    let sy = Smeared {
        template: &dy.template,
        reading: dy.reading,
        sigma: kernel.axis_sigma(dy.reading),
    };
    triple_term(sx, sy, target, engine, engine.seed)
}

/// The six smeared integrals every correlator of one configuration is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorTerms {
    pub s_x1: Estimate,
    pub s_x2: Estimate,
    pub s_y1: Estimate,
    pub s_y2: Estimate,
    pub t1: Estimate,
    pub t2: Estimate,
    pub v1: f64,
    pub v2: f64,
}

impl CorrelatorTerms {
    /// Each sub-integral draws from its own stream derived from `engine.seed`.
    pub fn evaluate(cfg: &ExperimentConfig, engine: &Engine) -> Result<Self> {
        let (v1, v2) = (cfg.state.v1(), cfg.state.v2());
        let (x, y) = (cfg.smeared_x(), cfg.smeared_y());
        let s = |tag| seed::mix(engine.seed, tag);
        Ok(CorrelatorTerms {
            s_x1: single_term(x, v1, engine, s(TAG_S_X1))?,
            s_x2: single_term(x, v2, engine, s(TAG_S_X2))?,
            s_y1: single_term(y, v1, engine, s(TAG_S_Y1))?,
            s_y2: single_term(y, v2, engine, s(TAG_S_Y2))?,
            t1: triple_term(x, y, v1, engine, s(TAG_T1))?,
            t2: triple_term(x, y, v2, engine, s(TAG_T2))?,
            v1: v1.volume(),
            v2: v2.volume(),
        })
    }

    fn same_site(&self) -> f64 {
        self.t1.value / self.v1 + self.t2.value / self.v2
    }

    /// `[S(x;v₁)S(y;v₂) + S(x;v₂)S(y;v₁)] / (V₁V₂)` and its partial derivatives
    /// with respect to `(s_x1, s_x2, s_y1, s_y2)`.
    fn cross(&self) -> (f64, [f64; 4]) {
        let norm = self.v1 * self.v2;
        let value = (self.s_x1.value * self.s_y2.value + self.s_x2.value * self.s_y1.value) / norm;
        let partials = [
            self.s_y2.value / norm,
            self.s_y1.value / norm,
            self.s_x2.value / norm,
            self.s_x1.value / norm,
        ];
        (value, partials)
    }

    /// Value with partials `same` on the T terms and `sign` on the cross term.
    fn combine(&self, value: f64, same: f64, sign: f64) -> Estimate {
        let (_, p) = self.cross();
        Estimate::propagate(
            value,
            &[
                (same / self.v1, &self.t1),
                (same / self.v2, &self.t2),
                (sign * p[0], &self.s_x1),
                (sign * p[1], &self.s_x2),
                (sign * p[2], &self.s_y1),
                (sign * p[3], &self.s_y2),
            ],
        )
    }

    pub fn corr_zz(&self) -> Estimate {
        let (cross, _) = self.cross();
        self.combine(self.same_site() - cross, 1.0, -1.0)
    }

    pub fn corr_xx(&self) -> Estimate {
        let (cross, _) = self.cross();
        self.combine(self.same_site() + cross, 1.0, 1.0)
    }

    /// `√2 (⟨σˣσˣ⟩ - ⟨σᶻσᶻ⟩)`, evaluated from the correlators. The same-site
    /// terms cancel, so only the single-detector integrals carry uncertainty.
    pub fn chsh_from_correlators(&self) -> Estimate {
        let value = std::f64::consts::SQRT_2 * (self.corr_xx().value - self.corr_zz().value);
        self.combine(value, 0.0, 2.0 * std::f64::consts::SQRT_2)
    }

    /// `(4/√2) [S(x;v₁)S(y;v₂) + S(x;v₂)S(y;v₁)] / (V₁V₂)`, without same-site terms.
    pub fn chsh_direct(&self) -> Estimate {
        let (cross, _) = self.cross();
        let factor = 4.0 / std::f64::consts::SQRT_2;
        self.combine(factor * cross, 0.0, factor)
    }
}

/// `⟨Ψ₁₂| σᶻ(X) σᶻ(Y) |Ψ₁₂⟩` under the configured smearing.
pub fn corr_zz(cfg: &ExperimentConfig, engine: &Engine) -> Result<Estimate> {
    Ok(CorrelatorTerms::evaluate(cfg, engine)?.corr_zz())
}

/// `⟨Ψ₁₂| σˣ(X) σˣ(Y) |Ψ₁₂⟩` under the configured smearing.
pub fn corr_xx(cfg: &ExperimentConfig, engine: &Engine) -> Result<Estimate> {
    Ok(CorrelatorTerms::evaluate(cfg, engine)?.corr_xx())
}

/// `⟨Ψ₁₂| σᶻ(X) σˣ(Y) |Ψ₁₂⟩`. Every term flips exactly one spin, leaving
/// `|++⟩` or `|--⟩` components orthogonal to the state, so it vanishes
/// identically.
pub fn corr_zx(_cfg: &ExperimentConfig) -> Estimate {
    Estimate::exact(0.0)
}

/// Probability that the spin reads `epsilon` given the detector's rod reading:
/// `Σ_c w_c [s_c = ε] S(detector; v_c) / V(v_c)`.
pub fn conditional_probability(
    state: &SingleParticleState,
    epsilon: Spin,
    detector: &DetectorSpec,
    kernel: &SmearingKernel,
    engine: &Engine,
) -> Result<Estimate> {
    let det = Smeared {
        template: &detector.template,
        reading: detector.reading,
        sigma: kernel.axis_sigma(detector.reading),
    };
    let mut terms = Vec::new();
    for (i, c) in state.components.iter().enumerate() {
        if c.spin != epsilon {
            continue;
        }
        let seed = seed::mix(engine.seed, TAG_COMPONENT + i as u64);
        let s = single_term(det, &c.region, engine, seed)?;
        terms.push((c.weight / c.region.volume(), s));
    }
    let value = terms.iter().fold(0.0, |acc, (w, s)| acc + w * s.value);
    let partials: Vec<(f64, &Estimate)> = terms.iter().map(|(w, s)| (*w, s)).collect();
    Ok(Estimate::propagate(value, &partials))
}
