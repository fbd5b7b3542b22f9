//! Bell-inequality violation measured with realistic rods.
//!
//! Detector positions are only known through rod readings whose spread grows
//! with distance from the rod origin. This crate evaluates the smeared spin
//! correlators of a two-particle entangled state, assembles the CHSH
//! combination from them, and quantifies how much violation is lost.

pub mod chsh;
pub mod correlators;
pub mod engine;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod kernel;
pub mod montecarlo;
pub mod quadrature;
pub mod seed;
pub mod smearing;

pub use chsh::{
    chsh_value, detector_size_study, origin_sweep, spacelike_check, suppression_factor, ChshResult,
    FourPairConfig, ScaleRecord, SpacelikeReport, SweepFailure, SweepRecord, TSIRELSON_BOUND,
};
pub use correlators::{
    conditional_probability, corr_xx, corr_zx, corr_zz, smeared_overlap, triple_overlap_term,
    Component, CorrelatorTerms, DetectorSpec, ExperimentConfig, PairState, SingleParticleState,
    Spin,
};
pub use engine::{Engine, Method};
pub use error::{Error, Result};
pub use estimate::{Estimate, EstimateMethod};
pub use geometry::{overlap_volume, overlap_volume_mc, McParams, Region, Shape, Vec3};
pub use kernel::{DispersionLaw, SmearingKernel, PLANCK_LENGTH_SI};
