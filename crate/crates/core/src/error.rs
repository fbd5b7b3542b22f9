use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("region list is empty")]
    EmptyRegionList,
    #[error("overlap of this region combination needs Monte Carlo parameters")]
    MissingMonteCarloParams,
    #[error("the delta kernel has no pointwise density")]
    DeltaKernelHasNoDensity,
    #[error("closed form unavailable: {0}")]
    ClosedFormUnavailable(&'static str),
    #[error("quadrature unavailable: {0}")]
    QuadratureUnavailable(&'static str),
    #[error("effort must be positive: {0}")]
    NonPositiveEffort(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("particle regions v1 and v2 overlap; they must be disjoint")]
    OverlappingParticles,
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
