use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("substitution leaves the expression class: |{0}| is not an axis absolute value")]
    SubstitutionOutsideClass(String),
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch { context: String, expected: usize, found: usize },
    #[error("break locus unsupported: {0}")]
    BreakLocusUnsupported(String),
    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),
    #[error("direct sum of a coarse space with a non-coarse space is not representable")]
    CoarseFactor,
    #[error("generator {generator} is not in base-identity form (component {component})")]
    NotBaseIdentity { generator: usize, component: usize },
    #[error("base point has {found} coordinates, the base has dimension {expected}")]
    PointDimMismatch { expected: usize, found: usize },
    #[error("rank of the fibre constraints drops at an irrational point: {0}")]
    IrrationalBreakpoint(String),
    #[error("stratified dual profile needs base dimension at most 1, got {0}")]
    UnsupportedBaseDim(usize),
    #[error("bundles live over different bases: {0}")]
    BaseMismatch(String),
    #[error("not a coordinate subspace of the fibre: {0}")]
    NonCoordinateSubspace(String),
    #[error("lift is not smooth: {0}")]
    LiftNotSmooth(String),
    #[error("lift is not linear: {0}")]
    LiftNotLinear(String),
    #[error("lift smoothness could not be decided: {0}")]
    LiftUndecided(String),
    #[error("base map is not injective: {0}")]
    FNotInjective(String),
    #[error("gluing set unsupported: {0}")]
    UnsupportedGluing(String),
    #[error("hypothesis failed at {point}: {reason}")]
    HypothesisFailed { point: String, reason: String },
    #[error("fibres disagree at {point}: {reason}")]
    WitnessMismatch { point: String, reason: String },
    #[error("fibrewise map does not commute with the projections: {0}")]
    ProjectionMismatch(String),
    #[error("section strata incompatible with the base arrangement: {0}")]
    StrataMismatch(String),
    #[error("{side} section is not a pseudo-metric: {reason}")]
    NotAPseudometric { side: String, reason: String },
    #[error("sections are not compatible: {0}")]
    Incompatible(String),
    #[error("parse error at {line}:{column}: expected {expected}")]
    Parse { line: usize, column: usize, expected: String },
    #[error("{line}:{column}: abs() applies to a single variable only: {found}")]
    ParseBreakLocus { line: usize, column: usize, found: String },
    #[error("{0}")]
    Document(String),
}

pub type Result<T> = std::result::Result<T, Error>;
