use thiserror::Error;

/// Failures reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("leg index {0} is outside 1..=5")]
    LegIndex(usize),
    #[error("degenerate metric: all leg offsets are equal")]
    DegenerateMetric,
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("orientation vector is zero and cannot be normalized")]
    ZeroOrientation,
    #[error("tangent anchor is not a unit vector (norm {0})")]
    NonUnitAnchor(f64),
    #[error("pose lies on the singularity variety (zero pedal distance)")]
    ZeroPedalDistance,
    #[error("empty pedal set")]
    NoPedals,
    #[error("a path needs at least 3 breakpoints, got {0}")]
    TooFewBreakpoints(usize),
    #[error("previous path has zero length")]
    ZeroLength,
    #[error("cone apex angle {0} rad is outside (0, pi)")]
    ConeAngle(f64),
    #[error("invalid leg-length band [{0}, {1}]")]
    LengthBand(f64, f64),
    #[error("cover refinement exceeded {0} insertions")]
    CoverRunaway(usize),
    #[error("segment {segment} of the input path cannot be covered: refinement reached the singularity variety")]
    UncoverableSegment { segment: usize },
    #[error("breakpoint {index} lies on the singularity variety")]
    SingularBreakpoint { index: usize },
    #[error("breakpoint {index} is off the orientation cylinder")]
    OffCylinder { index: usize },
    #[error("breakpoint {index} violates a joint limit: {detail}")]
    LimitViolation { index: usize, detail: String },
    #[error("invalid optimizer setting: {0}")]
    InvalidConfig(String),
    #[error("linear system is singular")]
    SingularSystem,
}

pub type Result<T> = std::result::Result<T, Error>;
