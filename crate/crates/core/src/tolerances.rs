//! Numerical thresholds shared by every module.
//!
//! Keeping them in one table makes it easy to audit which comparisons are
//! exact-arithmetic checks and which absorb solver round-off.

/// Allowed deviation of `u1² + u2² + u3²` from 1 for a pose on the cylinder.
pub const ON_CYLINDER: f64 = 1e-12;

/// Allowed deviation of a unit vector's norm from 1 in tangent projections.
pub const UNIT_NORM: f64 = 1e-9;

/// `R − J²` below this (relative to `R`) is treated as a degenerate metric.
pub const METRIC_DEGENERACY: f64 = 1e-12;

/// Imaginary-part tolerance when accepting a complex multiplier root as real.
pub const ROOT_IMAGINARY: f64 = 1e-10;

/// Pedal points closer than this (g-distance) are merged.
pub const PEDAL_DEDUP: f64 = 1e-8;

/// Relative pivot size below which a stationarity system counts as singular.
pub const SINGULAR_PIVOT: f64 = 1e-13;

/// Relative objective change counted as stagnation by the run loop.
pub const STAGNATION: f64 = 1e-10;

/// Number of consecutive stagnant iterations that ends a run.
pub const STAGNATION_STREAK: usize = 3;

/// Hard floor on the halving loop when the configured minimum step is zero.
pub const STEP_UNDERFLOW: f64 = 1e-12;

/// Cap on breakpoint insertions performed by a single cover refinement.
pub const MAX_INSERTIONS: usize = 10_000;

/// Gram-matrix pivot threshold for deciding that constraint normals are dependent.
pub const NORMAL_DEPENDENCE: f64 = 1e-10;
