//! Singularity-avoiding path optimization for linear pentapods.

pub mod banded;
pub mod cover;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod joints;
pub mod optimizer;
pub mod path;
pub mod pedal;
pub mod repulsion;
pub mod scenario;
pub mod tolerances;
pub mod variety;

pub use error::{Error, Result};
pub use geometry::{DesignCase, DesignParams, MetricTensor, Pose, Vec6};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/poses.md")]
    mod poses {}
    #[doc = include_str!("../../../book/src/singularities.md")]
    mod singularities {}
    #[doc = include_str!("../../../book/src/pedals.md")]
    mod pedals {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/joint-limits.md")]
    mod joint_limits {}
    #[doc = include_str!("../../../book/src/cover.md")]
    mod cover {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
