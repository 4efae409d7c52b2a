//! The reference orientation-linear design and its demonstration path.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::Result;
use crate::geometry::{DesignParams, Pose};
use crate::joints::{JointLimits, LegLimit};
use crate::path::DiscretePath;

/// Orientation-linear design with offsets `(0, 0, 0, 5, 9)`.
pub fn reference_design() -> DesignParams {
    let base = [(0.0, 0.0), (5.0, 0.0), (0.0, 5.0), (8.0, 3.0), (12.0, 12.0)].map(|(x, y)| Vector3::new(x, y, 0.0));
    DesignParams::orientation_linear([0.0, 0.0, 0.0, 5.0, 9.0], base).expect("reference design is valid")
}

/// Leg 1 length in `[5.1, 16]`, leg 2 anchor inside a 108° cone.
pub fn reference_limits(safe_radius: f64) -> JointLimits {
    JointLimits {
        legs: vec![
            LegLimit { leg: 1, length_band: Some((5.1, 16.0)), cone_angle: None },
            LegLimit { leg: 2, length_band: None, cone_angle: Some(108f64.to_radians()) },
        ],
        safe_radius,
    }
}

/// Point of the blended spherical spiral at parameter `x` (meant for `[2, 5]`).
///
/// The direction's polar and azimuthal angles blend linearly between
/// `(0.4π, 6.8π)` at `x = 2` and `(0.25π, 2π)` at `x = 5`; the position is a
/// polynomial curve.
pub fn blend_pose(x: f64) -> Pose {
    let (a, b) = ((5.0 - x) / 3.0, (x - 2.0) / 3.0);
    let theta = a * 0.4 * PI + b * 0.25 * PI;
    let phi = a * 6.8 * PI + b * 2.0 * PI;
    Pose::new([
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
        (x + 10.0) / 3.0,
        (x * x + 10.0) / 3.0,
        x.powi(3) / 30.0 + 5.333,
    ])
}

/// `samples` equally spaced parameter values of [`blend_pose`] over `[from, to]`.
pub fn blend_path(from: f64, to: f64, samples: usize) -> Result<DiscretePath> {
    let last = samples.saturating_sub(1).max(1) as f64;
    DiscretePath::new((0..samples).map(|k| blend_pose(from + (to - from) * k as f64 / last)).collect())
}
