//! Pose space, pentapod architecture and the object-oriented metric.

use std::ops::Index;

use nalgebra::{Matrix6, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::tolerances;

/// A 6-vector of pose coordinates or a displacement between poses.
pub type Vec6 = Vector6<f64>;

/// A pose `(u1..u6)`: the platform line's direction `(u1, u2, u3)` and the
/// position `(u4, u5, u6)` of its first anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose(Vec6);

impl Pose {
    pub fn new(u: [f64; 6]) -> Self {
        Pose(Vec6::from(u))
    }

    pub fn from_vector(v: Vec6) -> Self {
        Pose(v)
    }

    pub fn from_parts(orientation: Vector3<f64>, position: Vector3<f64>) -> Self {
        Pose(Vec6::new(
            orientation.x,
            orientation.y,
            orientation.z,
            position.x,
            position.y,
            position.z,
        ))
    }

    pub fn vector(&self) -> &Vec6 {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 6] {
        self.0.into()
    }

    pub fn orientation(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(0).into()
    }

    pub fn position(&self) -> Vector3<f64> {
        self.0.fixed_rows::<3>(3).into()
    }

    /// `u1² + u2² + u3² − 1`.
    pub fn cylinder_defect(&self) -> f64 {
        self.orientation().norm_squared() - 1.0
    }

    /// Whether the pose lies on the cylinder `u1² + u2² + u3² = 1`.
    pub fn is_on_cylinder(&self) -> bool {
        self.cylinder_defect().abs() <= tolerances::ON_CYLINDER
    }

    /// `self + step · dir`.
    pub fn offset(&self, dir: &Vec6, step: f64) -> Pose {
        Pose(self.0 + dir * step)
    }
}

impl Index<usize> for Pose {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<[f64; 6]> for Pose {
    fn from(u: [f64; 6]) -> Self {
        Pose::new(u)
    }
}

/// Which pose variables the singularity polynomial is linear in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignCase {
    /// Linear in the orientation variables.
    OrientationLinear,
    /// Linear in the position variables.
    PositionLinear,
}

/// Architecture of a simple linear pentapod with planar base.
///
/// Leg 1 is the reference leg: offset 0 and base anchor at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignParams {
    case: DesignCase,
    alpha: f64,
    beta: f64,
    offsets: [f64; 5],
    base: [Vector3<f64>; 5],
}

fn scale_of(offsets: &[f64; 5], base: &[Vector3<f64>; 5]) -> f64 {
    let r = offsets.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let b = base.iter().fold(0.0f64, |m, x| m.max(x.amax()));
    1.0 + r.max(b)
}

impl DesignParams {
    /// Validates and stores a design.
    pub fn new(
        case: DesignCase,
        alpha: f64,
        beta: f64,
        offsets: [f64; 5],
        base: [Vector3<f64>; 5],
    ) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidDesign(m));
        if !(alpha.is_finite() && beta.is_finite()) || alpha * alpha + beta * beta == 0.0 {
            return invalid("alpha and beta must be finite and not both zero".into());
        }
        if offsets.iter().any(|x| !x.is_finite()) || base.iter().any(|b| !b.iter().all(|x| x.is_finite())) {
            return invalid("offsets and anchors must be finite".into());
        }
        if offsets[0] != 0.0 || base[0] != Vector3::zeros() {
            return invalid("leg 1 must have offset 0 and base anchor at the origin".into());
        }
        if let Some(i) = base.iter().position(|b| b.z != 0.0) {
            return invalid(format!("base anchor {} is not in the plane z = 0", i + 1));
        }
        metric_from_offsets(&offsets)?;
        let tol = 1e-9 * scale_of(&offsets, &base);
        match case {
            DesignCase::PositionLinear => {
                for i in 0..5 {
                    let want = alpha * base[i].x + beta * base[i].y;
                    if (offsets[i] - want).abs() > tol {
                        return invalid(format!(
                            "leg {}: offset {} differs from alpha*x + beta*y = {}",
                            i + 1,
                            offsets[i],
                            want
                        ));
                    }
                }
            }
            DesignCase::OrientationLinear => {
                let zeros = offsets.iter().filter(|r| **r == 0.0).count();
                if zeros < 3 {
                    return invalid("orientation-linear designs need three legs with offset 0".into());
                }
                for i in 0..5 {
                    if offsets[i] != 0.0 {
                        let on_line = alpha * base[i].x + beta * base[i].y;
                        if (on_line - 1.0).abs() > tol {
                            return invalid(format!(
                                "leg {}: base anchor is off the line alpha*x + beta*y = 1",
                                i + 1
                            ));
                        }
                    }
                }
            }
        }
        Ok(DesignParams { case, alpha, beta, offsets, base })
    }

    /// Orientation-linear design whose `alpha`, `beta` are read off the two
    /// legs with nonzero offset (their base anchors span `alpha*x + beta*y = 1`).
    pub fn orientation_linear(offsets: [f64; 5], base: [Vector3<f64>; 5]) -> Result<Self> {
        let legs: Vec<usize> = (0..5).filter(|&i| offsets[i] != 0.0).collect();
        if legs.len() != 2 {
            return Err(Error::InvalidDesign(
                "cannot infer alpha, beta: need exactly two legs with nonzero offset".into(),
            ));
        }
        let (a, b) = (base[legs[0]], base[legs[1]]);
        let det = a.x * b.y - a.y * b.x;
        if det.abs() <= 1e-12 * (1.0 + a.norm() * b.norm()) {
            return Err(Error::InvalidDesign(
                "base anchors of the offset legs are collinear with the origin".into(),
            ));
        }
        let alpha = (b.y - a.y) / det;
        let beta = (a.x - b.x) / det;
        Self::new(DesignCase::OrientationLinear, alpha, beta, offsets, base)
    }

    /// Position-linear design with offsets `r_i = alpha*x_i + beta*y_i`.
    pub fn position_linear(alpha: f64, beta: f64, base: [Vector3<f64>; 5]) -> Result<Self> {
        let offsets = std::array::from_fn(|i| alpha * base[i].x + beta * base[i].y);
        Self::new(DesignCase::PositionLinear, alpha, beta, offsets, base)
    }

    pub fn case(&self) -> DesignCase {
        self.case
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn offsets(&self) -> &[f64; 5] {
        &self.offsets
    }

    pub fn base(&self) -> &[Vector3<f64>; 5] {
        &self.base
    }

    /// Leg offset for a 1-based leg number.
    pub fn offset(&self, leg: usize) -> Result<f64> {
        check_leg(leg)?;
        Ok(self.offsets[leg - 1])
    }

    /// Base anchor for a 1-based leg number.
    pub fn base_anchor(&self, leg: usize) -> Result<Vector3<f64>> {
        check_leg(leg)?;
        Ok(self.base[leg - 1])
    }
}

pub(crate) fn check_leg(leg: usize) -> Result<()> {
    if (1..=5).contains(&leg) {
        Ok(())
    } else {
        Err(Error::LegIndex(leg))
    }
}

/// Platform anchor of a leg: position plus offset times direction.
pub fn platform_anchor(pose: &Pose, design: &DesignParams, leg: usize) -> Result<Vector3<f64>> {
    let r = design.offset(leg)?;
    Ok(pose.position() + pose.orientation() * r)
}

/// The object-oriented metric tensor, stored through the mean squared leg
/// offset `R` and the mean leg offset `J`:
///
/// ```text
/// g = | R·I  J·I |
///     | J·I   I  |
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricTensor {
    second_moment: f64,
    first_moment: f64,
}

fn metric_from_offsets(offsets: &[f64; 5]) -> Result<MetricTensor> {
    let first = offsets.iter().sum::<f64>() / 5.0;
    let second = offsets.iter().map(|r| r * r).sum::<f64>() / 5.0;
    // variance computed from deviations to avoid cancellation
    let spread = offsets.iter().map(|r| (r - first).powi(2)).sum::<f64>() / 5.0;
    if !(spread > tolerances::METRIC_DEGENERACY * second.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateMetric);
    }
    Ok(MetricTensor { second_moment: second, first_moment: first })
}

/// Builds the metric tensor of a design.
pub fn metric_tensor(design: &DesignParams) -> Result<MetricTensor> {
    metric_from_offsets(&design.offsets)
}

impl MetricTensor {
    /// Metric from raw leg offsets; fails when all offsets coincide.
    pub fn from_offsets(offsets: &[f64; 5]) -> Result<Self> {
        metric_from_offsets(offsets)
    }

    /// `R`, the mean squared leg offset.
    pub fn r(&self) -> f64 {
        self.second_moment
    }

    /// `J`, the mean leg offset.
    pub fn j(&self) -> f64 {
        self.first_moment
    }

    /// `R − J²`, positive for a non-degenerate design.
    pub fn gap(&self) -> f64 {
        self.second_moment - self.first_moment * self.first_moment
    }

    pub fn matrix(&self) -> Matrix6<f64> {
        let mut g = Matrix6::zeros();
        for k in 0..3 {
            g[(k, k)] = self.second_moment;
            g[(k + 3, k + 3)] = 1.0;
            g[(k, k + 3)] = self.first_moment;
            g[(k + 3, k)] = self.first_moment;
        }
        g
    }

    /// `g·x`.
    pub fn apply(&self, x: &Vec6) -> Vec6 {
        let (r, j) = (self.second_moment, self.first_moment);
        Vec6::new(
            r * x[0] + j * x[3],
            r * x[1] + j * x[4],
            r * x[2] + j * x[5],
            j * x[0] + x[3],
            j * x[1] + x[4],
            j * x[2] + x[5],
        )
    }

    /// `g⁻¹·x`.
    pub fn apply_inverse(&self, x: &Vec6) -> Vec6 {
        let (r, j, d) = (self.second_moment, self.first_moment, self.gap());
        Vec6::new(
            (x[0] - j * x[3]) / d,
            (x[1] - j * x[4]) / d,
            (x[2] - j * x[5]) / d,
            (r * x[3] - j * x[0]) / d,
            (r * x[4] - j * x[1]) / d,
            (r * x[5] - j * x[2]) / d,
        )
    }

    /// `xᵀ g y`.
    pub fn inner(&self, x: &Vec6, y: &Vec6) -> f64 {
        let (r, j) = (self.second_moment, self.first_moment);
        let mut s = 0.0;
        for k in 0..3 {
            s += r * x[k] * y[k] + j * (x[k] * y[k + 3] + x[k + 3] * y[k]) + x[k + 3] * y[k + 3];
        }
        s
    }

    pub fn norm_squared(&self, x: &Vec6) -> f64 {
        self.inner(x, x).max(0.0)
    }

    pub fn norm(&self, x: &Vec6) -> f64 {
        self.norm_squared(x).sqrt()
    }

    pub fn distance(&self, a: &Pose, b: &Pose) -> f64 {
        self.norm(&(b.0 - a.0))
    }
}

/// g-distance between two poses.
pub fn metric_distance(a: &Pose, b: &Pose, g: &MetricTensor) -> f64 {
    g.distance(a, b)
}

/// g-inner product of two 6-vectors.
pub fn inner_product(x: &Vec6, y: &Vec6, g: &MetricTensor) -> f64 {
    g.inner(x, y)
}

/// Scales the orientation part onto the unit sphere, keeping the position.
pub fn normalize_to_cylinder(pose: &Pose) -> Result<Pose> {
    let o = pose.orientation();
    let n = o.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroOrientation);
    }
    Ok(Pose::from_parts(o / n, pose.position()))
}

/// Euclidean projection of `dir` onto the tangent plane of the unit sphere at `at`.
pub fn sphere_tangent_project(dir: &Vector3<f64>, at: &Vector3<f64>) -> Result<Vector3<f64>> {
    let n = at.norm();
    if (n - 1.0).abs() > tolerances::UNIT_NORM {
        return Err(Error::NonUnitAnchor(n));
    }
    Ok(dir - at * dir.dot(at))
}
