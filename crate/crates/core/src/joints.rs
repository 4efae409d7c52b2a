//! Leg-length and base-cone limits, their safe zones, and redirection of
//! updates that would approach them.
//!
//! Each limit constrains one platform anchor only. Moving that anchor by
//! `Δm` costs at least `|Δm|·sqrt((R − J²)/κ)` in g-distance, where `κ` is the
//! mean squared difference between the leg's offset and all offsets, so the
//! closest pose on a limit variety comes from the closest anchor position.

use log::warn;
use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{check_leg, platform_anchor, DesignParams, MetricTensor, Pose, Vec6};
use crate::path::DiscretePath;
use crate::tolerances;

/// Limits of one leg (1-based leg number).
#[derive(Debug, Clone, PartialEq)]
pub struct LegLimit {
    pub leg: usize,
    /// Allowed leg length `[min, max]`.
    pub length_band: Option<(f64, f64)>,
    /// Apex angle (radians) of the admissible cone at the base joint.
    pub cone_angle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct JointLimits {
    pub legs: Vec<LegLimit>,
    /// g-distance at which a limit variety starts to redirect updates.
    pub safe_radius: f64,
}

/// A hypersurface of pose space on which a joint limit is active.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitVariety {
    /// Leg length equal to `rho`.
    LegLength { leg: usize, rho: f64 },
    /// Anchor on the cone with the given apex angle at the leg's base joint.
    BaseCone { leg: usize, angle: f64 },
}

impl LimitVariety {
    pub fn leg(&self) -> usize {
        match *self {
            LimitVariety::LegLength { leg, .. } | LimitVariety::BaseCone { leg, .. } => leg,
        }
    }
}

/// An interior breakpoint inside a safe zone whose update heads toward the variety.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QBreach {
    pub index: usize,
    pub variety: LimitVariety,
    /// Closest point of the variety.
    pub foot: Vec6,
    /// g-unit normal pointing from the variety to the breakpoint.
    pub normal: Vec6,
    pub distance: f64,
}

fn check_band(min: f64, max: f64) -> Result<()> {
    if min > 0.0 && min < max && max.is_finite() {
        Ok(())
    } else {
        Err(Error::LengthBand(min, max))
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::ConeAngle(theta))
    }
}

fn cot_half(theta: f64) -> f64 {
    1.0 / (theta / 2.0).tan()
}

/// `‖anchor − base‖² − ρ²`.
pub fn prismatic_eval(pose: &Pose, design: &DesignParams, leg: usize, rho: f64) -> Result<f64> {
    let m = platform_anchor(pose, design, leg)?;
    Ok((m - design.base_anchor(leg)?).norm_squared() - rho * rho)
}

/// Leg length of a pose.
pub fn leg_length(pose: &Pose, design: &DesignParams, leg: usize) -> Result<f64> {
    Ok((platform_anchor(pose, design, leg)? - design.base_anchor(leg)?).norm())
}

/// `height² − cot²(θ/2)·horizontal²` of the anchor relative to its base
/// joint: positive inside the cone, zero on it.
pub fn base_cone_eval(pose: &Pose, design: &DesignParams, leg: usize, theta: f64) -> Result<f64> {
    check_angle(theta)?;
    let m = platform_anchor(pose, design, leg)? - design.base_anchor(leg)?;
    let c = cot_half(theta);
    Ok(m.z * m.z - c * c * (m.x * m.x + m.y * m.y))
}

impl JointLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.safe_radius > 0.0 && self.safe_radius.is_finite()) {
            return Err(Error::InvalidConfig("safe radius must be positive".into()));
        }
        for l in &self.legs {
            check_leg(l.leg)?;
            if let Some((a, b)) = l.length_band {
                check_band(a, b)?;
            }
            if let Some(t) = l.cone_angle {
                check_angle(t)?;
            }
        }
        Ok(())
    }

    /// Every limit variety that is switched on.
    pub fn varieties(&self) -> Vec<LimitVariety> {
        let mut out = Vec::new();
        for l in &self.legs {
            if let Some((a, b)) = l.length_band {
                out.push(LimitVariety::LegLength { leg: l.leg, rho: a });
                out.push(LimitVariety::LegLength { leg: l.leg, rho: b });
            }
            if let Some(angle) = l.cone_angle {
                out.push(LimitVariety::BaseCone { leg: l.leg, angle });
            }
        }
        out
    }

    /// Descriptions of the limits a pose violates.
    pub fn violations(&self, pose: &Pose, design: &DesignParams) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for l in &self.legs {
            if let Some((a, b)) = l.length_band {
                let len = leg_length(pose, design, l.leg)?;
                if !(a..=b).contains(&len) {
                    out.push(format!("leg {} length {len} outside [{a}, {b}]", l.leg));
                }
            }
            if let Some(t) = l.cone_angle {
                let m = platform_anchor(pose, design, l.leg)? - design.base_anchor(l.leg)?;
                if base_cone_eval(pose, design, l.leg, t)? < 0.0 || m.z < 0.0 {
                    out.push(format!("leg {} anchor outside its base cone", l.leg));
                }
            }
        }
        Ok(out)
    }
}

fn anchor_foot(variety: &LimitVariety, rel: &Vector3<f64>) -> Vector3<f64> {
    let horizontal = Vector3::new(rel.x, rel.y, 0.0);
    let h = horizontal.norm();
    let across = if h > 0.0 { horizontal / h } else { Vector3::x() };
    match *variety {
        LimitVariety::LegLength { rho, .. } => {
            let n = rel.norm();
            if n > 0.0 {
                rel * (rho / n)
            } else {
                Vector3::z() * rho
            }
        }
        LimitVariety::BaseCone { angle, .. } => {
            let (s, c) = (angle / 2.0).sin_cos();
            let mut best = Vector3::zeros();
            let mut best_d = rel.norm_squared();
            for up in [c, -c] {
                let t = h * s + rel.z * up;
                if t > 0.0 {
                    let cand = across * (t * s) + Vector3::z() * (t * up);
                    let d = (rel - cand).norm_squared();
                    if d < best_d {
                        best = cand;
                        best_d = d;
                    }
                }
            }
            best
        }
    }
}

fn anchor_gradient(variety: &LimitVariety, rel: &Vector3<f64>) -> Vector3<f64> {
    match *variety {
        LimitVariety::LegLength { .. } => rel * 2.0,
        LimitVariety::BaseCone { angle, .. } => {
            let c2 = cot_half(angle).powi(2);
            Vector3::new(-2.0 * c2 * rel.x, -2.0 * c2 * rel.y, 2.0 * rel.z)
        }
    }
}

/// Displacement of least g-norm that moves the anchor with offset `r` by `dm`.
fn lift(dm: &Vector3<f64>, r: f64, g: &MetricTensor) -> Vec6 {
    let kappa = g.r() - 2.0 * g.j() * r + r * r;
    let d_o = dm * (-(g.j() - r) / kappa);
    let d_q = dm - d_o * r;
    Vec6::new(d_o.x, d_o.y, d_o.z, d_q.x, d_q.y, d_q.z)
}

/// g-closest point of a limit variety and its distance.
pub fn closest_on_variety(pose: &Pose, variety: &LimitVariety, design: &DesignParams, g: &MetricTensor) -> Result<(Vec6, f64)> {
    let leg = variety.leg();
    if let LimitVariety::BaseCone { angle, .. } = variety {
        check_angle(*angle)?;
    }
    let base = design.base_anchor(leg)?;
    let rel = platform_anchor(pose, design, leg)? - base;
    let dm = anchor_foot(variety, &rel) - rel;
    let step = lift(&dm, design.offset(leg)?, g);
    Ok((pose.vector() + step, g.norm(&step)))
}

/// g-unit normal of the variety at the breakpoint side.
fn unit_normal(pose: &Pose, foot: &Vec6, distance: f64, variety: &LimitVariety, design: &DesignParams, g: &MetricTensor) -> Result<Vec6> {
    if distance > 0.0 {
        return Ok((pose.vector() - foot) / distance);
    }
    let leg = variety.leg();
    let r = design.offset(leg)?;
    let grad_m = anchor_gradient(variety, &(platform_anchor(pose, design, leg)? - design.base_anchor(leg)?));
    let grad = Vec6::new(r * grad_m.x, r * grad_m.y, r * grad_m.z, grad_m.x, grad_m.y, grad_m.z);
    let n = g.apply_inverse(&grad);
    let len = g.norm(&n);
    Ok(if len > 0.0 { n / len } else { n })
}

/// Interior breakpoints whose update moves toward a limit variety closer than
/// the safe radius. `update` holds the updated interior points.
pub fn detect_breaches(path: &DiscretePath, update: &[Vec6], limits: &JointLimits, design: &DesignParams, g: &MetricTensor) -> Result<Vec<QBreach>> {
    let varieties = limits.varieties();
    let mut out = Vec::new();
    for (j, (p, u)) in path.interior().iter().zip(update).enumerate() {
        let dir = u - p.vector();
        for v in &varieties {
            let (foot, distance) = match closest_on_variety(p, v, design, g) {
                Ok(x) => x,
                Err(e) => {
                    warn!("skipping limit variety {v:?}: {e}");
                    continue;
                }
            };
            if distance >= limits.safe_radius {
                continue;
            }
            if g.inner(&dir, &(p.vector() - foot)) < 0.0 {
                let normal = unit_normal(p, &foot, distance, v, design, g)?;
                out.push(QBreach { index: j + 1, variety: *v, foot, normal, distance });
            }
        }
    }
    Ok(out)
}

/// Result of redirecting an update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Redirected {
    pub direction: Vec6,
    /// Normals skipped because they were dependent on earlier ones.
    pub dropped: usize,
}

/// g-orthogonal projection of `d` onto the intersection of the hyperplanes
/// g-orthogonal to `normals`. Normals dependent on earlier ones are dropped.
pub fn project_onto_tangents(d: &Vec6, normals: &[Vec6], g: &MetricTensor) -> Redirected {
    let mut basis: Vec<Vec6> = Vec::with_capacity(normals.len());
    let mut dropped = 0;
    for n in normals {
        let scale = g.norm(n);
        let mut v = *n;
        // two sweeps of modified Gram-Schmidt keep the basis orthogonal to rounding
        for _ in 0..2 {
            for e in &basis {
                v -= e * g.inner(&v, e);
            }
        }
        let len = g.norm(&v);
        if !(scale > 0.0) || len <= tolerances::NORMAL_DEPENDENCE * scale {
            warn!("dropping a dependent limit normal");
            dropped += 1;
            continue;
        }
        basis.push(v / len);
    }
    let mut out = *d;
    for _ in 0..2 {
        for e in &basis {
            out -= e * g.inner(&out, e);
        }
    }
    Redirected { direction: out, dropped }
}

/// Replaces an update direction by its projection onto the tangent spaces
/// of all breached varieties.
pub fn tangent_replace(d: &Vec6, breaches: &[QBreach], g: &MetricTensor) -> Redirected {
    let normals: Vec<Vec6> = breaches.iter().map(|b| b.normal).collect();
    project_onto_tangents(d, &normals, g)
}
