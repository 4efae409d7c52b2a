//! Weighted projection of an update onto the gradient lines through a pose
//! and its pedal points.

use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, Pose, Vec6};
use crate::pedal::PedalSet;

/// Weights inversely proportional to the distances, normalized to sum to 1.
pub fn repulsion_weights(distances: &[f64]) -> Result<Vec<f64>> {
    if distances.is_empty() {
        return Err(Error::NoPedals);
    }
    if distances.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::ZeroPedalDistance);
    }
    // w_i = H / d_i with H = 1 / Σ 1/d_k; written as (1/d_i) / Σ(1/d_k)
    let inv: Vec<f64> = distances.iter().map(|d| 1.0 / d).collect();
    let total: f64 = inv.iter().sum();
    Ok(inv.into_iter().map(|x| x / total).collect())
}

/// Weighted sum of unit vectors pointing from the pedals to `p` (g-normalized).
///
/// The repulsion functional is `−⟨direction, u − p⟩_g`.
pub fn repulsion_direction(p: &Pose, pedals: &PedalSet, g: &MetricTensor) -> Result<Vec6> {
    let distances: Vec<f64> = pedals.iter().map(|q| q.distance).collect();
    let weights = repulsion_weights(&distances)?;
    let mut dir = Vec6::zeros();
    for (q, w) in pedals.iter().zip(weights) {
        let away = p.vector() - q.point.vector();
        dir += away * (w / g.norm(&away));
    }
    Ok(dir)
}

/// `D = −Σ w_i ⟨(p − q_i)/‖p − q_i‖, update_dir⟩_g`.
pub fn repulsion_functional(p: &Pose, update_dir: &Vec6, pedals: &PedalSet, g: &MetricTensor) -> Result<f64> {
    Ok(-g.inner(&repulsion_direction(p, pedals, g)?, update_dir))
}
