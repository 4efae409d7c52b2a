//! Discretized paths and their energies.

use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, Pose, Vec6};

/// Ordered breakpoints; the first and last are the fixed start and end poses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    breakpoints: Vec<Pose>,
}

impl DiscretePath {
    pub fn new(breakpoints: Vec<Pose>) -> Result<Self> {
        if breakpoints.len() < 3 {
            return Err(Error::TooFewBreakpoints(breakpoints.len()));
        }
        Ok(DiscretePath { breakpoints })
    }

    pub fn breakpoints(&self) -> &[Pose] {
        &self.breakpoints
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn start(&self) -> &Pose {
        &self.breakpoints[0]
    }

    pub fn end(&self) -> &Pose {
        &self.breakpoints[self.breakpoints.len() - 1]
    }

    /// Interior breakpoints, the unknowns of the optimization.
    pub fn interior(&self) -> &[Pose] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut b = self.breakpoints.clone();
        b.reverse();
        DiscretePath { breakpoints: b }
    }

    /// Same endpoints, new interior.
    pub fn with_interior(&self, interior: Vec<Pose>) -> Result<Self> {
        let mut b = Vec::with_capacity(interior.len() + 2);
        b.push(*self.start());
        b.extend(interior);
        b.push(*self.end());
        Self::new(b)
    }
}

/// Geodesic energy, bending energy, length and total curvature of a path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathStats {
    pub energy: f64,
    pub bending: f64,
    pub length: f64,
    pub curvature: f64,
}

fn stats_with(path: &DiscretePath, norm_sq: impl Fn(&Vec6) -> f64) -> PathStats {
    let b = path.breakpoints();
    let steps: Vec<Vec6> = b.windows(2).map(|w| w[1].vector() - w[0].vector()).collect();
    let mut s = PathStats::default();
    for d in &steps {
        let e = norm_sq(d);
        s.energy += e;
        s.length += e.sqrt();
    }
    for w in steps.windows(2) {
        let e = norm_sq(&(w[1] - w[0]));
        s.bending += e;
        s.curvature += e.sqrt();
    }
    s
}

/// Energies of a path measured with the metric tensor.
pub fn path_stats(path: &DiscretePath, g: &MetricTensor) -> PathStats {
    stats_with(path, |d| g.norm_squared(d))
}

/// Energies of a path measured with the Euclidean norm of the coordinates.
pub fn path_stats_euclidean(path: &DiscretePath) -> PathStats {
    stats_with(path, |d| d.norm_squared())
}
