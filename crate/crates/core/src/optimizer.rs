//! Quadratic cost model of one iteration, its minimizer, the growth-bounded
//! step size and the monitoring objective.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::banded::SymBand;
use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, Vec6};
use crate::path::{DiscretePath, PathStats};
use crate::pedal::PedalSet;
use crate::repulsion::repulsion_direction;

/// How the interior update is constrained to the orientation cylinder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UpdateRule {
    /// Minimize the cost model over the tangent spaces of the cylinder.
    #[default]
    TangentSolve,
    /// Minimize the cost model freely, then project each orientation update
    /// onto the tangent plane of the sphere.
    ProjectAfterSolve,
}

/// Which pedal points the objective measures clearance against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveReference {
    /// Pedals recomputed at the candidate path.
    #[default]
    Candidate,
    /// Pedals of the path the candidate was computed from.
    Previous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Weight of the geodesic energy term.
    pub geodesic_weight: f64,
    /// Weight of the bending energy term.
    pub bending_weight: f64,
    /// Allowed relative change of either energy per iteration, in percent.
    pub growth: f64,
    /// Radius of the safe zone around joint-limit varieties.
    pub safe_radius: f64,
    /// Breakpoints used when sampling a parametric start path.
    pub breakpoints: usize,
    pub max_iterations: usize,
    /// Halving stops once the step falls below this.
    pub min_step: f64,
    /// Lower bound on the breakpoint count kept by cover minimization.
    pub min_keep: usize,
    pub cover: bool,
    pub joints: bool,
    pub update_rule: UpdateRule,
    pub objective_reference: ObjectiveReference,
    /// Reject steps that move a breakpoint across the hyperplane or quadric part.
    pub keep_sides: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            geodesic_weight: 0.001,
            bending_weight: 0.05,
            growth: 5.0,
            safe_radius: 0.4,
            breakpoints: 30,
            max_iterations: 500,
            min_step: 0.0,
            min_keep: 6,
            cover: false,
            joints: false,
            update_rule: UpdateRule::default(),
            objective_reference: ObjectiveReference::default(),
            keep_sides: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.growth > 0.0 && self.growth.is_finite()) {
            return bad("growth must be a positive percentage");
        }
        if !(self.geodesic_weight >= 0.0 && self.geodesic_weight.is_finite()) {
            return bad("geodesic weight must be nonnegative");
        }
        if !(self.bending_weight >= 0.0 && self.bending_weight.is_finite()) {
            return bad("bending weight must be nonnegative");
        }
        if !(self.safe_radius > 0.0 && self.safe_radius.is_finite()) {
            return bad("safe radius must be positive");
        }
        if self.breakpoints < 3 {
            return bad("at least 3 breakpoints are required");
        }
        if !(self.min_step >= 0.0 && self.min_step < 1.0) {
            return bad("minimum step must lie in [0, 1)");
        }
        if self.min_keep < 3 {
            return bad("cover must keep at least 3 breakpoints");
        }
        Ok(())
    }
}

/// Data from the current path that the cost model is built from.
#[derive(Debug, Clone)]
pub struct CostContext {
    pub previous: PathStats,
    /// One pedal set per breakpoint (endpoint sets are ignored).
    pub pedals: Vec<PedalSet>,
    pub metric: MetricTensor,
    pub geodesic_weight: f64,
    pub bending_weight: f64,
}

/// `a_E·E(u) + a_B·B(u) − Σ_j ⟨pull_j, u_j − p_j⟩_g` over the interior points.
#[derive(Debug, Clone)]
pub struct QuadraticCost {
    metric: MetricTensor,
    start: Vec6,
    end: Vec6,
    current: Vec<Vec6>,
    geodesic_coeff: f64,
    bending_coeff: f64,
    pull: Vec<Vec6>,
}

/// Solution of the update system.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateSolution {
    /// Updated interior points.
    pub interior: Vec<Vec6>,
    /// True when the quadratic part vanished and the pure repulsion direction was used.
    pub fallback: bool,
}

fn energy_coefficient(weight: f64, count: f64, previous: f64) -> Result<f64> {
    if weight == 0.0 {
        Ok(0.0)
    } else if previous > 0.0 {
        Ok(weight * count / (2.0 * previous))
    } else {
        Err(Error::ZeroLength)
    }
}

fn bending_coefficient(weight: f64, count: f64, previous: f64) -> f64 {
    // a straight previous path has no curvature to normalize by; drop the term
    if previous > 0.0 {
        weight * count / (2.0 * previous)
    } else {
        0.0
    }
}

/// Assembles the cost model around the current path.
pub fn assemble_cost(ctx: &CostContext, path: &DiscretePath) -> Result<QuadraticCost> {
    let n = path.len();
    if ctx.pedals.len() != n {
        return Err(Error::InvalidConfig(format!("{} pedal sets for {} breakpoints", ctx.pedals.len(), n)));
    }
    let geodesic_coeff = energy_coefficient(ctx.geodesic_weight, (n - 1) as f64, ctx.previous.length)?;
    let bending_coeff = bending_coefficient(ctx.bending_weight, (n - 2) as f64, ctx.previous.curvature);
    let scale = 1.0 / (n - 2) as f64;
    let pull = path
        .interior()
        .iter()
        .zip(&ctx.pedals[1..n - 1])
        .map(|(p, set)| repulsion_direction(p, set, &ctx.metric).map(|d| d * scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadraticCost {
        metric: ctx.metric,
        start: *path.start().vector(),
        end: *path.end().vector(),
        current: path.interior().iter().map(|p| *p.vector()).collect(),
        geodesic_coeff,
        bending_coeff,
        pull,
    })
}

/// Visits every first-difference row (with the geodesic coefficient) and
/// every second-difference row (with the bending coefficient) of a chain of
/// `n` points as `(coefficient, [(index, stencil weight)])`.
fn for_each_row(n: usize, ce: f64, cb: f64, mut f: impl FnMut(f64, &[(usize, f64)])) {
    if ce != 0.0 {
        for i in 0..n - 1 {
            f(ce, &[(i, -1.0), (i + 1, 1.0)]);
        }
    }
    if cb != 0.0 {
        for c in 1..n - 1 {
            f(cb, &[(c - 1, 1.0), (c, -2.0), (c + 1, 1.0)]);
        }
    }
}

impl QuadraticCost {
    /// Cost model from explicit coefficients and per-point repulsion terms.
    pub fn from_parts(path: &DiscretePath, metric: MetricTensor, geodesic_coeff: f64, bending_coeff: f64, pull: Vec<Vec6>) -> Result<Self> {
        if pull.len() != path.len() - 2 {
            return Err(Error::InvalidConfig("one repulsion term per interior point is required".into()));
        }
        Ok(QuadraticCost {
            metric,
            start: *path.start().vector(),
            end: *path.end().vector(),
            current: path.interior().iter().map(|p| *p.vector()).collect(),
            geodesic_coeff,
            bending_coeff,
            pull,
        })
    }

    pub fn interior_len(&self) -> usize {
        self.current.len()
    }

    pub fn current(&self) -> &[Vec6] {
        &self.current
    }

    /// Per-point linear repulsion term.
    pub fn pull(&self) -> &[Vec6] {
        &self.pull
    }

    pub fn geodesic_coeff(&self) -> f64 {
        self.geodesic_coeff
    }

    pub fn bending_coeff(&self) -> f64 {
        self.bending_coeff
    }

    pub fn metric(&self) -> &MetricTensor {
        &self.metric
    }

    fn chain(&self, interior: &[Vec6]) -> Vec<Vec6> {
        let mut all = Vec::with_capacity(interior.len() + 2);
        all.push(self.start);
        all.extend_from_slice(interior);
        all.push(self.end);
        all
    }

    pub fn value(&self, interior: &[Vec6]) -> f64 {
        let all = self.chain(interior);
        let mut v = 0.0;
        for_each_row(all.len(), self.geodesic_coeff, self.bending_coeff, |c, row| {
            let d: Vec6 = row.iter().map(|&(k, w)| all[k] * w).sum();
            v += c * self.metric.norm_squared(&d);
        });
        for ((u, p), pull) in interior.iter().zip(&self.current).zip(&self.pull) {
            v -= self.metric.inner(pull, &(u - p));
        }
        v
    }

    /// Coordinate gradient with respect to the interior points.
    pub fn gradient(&self, interior: &[Vec6]) -> Vec<Vec6> {
        let all = self.chain(interior);
        let n = all.len();
        let mut grad = vec![Vec6::zeros(); n];
        for_each_row(n, self.geodesic_coeff, self.bending_coeff, |c, row| {
            let d: Vec6 = row.iter().map(|&(k, w)| all[k] * w).sum();
            let gd = self.metric.apply(&d) * (2.0 * c);
            for &(k, w) in row {
                grad[k] += gd * w;
            }
        });
        grad.drain(..1);
        grad.pop();
        for (gr, pull) in grad.iter_mut().zip(&self.pull) {
            *gr -= self.metric.apply(pull);
        }
        grad
    }

    /// Interior Hessian divided by the metric: the full Hessian is `K ⊗ g`.
    pub fn scalar_hessian(&self) -> SymBand {
        let n = self.current.len() + 2;
        let mut k = SymBand::zeros(n - 2, 2);
        for_each_row(n, self.geodesic_coeff, self.bending_coeff, |c, row| {
            for &(a, wa) in row {
                for &(b, wb) in row {
                    if a > 0 && b > 0 && a < n - 1 && b < n - 1 && a >= b {
                        k.add(a - 1, b - 1, 2.0 * c * wa * wb);
                    }
                }
            }
        });
        k
    }

    /// Dense `6(n−2)`-square Hessian, interior points stacked in order.
    pub fn dense_hessian(&self) -> DMatrix<f64> {
        let k = self.scalar_hessian().to_dense();
        k.kronecker(&self.metric.matrix())
    }

    /// Right-hand side of `K·U = rhs`, the stationarity condition with the
    /// metric factored out.
    fn reduced_rhs(&self) -> DMatrix<f64> {
        let n = self.current.len() + 2;
        let all = self.chain(&self.current);
        let mut rhs = DMatrix::zeros(n - 2, 6);
        for (j, pull) in self.pull.iter().enumerate() {
            rhs.row_mut(j).copy_from(&pull.transpose());
        }
        for_each_row(n, self.geodesic_coeff, self.bending_coeff, |c, row| {
            let fixed: Vec6 = row.iter().filter(|&&(k, _)| k == 0 || k == n - 1).map(|&(k, w)| all[k] * w).sum();
            for &(k, w) in row {
                if k > 0 && k < n - 1 {
                    let mut r = rhs.row_mut(k - 1);
                    r -= (fixed * (2.0 * c * w)).transpose();
                }
            }
        });
        rhs
    }

    fn has_quadratic_part(&self) -> bool {
        self.geodesic_coeff > 0.0 || self.bending_coeff > 0.0
    }
}

fn rows_to_points(m: &DMatrix<f64>) -> Vec<Vec6> {
    m.row_iter().map(|r| Vec6::from_iterator(r.iter().copied())).collect()
}

/// Minimizer of the cost model. When the quadratic part vanishes, each point
/// instead takes one unit step along its repulsion direction.
pub fn solve_update(cost: &QuadraticCost) -> Result<UpdateSolution> {
    let m = cost.interior_len();
    if !cost.has_quadratic_part() {
        let interior = (0..m).map(|j| cost.current[j] + cost.pull[j] * m as f64).collect();
        return Ok(UpdateSolution { interior, fallback: true });
    }
    let chol = cost.scalar_hessian().cholesky().ok_or(Error::SingularSystem)?;
    let x = chol.solve_matrix(&cost.reduced_rhs());
    Ok(UpdateSolution { interior: rows_to_points(&x), fallback: false })
}

/// g-orthogonal projection of `d` onto the tangent space of the cylinder at
/// a pose with orientation `o`.
pub fn cylinder_tangent_component(d: &Vec6, o: &Vector3<f64>, metric: &MetricTensor) -> Vec6 {
    let oo = o.norm_squared();
    if oo == 0.0 {
        return *d;
    }
    let c = o.dot(&d.fixed_rows::<3>(0)) / oo;
    let shift = o * c;
    let mut out = *d;
    for k in 0..3 {
        out[k] -= shift[k];
        out[k + 3] += metric.j() * shift[k];
    }
    out
}

/// Minimizer of the cost model subject to each orientation update being
/// tangent to the unit sphere at the current orientation.
pub fn solve_update_tangent(cost: &QuadraticCost) -> Result<UpdateSolution> {
    let m = cost.interior_len();
    let orient: Vec<Vector3<f64>> = cost.current.iter().map(|p| p.fixed_rows::<3>(0).into()).collect();
    if !cost.has_quadratic_part() {
        let interior = (0..m)
            .map(|j| {
                let step = cost.pull[j] * m as f64;
                cost.current[j] + cylinder_tangent_component(&step, &orient[j], &cost.metric)
            })
            .collect();
        return Ok(UpdateSolution { interior, fallback: true });
    }
    let chol = cost.scalar_hessian().cholesky().ok_or(Error::SingularSystem)?;
    let free = rows_to_points(&chol.solve_matrix(&cost.reduced_rhs()));
    let k_inv = chol.solve_matrix(&DMatrix::identity(m, m));
    let gap = cost.metric.gap();
    let schur = DMatrix::from_fn(m, m, |a, b| k_inv[(a, b)] * orient[a].dot(&orient[b]) / gap);
    let violation = DVector::from_fn(m, |j, _| {
        orient[j].dot(&(free[j] - cost.current[j]).fixed_rows::<3>(0))
    });
    let mu = schur.cholesky().ok_or(Error::SingularSystem)?.solve(&violation);
    let interior = (0..m)
        .map(|j| {
            let mut x = free[j];
            for k in 0..m {
                let c = k_inv[(j, k)] * mu[k] / gap;
                if c != 0.0 {
                    let o = orient[k] * c;
                    for t in 0..3 {
                        x[t] -= o[t];
                        x[t + 3] += cost.metric.j() * o[t];
                    }
                }
            }
            x
        })
        .collect();
    Ok(UpdateSolution { interior, fallback: false })
}

/// Positive real roots of `c2·s² + c1·s + c0`.
fn positive_roots(c2: f64, c1: f64, c0: f64, out: &mut Vec<f64>) {
    if c2 == 0.0 {
        if c1 != 0.0 && -c0 / c1 > 0.0 {
            out.push(-c0 / c1);
        }
        return;
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return;
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    for r in [q / c2, if q != 0.0 { c0 / q } else { f64::NAN }] {
        if r > 0.0 {
            out.push(r);
        }
    }
}

/// Largest step in (0, 1] that keeps both energies within `growth` percent of
/// their previous values: the smallest positive root of the four boundary
/// equations, or 1 when none is smaller.
pub fn step_size(path: &DiscretePath, update: &[Vec6], prev: &PathStats, growth: f64, g: &MetricTensor) -> f64 {
    let pts: Vec<Vec6> = path.breakpoints().iter().map(|p| *p.vector()).collect();
    let n = pts.len();
    let mut dir = vec![Vec6::zeros(); n];
    for (j, u) in update.iter().enumerate().take(n - 2) {
        dir[j + 1] = u - pts[j + 1];
    }
    let mut roots = Vec::new();
    let gamma = growth / 100.0;
    for (ce, cb, target) in [(1.0, 0.0, prev.energy), (0.0, 1.0, prev.bending)] {
        let (mut c0, mut c1, mut c2) = (0.0, 0.0, 0.0);
        for_each_row(n, ce, cb, |_, row| {
            let dp: Vec6 = row.iter().map(|&(k, w)| pts[k] * w).sum();
            let dd: Vec6 = row.iter().map(|&(k, w)| dir[k] * w).sum();
            c0 += g.norm_squared(&dp);
            c1 += 2.0 * g.inner(&dp, &dd);
            c2 += g.norm_squared(&dd);
        });
        for t in [target * (1.0 + gamma), target * (1.0 - gamma)] {
            positive_roots(c2, c1, c0 - t, &mut roots);
        }
    }
    roots.into_iter().fold(1.0, f64::min)
}

/// Monitoring objective of a path: weighted energies minus the mean
/// clearance of the interior points to their reference pedals.
pub fn objective(path: &DiscretePath, reference: &[PedalSet], stats: &PathStats, cfg: &OptimizerConfig, g: &MetricTensor) -> Result<f64> {
    let n = path.len();
    if reference.len() != n {
        return Err(Error::InvalidConfig(format!("{} pedal sets for {} breakpoints", reference.len(), n)));
    }
    let ce = energy_coefficient(cfg.geodesic_weight, (n - 1) as f64, stats.length)?;
    let cb = bending_coefficient(cfg.bending_weight, (n - 2) as f64, stats.curvature);
    let mut clearance = 0.0;
    for (u, set) in path.interior().iter().zip(&reference[1..n - 1]) {
        let q = set.closest().ok_or(Error::NoPedals)?;
        clearance += g.distance(u, &q.point);
    }
    Ok(ce * stats.energy + cb * stats.bending - clearance / (n - 2) as f64)
}
