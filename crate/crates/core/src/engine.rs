//! The optimization loop: data collection, repeated update with step
//! halving, and the run summary.

use std::time::Instant;

use log::{debug, info};

use crate::cover::minimal_cover;
use crate::error::{Error, Result};
use crate::geometry::{metric_tensor, normalize_to_cylinder, sphere_tangent_project, DesignParams, MetricTensor, Pose, Vec6};
use crate::joints::{detect_breaches, project_onto_tangents, JointLimits, QBreach};
use crate::optimizer::{
    assemble_cost, objective, solve_update, solve_update_tangent, step_size, CostContext, ObjectiveReference,
    OptimizerConfig, UpdateRule,
};
use crate::path::{path_stats, DiscretePath, PathStats};
use crate::pedal::{orthogonal_projection, PedalSet};
use crate::tolerances;
use crate::variety::{build_sigma, evaluate_sigma, SigmaVariety};

/// Data logged for the start path and every accepted iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 0 for the start path.
    pub iteration: usize,
    pub objective: f64,
    /// Step actually applied (0 for the start path).
    pub step: f64,
    pub breakpoints: usize,
    /// Smallest pedal distance over the interior breakpoints.
    pub min_clearance: f64,
    /// Seconds since the loop started.
    pub elapsed: f64,
    /// Safe-zone breaches redirected in this iteration.
    pub breaches: usize,
    /// Largest `|⟨update, normal⟩_g|` over redirected breakpoints and their normals.
    pub normal_residual: f64,
    /// Step halvings needed before the update was accepted.
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub length: f64,
    pub total_curvature: f64,
    pub elapsed_seconds: f64,
    pub final_breakpoints: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub path: DiscretePath,
    pub records: Vec<IterationRecord>,
    pub summary: RunSummary,
}

/// Everything the loop carries from one iteration to the next.
#[derive(Debug, Clone)]
pub struct EngineState {
    design: DesignParams,
    variety: SigmaVariety,
    metric: MetricTensor,
    limits: JointLimits,
    cfg: OptimizerConfig,
    path: DiscretePath,
    pedals: Vec<PedalSet>,
    stats: PathStats,
    objective: f64,
    iteration: usize,
    converged: bool,
    stagnant: usize,
    started: Option<Instant>,
}

impl EngineState {
    pub fn path(&self) -> &DiscretePath {
        &self.path
    }

    pub fn pedals(&self) -> &[PedalSet] {
        &self.pedals
    }

    pub fn stats(&self) -> &PathStats {
        &self.stats
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn metric(&self) -> &MetricTensor {
        &self.metric
    }

    pub fn variety(&self) -> &SigmaVariety {
        &self.variety
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    pub fn min_clearance(&self) -> f64 {
        interior_clearance(&self.pedals)
    }

    fn elapsed(&self) -> f64 {
        self.started.map_or(0.0, |t| t.elapsed().as_secs_f64())
    }
}

fn interior_clearance(pedals: &[PedalSet]) -> f64 {
    let n = pedals.len();
    pedals[1..n - 1].iter().map(PedalSet::clearance).fold(f64::INFINITY, f64::min)
}

fn all_pedals(path: &DiscretePath, v: &SigmaVariety, g: &MetricTensor) -> Vec<PedalSet> {
    path.breakpoints().iter().map(|p| orthogonal_projection(p, v, g)).collect()
}

fn sign_pair(v: &SigmaVariety, p: &Pose) -> (f64, f64) {
    let (f1, f2) = evaluate_sigma(v, p);
    (f1.signum(), f2.signum())
}

fn first_singular(pedals: &[PedalSet]) -> Option<usize> {
    pedals.iter().position(|set| !(set.clearance() > 0.0))
}

/// Whether some moved point lies on the other side of a variety part than
/// the point it was moved from.
fn crosses(before: &[Pose], after: &[Pose], v: &SigmaVariety) -> bool {
    before.iter().zip(after).any(|(a, b)| sign_pair(v, a) != sign_pair(v, b))
}

fn first_violation(path: &DiscretePath, limits: &JointLimits, design: &DesignParams) -> Result<Option<(usize, String)>> {
    for (i, p) in path.breakpoints().iter().enumerate() {
        if let Some(v) = limits.violations(p, design)?.into_iter().next() {
            return Ok(Some((i, v)));
        }
    }
    Ok(None)
}

fn evaluate(path: &DiscretePath, pedals: &[PedalSet], cfg: &OptimizerConfig, g: &MetricTensor) -> Result<(PathStats, f64)> {
    let stats = path_stats(path, g);
    let value = objective(path, pedals, &stats, cfg, g)?;
    Ok((stats, value))
}

fn cover(path: DiscretePath, pedals: Vec<PedalSet>, v: &SigmaVariety, g: &MetricTensor, min_keep: usize) -> Result<(DiscretePath, Vec<PedalSet>)> {
    let radii: Vec<f64> = pedals.iter().map(PedalSet::clearance).collect();
    let covered = minimal_cover(&path, &radii, g, min_keep, |p| Ok(orthogonal_projection(p, v, g).clearance()))?;
    if covered.path == path {
        return Ok((path, pedals));
    }
    let pedals = all_pedals(&covered.path, v, g);
    Ok((covered.path, pedals))
}

/// Validates the start path, computes its pedals, builds the cover when
/// requested and evaluates the starting objective.
pub fn process_one(initial: &DiscretePath, design: &DesignParams, limits: &JointLimits, cfg: &OptimizerConfig) -> Result<(EngineState, IterationRecord)> {
    cfg.validate()?;
    if cfg.joints {
        limits.validate()?;
    }
    if let Some(index) = initial.breakpoints().iter().position(|p| !p.is_on_cylinder()) {
        return Err(Error::OffCylinder { index });
    }
    let metric = metric_tensor(design)?;
    let variety = build_sigma(design);
    let mut path = initial.clone();
    let mut pedals = all_pedals(&path, &variety, &metric);
    if let Some(index) = first_singular(&pedals) {
        return Err(Error::SingularBreakpoint { index });
    }
    if cfg.joints {
        if let Some((index, detail)) = first_violation(&path, limits, design)? {
            return Err(Error::LimitViolation { index, detail });
        }
    }
    if cfg.cover {
        (path, pedals) = cover(path, pedals, &variety, &metric, cfg.min_keep)?;
    }
    let (stats, value) = evaluate(&path, &pedals, cfg, &metric)?;
    let record = IterationRecord {
        iteration: 0,
        objective: value,
        step: 0.0,
        breakpoints: path.len(),
        min_clearance: interior_clearance(&pedals),
        elapsed: 0.0,
        breaches: 0,
        normal_residual: 0.0,
        halvings: 0,
    };
    let state = EngineState {
        design: design.clone(),
        variety,
        metric,
        limits: limits.clone(),
        cfg: cfg.clone(),
        path,
        pedals,
        stats,
        objective: value,
        iteration: 0,
        converged: false,
        stagnant: 0,
        started: None,
    };
    Ok((state, record))
}

/// Search directions of the next iteration, one per interior breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateDirections {
    /// Full-step displacement of each interior breakpoint, after redirection.
    pub directions: Vec<Vec6>,
    /// Limit breaches that were redirected, with 1-based path indices.
    pub breaches: Vec<QBreach>,
    /// Largest |⟨direction, normal⟩_g| over the breaches.
    pub normal_residual: f64,
}

/// Update directions for the interior points, after limit redirection.
/// [`iterate`] moves along exactly these directions.
pub fn update_directions(state: &EngineState) -> Result<UpdateDirections> {
    let g = &state.metric;
    let ctx = CostContext {
        previous: state.stats,
        pedals: state.pedals.clone(),
        metric: *g,
        geodesic_weight: state.cfg.geodesic_weight,
        bending_weight: state.cfg.bending_weight,
    };
    let cost = assemble_cost(&ctx, &state.path)?;
    let solution = match state.cfg.update_rule {
        UpdateRule::TangentSolve => solve_update_tangent(&cost)?,
        UpdateRule::ProjectAfterSolve => solve_update(&cost)?,
    };
    let interior = state.path.interior();
    let mut dirs: Vec<Vec6> = solution.interior.iter().zip(interior).map(|(u, p)| u - p.vector()).collect();
    let mut residual = 0.0f64;
    let mut breaches = Vec::new();
    if state.cfg.joints {
        breaches = detect_breaches(&state.path, &solution.interior, &state.limits, &state.design, g)?;
        for (j, d) in dirs.iter_mut().enumerate() {
            let mine: Vec<Vec6> = breaches.iter().filter(|b| b.index == j + 1).map(|b| b.normal).collect();
            if mine.is_empty() {
                continue;
            }
            let mut normals = Vec::with_capacity(mine.len() + 1);
            if state.cfg.update_rule == UpdateRule::TangentSolve {
                // keep the redirected update tangent to the cylinder as well
                let o = interior[j].orientation();
                normals.push(g.apply_inverse(&Vec6::new(o.x, o.y, o.z, 0.0, 0.0, 0.0)));
            }
            normals.extend_from_slice(&mine);
            *d = project_onto_tangents(d, &normals, g).direction;
            for n in &mine {
                residual = residual.max(g.inner(d, n).abs());
            }
        }
    }
    if state.cfg.update_rule == UpdateRule::ProjectAfterSolve {
        for (d, p) in dirs.iter_mut().zip(interior) {
            let o = p.orientation();
            let t = sphere_tangent_project(&d.fixed_rows::<3>(0).into(), &o.normalize())?;
            d.fixed_rows_mut::<3>(0).copy_from(&t);
        }
    }
    Ok(UpdateDirections { directions: dirs, breaches, normal_residual: residual })
}

/// Performs one accepted iteration, halving the step until the objective
/// decreases. Returns `None` (and marks the state converged) when the step
/// underflows first.
pub fn iterate(state: &mut EngineState) -> Result<Option<IterationRecord>> {
    if state.converged {
        return Ok(None);
    }
    state.started.get_or_insert_with(Instant::now);
    let g = state.metric;
    let UpdateDirections { directions: dirs, breaches, normal_residual } = update_directions(state)?;
    let breaches = breaches.len();
    let interior = state.path.interior().to_vec();
    let targets: Vec<Vec6> = interior.iter().zip(&dirs).map(|(p, d)| p.vector() + d).collect();
    let mut step = step_size(&state.path, &targets, &state.stats, state.cfg.growth, &g);
    let floor = state.cfg.min_step.max(tolerances::STEP_UNDERFLOW);
    let mut halvings = 0;
    loop {
        if step < floor {
            debug!("iteration {}: step underflow, treating as converged", state.iteration + 1);
            state.converged = true;
            return Ok(None);
        }
        if let Some(accepted) = try_step(state, &interior, &dirs, step)? {
            let (path, pedals, stats, value) = accepted;
            let change = (state.objective - value).abs();
            state.stagnant = if change <= tolerances::STAGNATION * state.objective.abs().max(1.0) { state.stagnant + 1 } else { 0 };
            state.path = path;
            state.pedals = pedals;
            state.stats = stats;
            state.objective = value;
            state.iteration += 1;
            if state.stagnant >= tolerances::STAGNATION_STREAK {
                state.converged = true;
            }
            return Ok(Some(IterationRecord {
                iteration: state.iteration,
                objective: value,
                step,
                breakpoints: state.path.len(),
                min_clearance: state.min_clearance(),
                elapsed: state.elapsed(),
                breaches,
                normal_residual,
                halvings,
            }));
        }
        step /= 2.0;
        halvings += 1;
    }
}

type Candidate = (DiscretePath, Vec<PedalSet>, PathStats, f64);

fn try_step(state: &EngineState, interior: &[Pose], dirs: &[Vec6], step: f64) -> Result<Option<Candidate>> {
    let g = &state.metric;
    let moved = interior
        .iter()
        .zip(dirs)
        .map(|(p, d)| normalize_to_cylinder(&p.offset(d, step)))
        .collect::<Result<Vec<_>>>()?;
    if state.cfg.keep_sides && crosses(interior, &moved, &state.variety) {
        return Ok(None);
    }
    let mut path = state.path.with_interior(moved)?;
    let mut pedals = all_pedals(&path, &state.variety, g);
    if first_singular(&pedals).is_some() {
        return Ok(None);
    }
    if state.cfg.cover {
        match cover(path, pedals, &state.variety, g, state.cfg.min_keep) {
            Ok(c) => (path, pedals) = c,
            Err(Error::UncoverableSegment { .. } | Error::CoverRunaway(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
        if first_singular(&pedals).is_some() {
            return Ok(None);
        }
    }
    if state.cfg.joints && first_violation(&path, &state.limits, &state.design)?.is_some() {
        return Ok(None);
    }
    let reference = match state.cfg.objective_reference {
        ObjectiveReference::Previous if state.pedals.len() == path.len() => &state.pedals,
        _ => &pedals,
    };
    let (stats, value) = evaluate(&path, reference, &state.cfg, g)?;
    Ok((value < state.objective).then_some((path, pedals, stats, value)))
}

/// Runs the loop from a start path until convergence or the iteration cap.
pub fn run(initial: &DiscretePath, design: &DesignParams, limits: &JointLimits, cfg: &OptimizerConfig) -> Result<RunResult> {
    run_observed(initial, design, limits, cfg, |_, _| {})
}

/// [`run`], calling `observe` with the state after the start path has been
/// processed and after every accepted iteration.
pub fn run_observed(
    initial: &DiscretePath,
    design: &DesignParams,
    limits: &JointLimits,
    cfg: &OptimizerConfig,
    mut observe: impl FnMut(&EngineState, &IterationRecord),
) -> Result<RunResult> {
    let (mut state, first) = process_one(initial, design, limits, cfg)?;
    observe(&state, &first);
    let mut records = vec![first];
    state.started = Some(Instant::now());
    while state.iteration < cfg.max_iterations && !state.converged {
        match iterate(&mut state)? {
            Some(r) => {
                observe(&state, &r);
                records.push(r);
            }
            None => break,
        }
    }
    let elapsed = state.elapsed();
    info!("finished after {} iterations, objective {}", state.iteration, state.objective);
    Ok(RunResult {
        summary: RunSummary {
            length: state.stats.length,
            total_curvature: state.stats.curvature,
            elapsed_seconds: elapsed,
            final_breakpoints: state.path.len(),
            iterations: state.iteration,
            converged: state.converged,
        },
        path: state.path,
        records,
    })
}
