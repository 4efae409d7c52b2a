//! Finite singularity-free cover of a path by balls around its breakpoints.

use crate::error::{Error, Result};
use crate::geometry::{normalize_to_cylinder, MetricTensor, Pose};
use crate::path::DiscretePath;
use crate::tolerances;

/// A path together with the singularity-free radius of each breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveredPath {
    pub path: DiscretePath,
    pub radii: Vec<f64>,
}

/// Whether the straight segment `i → i+1` lies in the union of the two end balls.
pub fn segment_covered(path: &DiscretePath, radii: &[f64], i: usize, g: &MetricTensor) -> bool {
    let b = path.breakpoints();
    radii[i] + radii[i + 1] >= g.distance(&b[i], &b[i + 1])
}

/// Interior breakpoints lying in both neighbouring open balls.
pub fn doubly_covered(path: &DiscretePath, radii: &[f64], g: &MetricTensor) -> Vec<bool> {
    let b = path.breakpoints();
    let n = b.len();
    (0..n)
        .map(|i| {
            i > 0
                && i + 1 < n
                && g.distance(&b[i], &b[i - 1]) < radii[i - 1]
                && g.distance(&b[i], &b[i + 1]) < radii[i + 1]
        })
        .collect()
}

/// Maximal runs of consecutive flagged indices.
pub fn packs(flags: &[bool]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut run = Vec::new();
    for (i, &f) in flags.iter().enumerate() {
        if f {
            run.push(i);
        } else if !run.is_empty() {
            out.push(std::mem::take(&mut run));
        }
    }
    if !run.is_empty() {
        out.push(run);
    }
    out
}

fn check_radii(radii: &[f64], n: usize) -> Result<()> {
    if radii.len() != n {
        return Err(Error::InvalidConfig(format!("{} radii for {} breakpoints", radii.len(), n)));
    }
    match radii.iter().position(|r| !(*r > 0.0)) {
        Some(index) => Err(Error::SingularBreakpoint { index }),
        None => Ok(()),
    }
}

/// Inserts breakpoints midway into the uncovered part of every segment until
/// all segments are covered. `radius` gives the free radius of a new pose.
pub fn include_breakpoints(
    path: &DiscretePath,
    radii: &[f64],
    g: &MetricTensor,
    mut radius: impl FnMut(&Pose) -> Result<f64>,
) -> Result<CoveredPath> {
    check_radii(radii, path.len())?;
    let mut pts = path.breakpoints().to_vec();
    let mut rad = radii.to_vec();
    // index of the input segment each current segment came from
    let mut origin: Vec<usize> = (0..pts.len()).collect();
    let mut inserted = 0;
    let mut i = 0;
    while i + 1 < pts.len() {
        let len = g.distance(&pts[i], &pts[i + 1]);
        if rad[i] + rad[i + 1] >= len {
            i += 1;
            continue;
        }
        if inserted == tolerances::MAX_INSERTIONS {
            return Err(Error::CoverRunaway(inserted));
        }
        let t = (rad[i] / len + 1.0 - rad[i + 1] / len) / 2.0;
        let raw = pts[i].offset(&(pts[i + 1].vector() - pts[i].vector()), t);
        let new = normalize_to_cylinder(&raw)?;
        let r = radius(&new)?;
        if !(r > 0.0) {
            return Err(Error::UncoverableSegment { segment: origin[i] });
        }
        pts.insert(i + 1, new);
        rad.insert(i + 1, r);
        origin.insert(i + 1, origin[i]);
        inserted += 1;
    }
    Ok(CoveredPath { path: DiscretePath::new(pts)?, radii: rad })
}

/// Removes doubly covered interior breakpoints pack by pack (members at odd
/// 1-based positions within each pack) until no pack is left or the count
/// reaches `min_keep`.
pub fn exclude_breakpoints(path: &DiscretePath, radii: &[f64], g: &MetricTensor, min_keep: usize) -> Result<CoveredPath> {
    check_radii(radii, path.len())?;
    let mut pts = path.breakpoints().to_vec();
    let mut rad = radii.to_vec();
    loop {
        let current = DiscretePath::new(pts.clone())?;
        let flags = doubly_covered(&current, &rad, g);
        let mut doomed: Vec<usize> = packs(&flags).iter().flat_map(|pk| pk.iter().copied().step_by(2)).collect();
        let budget = pts.len().saturating_sub(min_keep);
        doomed.truncate(budget);
        if doomed.is_empty() {
            return Ok(CoveredPath { path: current, radii: rad });
        }
        for &i in doomed.iter().rev() {
            pts.remove(i);
            rad.remove(i);
        }
    }
}

/// Inclusion followed by exclusion, then a final inclusion check.
pub fn minimal_cover(
    path: &DiscretePath,
    radii: &[f64],
    g: &MetricTensor,
    min_keep: usize,
    mut radius: impl FnMut(&Pose) -> Result<f64>,
) -> Result<CoveredPath> {
    let inc = include_breakpoints(path, radii, g, &mut radius)?;
    let exc = exclude_breakpoints(&inc.path, &inc.radii, g, min_keep)?;
    include_breakpoints(&exc.path, &exc.radii, g, &mut radius)
}
