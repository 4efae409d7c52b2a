//! CSV and JSON output of a run.

use std::fs;
use std::path::Path;

use pentapath::engine::{IterationRecord, RunResult};
use pentapath::path::DiscretePath;
use pentapath::pedal::{Component, PedalSet};
use serde::Serialize;

use crate::config::{to_toml, RunConfigFile};

/// Seventeen significant digits, enough to read every f64 back exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct Summary {
    pub length: f64,
    pub total_curvature: f64,
    pub elapsed_seconds: f64,
    pub final_breakpoints: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

pub fn component_name(c: Component) -> &'static str {
    match c {
        Component::Hyperplane => "hyperplane",
        Component::Quadric => "quadric",
        Component::Plane => "plane",
    }
}

fn csv_file(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), ExportError> {
    let path = dir.join(name);
    let err = |source| ExportError::Csv { path: path.display().to_string(), source };
    let mut w = csv::Writer::from_path(&path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.flush().map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

fn text_file(dir: &Path, name: &str, text: &str) -> Result<(), ExportError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|source| ExportError::Io { path: path.display().to_string(), source })
}

/// Writes `breakpoints.csv`, `objective.csv`, `pedals.csv`, `summary.json`,
/// `config.toml` and `final.toml` (the configuration with the final path inline).
pub fn export_results(
    dir: &Path,
    result: &RunResult,
    logged: &[(usize, DiscretePath)],
    final_pedals: &[PedalSet],
    config: &RunConfigFile,
) -> Result<(), ExportError> {
    fs::create_dir_all(dir).map_err(|source| ExportError::Io { path: dir.display().to_string(), source })?;

    let rows = logged.iter().flat_map(|(it, path)| {
        path.breakpoints().iter().enumerate().map(move |(k, p)| {
            let mut row = vec![it.to_string(), k.to_string()];
            row.extend(p.to_array().map(num));
            row
        })
    });
    csv_file(dir, "breakpoints.csv", &["iteration", "index", "u1", "u2", "u3", "u4", "u5", "u6"], rows)?;

    let rows = result.records.iter().map(|r: &IterationRecord| {
        vec![r.iteration.to_string(), num(r.objective), num(r.step), r.breakpoints.to_string(), num(r.min_clearance)]
    });
    csv_file(dir, "objective.csv", &["iteration", "objective", "step", "n", "min_clearance"], rows)?;

    let rows = final_pedals.iter().enumerate().flat_map(|(k, set)| {
        let at = result.path.breakpoints()[k].to_array();
        set.iter().enumerate().map(move |(rank, p)| {
            let mut row = vec![k.to_string(), rank.to_string(), component_name(p.component).to_string(), num(p.distance)];
            row.extend(at.map(num));
            row.extend(p.point.to_array().map(num));
            row
        })
    });
    let header = [
        "index", "rank", "component", "distance", "u1", "u2", "u3", "u4", "u5", "u6", "f1", "f2", "f3", "f4", "f5", "f6",
    ];
    csv_file(dir, "pedals.csv", &header, rows)?;

    let s = &result.summary;
    let summary = Summary {
        length: s.length,
        total_curvature: s.total_curvature,
        elapsed_seconds: s.elapsed_seconds,
        final_breakpoints: s.final_breakpoints,
        iterations: s.iterations,
        converged: s.converged,
    };
    text_file(dir, "summary.json", &serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    text_file(dir, "config.toml", &to_toml(config))?;
    text_file(dir, "final.toml", &to_toml(&config.with_inline_path(&result.path)))
}
