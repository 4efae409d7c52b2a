//! Run configuration files (TOML, versioned schema).

use std::fmt;
use std::path::Path;

use pentapath::joints::{JointLimits, LegLimit};
use pentapath::optimizer::{ObjectiveReference, OptimizerConfig, UpdateRule};
use pentapath::path::DiscretePath;
use pentapath::scenario::blend_path;
use pentapath::{DesignCase, DesignParams, MetricTensor, Pose};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub schema_version: u32,
    pub design: DesignBlock,
    #[serde(default)]
    pub limits: LimitsBlock,
    #[serde(default)]
    pub optimizer: OptimizerBlock,
    pub path: PathBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseName {
    OrientationLinear,
    PositionLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    pub case: CaseName,
    /// Optional for orientation-linear designs, where the offset legs fix it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Platform offsets; derived from alpha, beta for position-linear designs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<[f64; 5]>,
    /// Planar base anchors `[x, y]`, leg 1 first.
    pub base: [[f64; 2]; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsBlock {
    pub safe_radius: f64,
    #[serde(default, rename = "leg")]
    pub legs: Vec<LegBlock>,
}

impl Default for LimitsBlock {
    fn default() -> Self {
        LimitsBlock { safe_radius: OptimizerConfig::default().safe_radius, legs: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegBlock {
    pub leg: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<[f64; 2]>,
    /// Full apex angle of the admissible cone at the base joint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_angle_deg: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    TangentSolve,
    ProjectAfterSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceName {
    Candidate,
    Previous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerBlock {
    pub geodesic_weight: f64,
    pub bending_weight: f64,
    pub growth: f64,
    pub breakpoints: usize,
    pub max_iterations: usize,
    pub min_step: f64,
    pub min_keep: usize,
    pub cover: bool,
    pub joints: bool,
    pub update_rule: RuleName,
    pub objective_reference: ReferenceName,
    pub keep_sides: bool,
}

impl Default for OptimizerBlock {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        OptimizerBlock {
            geodesic_weight: d.geodesic_weight,
            bending_weight: d.bending_weight,
            growth: d.growth,
            breakpoints: d.breakpoints,
            max_iterations: d.max_iterations,
            min_step: d.min_step,
            min_keep: d.min_keep,
            cover: d.cover,
            joints: d.joints,
            update_rule: RuleName::TangentSolve,
            objective_reference: ReferenceName::Candidate,
            keep_sides: d.keep_sides,
        }
    }
}

/// Start path: inline breakpoints or a built-in parametric curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<[f64; 6]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinPath>,
    /// Parameter range of the built-in curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    /// Sample count; defaults to `optimizer.breakpoints`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinPath {
    /// Blended spherical spiral of the reference scenario.
    SphereBlend,
}

/// Everything wrong with a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaErrors(pub Vec<String>);

impl fmt::Display for SchemaErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SchemaErrors {}

/// Library inputs built from a validated file.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub design: DesignParams,
    pub limits: JointLimits,
    pub optimizer: OptimizerConfig,
    pub path: DiscretePath,
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Schema(#[from] SchemaErrors),
}

pub fn load_config(path: &Path) -> Result<RunConfigFile, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    Ok(parse_config(&text)?)
}

pub fn parse_config(text: &str) -> Result<RunConfigFile, SchemaErrors> {
    let cfg: RunConfigFile = toml::from_str(text).map_err(|e| SchemaErrors(vec![e.message().to_string()]))?;
    cfg.scenario()?;
    Ok(cfg)
}

pub fn to_toml(cfg: &RunConfigFile) -> String {
    toml::to_string(cfg).expect("configuration serializes")
}

impl RunConfigFile {
    /// Validates every block and builds the library inputs.
    pub fn scenario(&self) -> Result<Scenario, SchemaErrors> {
        let mut errs = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            errs.push(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        let design = self.design.build().map_err(|e| errs.push(e)).ok();
        let limits = self.limits.build();
        if let Err(e) = limits.validate() {
            errs.push(format!("limits: {e}"));
        }
        let optimizer = self.optimizer.build(limits.safe_radius);
        if let Err(e) = optimizer.validate() {
            errs.push(format!("optimizer: {e}"));
        }
        let path = self.path.build(self.optimizer.breakpoints).map_err(|e| errs.push(e)).ok();
        match (design, path) {
            (Some(design), Some(path)) if errs.is_empty() => Ok(Scenario { design, limits, optimizer, path }),
            _ => Err(SchemaErrors(errs)),
        }
    }

    /// Same configuration with the start path replaced by inline breakpoints.
    pub fn with_inline_path(&self, path: &DiscretePath) -> RunConfigFile {
        RunConfigFile {
            path: PathBlock {
                breakpoints: Some(path.breakpoints().iter().map(Pose::to_array).collect()),
                builtin: None,
                range: None,
                samples: None,
            },
            ..self.clone()
        }
    }
}

impl DesignBlock {
    fn build(&self) -> Result<DesignParams, String> {
        let base = self.base.map(|[x, y]| nalgebra::Vector3::new(x, y, 0.0));
        if let Some(r) = &self.offsets {
            MetricTensor::from_offsets(r).map_err(|e| format!("design: {e}"))?;
        }
        let made = match (self.case, self.alpha, self.beta, self.offsets) {
            (CaseName::OrientationLinear, None, None, Some(r)) => DesignParams::orientation_linear(r, base),
            (CaseName::OrientationLinear, Some(a), Some(b), Some(r)) => {
                DesignParams::new(DesignCase::OrientationLinear, a, b, r, base)
            }
            (CaseName::OrientationLinear, _, _, None) => return Err("design: offsets are required for orientation-linear designs".into()),
            (CaseName::PositionLinear, Some(a), Some(b), None) => DesignParams::position_linear(a, b, base),
            (CaseName::PositionLinear, Some(a), Some(b), Some(r)) => DesignParams::new(DesignCase::PositionLinear, a, b, r, base),
            (CaseName::PositionLinear, _, _, _) => return Err("design: alpha and beta are required for position-linear designs".into()),
            _ => return Err("design: give both alpha and beta or neither".into()),
        };
        made.map_err(|e| format!("design: {e}"))
    }
}

impl LimitsBlock {
    fn build(&self) -> JointLimits {
        JointLimits {
            legs: self
                .legs
                .iter()
                .map(|l| LegLimit {
                    leg: l.leg,
                    length_band: l.length.map(|[a, b]| (a, b)),
                    cone_angle: l.cone_angle_deg.map(f64::to_radians),
                })
                .collect(),
            safe_radius: self.safe_radius,
        }
    }
}

impl OptimizerBlock {
    fn build(&self, safe_radius: f64) -> OptimizerConfig {
        OptimizerConfig {
            geodesic_weight: self.geodesic_weight,
            bending_weight: self.bending_weight,
            growth: self.growth,
            safe_radius,
            breakpoints: self.breakpoints,
            max_iterations: self.max_iterations,
            min_step: self.min_step,
            min_keep: self.min_keep,
            cover: self.cover,
            joints: self.joints,
            update_rule: match self.update_rule {
                RuleName::TangentSolve => UpdateRule::TangentSolve,
                RuleName::ProjectAfterSolve => UpdateRule::ProjectAfterSolve,
            },
            objective_reference: match self.objective_reference {
                ReferenceName::Candidate => ObjectiveReference::Candidate,
                ReferenceName::Previous => ObjectiveReference::Previous,
            },
            keep_sides: self.keep_sides,
        }
    }
}

impl PathBlock {
    fn build(&self, default_samples: usize) -> Result<DiscretePath, String> {
        match (&self.breakpoints, self.builtin) {
            (Some(_), Some(_)) => Err("path: give either inline breakpoints or a built-in curve, not both".into()),
            (None, None) => Err("path: inline breakpoints or a built-in curve is required".into()),
            (Some(pts), None) => {
                if self.range.is_some() || self.samples.is_some() {
                    return Err("path: range and samples only apply to built-in curves".into());
                }
                if pts.iter().flatten().any(|x| !x.is_finite()) {
                    return Err("path: breakpoints must be finite".into());
                }
                DiscretePath::new(pts.iter().map(|&u| Pose::new(u)).collect()).map_err(|e| format!("path: {e}"))
            }
            (None, Some(BuiltinPath::SphereBlend)) => {
                let [from, to] = self.range.unwrap_or([2.0, 5.0]);
                if !(from.is_finite() && to.is_finite() && from < to) {
                    return Err(format!("path: range [{from}, {to}] is not an increasing interval"));
                }
                let samples = self.samples.unwrap_or(default_samples);
                blend_path(from, to, samples).map_err(|e| format!("path: {e}"))
            }
        }
    }
}
