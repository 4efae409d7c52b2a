//! Command-line front end: validate configurations, optimize paths, inspect pedals.

mod config;
mod export;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use pentapath::engine::run_observed;
use pentapath::geometry::metric_tensor;
use pentapath::path::DiscretePath;
use pentapath::pedal::orthogonal_projection;
use pentapath::variety::build_sigma;
use pentapath::{Error, Pose};

use config::{load_config, LoadError, RunConfigFile};
use export::{component_name, export_results, num};

#[derive(Parser)]
#[command(version, about = "Singularity-avoiding path optimization for linear pentapods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize the start path of a configuration and export the results.
    Optimize {
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Write breakpoints of every K-th iteration (the last one is always written).
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        log_every: u64,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        no_cover: bool,
        #[arg(long)]
        no_joints: bool,
    },
    /// Print the pedal points of one pose.
    Pedals {
        config: PathBuf,
        /// Comma-separated u1,...,u6.
        #[arg(long, allow_hyphen_values = true)]
        pose: String,
    },
    /// Check a configuration without running it.
    Validate { config: PathBuf },
}

const SCHEMA: u8 = 2;
const INFEASIBLE: u8 = 3;

enum Failure {
    Schema(String),
    Infeasible(String),
    Other(String),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Other(e.to_string()),
            LoadError::Schema(s) => Failure::Schema(s.to_string()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SingularBreakpoint { .. }
            | Error::OffCylinder { .. }
            | Error::LimitViolation { .. }
            | Error::UncoverableSegment { .. } => Failure::Infeasible(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn optimize(
    path: &PathBuf,
    out: &PathBuf,
    log_every: usize,
    max_iter: Option<usize>,
    no_cover: bool,
    no_joints: bool,
) -> Result<(), Failure> {
    let mut file = load_config(path)?;
    if let Some(n) = max_iter {
        file.optimizer.max_iterations = n;
    }
    file.optimizer.cover &= !no_cover;
    file.optimizer.joints &= !no_joints;
    let s = file.scenario().map_err(|e| Failure::Schema(e.to_string()))?;

    let mut logged: Vec<(usize, DiscretePath)> = Vec::new();
    let mut last_pedals = Vec::new();
    let result = run_observed(&s.path, &s.design, &s.limits, &s.optimizer, |state, record| {
        if record.iteration % log_every == 0 {
            logged.push((record.iteration, state.path().clone()));
        }
        last_pedals = state.pedals().to_vec();
    })?;
    if logged.last().map(|(it, _)| *it) != Some(result.summary.iterations) {
        logged.push((result.summary.iterations, result.path.clone()));
    }
    export_results(out, &result, &logged, &last_pedals, &file).map_err(|e| Failure::Other(e.to_string()))?;
    let sm = &result.summary;
    println!(
        "{} iterations ({}), length {:.6}, total curvature {:.6}, {} breakpoints, {:.3} s",
        sm.iterations,
        if sm.converged { "converged" } else { "stopped" },
        sm.length,
        sm.total_curvature,
        sm.final_breakpoints,
        sm.elapsed_seconds
    );
    info!("results written to {}", out.display());
    Ok(())
}

fn parse_pose(text: &str) -> Result<Pose, Failure> {
    let vals: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Other(format!("cannot parse pose: {e}")))?;
    let u: [f64; 6] = vals.try_into().map_err(|v: Vec<f64>| Failure::Other(format!("a pose has 6 coordinates, got {}", v.len())))?;
    Ok(Pose::new(u))
}

fn pedals(path: &PathBuf, pose: &str) -> Result<(), Failure> {
    let s = load_config(path)?.scenario().map_err(|e| Failure::Schema(e.to_string()))?;
    let p = parse_pose(pose)?;
    if !p.is_on_cylinder() {
        return Err(Error::OffCylinder { index: 0 }.into());
    }
    let g = metric_tensor(&s.design)?;
    let set = orthogonal_projection(&p, &build_sigma(&s.design), &g);
    println!("component,distance,f1,f2,f3,f4,f5,f6");
    for q in set.iter() {
        let f = q.point.to_array().map(num).join(",");
        println!("{},{},{f}", component_name(q.component), num(q.distance));
    }
    Ok(())
}

fn validate(path: &PathBuf) -> Result<(), Failure> {
    let file: RunConfigFile = load_config(path)?;
    let s = file.scenario().map_err(|e| Failure::Schema(e.to_string()))?;
    println!(
        "ok: {:?} design, alpha {}, beta {}, {} start breakpoints",
        s.design.case(),
        s.design.alpha(),
        s.design.beta(),
        s.path.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Optimize { config, out, log_every, max_iter, no_cover, no_joints } => {
            optimize(config, out, *log_every as usize, *max_iter, *no_cover, *no_joints)
        }
        Command::Pedals { config, pose } => pedals(config, pose),
        Command::Validate { config } => validate(config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Schema(m)) => {
            eprintln!("invalid configuration:\n{m}");
            ExitCode::from(SCHEMA)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("infeasible start path: {m}");
            ExitCode::from(INFEASIBLE)
        }
        Err(Failure::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}
