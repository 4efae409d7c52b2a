//! Optimizes the blended spiral for the reference design and prints a summary.
//!
//! `cargo run --release --example reference_run -- [cover] [joints] [project] [previous] [sides]`

use pentapath::engine::run;
use pentapath::optimizer::{ObjectiveReference, OptimizerConfig, UpdateRule};
use pentapath::scenario::{blend_path, reference_design, reference_limits};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let has = |s: &str| args.iter().any(|a| a == s);
    let mut cfg = OptimizerConfig { cover: has("cover"), joints: has("joints"), max_iterations: 2000, ..Default::default() };
    if has("project") {
        cfg.update_rule = UpdateRule::ProjectAfterSolve;
    }
    cfg.keep_sides = has("sides");
    if has("previous") {
        cfg.objective_reference = ObjectiveReference::Previous;
    }
    let path = blend_path(2.0, 5.0, cfg.breakpoints).unwrap();
    let limits = reference_limits(cfg.safe_radius);
    let result = run(&path, &reference_design(), &limits, &cfg).unwrap();
    for r in result.records.iter().step_by(10.max(result.records.len() / 20)) {
        println!(
            "it {:4} obj {:+.6} step {:.3e} n {:3} clearance {:.4} breaches {} halvings {}",
            r.iteration, r.objective, r.step, r.breakpoints, r.min_clearance, r.breaches, r.halvings
        );
    }
    let last = result.records.last().unwrap();
    println!("last it {} obj {:+.6} clearance {:.4} n {}", last.iteration, last.objective, last.min_clearance, last.breakpoints);
    println!("{:?}", result.summary);
}
