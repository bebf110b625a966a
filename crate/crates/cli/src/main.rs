//! `flowpath` command line: plan paths, partition gridded flows, run the
//! fixture benchmark and render SVG plots.

mod bench;
mod commands;
mod report;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "flowpath", version, about = "Optimal vehicle paths through piecewise-constant flow fields")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for the optimizer noise and k-means seeding.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Write an SVG plot here.
    #[arg(long, global = true)]
    pub svg_out: Option<PathBuf>,
    /// Include wall-clock times in the JSON output (makes it run-dependent).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Plan a path through a scene file.
    Plan(PlanArgs),
    /// Cluster a gridded flow field into regions with straight boundaries.
    Partition(PartitionArgs),
    /// Run the bundled fixtures against their reference results.
    Bench(BenchArgs),
    /// Render a JSON report written by `plan` or `partition` as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    /// Scene JSON file, or `fixture:<name>` for a bundled scene.
    pub scene: String,
    #[arg(long, value_enum)]
    pub objective: Option<Objective>,
    /// Maximum vehicle speed relative to the water.
    #[arg(long)]
    pub speed: Option<f64>,
    /// Running cost C of the energy objective.
    #[arg(long)]
    pub running_cost: Option<f64>,
    /// Start point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub start: Option<Vec<f64>>,
    /// Goal point, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub goal: Option<Vec<f64>>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub sigma0: Option<f64>,
    #[arg(long)]
    pub perturb_duration: Option<usize>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Plain gradient descent from the straight line, no noise.
    #[arg(long)]
    pub descent_only: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Time,
    Energy,
}

#[derive(Args, Debug)]
pub struct PartitionArgs {
    /// CSV with columns x,y,u,v on a rectangular lattice.
    pub grid: PathBuf,
    /// Number of regions.
    #[arg(long, short)]
    pub k: usize,
    /// Fit lines by total absolute distance instead of squared distance.
    #[arg(long)]
    pub l1: bool,
    #[arg(long, default_value_t = 10)]
    pub n_init: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    /// Also write a scene-file skeleton built from the fitted lines.
    #[arg(long)]
    pub scene_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Only run cases whose name contains this.
    #[arg(long)]
    pub filter: Option<String>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Report JSON from `plan` or `partition`.
    pub report: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
