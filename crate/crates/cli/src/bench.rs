//! Runs the bundled scenes against reference costs and time limits.

use crate::commands::load_scene;
use crate::report::CliError;
use crate::{BenchArgs, Global};
use flowpath::mej::{optimize, IDSchedule};
use flowpath::CostModel;
use serde::Serialize;
use std::time::Instant;

struct Case {
    name: &'static str,
    fixture: &'static str,
    model: CostModel,
    cost: f64,
    tol: f64,
    max_secs: f64,
}

fn cases() -> Vec<Case> {
    let c = |name, fixture, model, cost, tol, max_secs| Case { name, fixture, model, cost, tol, max_secs };
    vec![
        c("constant-time", "constant", CostModel::time(3.0), 5.2241, 1e-3, 1.0),
        c("constant-energy-c1", "constant", CostModel::energy(3.0, 1.0), 29.2820, 1e-3, 1.0),
        c("constant-energy-c2", "constant", CostModel::energy(3.0, 2.0), 40.0000, 1e-3, 1.0),
        c("jet-time", "jet", CostModel::time(3.0), 6.7377, 1e-3, 5.0),
        c("jet-energy-c1", "jet", CostModel::energy(3.0, 1.0), 42.2130, 1e-3, 5.0),
        c("block-time", "block", CostModel::time(3.0), 7.5410, 1e-3, 10.0),
        c("jet3d-time", "jet3d", CostModel::time(3.0), 6.9096, 5e-3, 5.0),
    ]
}

#[derive(Serialize)]
struct Row {
    case: &'static str,
    cost: f64,
    reference: f64,
    tolerance: f64,
    seconds: f64,
    time_limit: f64,
    pass: bool,
}

pub fn run(g: &Global, a: &BenchArgs) -> Result<(), CliError> {
    let mut rows = Vec::new();
    println!("{:<20} {:>12} {:>10} {:>9} {:>8} {:>6}", "case", "cost", "reference", "|diff|", "seconds", "status");
    for case in cases().into_iter().filter(|c| a.filter.as_deref().is_none_or(|f| c.name.contains(f))) {
        let file = load_scene(&format!("fixture:{}", case.fixture))?;
        let scene = file.build().map_err(CliError::input)?;
        let start = file.start_point().map_err(CliError::input)?.ok_or_else(|| CliError::Input("no start".into()))?;
        let goal = file.goal_point().map_err(CliError::input)?.ok_or_else(|| CliError::Input("no goal".into()))?;
        let mut schedule = IDSchedule::default_for(&scene);
        if let Some(o) = &file.schedule {
            schedule = schedule.with_overrides(o);
        }
        let t0 = Instant::now();
        let cost = optimize(&scene, start, goal, &case.model, &schedule.with_seed(g.seed))
            .map(|p| p.cost)
            .unwrap_or(f64::NAN);
        let seconds = t0.elapsed().as_secs_f64();
        let pass = (cost - case.cost).abs() <= case.tol && seconds < case.max_secs;
        println!(
            "{:<20} {:>12.6} {:>10.4} {:>9.2e} {:>8.3} {:>6}",
            case.name,
            cost,
            case.cost,
            (cost - case.cost).abs(),
            seconds,
            if pass { "ok" } else { "FAIL" }
        );
        rows.push(Row {
            case: case.name,
            cost,
            reference: case.cost,
            tolerance: case.tol,
            seconds,
            time_limit: case.max_secs,
            pass,
        });
    }
    if let Some(p) = &g.json_out {
        let text = serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n";
        std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.case).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Bench(format!("out of tolerance: {}", failed.join(", "))))
    }
}
