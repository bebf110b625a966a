use crate::report::{CliError, PartitionReport, RunReport};
use crate::{bench, svg, Cli, Command, Global, Objective, PartitionArgs, PlanArgs, PlotArgs};
use flowpath::mej::{optimize, IDSchedule};
use flowpath::partition::{partition, scene_skeleton, FlowGrid, KMeansOptions, LineFitLoss};
use flowpath::{fixtures, CostKind, CostModel, Point, SceneFile};
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

pub fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    match &cli.command {
        Command::Plan(a) => plan(&cli.global, a),
        Command::Partition(a) => partition_cmd(&cli.global, a),
        Command::Bench(a) => bench::run(&cli.global, a),
        Command::Plot(a) => plot(&cli.global, a),
    }
    .map(|()| ExitCode::SUCCESS)
}

/// Reads a scene file, or a bundled scene given as `fixture:<name>`.
pub fn load_scene(spec: &str) -> Result<SceneFile, CliError> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        return fixtures::file(name).ok_or_else(|| {
            CliError::Input(format!("unknown fixture {name:?}; bundled: {}", fixtures::NAMES.join(", ")))
        });
    }
    let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    SceneFile::from_json(&text).map_err(|e| CliError::Input(format!("{spec}: {e}")))
}

fn point(v: &[f64], dim: usize, what: &str) -> Result<Point, CliError> {
    if v.len() != dim {
        return Err(CliError::Input(format!("{what} needs {dim} coordinates, got {}", v.len())));
    }
    Ok(Point::from_fn(|i, _| v.get(i).copied().unwrap_or(0.0)))
}

fn resolve_model(file: Option<CostModel>, a: &PlanArgs) -> Result<CostModel, CliError> {
    let kind = match a.objective {
        Some(Objective::Time) => CostKind::Time,
        Some(Objective::Energy) => CostKind::Energy,
        None => file.map_or(CostKind::Time, |m| m.kind),
    };
    let speed = a
        .speed
        .or(file.map(|m| m.speed))
        .ok_or_else(|| CliError::Input("no vehicle speed: pass --speed or set model.speed".into()))?;
    let running_cost = a.running_cost.or(file.map(|m| m.running_cost)).unwrap_or(0.0);
    Ok(match kind {
        CostKind::Time => CostModel::time(speed),
        CostKind::Energy => CostModel::energy(speed, running_cost),
    })
}

fn resolve_schedule(file: &SceneFile, scene: &flowpath::FlowScene, g: &Global, a: &PlanArgs) -> IDSchedule {
    let mut s = IDSchedule::default_for(scene);
    if let Some(o) = &file.schedule {
        s = s.with_overrides(o);
    }
    if let Some(v) = a.rounds {
        s.rounds = v;
    }
    if let Some(v) = a.sigma0 {
        s.sigma0 = v;
    }
    if let Some(v) = a.perturb_duration {
        s.perturb_duration = v;
    }
    if let Some(v) = a.step {
        s.h = v;
    }
    if a.descent_only {
        s = s.descent_only();
    }
    s.with_seed(g.seed)
}

/// Writes `text` to `path`, or to stdout without a path.
fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn plan(g: &Global, a: &PlanArgs) -> Result<(), CliError> {
    let file = load_scene(&a.scene)?;
    let scene = file.build().map_err(CliError::input)?;
    let dim = scene.dimension().as_usize();
    let start = match &a.start {
        Some(v) => point(v, dim, "--start")?,
        None => file.start_point().map_err(CliError::input)?.ok_or_else(|| CliError::Input("no start point".into()))?,
    };
    let goal = match &a.goal {
        Some(v) => point(v, dim, "--goal")?,
        None => file.goal_point().map_err(CliError::input)?.ok_or_else(|| CliError::Input("no goal point".into()))?,
    };
    let model = resolve_model(file.model, a)?;
    model.validate_for(&scene).map_err(CliError::input)?;
    let schedule = resolve_schedule(&file, &scene, g, a);
    schedule.validate().map_err(CliError::Input)?;

    let t0 = Instant::now();
    let result = optimize(&scene, start, goal, &model, &schedule)?;
    let secs = t0.elapsed().as_secs_f64();
    log::info!("planned {} in {secs:.3} s", scene.name());

    let report = RunReport {
        kind: "plan".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: g.seed,
        scene: file.clone(),
        start: start.iter().take(dim).copied().collect(),
        goal: goal.iter().take(dim).copied().collect(),
        model,
        schedule,
        co_optimal: result.co_optimal().cloned().collect(),
        plan: result,
        wall_clock_s: g.timing.then_some(secs),
    };
    report.validate().map_err(CliError::Planning)?;
    if let Some(p) = &g.svg_out {
        emit(Some(p), &svg::plan(&scene, &report))?;
    }
    emit(g.json_out.as_deref(), &to_json(&report))?;
    if g.json_out.is_some() {
        println!(
            "{}: cost {:.6} through {} junctions, {} co-optimal",
            scene.name(),
            report.plan.cost,
            report.plan.junction_points.len(),
            report.co_optimal.len()
        );
    }
    Ok(())
}

fn partition_cmd(g: &Global, a: &PartitionArgs) -> Result<(), CliError> {
    let f = std::fs::File::open(&a.grid).map_err(|e| CliError::Input(format!("{}: {e}", a.grid.display())))?;
    let grid = FlowGrid::from_csv(f).map_err(CliError::input)?;
    let loss = if a.l1 { LineFitLoss::Absolute } else { LineFitLoss::Squared };
    let opts = KMeansOptions { max_iter: a.max_iter, n_init: a.n_init };
    let t0 = Instant::now();
    let result = partition(&grid, a.k, g.seed, opts, loss).map_err(CliError::input)?;
    let secs = t0.elapsed().as_secs_f64();
    let skeleton = scene_skeleton(&grid, &result);
    if let Some(p) = &a.scene_out {
        emit(Some(p), &to_json(&skeleton))?;
    }
    let report = PartitionReport {
        kind: "partition".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: g.seed,
        loss: if a.l1 { "absolute" } else { "squared" }.into(),
        grid,
        result,
        scene_skeleton: skeleton,
        wall_clock_s: g.timing.then_some(secs),
    };
    if let Some(p) = &g.svg_out {
        emit(Some(p), &svg::partition(&report))?;
    }
    emit(g.json_out.as_deref(), &to_json(&report))?;
    if g.json_out.is_some() {
        println!(
            "{} cells into {} regions, {} boundary curves",
            report.grid.len(),
            report.result.k,
            report.result.boundaries.len()
        );
    }
    Ok(())
}

fn plot(g: &Global, a: &PlotArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.report).map_err(|e| CliError::Input(format!("{}: {e}", a.report.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(CliError::input)?;
    let out = match value.get("kind").and_then(|k| k.as_str()) {
        Some("plan") => {
            let r: RunReport = serde_json::from_value(value).map_err(CliError::input)?;
            r.validate().map_err(|e| CliError::Input(format!("report does not check out: {e}")))?;
            let scene = r.scene.build().map_err(CliError::input)?;
            svg::plan(&scene, &r)
        }
        Some("partition") => svg::partition(&serde_json::from_value(value).map_err(CliError::input)?),
        other => return Err(CliError::Input(format!("not a flowpath report (kind {other:?})"))),
    };
    emit(g.svg_out.as_deref(), &out)
}
