use flowpath::cost::{chain_cost, CostError};
use flowpath::mej::{IDSchedule, LocalMinimum, PlanError, PlanResult};
use flowpath::partition::{FlowGrid, PartitionResult};
use flowpath::{CostModel, SceneFile};
use serde::{Deserialize, Serialize};
use std::process::ExitCode;

/// Relative agreement required between a report's cost and a recomputation.
const REPORT_COST_TOL: f64 = 1e-9;

/// Everything needed to reproduce and check one `plan` run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub scene: SceneFile,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    pub model: CostModel,
    pub schedule: IDSchedule,
    pub plan: PlanResult,
    pub co_optimal: Vec<LocalMinimum>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

impl RunReport {
    /// Rebuilds the scene and recomputes the reported path's cost.
    pub fn validate(&self) -> Result<(), String> {
        let scene = self.scene.build().map_err(|e| e.to_string())?;
        let chain = &self.plan.chain;
        chain.validate(&scene).map_err(|e| e.to_string())?;
        let cost = chain_cost(&scene, chain, &self.model).map_err(|e| e.to_string())?;
        if (cost - self.plan.cost).abs() > REPORT_COST_TOL * cost.abs().max(1.0) {
            return Err(format!("reported cost {} but the path costs {cost}", self.plan.cost));
        }
        let pts = chain.junction_points(&scene);
        if pts.len() != self.plan.junction_points.len()
            || pts.iter().zip(&self.plan.junction_points).any(|(a, b)| (a - b).amax() > 1e-9)
        {
            return Err("junction points do not match the chain".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub kind: String,
    pub version: String,
    pub seed: u64,
    pub loss: String,
    pub grid: FlowGrid,
    pub result: PartitionResult,
    pub scene_skeleton: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or invalid input (exit 2).
    Input(String),
    /// Valid input but no path could be planned (exit 1).
    Planning(String),
    /// A benchmark case missed its reference (exit 3).
    Bench(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Planning(_) => 1,
            CliError::Input(_) => 2,
            CliError::Bench(_) => 3,
        })
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Input(m) => ("input", m),
            CliError::Planning(m) => ("planning", m),
            CliError::Bench(m) => ("bench", m),
        };
        serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Cost(CostError::InvalidModel(_) | CostError::DegenerateEnergy)
            | PlanError::Geometry(_)
            | PlanError::Schedule(_) => CliError::Input(e.to_string()),
            PlanError::NoFeasiblePath(_) | PlanError::Cost(_) => CliError::Planning(e.to_string()),
        }
    }
}
