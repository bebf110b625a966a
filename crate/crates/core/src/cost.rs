//! Closed-form segment costs for the time and energy objectives, their
//! gradients, and the single-region value function used to check them.
//!
//! Inside one region the flow `u` is constant, so the cheapest way between
//! two points is a straight line at constant vehicle velocity `v`, with
//! `v + u` parallel to the displacement `d`. The time objective moves at
//! full speed `V`. The energy objective `∫ ‖v‖² + C dt` picks the speed
//! `sqrt(‖u‖² + C)` for the ground speed when that keeps `‖v‖ ≤ V`, and
//! otherwise saturates at `V`, where it costs `(V² + C)` per unit time.
//!
//! Infeasible segments (flow too strong to make headway) are not errors:
//! they report an infinite cost so an optimizer step into them is rejected.

use crate::geometry::{FlowScene, GeometryError, JunctionChain, Point};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slack toward the unconstrained energy branch in the speed test.
const BRANCH_SLACK: f64 = 1e-12;

/// Displacements shorter than this are treated as empty.
pub(crate) const ZERO_SEGMENT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Time,
    Energy,
}

/// Objective and vehicle limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub kind: CostKind,
    /// Maximum vehicle speed relative to the water.
    pub speed: f64,
    /// Running cost `C` of the energy objective; ignored for time.
    #[serde(default)]
    pub running_cost: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("segment has zero length")]
    ZeroSegment,
    #[error("segment cannot be traversed against the flow")]
    Infeasible,
    #[error("vehicle speed equals the flow speed and the flow does not help: the travel time is singular")]
    Singular,
    #[error("energy objective with zero running cost in a region without flow")]
    DegenerateEnergy,
    #[error("invalid cost model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl CostModel {
    pub fn time(speed: f64) -> Self {
        CostModel { kind: CostKind::Time, speed, running_cost: 0.0 }
    }

    pub fn energy(speed: f64, running_cost: f64) -> Self {
        CostModel { kind: CostKind::Energy, speed, running_cost }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.speed > 0.0) || !self.speed.is_finite() {
            return Err(CostError::InvalidModel(format!("speed must be positive, got {}", self.speed)));
        }
        if !(self.running_cost >= 0.0) || !self.running_cost.is_finite() {
            return Err(CostError::InvalidModel(format!(
                "running cost must be non-negative, got {}",
                self.running_cost
            )));
        }
        Ok(())
    }

    /// Validates the model against a scene: an energy objective needs `C > 0`
    /// or a nonzero flow in every region.
    pub fn validate_for(&self, scene: &FlowScene) -> Result<(), CostError> {
        self.validate()?;
        if self.kind == CostKind::Energy
            && self.running_cost == 0.0
            && scene.regions().iter().any(|r| r.flow.norm() == 0.0)
        {
            return Err(CostError::DegenerateEnergy);
        }
        Ok(())
    }

    /// Cost of crossing a distance `length` at full speed in still water.
    /// Used to make costs dimensionless.
    pub fn reference_cost(&self, length: f64) -> f64 {
        match self.kind {
            CostKind::Time => length / self.speed,
            CostKind::Energy => (self.speed * self.speed + self.running_cost) * length / self.speed,
        }
    }

    /// Optimal traversal of displacement `d` in flow `u`.
    pub fn segment(&self, d: &Point, u: &Point) -> Result<SegmentSolution, CostError> {
        match self.kind {
            CostKind::Time => time_segment(d, u, self.speed),
            CostKind::Energy => energy_segment(d, u, self.speed, self.running_cost),
        }
    }
}

/// The optimal constant-velocity traversal of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSolution {
    /// Vehicle velocity relative to the water.
    pub v: Point,
    /// Duration.
    pub t: f64,
    pub cost: f64,
    /// True when the vehicle runs at its maximum speed under the energy
    /// objective. Always false for the time objective.
    pub max_speed_branch: bool,
    /// Gradient of `cost` with respect to the displacement.
    #[serde(skip)]
    pub grad: Point,
}

impl SegmentSolution {
    fn infeasible() -> Self {
        SegmentSolution {
            v: Point::zeros(),
            t: f64::INFINITY,
            cost: f64::INFINITY,
            max_speed_branch: false,
            grad: Point::zeros(),
        }
    }

    fn empty() -> Self {
        SegmentSolution {
            v: Point::zeros(),
            t: 0.0,
            cost: 0.0,
            max_speed_branch: false,
            grad: Point::zeros(),
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.cost.is_finite()
    }
}

/// Shortest time to cover `d` at speed `speed` in flow `u`: the smaller
/// positive root of `(‖u‖² − V²) t² − 2 (d·u) t + ‖d‖² = 0`, written as
/// `‖d‖² / (d·u + sqrt((d·u)² + ‖d‖² (V² − ‖u‖²)))`.
pub fn t_star_max_speed(d: &Point, u: &Point, speed: f64) -> Result<f64, CostError> {
    t_star_with_root(d, u, speed).map(|(t, _)| t)
}

/// `t*` together with the square root `q` of the discriminant, which is the
/// denominator of `∂t*/∂d = (d − t* u) / q`.
fn t_star_with_root(d: &Point, u: &Point, speed: f64) -> Result<(f64, f64), CostError> {
    let dd = d.norm_squared();
    if dd.sqrt() <= ZERO_SEGMENT {
        return Err(CostError::ZeroSegment);
    }
    let a = d.dot(u);
    let k = speed * speed - u.norm_squared();
    if k == 0.0 && a <= 0.0 {
        return Err(CostError::Singular);
    }
    let disc = a * a + dd * k;
    if disc < 0.0 {
        return Err(CostError::Infeasible);
    }
    let q = disc.sqrt();
    let den = a + q;
    if !(den > 0.0) || !(q > 0.0) {
        return Err(CostError::Infeasible);
    }
    Ok((dd / den, q))
}

/// Full-speed traversal: the time objective.
pub fn time_segment(d: &Point, u: &Point, speed: f64) -> Result<SegmentSolution, CostError> {
    match t_star_with_root(d, u, speed) {
        Ok((t, q)) => Ok(SegmentSolution {
            v: d / t - u,
            t,
            cost: t,
            max_speed_branch: false,
            grad: (d - u * t) / q,
        }),
        Err(CostError::Infeasible) => Ok(SegmentSolution::infeasible()),
        Err(e) => Err(e),
    }
}

/// Energy-optimal traversal with running cost `c`.
pub fn energy_segment(d: &Point, u: &Point, speed: f64, c: f64) -> Result<SegmentSolution, CostError> {
    let len = d.norm();
    if len <= ZERO_SEGMENT {
        return Err(CostError::ZeroSegment);
    }
    let s = (u.norm_squared() + c).sqrt();
    if s == 0.0 {
        return Err(CostError::DegenerateEnergy);
    }
    let a = d.dot(u);
    let free_speed_sq = 2.0 * u.norm_squared() + c - 2.0 * (a / len) * s;
    if free_speed_sq <= speed * speed + BRANCH_SLACK {
        let t = len / s;
        let v = d / t - u;
        return Ok(SegmentSolution {
            v,
            t,
            cost: 2.0 * s * len - 2.0 * a,
            max_speed_branch: false,
            grad: v * 2.0,
        });
    }
    let w = speed * speed + c;
    match t_star_with_root(d, u, speed) {
        Ok((t, q)) => Ok(SegmentSolution {
            v: d / t - u,
            t,
            cost: w * t,
            max_speed_branch: true,
            grad: (d - u * t) * (w / q),
        }),
        Err(CostError::Infeasible) => Ok(SegmentSolution::infeasible()),
        Err(e) => Err(e),
    }
}

/// Per-segment solutions along the chain's waypoints. Empty segments get a
/// zero solution.
pub fn chain_segments(
    scene: &FlowScene,
    chain: &JunctionChain,
    model: &CostModel,
) -> Result<Vec<SegmentSolution>, CostError> {
    let pts = chain.waypoints(scene);
    pts.windows(2)
        .zip(&chain.regions)
        .map(|(w, r)| {
            let d = w[1] - w[0];
            if d.norm() <= ZERO_SEGMENT {
                Ok(SegmentSolution::empty())
            } else {
                model.segment(&d, &scene.flow(*r))
            }
        })
        .collect()
}

/// Total cost of a chain; infinite when a segment is infeasible.
pub fn chain_cost(scene: &FlowScene, chain: &JunctionChain, model: &CostModel) -> Result<f64, CostError> {
    Ok(chain_segments(scene, chain, model)?.iter().map(|s| s.cost).sum())
}

/// Gradient of [`chain_cost`] with respect to the stacked junction
/// parameters (one entry per junction in 2D, two in 3D).
///
/// Fails on empty segments, where the cost is not differentiable.
pub fn chain_grad(scene: &FlowScene, chain: &JunctionChain, model: &CostModel) -> Result<Vec<f64>, CostError> {
    let segs = chain_segments(scene, chain, model)?;
    let pts = chain.waypoints(scene);
    if pts.windows(2).any(|w| (w[1] - w[0]).norm() <= ZERO_SEGMENT) {
        return Err(CostError::ZeroSegment);
    }
    Ok(stack_grad(scene, chain, &segs))
}

/// Chains the per-segment gradients through the boundary parametrizations.
/// Empty segments contribute nothing.
pub(crate) fn stack_grad(scene: &FlowScene, chain: &JunctionChain, segs: &[SegmentSolution]) -> Vec<f64> {
    let pd = scene.dimension().param_dim();
    let mut out = Vec::with_capacity(chain.len() * pd);
    for (i, b) in chain.boundaries.iter().enumerate() {
        let g = segs[i].grad - segs[i + 1].grad;
        let jac = scene.boundary(*b).jacobian();
        for col in jac.iter().take(pd) {
            out.push(col.dot(&g));
        }
    }
    out
}

/// Least cost of reaching `x` from `x0` in exactly time `t` inside one region
/// of flow `u`; infinite when unreachable.
///
/// For the time objective the vehicle may arrive early and wait, so the value
/// is the minimum time whenever that is at most `t`.
pub fn segment_value(x0: &Point, x: &Point, t: f64, u: &Point, model: &CostModel) -> f64 {
    let d = x - x0;
    match model.kind {
        CostKind::Time => {
            if d.norm() <= ZERO_SEGMENT {
                return 0.0;
            }
            match t_star_max_speed(&d, u, model.speed) {
                Ok(tm) if tm <= t => tm,
                _ => f64::INFINITY,
            }
        }
        CostKind::Energy => {
            if !(t > 0.0) {
                return f64::INFINITY;
            }
            let v = d / t - u;
            if v.norm() <= model.speed {
                d.norm_squared() / t - 2.0 * d.dot(u) + (model.running_cost + u.norm_squared()) * t
            } else {
                f64::INFINITY
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y, 0.0)
    }

    #[test]
    fn constant_flow_time() {
        let s = time_segment(&p(0.0, 20.0), &p(1.0, 1.0), 3.0).unwrap();
        assert_abs_diff_eq!(s.t, 5.2241, epsilon = 5e-5);
        assert_abs_diff_eq!(s.v.norm(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn still_water_time() {
        let s = time_segment(&p(0.0, 10.0), &Point::zeros(), 3.0).unwrap();
        assert_abs_diff_eq!(s.t, 10.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.v, p(0.0, 3.0), epsilon = 1e-14);
    }

    #[test]
    fn jet_crossing_leg() {
        // smallest positive root of the quadratic, solved directly
        let s = time_segment(&p(2.5341, 3.0), &p(2.9, 0.0), 3.0).unwrap();
        assert_abs_diff_eq!(s.t, 1.008429446, epsilon = 1e-8);
    }

    #[test]
    fn t_star_cases() {
        assert_abs_diff_eq!(t_star_max_speed(&p(0.0, 10.0), &Point::zeros(), 2.0).unwrap(), 5.0);
        assert_abs_diff_eq!(t_star_max_speed(&p(10.0, 0.0), &p(2.0, 0.0), 2.0).unwrap(), 2.5);
        assert_eq!(t_star_max_speed(&p(-10.0, 0.0), &p(2.0, 0.0), 2.0), Err(CostError::Singular));
        assert_eq!(t_star_max_speed(&p(-10.0, 0.0), &p(3.0, 0.0), 2.0), Err(CostError::Infeasible));
    }

    #[test]
    fn infeasible_is_infinite_cost() {
        let s = time_segment(&p(-10.0, 0.0), &p(3.0, 0.0), 2.0).unwrap();
        assert!(!s.is_feasible());
        let s = energy_segment(&p(-10.0, 0.0), &p(3.0, 0.0), 2.0, 1.0).unwrap();
        assert!(!s.is_feasible());
    }

    #[test]
    fn constant_flow_energy() {
        let c1 = energy_segment(&p(0.0, 20.0), &p(1.0, 1.0), 3.0, 1.0).unwrap();
        assert_abs_diff_eq!(c1.cost, 29.2820, epsilon = 5e-5);
        assert!(!c1.max_speed_branch);
        let c2 = energy_segment(&p(0.0, 20.0), &p(1.0, 1.0), 3.0, 2.0).unwrap();
        assert_abs_diff_eq!(c2.cost, 40.0, epsilon = 1e-12);
    }

    #[test]
    fn still_water_energy() {
        let s = energy_segment(&p(0.0, 10.0), &Point::zeros(), 3.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.v.norm(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.t, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.cost, 20.0, epsilon = 1e-12);
    }

    #[test]
    fn saturated_energy_is_scaled_time() {
        let d = p(1.0, 4.0);
        let u = p(2.9, 0.0);
        let e = energy_segment(&d, &u, 3.0, 10.0).unwrap();
        let t = time_segment(&d, &u, 3.0).unwrap();
        assert!(e.max_speed_branch);
        assert_abs_diff_eq!(e.cost, 19.0 * t.t, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_energy_input() {
        assert_eq!(
            energy_segment(&p(0.0, 1.0), &Point::zeros(), 3.0, 0.0),
            Err(CostError::DegenerateEnergy)
        );
        assert_eq!(time_segment(&Point::zeros(), &Point::zeros(), 3.0), Err(CostError::ZeroSegment));
    }

    #[test]
    fn value_function_minimum() {
        let model = CostModel::energy(3.0, 1.0);
        let (x0, x, u) = (Point::zeros(), p(3.0, 4.0), p(0.5, 0.0));
        let s = (u.norm_squared() + 1.0_f64).sqrt();
        let t_opt = 5.0 / s;
        let best = 2.0 * 5.0 * s - 2.0 * x.dot(&u);
        assert_abs_diff_eq!(segment_value(&x0, &x, t_opt, &u, &model), best, epsilon = 1e-12);
        for dt in [-0.3, -0.1, 0.1, 0.3] {
            assert!(segment_value(&x0, &x, t_opt + dt, &u, &model) > best);
        }
        let time = CostModel::time(3.0);
        assert_abs_diff_eq!(segment_value(&x0, &x, 10.0, &Point::zeros(), &time), 5.0 / 3.0);
        assert!(segment_value(&x0, &x, 1.0, &Point::zeros(), &time).is_infinite());
    }

    #[test]
    fn model_validation() {
        assert!(CostModel::time(0.0).validate().is_err());
        assert!(CostModel::energy(1.0, -1.0).validate().is_err());
        assert!(CostModel::energy(1.0, 0.0).validate().is_ok());
    }
}
