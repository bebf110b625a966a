//! Junction optimization by gradient descent with intermittent diffusion.
//!
//! The junction parameters of a chain are moved by Euler steps of
//! `dλ = −∇J dt + σ dW`. Each round adds noise for a while, then descends
//! with `σ = 0` to a local minimum; the best minimum over all rounds wins.
//! When a junction slides off the end of its boundary the chain is
//! repaired (see [`repair_chain`]), so the search also moves between chains
//! of boundaries.
//!
//! Rounds start from the minimum reached by descending from the straight
//! line, and are independent of each other: each draws its noise from its
//! own stream of the seed, so they run in parallel and the result does not
//! depend on the thread count.

mod repair;
mod schedule;

pub use repair::{repair_chain, CornerPolicy, Repair, RepairEvent};
pub use schedule::IDSchedule;

use crate::cost::{chain_cost, chain_segments, stack_grad, CostError, CostModel, SegmentSolution};
use crate::geometry::{initial_chain, FlowScene, GeometryError, JunctionChain, Lambda, Point};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Step halvings tried before a step is rejected.
const MAX_HALVINGS: usize = 30;
/// Allowed cost increase of an accepted descent step.
const DESCENT_SLACK: f64 = 1e-9;
/// Two minima closer than this in every junction coordinate are the same.
const DISTINCT_TOL: f64 = 1e-3;
/// Minima within this of the best cost are co-optimal.
const CO_OPTIMAL_TOL: f64 = 1e-6;
/// Junctions closer than this are one point when comparing minima.
const DUPLICATE_POINT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("no feasible path found ({0:?})")]
    NoFeasiblePath(Diagnostics),
}

/// Counters collected while optimizing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub reroutes: usize,
    pub clamps: usize,
    pub merges: usize,
    pub cycles_removed: usize,
    /// Noisy steps that stayed infeasible after halving and one resample.
    pub rejected_steps: usize,
    pub descent_steps: usize,
    pub perturb_steps: usize,
    /// Descent phases ended by a chain oscillating between two states.
    pub oscillations: usize,
    /// Offset applied to the goal when the straight start line hit a corner.
    pub goal_offset: Option<Point>,
}

impl Diagnostics {
    fn record(&mut self, events: &[RepairEvent]) {
        for e in events {
            match e {
                RepairEvent::Reroute { .. } => self.reroutes += 1,
                RepairEvent::Clamp { .. } => self.clamps += 1,
                RepairEvent::Merge { .. } => self.merges += 1,
                RepairEvent::Cycle { .. } => self.cycles_removed += 1,
            }
        }
    }

    fn absorb(&mut self, o: &Diagnostics) {
        self.reroutes += o.reroutes;
        self.clamps += o.clamps;
        self.merges += o.merges;
        self.cycles_removed += o.cycles_removed;
        self.rejected_steps += o.rejected_steps;
        self.descent_steps += o.descent_steps;
        self.perturb_steps += o.perturb_steps;
        self.oscillations += o.oscillations;
    }
}

/// A local minimum reached by one descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalMinimum {
    pub chain: JunctionChain,
    pub junction_points: Vec<Point>,
    pub cost: f64,
    /// Round that first reached it; 0 is the descent from the straight line.
    pub round: usize,
    pub co_optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub chain: JunctionChain,
    pub junction_points: Vec<Point>,
    pub per_segment: Vec<SegmentSolution>,
    pub cost: f64,
    /// Final cost of each round, starting with the initial descent.
    pub round_costs: Vec<f64>,
    /// Distinct minima found, best first.
    pub minima: Vec<LocalMinimum>,
    pub diagnostics: Diagnostics,
}

impl PlanResult {
    pub fn co_optimal(&self) -> impl Iterator<Item = &LocalMinimum> {
        self.minima.iter().filter(|m| m.co_optimal)
    }
}

/// One forward Euler step `λ − h·grad + σ·√h·noise`.
pub fn euler_step(lambda: &[f64], grad: &[f64], h: f64, sigma: f64, noise: &[f64]) -> Vec<f64> {
    assert!(lambda.len() == grad.len() && grad.len() == noise.len(), "dimension mismatch");
    let s = sigma * h.sqrt();
    lambda
        .iter()
        .zip(grad)
        .zip(noise)
        .map(|((l, g), n)| l - h * g + s * n)
        .collect()
}

/// The objective in normalized coordinates.
struct Problem<'a> {
    scene: &'a FlowScene,
    model: &'a CostModel,
    schedule: &'a IDSchedule,
    diameter: f64,
    reference: f64,
    pd: usize,
}

#[derive(Clone)]
struct State {
    chain: JunctionChain,
    cost: f64,
}

impl<'a> Problem<'a> {
    fn new(scene: &'a FlowScene, model: &'a CostModel, schedule: &'a IDSchedule) -> Self {
        let diameter = scene.diameter();
        Problem {
            scene,
            model,
            schedule,
            diameter,
            reference: model.reference_cost(diameter),
            pd: scene.dimension().param_dim(),
        }
    }

    /// World units per normalized unit along junction `i`'s parameters.
    fn stretch(&self, chain: &JunctionChain, i: usize) -> f64 {
        self.diameter / self.scene.boundary(chain.boundaries[i]).param_scale()
    }

    fn cost(&self, chain: &JunctionChain) -> f64 {
        chain_cost(self.scene, chain, self.model).unwrap_or(f64::INFINITY)
    }

    fn state(&self, chain: JunctionChain) -> State {
        let cost = self.cost(&chain);
        State { chain, cost }
    }

    /// Gradient of the normalized cost in normalized coordinates. Empty
    /// segments contribute zero.
    fn grad(&self, chain: &JunctionChain) -> Vec<f64> {
        let Ok(segs) = chain_segments(self.scene, chain, self.model) else {
            return vec![0.0; chain.len() * self.pd];
        };
        let mut g = stack_grad(self.scene, chain, &segs);
        for i in 0..chain.len() {
            let f = self.stretch(chain, i) / self.reference;
            for k in 0..self.pd {
                g[i * self.pd + k] *= f;
            }
        }
        g
    }

    /// Junction parameters after a move of `dz` in normalized coordinates.
    fn moved(&self, chain: &JunctionChain, dz: &[f64]) -> Vec<Lambda> {
        (0..chain.len())
            .map(|i| {
                let f = self.stretch(chain, i);
                let mut l = chain.lambdas[i];
                for k in 0..self.pd {
                    l[k] += dz[i * self.pd + k] * f;
                }
                l
            })
            .collect()
    }

    /// World offset of new junctions from a corner.
    fn corner_offset(&self, chain: &JunctionChain, dz: &[f64], grad_max: f64) -> f64 {
        let cap = 10.0 * self.schedule.h * grad_max.max(1.0) * self.diameter;
        let overshoot = self
            .moved(chain, dz)
            .iter()
            .zip(&chain.boundaries)
            .map(|(l, b)| {
                let bd = self.scene.boundary(*b);
                (bd.point(l) - bd.point(&bd.clamp_param(l))).norm()
            })
            .fold(0.0, f64::max);
        overshoot.clamp(1e-6 * self.diameter, cap.max(1e-6 * self.diameter))
    }

    fn repaired(&self, chain: &JunctionChain, dz: &[f64], policy: CornerPolicy) -> Option<(Repair, f64)> {
        let prop = self.moved(chain, dz);
        let r = repair_chain(self.scene, chain, &prop, policy).ok()?;
        let c = self.cost(&r.chain);
        Some((r, c))
    }

    /// Gradient descent from `start` until the step vanishes, no step lowers
    /// the cost, the chain oscillates, or the step budget runs out. Returns
    /// the best state seen.
    fn descend(&self, start: State, diag: &mut Diagnostics) -> State {
        let h = self.schedule.h;
        let mut cur = start;
        let mut best = cur.clone();
        let mut before_switch: Option<Vec<crate::geometry::BoundaryId>> = None;
        for _ in 0..self.schedule.max_descent_steps {
            let g = self.grad(&cur.chain);
            let gmax = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if gmax < self.schedule.grad_tol {
                break;
            }
            let mut hh = h;
            let mut accepted: Option<(Repair, f64, f64)> = None;
            for _ in 0..=MAX_HALVINGS {
                let dz: Vec<f64> = g.iter().map(|x| -hh * x).collect();
                let nudge = self.corner_offset(&cur.chain, &dz, gmax);
                let mut cands = Vec::with_capacity(2);
                if let Some((r, c)) = self.repaired(&cur.chain, &dz, CornerPolicy::Reroute(nudge)) {
                    let rerouted = r.rerouted();
                    cands.push((r, c));
                    if rerouted {
                        if let Some(rc) = self.repaired(&cur.chain, &dz, CornerPolicy::Clamp) {
                            cands.push(rc);
                        }
                    }
                }
                let pick = cands
                    .into_iter()
                    .filter(|(_, c)| *c <= cur.cost + DESCENT_SLACK)
                    .min_by(|a, b| a.1.total_cmp(&b.1));
                if let Some((r, c)) = pick {
                    accepted = Some((r, c, hh));
                    break;
                }
                hh /= 2.0;
            }
            let Some((r, c, hh)) = accepted else { break };
            diag.descent_steps += 1;
            diag.record(&r.events);
            let same_chain = r.chain.boundaries == cur.chain.boundaries;
            let step = if same_chain {
                (0..cur.chain.len())
                    .map(|i| {
                        let d = (r.chain.lambdas[i] - cur.chain.lambdas[i]).abs().max() / self.stretch(&cur.chain, i);
                        d / hh
                    })
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            let old = std::mem::replace(&mut cur, State { chain: r.chain, cost: c });
            if cur.cost < best.cost {
                best = cur.clone();
            }
            if !same_chain {
                if before_switch.as_ref() == Some(&cur.chain.boundaries) {
                    diag.oscillations += 1;
                    break;
                }
                before_switch = Some(old.chain.boundaries);
            }
            if step < self.schedule.grad_tol {
                break;
            }
        }
        best
    }

    /// Noisy phase: `steps` Euler steps at noise level `sigma`. Any step to
    /// a finite cost is accepted.
    fn perturb(&self, start: State, sigma: f64, rng: &mut ChaCha8Rng, diag: &mut Diagnostics) -> State {
        let h = self.schedule.h;
        let mut cur = start;
        for _ in 0..self.schedule.perturb_duration {
            let g = self.grad(&cur.chain);
            let gmax = g.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let mut done = false;
            'resample: for _ in 0..2 {
                let noise: Vec<f64> = (0..g.len()).map(|_| StandardNormal.sample(rng)).collect();
                let zeros = vec![0.0; g.len()];
                let mut hh = h;
                for _ in 0..=MAX_HALVINGS {
                    let dz = euler_step(&zeros, &g, hh, sigma, &noise);
                    let nudge = self.corner_offset(&cur.chain, &dz, gmax);
                    if let Some((r, c)) = self.repaired(&cur.chain, &dz, CornerPolicy::Reroute(nudge)) {
                        if c.is_finite() {
                            diag.record(&r.events);
                            cur = State { chain: r.chain, cost: c };
                            done = true;
                            break 'resample;
                        }
                    }
                    hh /= 2.0;
                }
            }
            diag.perturb_steps += 1;
            if !done {
                diag.rejected_steps += 1;
            }
        }
        cur
    }
}

/// Gradient descent (no noise) from `chain`; returns the best chain reached
/// and its cost.
pub fn descend(
    scene: &FlowScene,
    chain: JunctionChain,
    model: &CostModel,
    schedule: &IDSchedule,
) -> Result<(JunctionChain, f64, Diagnostics), PlanError> {
    schedule.validate().map_err(PlanError::Schedule)?;
    model.validate_for(scene)?;
    chain.validate(scene)?;
    let p = Problem::new(scene, model, schedule);
    let mut diag = Diagnostics::default();
    let s = p.descend(p.state(chain), &mut diag);
    Ok((s.chain, s.cost, diag))
}

/// Plans a path from `start` to `goal`.
///
/// Descends from the straight line, then runs `schedule.rounds` noisy rounds
/// from that minimum and keeps the best result. Ties go to the earliest round.
pub fn optimize(
    scene: &FlowScene,
    start: Point,
    goal: Point,
    model: &CostModel,
    schedule: &IDSchedule,
) -> Result<PlanResult, PlanError> {
    schedule.validate().map_err(PlanError::Schedule)?;
    model.validate_for(scene)?;
    let init = initial_chain(scene, start, goal)?;
    let p = Problem::new(scene, model, schedule);
    let mut diag = Diagnostics { goal_offset: init.goal_offset, ..Default::default() };
    let incumbent = p.descend(p.state(init.chain), &mut diag);

    let noisy = schedule.sigma0 > 0.0;
    let rounds: Vec<(State, Diagnostics)> = (1..=schedule.rounds)
        .into_par_iter()
        .map(|i| {
            let mut d = Diagnostics::default();
            if !noisy {
                return (incumbent.clone(), d);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
            rng.set_stream(i as u64);
            let shaken = p.perturb(incumbent.clone(), schedule.sigma(i), &mut rng, &mut d);
            (p.descend(shaken, &mut d), d)
        })
        .collect();

    let mut all: Vec<(usize, State)> = vec![(0, incumbent)];
    for (i, (s, d)) in rounds.into_iter().enumerate() {
        diag.absorb(&d);
        all.push((i + 1, s));
    }
    let round_costs: Vec<f64> = all.iter().map(|(_, s)| s.cost).collect();
    let (_, best) = all
        .iter()
        .min_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)))
        .expect("at least one round");
    if !best.cost.is_finite() {
        return Err(PlanError::NoFeasiblePath(diag));
    }
    let best = best.clone();
    let minima = distinct_minima(scene, &all, best.cost);
    let per_segment = chain_segments(scene, &best.chain, model)?;
    Ok(PlanResult {
        junction_points: best.chain.junction_points(scene),
        cost: per_segment.iter().map(|s| s.cost).sum(),
        chain: best.chain,
        per_segment,
        round_costs,
        minima,
        diagnostics: diag,
    })
}

fn distinct_minima(scene: &FlowScene, all: &[(usize, State)], best: f64) -> Vec<LocalMinimum> {
    let mut sorted: Vec<&(usize, State)> = all.iter().filter(|(_, s)| s.cost.is_finite()).collect();
    sorted.sort_by(|a, b| a.1.cost.total_cmp(&b.1.cost).then(a.0.cmp(&b.0)));
    let mut out: Vec<LocalMinimum> = Vec::new();
    let mut keys: Vec<Vec<Point>> = Vec::new();
    for (round, s) in sorted {
        let pts = s.chain.junction_points(scene);
        let key = dedup_points(&pts);
        if keys.iter().any(|k| same_points(k, &key)) {
            continue;
        }
        keys.push(key);
        out.push(LocalMinimum {
            chain: s.chain.clone(),
            junction_points: pts,
            cost: s.cost,
            round: *round,
            co_optimal: s.cost <= best + CO_OPTIMAL_TOL,
        });
    }
    out
}

fn dedup_points(pts: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last().is_none_or(|q| (p - q).norm() > DUPLICATE_POINT_TOL) {
            out.push(*p);
        }
    }
    out
}

fn same_points(a: &[Point], b: &[Point]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p - q).amax() <= DISTINCT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn euler_step_arithmetic() {
        assert_eq!(euler_step(&[0.5], &[0.0], 0.01, 0.0, &[3.0]), vec![0.5]);
        assert_abs_diff_eq!(euler_step(&[0.5], &[1.0], 0.01, 0.0, &[7.0])[0], 0.49, epsilon = 1e-15);
        assert_abs_diff_eq!(euler_step(&[0.5], &[0.0], 0.04, 0.1, &[1.0])[0], 0.52, epsilon = 1e-15);
    }

    #[test]
    fn constant_flow_descends_to_axis() {
        let s = fixtures::constant();
        let sched = IDSchedule::default_for(&s).descent_only();
        let init = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0)).unwrap();
        let (chain, cost, _) = descend(&s, init.chain, &CostModel::time(3.0), &sched).unwrap();
        assert_abs_diff_eq!(cost, 5.2241, epsilon = 1e-3);
        let x = chain.junction_points(&s)[0];
        assert!(x.x.abs() < 1e-2 && (x.y - 9.5).abs() < 1e-12);
    }

    #[test]
    fn converged_start_takes_no_steps() {
        let s = fixtures::constant();
        let sched = IDSchedule::default_for(&s).descent_only();
        let model = CostModel::time(3.0);
        let init = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0)).unwrap();
        let (chain, _, _) = descend(&s, init.chain, &model, &sched).unwrap();
        let (again, _, d) = descend(&s, chain.clone(), &model, &IDSchedule { grad_tol: 1e-3, ..sched }).unwrap();
        assert_eq!(d.descent_steps, 0);
        assert_eq!(again, chain);
    }

    #[test]
    fn noiseless_single_round_equals_descent() {
        let s = fixtures::jet();
        let sched = IDSchedule::default_for(&s).descent_only();
        let model = CostModel::time(3.0);
        let (a, b) = (Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0));
        let plan = optimize(&s, a, b, &model, &sched).unwrap();
        let init = initial_chain(&s, a, b).unwrap();
        let (chain, cost, _) = descend(&s, init.chain, &model, &sched).unwrap();
        assert_eq!(plan.chain, chain);
        assert_eq!(plan.cost, cost);
    }

    #[test]
    fn same_seed_same_result() {
        let s = fixtures::jet();
        let sched = IDSchedule { rounds: 4, ..IDSchedule::default_for(&s) }.with_seed(7);
        let model = CostModel::energy(3.0, 1.0);
        let (a, b) = (Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0));
        let p1 = optimize(&s, a, b, &model, &sched).unwrap();
        let p2 = optimize(&s, a, b, &model, &sched).unwrap();
        assert_eq!(p1, p2);
    }
}
