use crate::geometry::{corner_reroute, FlowScene, GeometryError, JunctionChain, Lambda, Point, GEOM_TOL};
use serde::{Deserialize, Serialize};

/// Parameters within this distance outside the domain count as inside.
const PARAM_SLACK: f64 = 1e-12;

/// Something [`repair_chain`] changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepairEvent {
    /// A junction left its boundary at a corner and was replaced by the
    /// junctions of a detour around it.
    Reroute { at: Point, removed: usize, inserted: usize },
    /// A junction left its boundary where no detour exists (usually the
    /// domain edge) and was clamped back.
    Clamp { at: Point },
    /// Two consecutive junctions met and were replaced by a detour around
    /// their common point.
    Merge { at: Point, inserted: usize },
    /// The region sequence revisited a region; the junctions in between
    /// were dropped.
    Cycle { removed: usize },
}

/// Output of [`repair_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct Repair {
    pub chain: JunctionChain,
    pub events: Vec<RepairEvent>,
}

impl Repair {
    pub fn rerouted(&self) -> bool {
        self.events.iter().any(|e| !matches!(e, RepairEvent::Clamp { .. }))
    }
}

/// How far from the corner new junctions are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CornerPolicy {
    /// Detour around corners; new junctions sit this far (world units) from
    /// the corner, capped at 1% of their boundary.
    Reroute(f64),
    /// Never detour; clamp every escaping junction.
    Clamp,
}

/// Moves the chain's junctions to `proposed` and restores the chain
/// invariants.
///
/// A junction whose proposed parameter leaves its boundary is followed to
/// the point where it leaves. If that point is a corner, the junction is
/// replaced by the detour around the corner (see [`corner_reroute`]);
/// otherwise it is clamped. Junctions that meet are merged the same way,
/// and any stretch of the chain that returns to a region already visited
/// is cut out.
pub fn repair_chain(
    scene: &FlowScene,
    chain: &JunctionChain,
    proposed: &[Lambda],
    policy: CornerPolicy,
) -> Result<Repair, GeometryError> {
    assert_eq!(proposed.len(), chain.len(), "one proposed parameter per junction");
    let mut events = Vec::new();
    let mut out = JunctionChain {
        start: chain.start,
        goal: chain.goal,
        boundaries: Vec::with_capacity(chain.len()),
        lambdas: Vec::with_capacity(chain.len()),
        regions: vec![chain.regions[0]],
    };
    for (i, (&b, lp)) in chain.boundaries.iter().zip(proposed).enumerate() {
        let bd = scene.boundary(b);
        let (exit, enter) = (chain.regions[i], chain.regions[i + 1]);
        if bd.contains_param(lp, PARAM_SLACK) {
            out.boundaries.push(b);
            out.lambdas.push(*lp);
            out.regions.push(enter);
            continue;
        }
        let from = bd.clamp_param(&chain.lambdas[i]);
        let edge = bd.exit_point(&from, lp).map_or_else(|| bd.clamp_param(lp), |(l, _)| l);
        let x = bd.point(&edge);
        let detour = match policy {
            CornerPolicy::Reroute(nudge) => corner_reroute(scene, &x, exit, enter, &[b]).ok().map(|r| (r, nudge)),
            CornerPolicy::Clamp => None,
        };
        match detour {
            Some((r, nudge)) => {
                for (k, nb) in r.boundaries.iter().enumerate() {
                    out.boundaries.push(*nb);
                    out.lambdas.push(nudged(scene, *nb, &x, nudge));
                    out.regions.push(r.regions[k + 1]);
                }
                events.push(RepairEvent::Reroute { at: x, removed: 1, inserted: r.boundaries.len() });
            }
            None => {
                out.boundaries.push(b);
                out.lambdas.push(bd.clamp_param(lp));
                out.regions.push(enter);
                events.push(RepairEvent::Clamp { at: x });
            }
        }
    }
    if let CornerPolicy::Reroute(nudge) = policy {
        merge_coincident(scene, &mut out, nudge, &mut events);
    }
    remove_cycles(&mut out, &mut events);
    out.validate(scene)?;
    Ok(Repair { chain: out, events })
}

/// Parameter on boundary `b` closest to `x`, moved `nudge` world units
/// toward the middle of the boundary.
fn nudged(scene: &FlowScene, b: crate::geometry::BoundaryId, x: &Point, nudge: f64) -> Lambda {
    let bd = scene.boundary(b);
    let l0 = bd.clamp_param(&bd.param_of(x));
    let mid = bd.param_of(&bd.centroid());
    let dist = nudge.min(0.01 * bd.diameter()) / bd.param_scale();
    let gap = (mid - l0).norm();
    if gap == 0.0 {
        return l0;
    }
    l0 + (mid - l0) * (dist.min(gap / 2.0) / gap)
}

fn merge_coincident(scene: &FlowScene, c: &mut JunctionChain, nudge: f64, events: &mut Vec<RepairEvent>) {
    let tol = GEOM_TOL * scene.diameter().max(1.0);
    let mut i = 0;
    while i + 1 < c.len() {
        let pts = c.junction_points(scene);
        if (pts[i] - pts[i + 1]).norm() > tol {
            i += 1;
            continue;
        }
        let at = (pts[i] + pts[i + 1]) / 2.0;
        let (exit, enter) = (c.regions[i], c.regions[i + 2]);
        if exit == enter {
            // the cycle pass removes the pair
            i += 1;
            continue;
        }
        match corner_reroute(scene, &at, exit, enter, &[c.boundaries[i], c.boundaries[i + 1]]) {
            Ok(r) => {
                let lambdas: Vec<Lambda> = r.boundaries.iter().map(|nb| nudged(scene, *nb, &at, nudge)).collect();
                c.boundaries.splice(i..i + 2, r.boundaries.iter().copied());
                c.lambdas.splice(i..i + 2, lambdas);
                c.regions.splice(i + 1..i + 2, r.regions[1..r.regions.len() - 1].iter().copied());
                events.push(RepairEvent::Merge { at, inserted: r.boundaries.len() });
                i += r.boundaries.len();
            }
            Err(_) => i += 1,
        }
    }
}

/// Cuts out every stretch between two visits of the same region.
pub(crate) fn remove_cycles(c: &mut JunctionChain, events: &mut Vec<RepairEvent>) {
    loop {
        let found = (0..c.regions.len()).find_map(|a| {
            (a + 1..c.regions.len())
                .rev()
                .find(|&b| c.regions[b] == c.regions[a])
                .map(|b| (a, b))
        });
        let Some((a, b)) = found else { break };
        c.boundaries.drain(a..b);
        c.lambdas.drain(a..b);
        c.regions.drain(a + 1..=b);
        events.push(RepairEvent::Cycle { removed: b - a });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::geometry::{initial_chain, RegionId};

    fn pairs(scene: &FlowScene, c: &JunctionChain) -> Vec<(u32, u32)> {
        c.boundaries
            .iter()
            .map(|b| {
                let p = scene.boundary(*b).pair;
                (p.0 .0, p.1 .0)
            })
            .collect()
    }

    #[test]
    fn interior_proposal_is_a_no_op() {
        let s = fixtures::jet();
        let c = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0)).unwrap().chain;
        let prop = vec![Lambda::new(0.3, 0.0), Lambda::new(0.6, 0.0)];
        let r = repair_chain(&s, &c, &prop, CornerPolicy::Reroute(1e-3)).unwrap();
        assert!(r.events.is_empty());
        assert_eq!(r.chain.lambdas, prop);
        assert_eq!(r.chain.boundaries, c.boundaries);
    }

    #[test]
    fn domain_edge_clamps() {
        let s = fixtures::jet();
        let c = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0)).unwrap().chain;
        let prop = vec![Lambda::new(1.3, 0.0), Lambda::new(0.5, 0.0)];
        let r = repair_chain(&s, &c, &prop, CornerPolicy::Reroute(1e-3)).unwrap();
        assert_eq!(r.chain.lambdas[0].x, 1.0);
        assert!(matches!(r.events[0], RepairEvent::Clamp { .. }));
    }

    #[test]
    fn triple_corner_walkthrough() {
        let s = fixtures::triple_corner();
        let c = initial_chain(&s, Point::new(-5.0, 0.0, 0.0), Point::new(-5.0, 20.0, 0.0)).unwrap().chain;
        assert_eq!(pairs(&s, &c), vec![(1, 2), (2, 3)]);
        // f12 runs from (-10, 9.5) (λ = 1) to (2, 9.5) (λ = 0); push x1 past the corner
        let prop = vec![Lambda::new(-0.1, 0.0), c.lambdas[1]];
        let r = repair_chain(&s, &c, &prop, CornerPolicy::Reroute(1e-3)).unwrap();
        // the detour f13 → f32 re-enters R3, so the trailing f23 junction goes too
        assert_eq!(pairs(&s, &r.chain), vec![(1, 3)]);
        assert_eq!(r.chain.regions, vec![RegionId(1), RegionId(3)]);
        assert!(r.events.iter().any(|e| matches!(e, RepairEvent::Cycle { .. })));
        let again = repair_chain(&s, &r.chain, &r.chain.lambdas, CornerPolicy::Reroute(1e-3)).unwrap();
        assert_eq!(again.chain, r.chain);
        assert!(again.events.is_empty());
    }

    #[test]
    fn cycle_removal_drops_enclosed_junctions() {
        let s = fixtures::triple_corner();
        let b = |a: u32, c: u32| s.boundaries_between(RegionId(a), RegionId(c)).next().unwrap().id;
        let mut c = JunctionChain {
            start: Point::new(-5.0, 0.0, 0.0),
            goal: Point::new(-5.0, 20.0, 0.0),
            boundaries: vec![b(1, 3), b(2, 3), b(1, 2), b(1, 3)],
            lambdas: vec![Lambda::new(0.5, 0.0); 4],
            regions: [1, 3, 2, 1, 3].into_iter().map(RegionId).collect(),
        };
        let mut ev = Vec::new();
        remove_cycles(&mut c, &mut ev);
        assert_eq!(c.regions, vec![RegionId(1), RegionId(3)]);
        assert_eq!(c.boundaries, vec![b(1, 3)]);
    }
}
