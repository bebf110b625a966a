use super::{BoundaryGeometry, BoundaryId, FlowScene, GeometryError, Lambda, Point, RegionId, GEOM_TOL};
use serde::{Deserialize, Serialize};

/// The ordered boundaries a path crosses, the junction parameters on each,
/// and the regions between them.
///
/// With `n` junctions there are `n + 1` regions: `regions[0]` holds the
/// start and `regions[n]` holds the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionChain {
    pub start: Point,
    pub goal: Point,
    pub boundaries: Vec<BoundaryId>,
    pub lambdas: Vec<Lambda>,
    pub regions: Vec<RegionId>,
}

impl JunctionChain {
    /// A chain with no junctions (start and goal share a region).
    pub fn direct(start: Point, goal: Point, region: RegionId) -> Self {
        JunctionChain {
            start,
            goal,
            boundaries: Vec::new(),
            lambdas: Vec::new(),
            regions: vec![region],
        }
    }

    /// Number of junctions.
    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn junction_points(&self, scene: &FlowScene) -> Vec<Point> {
        self.boundaries
            .iter()
            .zip(&self.lambdas)
            .map(|(b, l)| scene.boundary(*b).point(l))
            .collect()
    }

    /// Start, junctions, goal.
    pub fn waypoints(&self, scene: &FlowScene) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len() + 2);
        out.push(self.start);
        out.extend(self.junction_points(scene));
        out.push(self.goal);
        out
    }

    /// Junction parameters flattened into one vector, `param_dim` entries per junction.
    pub fn stacked(&self, param_dim: usize) -> Vec<f64> {
        self.lambdas
            .iter()
            .flat_map(|l| l.iter().take(param_dim).copied().collect::<Vec<_>>())
            .collect()
    }

    /// Replaces the junction parameters from a flattened vector.
    pub fn set_stacked(&mut self, param_dim: usize, values: &[f64]) {
        assert_eq!(values.len(), self.len() * param_dim, "stacked length mismatch");
        for (i, l) in self.lambdas.iter_mut().enumerate() {
            l.x = values[i * param_dim];
            l.y = if param_dim == 2 { values[i * param_dim + 1] } else { 0.0 };
        }
    }

    /// Checks the structural invariants: region count, every boundary
    /// separating its neighbouring regions, and parameters in range.
    pub fn validate(&self, scene: &FlowScene) -> Result<(), GeometryError> {
        if self.regions.len() != self.boundaries.len() + 1 || self.lambdas.len() != self.boundaries.len() {
            return Err(GeometryError::InvalidReroute("chain lengths are inconsistent".into()));
        }
        for (i, b) in self.boundaries.iter().enumerate() {
            if b.0 >= scene.boundaries().len() {
                return Err(GeometryError::InvalidReroute(format!("unknown boundary {b}")));
            }
            let bd = scene.boundary(*b);
            if !bd.separates(self.regions[i], self.regions[i + 1]) {
                return Err(GeometryError::InvalidReroute(format!(
                    "{b} does not separate {} and {}",
                    self.regions[i],
                    self.regions[i + 1]
                )));
            }
            bd.boundary_point(&self.lambdas[i])?;
        }
        Ok(())
    }

    /// True when no region appears twice.
    pub fn is_cycle_free(&self) -> bool {
        let mut seen = self.regions.clone();
        seen.sort();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// Result of [`initial_chain`].
#[derive(Debug, Clone, PartialEq)]
pub struct InitialChain {
    pub chain: JunctionChain,
    /// Offset applied to the goal when the straight line passed through a
    /// corner. The chain keeps the true goal.
    pub goal_offset: Option<Point>,
}

/// The chain crossed by the straight segment from `start` to `goal`.
///
/// When that segment passes through a point shared by several boundaries,
/// the crossings are recomputed against a goal nudged by `1e-9` along the
/// coordinate axis least aligned with the segment.
pub fn initial_chain(scene: &FlowScene, start: Point, goal: Point) -> Result<InitialChain, GeometryError> {
    scene.locate_region(&start)?;
    scene.locate_region(&goal)?;
    let tol = GEOM_TOL * scene.scale();
    let dir = goal - start;
    let offset = {
        let dim = scene.dimension().as_usize();
        let axis = (0..dim)
            .min_by(|&a, &b| dir[a].abs().total_cmp(&dir[b].abs()))
            .unwrap_or(0);
        let mut e = Point::zeros();
        e[axis] = GEOM_TOL;
        e
    };
    let first = crossings(scene, &start, &goal)?;
    let (hits, goal_offset) = if first.iter().any(|c| c.at_corner) {
        (crossings(scene, &start, &(goal + offset))?, Some(offset))
    } else {
        (first, None)
    };

    let target = goal + goal_offset.unwrap_or_else(Point::zeros);
    let probe = |s: f64| start + (target - start) * s;
    let s0 = hits.first().map_or(0.5, |c| c.s / 2.0);
    let mut current = scene
        .deepest_region(&probe(s0))
        .ok_or(GeometryError::OutOfDomain(start))?;
    let mut chain = JunctionChain::direct(start, goal, current);
    for c in &hits {
        // a second crossing at the same place (e.g. a shared endpoint) is skipped
        let Some(next) = scene.boundary(c.boundary).other_side(current) else {
            if chain.boundaries.last() == Some(&c.boundary) || (c.point - last_point(scene, &chain)).norm() <= tol {
                continue;
            }
            return Err(GeometryError::InvalidScene(format!(
                "crossing {} from {current} is inconsistent with the scene",
                c.boundary
            )));
        };
        if let Some(&prev) = chain.boundaries.last() {
            if (c.point - last_point(scene, &chain)).norm() <= tol && prev == c.boundary {
                continue;
            }
        }
        chain.boundaries.push(c.boundary);
        chain.lambdas.push(c.lambda);
        chain.regions.push(next);
        current = next;
    }
    Ok(InitialChain { chain, goal_offset })
}

fn last_point(scene: &FlowScene, chain: &JunctionChain) -> Point {
    chain.junction_points(scene).last().copied().unwrap_or(chain.start)
}

struct Crossing {
    s: f64,
    boundary: BoundaryId,
    lambda: Lambda,
    point: Point,
    at_corner: bool,
}

fn crossings(scene: &FlowScene, start: &Point, goal: &Point) -> Result<Vec<Crossing>, GeometryError> {
    let tol = GEOM_TOL * scene.scale();
    let d = goal - start;
    let len = d.norm();
    let mut out = Vec::new();
    if len <= tol {
        return Ok(out);
    }
    for b in scene.boundaries() {
        let s = match &b.geometry {
            BoundaryGeometry::Segment { p1, p2 } => {
                let e = p1 - p2;
                let den = d.x * e.y - d.y * e.x;
                if den.abs() <= 1e-14 * len * e.norm() {
                    if b.implicit(start).abs() <= tol {
                        let (a, c) = (e.dot(&(start - p2)), e.dot(&(goal - p2)));
                        let (lo, hi) = (a.min(c), a.max(c));
                        let l2 = e.norm_squared();
                        if hi > tol * e.norm() && lo < l2 - tol * e.norm() {
                            return Err(GeometryError::DegenerateStraightLine);
                        }
                    }
                    continue;
                }
                let w = p2 - start;
                (w.x * e.y - w.y * e.x) / den
            }
            BoundaryGeometry::Patch(p) => {
                let rate = p.normal.dot(&d);
                if rate.abs() <= 1e-14 * len {
                    if b.implicit(start).abs() <= tol {
                        let touches = (0..=32).any(|k| {
                            let x = start + d * (k as f64 / 32.0);
                            b.locate_point(&x, tol).is_some()
                        });
                        if touches {
                            return Err(GeometryError::DegenerateStraightLine);
                        }
                    }
                    continue;
                }
                (p.offset - p.normal.dot(start)) / rate
            }
        };
        // crossings at the endpoints themselves do not change region
        if s * len <= tol || (1.0 - s) * len <= tol {
            continue;
        }
        let x = start + d * s;
        if let Some(lambda) = b.locate_point(&x, tol) {
            let at_corner = scene
                .boundaries()
                .iter()
                .filter(|o| o.id != b.id && o.locate_point(&x, tol).is_some())
                .count()
                > 0;
            out.push(Crossing { s, boundary: b.id, lambda, point: x, at_corner });
        }
    }
    out.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.boundary.cmp(&b.boundary)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    #[test]
    fn jet_straight_line_crosses_twice() {
        let s = fixtures::jet();
        let ic = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 20.0, 0.0)).unwrap();
        assert!(ic.goal_offset.is_none());
        let c = ic.chain;
        assert_eq!(c.regions, vec![RegionId(1), RegionId(2), RegionId(3)]);
        let pts = c.junction_points(&s);
        assert_abs_diff_eq!(pts[0].y, 7.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[1].y, 10.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pts[0].x, 0.0, epsilon = 1e-12);
        c.validate(&s).unwrap();
    }

    #[test]
    fn corner_hit_applies_offset() {
        let s = fixtures::constant();
        // the line from (2.5, 0) to (2.5, 20) runs through the triple corner
        let ic = initial_chain(&s, Point::new(2.5, 0.0, 0.0), Point::new(2.5, 20.0, 0.0)).unwrap();
        assert!(ic.goal_offset.is_some());
        ic.chain.validate(&s).unwrap();
        assert_eq!(*ic.chain.regions.first().unwrap(), RegionId(1));
        assert_eq!(*ic.chain.regions.last().unwrap(), RegionId(3));
    }

    #[test]
    fn collinear_start_goal_is_degenerate() {
        let s = fixtures::jet();
        let err = initial_chain(&s, Point::new(-5.0, 7.5, 0.0), Point::new(5.0, 7.5, 0.0));
        assert_eq!(err.unwrap_err(), GeometryError::DegenerateStraightLine);
    }

    #[test]
    fn same_region_has_no_junctions() {
        let s = fixtures::jet();
        let ic = initial_chain(&s, Point::new(-5.0, 1.0, 0.0), Point::new(5.0, 2.0, 0.0)).unwrap();
        assert!(ic.chain.is_empty());
        assert_eq!(ic.chain.regions, vec![RegionId(1)]);
    }

    #[test]
    fn stacked_round_trip() {
        let s = fixtures::jet3d();
        let mut c = initial_chain(&s, Point::new(0.0, 0.0, 0.0), Point::new(0.0, 0.0, 20.0)).unwrap().chain;
        assert_eq!(c.len(), 2);
        let v = vec![1.0, 2.0, 3.0, 4.0];
        c.set_stacked(2, &v);
        assert_eq!(c.stacked(2), v);
        let pts = c.junction_points(&s);
        assert_abs_diff_eq!(pts[1], Point::new(3.0, 4.0, 15.0), epsilon = 1e-12);
    }
}
