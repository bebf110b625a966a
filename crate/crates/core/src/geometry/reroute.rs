use super::{BoundaryGeometry, BoundaryId, Dimension, FlowScene, GeometryError, Point, RegionId, GEOM_TOL};
use std::f64::consts::TAU;

/// A detour around a corner: the boundaries crossed in order, and the
/// regions visited from the exit region to the entry region (one more than
/// the boundaries).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reroute {
    pub boundaries: Vec<BoundaryId>,
    pub regions: Vec<RegionId>,
}

#[derive(Debug, Clone, Copy)]
enum Spoke {
    Boundary(BoundaryId),
    Wall,
}

/// The boundary chain leading from `exit` to `enter` around the corner `x`.
///
/// Boundaries meeting at `x` split a small disc around it (in 3D, the plane
/// normal to the shared edge) into wedges, one per region. There are two ways
/// around from the exit wedge to the entry wedge; a way is closed if it
/// crosses the domain edge or one of the `avoid` boundaries (the boundary the
/// junction just slid off). Exactly one way must stay open.
pub fn corner_reroute(
    scene: &FlowScene,
    x: &Point,
    exit: RegionId,
    enter: RegionId,
    avoid: &[BoundaryId],
) -> Result<Reroute, GeometryError> {
    if exit == enter {
        return Err(GeometryError::InvalidReroute(format!("exit and entry are both {exit}")));
    }
    let tol = GEOM_TOL * scene.scale();
    let (e1, e2) = sweep_plane(scene, x, tol)?;
    let mut spokes: Vec<(f64, Spoke)> = Vec::new();
    let mut add = |dir: Point, s: Spoke| {
        let (a, b) = (dir.dot(&e1), dir.dot(&e2));
        if a.hypot(b) > 1e-9 {
            spokes.push((b.atan2(a).rem_euclid(TAU), s));
        }
    };
    for b in scene.boundaries() {
        if b.locate_point(x, tol).is_none() {
            continue;
        }
        match &b.geometry {
            BoundaryGeometry::Segment { p1, p2 } => {
                if (p1 - x).norm() > tol {
                    add(p1 - x, Spoke::Boundary(b.id));
                }
                if (p2 - x).norm() > tol {
                    add(p2 - x, Spoke::Boundary(b.id));
                }
            }
            BoundaryGeometry::Patch(p) => {
                let across = p.normal.cross(&e1.cross(&e2));
                for dir in [across, -across] {
                    let probe = x + dir.normalize() * (1e-6 * scene.scale());
                    if b.locate_point(&probe, 1e-7 * scene.scale()).is_some() {
                        add(dir, Spoke::Boundary(b.id));
                    }
                }
            }
        }
    }
    let (lo, hi) = scene.domain();
    let axis = e1.cross(&e2);
    for k in 0..scene.dimension().as_usize() {
        if (x[k] - lo[k]).abs() <= tol || (x[k] - hi[k]).abs() <= tol {
            let mut n = Point::zeros();
            n[k] = 1.0;
            let along = n.cross(&axis);
            if along.norm() > 1e-9 {
                add(along, Spoke::Wall);
                add(-along, Spoke::Wall);
            }
        }
    }
    spokes.sort_by(|a, b| a.0.total_cmp(&b.0));
    spokes.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && matches!((a.1, b.1), (Spoke::Wall, Spoke::Wall)));
    let n = spokes.len();
    if n < 2 {
        return Err(GeometryError::InvalidReroute(format!("{x:?} is not a corner")));
    }

    // wedge k lies counter-clockwise of spoke k
    let r = 1e-6 * scene.scale();
    let wedges: Vec<Option<RegionId>> = (0..n)
        .map(|k| {
            let a = spokes[k].0;
            let gap = (spokes[(k + 1) % n].0 - a).rem_euclid(TAU);
            let gap = if gap == 0.0 { TAU } else { gap };
            let phi = a + gap / 2.0;
            scene.deepest_region(&(x + (e1 * phi.cos() + e2 * phi.sin()) * r))
        })
        .collect();
    let Some(start) = wedges.iter().position(|w| *w == Some(exit)) else {
        return Err(GeometryError::InvalidReroute(format!("{exit} does not touch the corner")));
    };
    if !wedges.contains(&Some(enter)) {
        return Err(GeometryError::InvalidReroute(format!("{enter} does not touch the corner")));
    }

    let walk = |ccw: bool| -> Option<Reroute> {
        let mut out = Reroute { boundaries: Vec::new(), regions: vec![exit] };
        let mut k = start;
        for _ in 0..n {
            let (spoke, next) = if ccw {
                ((k + 1) % n, (k + 1) % n)
            } else {
                (k, (k + n - 1) % n)
            };
            let Spoke::Boundary(b) = spokes[spoke].1 else { return None };
            if avoid.contains(&b) {
                return None;
            }
            let here = *out.regions.last()?;
            let there = wedges[next]?;
            if !scene.boundary(b).separates(here, there) {
                return None;
            }
            out.boundaries.push(b);
            out.regions.push(there);
            if there == enter {
                return Some(out);
            }
            k = next;
        }
        None
    };
    match (walk(true), walk(false)) {
        (Some(r), None) | (None, Some(r)) => Ok(r),
        (None, None) => Err(GeometryError::NoReroute(*x)),
        (Some(_), Some(_)) => Err(GeometryError::AmbiguousReroute(*x)),
    }
}

/// Orthonormal basis of the plane in which the corner is swept.
fn sweep_plane(scene: &FlowScene, x: &Point, tol: f64) -> Result<(Point, Point), GeometryError> {
    if scene.dimension() == Dimension::Two {
        return Ok((Point::x(), Point::y()));
    }
    let mut axis: Option<Point> = None;
    for b in scene.boundaries() {
        let BoundaryGeometry::Patch(p) = &b.geometry else { continue };
        if b.locate_point(x, tol).is_none() {
            continue;
        }
        if p.extent.iter().any(|v| (v - x).norm() <= tol) {
            return Err(GeometryError::AmbiguousReroute(*x));
        }
        if let Some((a, c)) = b.edge_through(x, tol) {
            let d = (c - a).normalize();
            match axis {
                None => axis = Some(d),
                Some(prev) if prev.cross(&d).norm() > 1e-9 => return Err(GeometryError::AmbiguousReroute(*x)),
                Some(_) => {}
            }
        }
    }
    let axis = axis.ok_or_else(|| GeometryError::InvalidReroute(format!("{x:?} is not on a patch edge")))?;
    let helper = if axis.x.abs() < 0.9 { Point::x() } else { Point::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    Ok((e1, e2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn ids(scene: &FlowScene, r: &Reroute) -> Vec<(u32, u32)> {
        r.boundaries
            .iter()
            .map(|b| {
                let p = scene.boundary(*b).pair;
                (p.0 .0.min(p.1 .0), p.0 .0.max(p.1 .0))
            })
            .collect()
    }

    fn find(scene: &FlowScene, a: u32, b: u32) -> BoundaryId {
        scene
            .boundaries_between(RegionId(a), RegionId(b))
            .next()
            .expect("boundary")
            .id
    }

    #[test]
    fn triple_corner_via_third_region() {
        let s = fixtures::triple_corner();
        let x = Point::new(2.0, 9.5, 0.0);
        let r = corner_reroute(&s, &x, RegionId(1), RegionId(2), &[find(&s, 1, 2)]).unwrap();
        assert_eq!(ids(&s, &r), vec![(1, 3), (2, 3)]);
        assert_eq!(r.regions, vec![RegionId(1), RegionId(3), RegionId(2)]);

        let r = corner_reroute(&s, &x, RegionId(2), RegionId(3), &[find(&s, 2, 3)]).unwrap();
        assert_eq!(ids(&s, &r), vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn triple_corner_without_avoid_is_ambiguous() {
        let s = fixtures::triple_corner();
        let x = Point::new(2.0, 9.5, 0.0);
        let err = corner_reroute(&s, &x, RegionId(1), RegionId(2), &[]).unwrap_err();
        assert_eq!(err, GeometryError::AmbiguousReroute(x));
    }

    #[test]
    fn collinear_split_continues_on_other_piece() {
        let s = crate::geometry::SceneBuilder::planar(0.0, 2.0, 0.0, 2.0)
            .polygon(1, [0.0, 0.0], &[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]])
            .polygon(2, [0.0, 0.0], &[[0.0, 1.0], [2.0, 1.0], [2.0, 2.0], [0.0, 2.0]])
            .segment(1, 2, [0.0, 1.0], [1.0, 1.0])
            .segment(1, 2, [1.0, 1.0], [2.0, 1.0])
            .build()
            .unwrap();
        let x = Point::new(1.0, 1.0, 0.0);
        let r = corner_reroute(&s, &x, RegionId(1), RegionId(2), &[BoundaryId(0)]).unwrap();
        assert_eq!(r.boundaries, vec![BoundaryId(1)]);
    }

    #[test]
    fn block_corner_goes_around() {
        let s = fixtures::block();
        let x = Point::new(-2.5, 4.5, 0.0);
        let r = corner_reroute(&s, &x, RegionId(1), RegionId(3), &[find(&s, 1, 3)]).unwrap();
        assert_eq!(ids(&s, &r), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn unrelated_region_is_rejected() {
        let s = fixtures::block();
        let x = Point::new(-2.5, 4.5, 0.0);
        let err = corner_reroute(&s, &x, RegionId(1), RegionId(5), &[]).unwrap_err();
        assert!(matches!(err, GeometryError::InvalidReroute(_)));
    }
}
