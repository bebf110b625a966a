use super::{GeometryError, Point, RegionId, GEOM_TOL};
use serde::{Deserialize, Serialize};

/// The closed half space `normal · x <= offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Point,
    pub offset: f64,
}

impl HalfSpace {
    /// Builds a half space with a unit normal. Returns `None` for a zero normal.
    pub fn new(normal: Point, offset: f64) -> Option<Self> {
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() || !offset.is_finite() {
            return None;
        }
        Some(HalfSpace {
            normal: normal / n,
            offset: offset / n,
        })
    }

    /// Signed distance, negative inside.
    #[inline]
    pub fn signed_distance(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// A convex region with constant flow.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub id: RegionId,
    pub flow: Point,
    halfspaces: Vec<HalfSpace>,
    vertices: Vec<Point>,
}

impl Region {
    /// A convex polygon given by its vertices (either orientation).
    pub fn polygon(id: RegionId, flow: Point, vertices: Vec<Point>) -> Result<Self, GeometryError> {
        check_flow(id, &flow)?;
        let mut vertices = dedup_cyclic(vertices);
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidScene(format!(
                "region {id} needs at least three distinct vertices"
            )));
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        let area = signed_area(&vertices);
        if area <= GEOM_TOL {
            return Err(GeometryError::InvalidScene(format!(
                "region {id} has an empty interior"
            )));
        }
        let n = vertices.len();
        let mut halfspaces = Vec::with_capacity(n);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let edge = b - a;
            // outward normal of a counter-clockwise polygon
            if let Some(h) = HalfSpace::new(Point::new(edge.y, -edge.x, 0.0), 0.0) {
                let offset = h.normal.dot(&a);
                halfspaces.push(HalfSpace { normal: h.normal, offset });
            }
        }
        for h in &halfspaces {
            for v in &vertices {
                if h.signed_distance(v) > GEOM_TOL {
                    return Err(GeometryError::InvalidScene(format!("region {id} is not convex")));
                }
            }
        }
        Ok(Region { id, flow, halfspaces, vertices })
    }

    /// A convex polyhedron given as an intersection of half spaces. The
    /// `bounds` half spaces (usually the domain box) are added to close it.
    pub fn polyhedron(
        id: RegionId,
        flow: Point,
        halfspaces: Vec<HalfSpace>,
        bounds: &[HalfSpace],
    ) -> Result<Self, GeometryError> {
        check_flow(id, &flow)?;
        let mut all = halfspaces;
        for b in bounds {
            if !all.iter().any(|h| (h.normal - b.normal).norm() < 1e-12 && (h.offset - b.offset).abs() < 1e-12) {
                all.push(*b);
            }
        }
        let vertices = enumerate_vertices(&all);
        if vertices.len() < 4 {
            return Err(GeometryError::InvalidScene(format!(
                "region {id} has an empty interior"
            )));
        }
        let c = centroid(&vertices);
        if all.iter().any(|h| h.signed_distance(&c) > -GEOM_TOL) {
            return Err(GeometryError::InvalidScene(format!(
                "region {id} has an empty interior"
            )));
        }
        // drop redundant half spaces (those not supporting a face)
        let halfspaces = all
            .into_iter()
            .filter(|h| {
                vertices
                    .iter()
                    .filter(|v| h.signed_distance(v).abs() <= GEOM_TOL * scale(&vertices))
                    .count()
                    >= 3
            })
            .collect();
        Ok(Region { id, flow, halfspaces, vertices })
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Closed containment with absolute tolerance `tol`.
    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.signed_distance(x) <= tol)
    }

    /// Largest signed distance to the region's faces (negative inside).
    pub fn depth(&self, x: &Point) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.signed_distance(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn centroid(&self) -> Point {
        centroid(&self.vertices)
    }

    /// Area (2D polygon) or volume (3D polyhedron).
    pub fn measure(&self, is_3d: bool) -> f64 {
        if !is_3d {
            return signed_area(&self.vertices).abs();
        }
        let c = self.centroid();
        let s = scale(&self.vertices);
        self.halfspaces
            .iter()
            .map(|h| {
                let face: Vec<Point> = self
                    .vertices
                    .iter()
                    .copied()
                    .filter(|v| h.signed_distance(v).abs() <= GEOM_TOL * s)
                    .collect();
                face_area(&face, &h.normal) * (-h.signed_distance(&c)) / 3.0
            })
            .sum()
    }
}

fn check_flow(id: RegionId, flow: &Point) -> Result<(), GeometryError> {
    if flow.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::InvalidScene(format!("region {id} has a non-finite flow")))
    }
}

fn dedup_cyclic(mut v: Vec<Point>) -> Vec<Point> {
    v.dedup_by(|a, b| (*a - *b).norm() <= GEOM_TOL);
    while v.len() > 1 && (v[0] - v[v.len() - 1]).norm() <= GEOM_TOL {
        v.pop();
    }
    v
}

pub(crate) fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

pub(crate) fn centroid(v: &[Point]) -> Point {
    v.iter().fold(Point::zeros(), |acc, p| acc + p) / v.len() as f64
}

fn scale(v: &[Point]) -> f64 {
    v.iter().map(|p| p.amax()).fold(1.0, f64::max)
}

/// Area of a planar convex face whose vertices are given unordered.
pub(crate) fn face_area(face: &[Point], normal: &Point) -> f64 {
    if face.len() < 3 {
        return 0.0;
    }
    let c = centroid(face);
    let u = (face[0] - c).normalize();
    let w = normal.cross(&u);
    let mut ordered: Vec<(f64, Point)> = face
        .iter()
        .map(|p| {
            let d = p - c;
            (d.dot(&w).atan2(d.dot(&u)), *p)
        })
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = ordered.len();
    let mut acc = Point::zeros();
    for i in 0..n {
        acc += ordered[i].1.cross(&ordered[(i + 1) % n].1);
    }
    (acc.dot(normal) / 2.0).abs()
}

/// All vertices of `{x : h.normal · x <= h.offset for every h}` by brute
/// force over plane triples. Fine for the handful of faces a region has.
fn enumerate_vertices(hs: &[HalfSpace]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    let n = hs.len();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let m = nalgebra::Matrix3::from_rows(&[
                    hs[i].normal.transpose(),
                    hs[j].normal.transpose(),
                    hs[k].normal.transpose(),
                ]);
                let rhs = Point::new(hs[i].offset, hs[j].offset, hs[k].offset);
                let Some(inv) = m.try_inverse() else { continue };
                if m.determinant().abs() < 1e-12 {
                    continue;
                }
                let p = inv * rhs;
                let tol = GEOM_TOL * p.amax().max(1.0);
                if hs.iter().all(|h| h.signed_distance(&p) <= tol)
                    && !out.iter().any(|q| (q - p).norm() <= tol)
                {
                    out.push(p);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p2(x: f64, y: f64) -> Point {
        Point::new(x, y, 0.0)
    }

    #[test]
    fn square_polygon() {
        let r = Region::polygon(
            RegionId(1),
            Point::zeros(),
            vec![p2(0.0, 0.0), p2(0.0, 1.0), p2(1.0, 1.0), p2(1.0, 0.0)],
        )
        .unwrap();
        assert!((r.measure(false) - 1.0).abs() < 1e-12);
        assert!(r.contains(&p2(0.5, 0.5), 0.0));
        assert!(r.contains(&p2(1.0, 0.5), GEOM_TOL));
        assert!(!r.contains(&p2(1.1, 0.5), GEOM_TOL));
    }

    #[test]
    fn rejects_nonconvex() {
        let err = Region::polygon(
            RegionId(1),
            Point::zeros(),
            vec![p2(0.0, 0.0), p2(2.0, 0.0), p2(1.0, 0.5), p2(2.0, 2.0), p2(0.0, 2.0)],
        );
        assert!(matches!(err, Err(GeometryError::InvalidScene(_))));
    }

    #[test]
    fn slab_polyhedron_volume() {
        let bounds: Vec<HalfSpace> = (0..3)
            .flat_map(|k| {
                let mut e = Point::zeros();
                e[k] = 1.0;
                [HalfSpace::new(e, 1.0).unwrap(), HalfSpace::new(-e, 1.0).unwrap()]
            })
            .collect();
        let r = Region::polyhedron(
            RegionId(2),
            Point::zeros(),
            vec![HalfSpace::new(Point::new(0.0, 0.0, 1.0), 0.0).unwrap()],
            &bounds,
        )
        .unwrap();
        assert_eq!(r.vertices().len(), 8);
        assert!((r.measure(true) - 4.0).abs() < 1e-9);
    }
}
