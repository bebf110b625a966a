use super::{BoundaryId, GeometryError, Lambda, Point, RegionId, GEOM_TOL};

/// Tolerance on parameters when deciding whether `λ` lies in its domain.
const PARAM_TOL: f64 = 1e-12;

/// A planar boundary patch in 3D.
///
/// The plane is `normal · x = offset`. Points are parametrized by the two
/// coordinates along `free`, and the coordinate along `solved` (the axis of
/// the largest-magnitude normal component) is recovered from the plane
/// equation.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarPatch {
    pub normal: Point,
    pub offset: f64,
    pub solved: usize,
    pub free: [usize; 2],
    /// Extent polygon in world coordinates, counter-clockwise in parameter space.
    pub extent: Vec<Point>,
    /// The extent polygon in parameter coordinates.
    pub params: Vec<Lambda>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryGeometry {
    /// `x(λ) = λ p1 + (1 - λ) p2`, `λ ∈ [0, 1]`.
    Segment { p1: Point, p2: Point },
    Patch(PlanarPatch),
}

/// The interface between two adjacent regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub id: BoundaryId,
    pub pair: (RegionId, RegionId),
    pub geometry: BoundaryGeometry,
}

impl Boundary {
    pub fn segment(
        id: BoundaryId,
        pair: (RegionId, RegionId),
        p1: Point,
        p2: Point,
    ) -> Result<Self, GeometryError> {
        check_pair(pair)?;
        if (p1 - p2).norm() <= GEOM_TOL {
            return Err(GeometryError::InvalidScene(format!(
                "boundary {}-{} has coincident endpoints",
                pair.0, pair.1
            )));
        }
        Ok(Boundary {
            id,
            pair,
            geometry: BoundaryGeometry::Segment { p1, p2 },
        })
    }

    /// A planar patch `normal · x = offset` restricted to the convex polygon
    /// `extent` (vertices in world coordinates, lying on the plane).
    pub fn patch(
        id: BoundaryId,
        pair: (RegionId, RegionId),
        normal: Point,
        offset: f64,
        extent: Vec<Point>,
    ) -> Result<Self, GeometryError> {
        check_pair(pair)?;
        let n = normal.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeometryError::InvalidScene(format!(
                "boundary {}-{} has a zero plane normal",
                pair.0, pair.1
            )));
        }
        let normal = normal / n;
        let offset = offset / n;
        let solved = normal.iamax();
        let free = match solved {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        let scale = extent.iter().map(|p| p.amax()).fold(1.0, f64::max);
        for p in &extent {
            if (normal.dot(p) - offset).abs() > GEOM_TOL * scale {
                return Err(GeometryError::InvalidScene(format!(
                    "boundary {}-{} has an extent vertex off its plane",
                    pair.0, pair.1
                )));
            }
        }
        let mut extent = extent;
        let mut params: Vec<Lambda> = extent.iter().map(|p| Lambda::new(p[free[0]], p[free[1]])).collect();
        let area = polygon_area(&params);
        if area.abs() <= GEOM_TOL {
            return Err(GeometryError::InvalidScene(format!(
                "boundary {}-{} has a degenerate extent polygon",
                pair.0, pair.1
            )));
        }
        if area < 0.0 {
            params.reverse();
            extent.reverse();
        }
        let m = params.len();
        for i in 0..m {
            let a = params[i];
            let b = params[(i + 1) % m];
            for q in &params {
                if cross2(&(b - a), &(q - a)) < -GEOM_TOL * scale {
                    return Err(GeometryError::InvalidScene(format!(
                        "boundary {}-{} has a non-convex extent polygon",
                        pair.0, pair.1
                    )));
                }
            }
        }
        Ok(Boundary {
            id,
            pair,
            geometry: BoundaryGeometry::Patch(PlanarPatch {
                normal,
                offset,
                solved,
                free,
                extent,
                params,
            }),
        })
    }

    /// Number of parameters (1 for a segment, 2 for a patch).
    pub fn param_dim(&self) -> usize {
        match self.geometry {
            BoundaryGeometry::Segment { .. } => 1,
            BoundaryGeometry::Patch(_) => 2,
        }
    }

    /// Whether this boundary separates regions `a` and `b` (in either order).
    pub fn separates(&self, a: RegionId, b: RegionId) -> bool {
        (self.pair.0 == a && self.pair.1 == b) || (self.pair.0 == b && self.pair.1 == a)
    }

    /// The region on the other side from `r`, if `r` borders this boundary.
    pub fn other_side(&self, r: RegionId) -> Option<RegionId> {
        if self.pair.0 == r {
            Some(self.pair.1)
        } else if self.pair.1 == r {
            Some(self.pair.0)
        } else {
            None
        }
    }

    /// `x(λ)` without a domain check.
    #[inline]
    pub fn point(&self, lambda: &Lambda) -> Point {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => p1 * lambda.x + p2 * (1.0 - lambda.x),
            BoundaryGeometry::Patch(p) => {
                let mut x = Point::zeros();
                x[p.free[0]] = lambda.x;
                x[p.free[1]] = lambda.y;
                x[p.solved] = (p.offset - p.normal[p.free[0]] * lambda.x - p.normal[p.free[1]] * lambda.y)
                    / p.normal[p.solved];
                x
            }
        }
    }

    /// `x(λ)`, rejecting parameters outside the domain. The error carries the
    /// projection of `λ` onto the domain.
    pub fn boundary_point(&self, lambda: &Lambda) -> Result<Point, GeometryError> {
        if self.contains_param(lambda, PARAM_TOL) {
            Ok(self.point(lambda))
        } else {
            Err(GeometryError::DomainViolation {
                lambda: *lambda,
                clamped: self.clamp_param(lambda),
            })
        }
    }

    /// Columns of `∂x/∂λ`. The second column is zero for a segment.
    #[inline]
    pub fn jacobian(&self) -> [Point; 2] {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => [p1 - p2, Point::zeros()],
            BoundaryGeometry::Patch(p) => {
                let mut c0 = Point::zeros();
                let mut c1 = Point::zeros();
                c0[p.free[0]] = 1.0;
                c0[p.solved] = -p.normal[p.free[0]] / p.normal[p.solved];
                c1[p.free[1]] = 1.0;
                c1[p.solved] = -p.normal[p.free[1]] / p.normal[p.solved];
                [c0, c1]
            }
        }
    }

    /// Value of the implicit line/plane equation at `x` (unit normal, so it
    /// is the signed distance to the supporting line or plane).
    pub fn implicit(&self, x: &Point) -> f64 {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => {
                let d = (p1 - p2).normalize();
                let n = Point::new(-d.y, d.x, 0.0);
                n.dot(&(x - p2))
            }
            BoundaryGeometry::Patch(p) => p.normal.dot(x) - p.offset,
        }
    }

    pub fn contains_param(&self, lambda: &Lambda, tol: f64) -> bool {
        match &self.geometry {
            BoundaryGeometry::Segment { .. } => lambda.x >= -tol && lambda.x <= 1.0 + tol,
            BoundaryGeometry::Patch(p) => {
                let m = p.params.len();
                (0..m).all(|i| {
                    let a = p.params[i];
                    let b = p.params[(i + 1) % m];
                    let e = b - a;
                    cross2(&e, &(lambda - a)) >= -tol * e.norm()
                })
            }
        }
    }

    /// Euclidean projection of `λ` onto the parameter domain.
    pub fn clamp_param(&self, lambda: &Lambda) -> Lambda {
        match &self.geometry {
            BoundaryGeometry::Segment { .. } => Lambda::new(lambda.x.clamp(0.0, 1.0), 0.0),
            BoundaryGeometry::Patch(p) => {
                if self.contains_param(lambda, 0.0) {
                    return *lambda;
                }
                let m = p.params.len();
                (0..m)
                    .map(|i| closest_on_segment(lambda, &p.params[i], &p.params[(i + 1) % m]))
                    .min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm()))
                    .unwrap_or(*lambda)
            }
        }
    }

    /// Parameter of the point of the boundary's supporting line/plane
    /// closest to `x` (exact inverse of [`Boundary::point`] on the boundary).
    pub fn param_of(&self, x: &Point) -> Lambda {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => {
                let d = p1 - p2;
                Lambda::new((x - p2).dot(&d) / d.norm_squared(), 0.0)
            }
            BoundaryGeometry::Patch(p) => {
                let y = x - p.normal * (p.normal.dot(x) - p.offset);
                Lambda::new(y[p.free[0]], y[p.free[1]])
            }
        }
    }

    /// World length of a segment, or the diameter of a patch's extent.
    pub fn diameter(&self) -> f64 {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => (p1 - p2).norm(),
            BoundaryGeometry::Patch(p) => {
                let mut d: f64 = 0.0;
                for a in &p.extent {
                    for b in &p.extent {
                        d = d.max((a - b).norm());
                    }
                }
                d
            }
        }
    }

    /// World distance moved per unit change of one parameter component.
    pub fn param_scale(&self) -> f64 {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => (p1 - p2).norm(),
            BoundaryGeometry::Patch(_) => 1.0,
        }
    }

    /// Diameter of the parameter domain, in parameter units.
    pub fn param_diameter(&self) -> f64 {
        match &self.geometry {
            BoundaryGeometry::Segment { .. } => 1.0,
            BoundaryGeometry::Patch(p) => {
                let mut d: f64 = 0.0;
                for a in &p.params {
                    for b in &p.params {
                        d = d.max((a - b).norm());
                    }
                }
                d
            }
        }
    }

    pub fn centroid(&self) -> Point {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => (p1 + p2) / 2.0,
            BoundaryGeometry::Patch(p) => super::region::centroid(&p.extent),
        }
    }

    /// Corner points of the boundary: segment endpoints or patch vertices.
    pub fn vertices(&self) -> Vec<Point> {
        match &self.geometry {
            BoundaryGeometry::Segment { p1, p2 } => vec![*p1, *p2],
            BoundaryGeometry::Patch(p) => p.extent.clone(),
        }
    }

    /// Where the straight move `from → to` in parameter space leaves the
    /// domain. `from` must be inside. Returns the parameter on the domain
    /// face and the fraction of the move that stays inside.
    pub fn exit_point(&self, from: &Lambda, to: &Lambda) -> Option<(Lambda, f64)> {
        match &self.geometry {
            BoundaryGeometry::Segment { .. } => {
                let (f, t) = (from.x.clamp(0.0, 1.0), to.x);
                if t > 1.0 {
                    Some((Lambda::new(1.0, 0.0), (1.0 - f) / (t - f)))
                } else if t < 0.0 {
                    Some((Lambda::new(0.0, 0.0), f / (f - t)))
                } else {
                    None
                }
            }
            BoundaryGeometry::Patch(p) => {
                let from = self.clamp_param(from);
                let d = to - from;
                let m = p.params.len();
                let mut best: Option<f64> = None;
                for i in 0..m {
                    let a = p.params[i];
                    let e = p.params[(i + 1) % m] - a;
                    let inward = Lambda::new(-e.y, e.x);
                    let rate = inward.dot(&d);
                    if rate < 0.0 {
                        let t = (-inward.dot(&(from - a)) / rate).max(0.0);
                        if t < 1.0 && best.is_none_or(|b| t < b) {
                            best = Some(t);
                        }
                    }
                }
                best.map(|t| (self.clamp_param(&(from + d * t)), t))
            }
        }
    }

    /// Parameter of `x` if it lies on the boundary within `tol`.
    pub fn locate_point(&self, x: &Point, tol: f64) -> Option<Lambda> {
        let lambda = self.param_of(x);
        let scale = self.param_scale().max(1.0);
        if !self.contains_param(&lambda, tol / scale) {
            return None;
        }
        let lambda = self.clamp_param(&lambda);
        ((self.point(&lambda) - x).norm() <= tol).then_some(lambda)
    }

    /// For a patch, the extent edge that `x` lies on (within `tol`), as the
    /// pair of its world endpoints. Segments have no edges.
    pub fn edge_through(&self, x: &Point, tol: f64) -> Option<(Point, Point)> {
        let BoundaryGeometry::Patch(p) = &self.geometry else {
            return None;
        };
        let m = p.extent.len();
        (0..m)
            .map(|i| (p.extent[i], p.extent[(i + 1) % m]))
            .find(|(a, b)| point_segment_distance(x, a, b) <= tol)
    }
}

fn check_pair(pair: (RegionId, RegionId)) -> Result<(), GeometryError> {
    if pair.0 == pair.1 {
        Err(GeometryError::InvalidScene(format!(
            "boundary must separate two distinct regions, got {} twice",
            pair.0
        )))
    } else {
        Ok(())
    }
}

#[inline]
fn cross2(a: &Lambda, b: &Lambda) -> f64 {
    a.x * b.y - a.y * b.x
}

fn polygon_area(v: &[Lambda]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross2(&v[i], &v[(i + 1) % n])).sum::<f64>() / 2.0
}

fn closest_on_segment(q: &Lambda, a: &Lambda, b: &Lambda) -> Lambda {
    let e = b - a;
    let t = ((q - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
    a + e * t
}

pub(crate) fn point_segment_distance(x: &Point, a: &Point, b: &Point) -> f64 {
    let e = b - a;
    let len2 = e.norm_squared();
    if len2 == 0.0 {
        return (x - a).norm();
    }
    let t = ((x - a).dot(&e) / len2).clamp(0.0, 1.0);
    (x - (a + e * t)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg() -> Boundary {
        Boundary::segment(
            BoundaryId(0),
            (RegionId(1), RegionId(2)),
            Point::new(2.5, 9.5, 0.0),
            Point::new(10.0, 9.5, 0.0),
        )
        .unwrap()
    }

    fn plane_z10() -> Boundary {
        Boundary::patch(
            BoundaryId(0),
            (RegionId(1), RegionId(2)),
            Point::new(0.0, 0.0, 1.0),
            10.0,
            vec![
                Point::new(-10.0, -10.0, 10.0),
                Point::new(10.0, -10.0, 10.0),
                Point::new(10.0, 10.0, 10.0),
                Point::new(-10.0, 10.0, 10.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn segment_endpoints() {
        let b = seg();
        assert_eq!(b.boundary_point(&Lambda::new(1.0, 0.0)).unwrap(), Point::new(2.5, 9.5, 0.0));
        assert_eq!(b.boundary_point(&Lambda::new(0.0, 0.0)).unwrap(), Point::new(10.0, 9.5, 0.0));
    }

    #[test]
    fn segment_domain_violation_carries_clamp() {
        let err = seg().boundary_point(&Lambda::new(1.3, 0.0)).unwrap_err();
        assert_eq!(
            err,
            GeometryError::DomainViolation {
                lambda: Lambda::new(1.3, 0.0),
                clamped: Lambda::new(1.0, 0.0)
            }
        );
    }

    #[test]
    fn plane_point() {
        let b = plane_z10();
        let x = b.boundary_point(&Lambda::new(-0.9111, -0.8775)).unwrap();
        assert_abs_diff_eq!(x, Point::new(-0.9111, -0.8775, 10.0), epsilon = 1e-15);
    }

    #[test]
    fn tilted_plane_solves_largest_axis() {
        // nearly vertical plane x + 0.1 z = 1: solved axis must be x
        let n = Point::new(1.0, 0.0, 0.1);
        let pts: Vec<Point> = [(-1.0, 0.0), (1.0, 0.0), (1.0, 5.0), (-1.0, 5.0)]
            .iter()
            .map(|&(y, z)| Point::new(1.0 - 0.1 * z, y, z))
            .collect();
        let b = Boundary::patch(BoundaryId(0), (RegionId(1), RegionId(2)), n, 1.0, pts).unwrap();
        let BoundaryGeometry::Patch(p) = &b.geometry else { unreachable!() };
        assert_eq!(p.solved, 0);
        let x = b.point(&Lambda::new(0.3, 2.0));
        assert_abs_diff_eq!(b.implicit(&x), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.param_of(&x), Lambda::new(0.3, 2.0), epsilon = 1e-12);
    }

    #[test]
    fn patch_exit_and_clamp() {
        let b = plane_z10();
        let (lam, t) = b.exit_point(&Lambda::new(0.0, 0.0), &Lambda::new(20.0, 0.0)).unwrap();
        assert_abs_diff_eq!(lam, Lambda::new(10.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(t, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.clamp_param(&Lambda::new(12.0, 3.0)), Lambda::new(10.0, 3.0), epsilon = 1e-12);
        assert!(b.exit_point(&Lambda::new(0.0, 0.0), &Lambda::new(1.0, 1.0)).is_none());
    }

    #[test]
    fn rejects_degenerate() {
        let p = Point::new(1.0, 1.0, 0.0);
        assert!(Boundary::segment(BoundaryId(0), (RegionId(1), RegionId(2)), p, p).is_err());
        assert!(Boundary::segment(BoundaryId(0), (RegionId(1), RegionId(1)), p, Point::zeros()).is_err());
        assert!(Boundary::patch(BoundaryId(0), (RegionId(1), RegionId(2)), Point::zeros(), 1.0, vec![]).is_err());
    }
}
