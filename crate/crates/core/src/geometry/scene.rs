use super::{
    Boundary, BoundaryId, Dimension, GeometryError, HalfSpace, Lambda, Point, Region, RegionId, GEOM_TOL,
};
use std::collections::BTreeMap;

/// A point shared by two or more boundaries, with the boundaries and regions
/// that meet there.
#[derive(Debug, Clone, PartialEq)]
pub struct Corner {
    pub point: Point,
    pub boundaries: Vec<BoundaryId>,
    pub regions: Vec<RegionId>,
}

/// A piecewise-constant flow field over an axis-aligned domain box.
///
/// Immutable once built; share it freely between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowScene {
    name: String,
    dimension: Dimension,
    domain_min: Point,
    domain_max: Point,
    regions: Vec<Region>,
    boundaries: Vec<Boundary>,
    corners: Vec<Corner>,
}

impl FlowScene {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    pub fn domain(&self) -> (Point, Point) {
        (self.domain_min, self.domain_max)
    }

    /// Length of the domain box diagonal.
    pub fn diameter(&self) -> f64 {
        (self.domain_max - self.domain_min).norm()
    }

    /// Regions, sorted by id.
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn boundaries(&self) -> &[Boundary] {
        &self.boundaries
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn region(&self, id: RegionId) -> Option<&Region> {
        self.regions
            .binary_search_by_key(&id, |r| r.id)
            .ok()
            .map(|i| &self.regions[i])
    }

    /// Flow of a region known to exist.
    ///
    /// # Panics
    ///
    /// Panics if `id` is not a region of this scene.
    pub fn flow(&self, id: RegionId) -> Point {
        self.region(id).map(|r| r.flow).expect("unknown region id")
    }

    #[inline]
    pub fn boundary(&self, id: BoundaryId) -> &Boundary {
        &self.boundaries[id.0]
    }

    /// Boundaries separating `a` from `b`.
    pub fn boundaries_between(&self, a: RegionId, b: RegionId) -> impl Iterator<Item = &Boundary> {
        self.boundaries.iter().filter(move |bd| bd.separates(a, b))
    }

    pub fn in_domain(&self, x: &Point, tol: f64) -> bool {
        let d = self.dimension.as_usize();
        (0..d).all(|k| x[k] >= self.domain_min[k] - tol && x[k] <= self.domain_max[k] + tol)
    }

    /// The region whose closure contains `x`. Points on a boundary resolve to
    /// the smallest adjacent region id.
    pub fn locate_region(&self, x: &Point) -> Result<RegionId, GeometryError> {
        let tol = GEOM_TOL * self.scale();
        if !self.in_domain(x, tol) {
            return Err(GeometryError::OutOfDomain(*x));
        }
        self.regions
            .iter()
            .find(|r| r.contains(x, tol))
            .map(|r| r.id)
            .ok_or(GeometryError::OutOfDomain(*x))
    }

    /// The region `x` is deepest inside. Used for probe points known to be
    /// off every boundary, where it agrees with [`FlowScene::locate_region`].
    pub(crate) fn deepest_region(&self, x: &Point) -> Option<RegionId> {
        let tol = GEOM_TOL * self.scale();
        if !self.in_domain(x, tol) {
            return None;
        }
        self.regions
            .iter()
            .map(|r| (r.depth(x), r.id))
            .filter(|(d, _)| *d <= tol)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, id)| id)
    }

    pub(crate) fn scale(&self) -> f64 {
        self.domain_min.amax().max(self.domain_max.amax()).max(1.0)
    }

    /// Corner entry at `x`, if `x` is one.
    pub fn corner_at(&self, x: &Point) -> Option<&Corner> {
        let tol = GEOM_TOL * self.scale();
        self.corners.iter().find(|c| (c.point - x).norm() <= tol)
    }

    /// Half spaces of the domain box.
    pub fn domain_halfspaces(&self) -> Vec<HalfSpace> {
        box_halfspaces(self.dimension, &self.domain_min, &self.domain_max)
    }
}

fn box_halfspaces(dim: Dimension, lo: &Point, hi: &Point) -> Vec<HalfSpace> {
    let mut out = Vec::new();
    for k in 0..dim.as_usize() {
        let mut e = Point::zeros();
        e[k] = 1.0;
        out.push(HalfSpace { normal: e, offset: hi[k] });
        out.push(HalfSpace { normal: -e, offset: -lo[k] });
    }
    out
}

/// Incremental construction of a validated [`FlowScene`].
#[derive(Debug, Clone)]
pub struct SceneBuilder {
    name: String,
    dimension: Dimension,
    domain_min: Point,
    domain_max: Point,
    regions: Vec<Result<Region, GeometryError>>,
    boundaries: Vec<Result<Boundary, GeometryError>>,
}

impl SceneBuilder {
    pub fn new(dimension: Dimension, domain_min: Point, domain_max: Point) -> Self {
        SceneBuilder {
            name: String::new(),
            dimension,
            domain_min,
            domain_max,
            regions: Vec::new(),
            boundaries: Vec::new(),
        }
    }

    /// 2D domain `[x0, x1] × [y0, y1]`.
    pub fn planar(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self::new(Dimension::Two, Point::new(x0, y0, 0.0), Point::new(x1, y1, 0.0))
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// A 2D convex polygon region.
    pub fn polygon(mut self, id: u32, flow: [f64; 2], vertices: &[[f64; 2]]) -> Self {
        let verts = vertices.iter().map(|v| Point::new(v[0], v[1], 0.0)).collect();
        self.regions
            .push(Region::polygon(RegionId(id), Point::new(flow[0], flow[1], 0.0), verts));
        self
    }

    pub fn region(mut self, region: Region) -> Self {
        self.regions.push(Ok(region));
        self
    }

    /// A 3D convex region `{x : n·x <= b}` for each `(n, b)`, clipped to the domain box.
    pub fn polyhedron(mut self, id: u32, flow: [f64; 3], halfspaces: &[([f64; 3], f64)]) -> Self {
        let hs: Option<Vec<HalfSpace>> = halfspaces
            .iter()
            .map(|(n, b)| HalfSpace::new(Point::new(n[0], n[1], n[2]), *b))
            .collect();
        let bounds = box_halfspaces(self.dimension, &self.domain_min, &self.domain_max);
        let region = match hs {
            Some(hs) => Region::polyhedron(RegionId(id), Point::new(flow[0], flow[1], flow[2]), hs, &bounds),
            None => Err(GeometryError::InvalidScene(format!("region {id} has a zero half-space normal"))),
        };
        self.regions.push(region);
        self
    }

    /// A 2D boundary segment `p1`–`p2` between regions `a` and `b`.
    pub fn segment(mut self, a: u32, b: u32, p1: [f64; 2], p2: [f64; 2]) -> Self {
        let id = BoundaryId(self.boundaries.len());
        self.boundaries.push(Boundary::segment(
            id,
            (RegionId(a), RegionId(b)),
            Point::new(p1[0], p1[1], 0.0),
            Point::new(p2[0], p2[1], 0.0),
        ));
        self
    }

    /// A 3D planar boundary `normal · x = offset` with a convex polygonal extent.
    pub fn patch(mut self, a: u32, b: u32, normal: [f64; 3], offset: f64, extent: &[[f64; 3]]) -> Self {
        let id = BoundaryId(self.boundaries.len());
        self.boundaries.push(Boundary::patch(
            id,
            (RegionId(a), RegionId(b)),
            Point::new(normal[0], normal[1], normal[2]),
            offset,
            extent.iter().map(|p| Point::new(p[0], p[1], p[2])).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<FlowScene, GeometryError> {
        let dim = self.dimension;
        let is_3d = dim == Dimension::Three;
        let (lo, hi) = (self.domain_min, self.domain_max);
        for k in 0..dim.as_usize() {
            if !(lo[k] < hi[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return Err(GeometryError::InvalidScene("domain box is empty".into()));
            }
        }
        let mut regions = self.regions.into_iter().collect::<Result<Vec<_>, _>>()?;
        let mut boundaries = self.boundaries.into_iter().collect::<Result<Vec<_>, _>>()?;
        if regions.is_empty() {
            return Err(GeometryError::InvalidScene("scene has no regions".into()));
        }
        regions.sort_by_key(|r| r.id);
        if regions.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(GeometryError::InvalidScene("duplicate region id".into()));
        }
        for (i, b) in boundaries.iter_mut().enumerate() {
            b.id = BoundaryId(i);
            let wrong_dim = match b.geometry {
                super::BoundaryGeometry::Segment { .. } => is_3d,
                super::BoundaryGeometry::Patch(_) => !is_3d,
            };
            if wrong_dim {
                return Err(GeometryError::InvalidScene(format!(
                    "boundary {}-{} does not match the scene dimension",
                    b.pair.0, b.pair.1
                )));
            }
        }
        let scene = FlowScene {
            name: self.name,
            dimension: dim,
            domain_min: lo,
            domain_max: hi,
            regions,
            boundaries,
            corners: Vec::new(),
        };
        scene.validate()?;
        let corners = scene.build_corners();
        Ok(FlowScene { corners, ..scene })
    }
}

impl FlowScene {
    fn validate(&self) -> Result<(), GeometryError> {
        let is_3d = self.dimension == Dimension::Three;
        let tol = GEOM_TOL * self.scale();
        if !is_3d {
            let flat = |p: &Point| p.z == 0.0;
            if self.regions.iter().any(|r| !flat(&r.flow) || !r.vertices().iter().all(flat)) {
                return Err(GeometryError::InvalidScene("2D scene with nonzero z components".into()));
            }
        }
        for r in &self.regions {
            if r.vertices().iter().any(|v| !self.in_domain(v, tol)) {
                return Err(GeometryError::InvalidScene(format!("region {} leaves the domain box", r.id)));
            }
        }
        for b in &self.boundaries {
            let (ra, rb) = match (self.region(b.pair.0), self.region(b.pair.1)) {
                (Some(ra), Some(rb)) => (ra, rb),
                _ => {
                    return Err(GeometryError::InvalidScene(format!(
                        "boundary {}-{} references an unknown region",
                        b.pair.0, b.pair.1
                    )))
                }
            };
            for v in b.vertices().iter().chain(std::iter::once(&b.centroid())) {
                if !ra.contains(v, tol) || !rb.contains(v, tol) {
                    return Err(GeometryError::InvalidScene(format!(
                        "boundary {}-{} does not lie on both of its regions",
                        b.pair.0, b.pair.1
                    )));
                }
            }
        }
        // closures cover the box: measures add up and interiors do not overlap
        let box_measure: f64 = (0..self.dimension.as_usize())
            .map(|k| self.domain_max[k] - self.domain_min[k])
            .product();
        let total: f64 = self.regions.iter().map(|r| r.measure(is_3d)).sum();
        if (total - box_measure).abs() > 1e-7 * box_measure {
            return Err(GeometryError::InvalidScene(format!(
                "regions cover {total} of a domain of size {box_measure}"
            )));
        }
        let n = if is_3d { 12 } else { 48 };
        let steps = if is_3d { [n, n, n] } else { [n, n, 1] };
        for i in 0..steps[0] {
            for j in 0..steps[1] {
                for k in 0..steps[2] {
                    let mut p = Point::zeros();
                    for (axis, idx) in [i, j, k].into_iter().enumerate().take(self.dimension.as_usize()) {
                        let f = (idx as f64 + 0.5) / steps[axis] as f64;
                        p[axis] = self.domain_min[axis] + f * (self.domain_max[axis] - self.domain_min[axis]);
                    }
                    let inside = self.regions.iter().filter(|r| r.depth(&p) < -tol).count();
                    if inside > 1 {
                        return Err(GeometryError::InvalidScene(format!("regions overlap near {p:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Groups boundary vertices that coincide within tolerance; keeps the
    /// groups touched by at least two boundaries.
    fn build_corners(&self) -> Vec<Corner> {
        let tol = GEOM_TOL * self.scale();
        let mut points: Vec<Point> = Vec::new();
        for b in &self.boundaries {
            for v in b.vertices() {
                if !points.iter().any(|p| (p - v).norm() <= tol) {
                    points.push(v);
                }
            }
        }
        let mut corners = Vec::new();
        for p in points {
            let boundaries: Vec<BoundaryId> = self
                .boundaries
                .iter()
                .filter(|b| b.locate_point(&p, tol).is_some())
                .map(|b| b.id)
                .collect();
            if boundaries.len() < 2 {
                continue;
            }
            let regions: Vec<RegionId> = self
                .regions
                .iter()
                .filter(|r| r.contains(&p, tol))
                .map(|r| r.id)
                .collect();
            corners.push(Corner { point: p, boundaries, regions });
        }
        corners.sort_by(|a, b| {
            let ka: Vec<f64> = a.point.iter().copied().collect();
            let kb: Vec<f64> = b.point.iter().copied().collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
        corners
    }

    /// Regions adjacent to each region, by boundary.
    pub fn adjacency(&self) -> BTreeMap<RegionId, Vec<(RegionId, BoundaryId)>> {
        let mut adj: BTreeMap<RegionId, Vec<(RegionId, BoundaryId)>> = BTreeMap::new();
        for r in &self.regions {
            adj.entry(r.id).or_default();
        }
        for b in &self.boundaries {
            adj.entry(b.pair.0).or_default().push((b.pair.1, b.id));
            adj.entry(b.pair.1).or_default().push((b.pair.0, b.id));
        }
        adj
    }

    /// Parameter of `x` on boundary `b` if `x` lies on it.
    pub fn param_on(&self, b: BoundaryId, x: &Point) -> Option<Lambda> {
        self.boundary(b).locate_point(x, GEOM_TOL * self.scale())
    }
}
