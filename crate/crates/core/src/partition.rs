//! Reduces a gridded flow field to a piecewise-constant description.
//!
//! The pipeline clusters grid cells by normalized position and velocity
//! with k-means, collects midpoints between neighbouring cells of different
//! clusters, fits a straight line through each cluster pair's midpoints, and
//! averages the flow per cluster. Turning the lines into convex regions is
//! left to the user; [`scene_skeleton`] writes a starting point.

use nalgebra::{Matrix2, SymmetricEigen, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Read;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("line {line}: {msg}")]
    Csv { line: u64, msg: String },
    #[error("grid: {0}")]
    Grid(String),
    #[error("flow is zero everywhere; cluster on positions only")]
    ZeroFlow,
    #[error("invalid cluster count {k} for {n} distinct feature vectors")]
    InvalidK { k: usize, n: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("need at least two distinct points to fit a line")]
    TooFewPoints,
}

/// Flow samples on a rectangular lattice, stored row by row:
/// cell `(ix, iy)` is at index `iy * nx + ix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowGrid {
    pub nx: usize,
    pub ny: usize,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
}

impl FlowGrid {
    pub fn new(nx: usize, ny: usize, positions: Vec<[f64; 2]>, velocities: Vec<[f64; 2]>) -> Result<Self, PartitionError> {
        let g = FlowGrid { nx, ny, positions, velocities };
        g.validate()?;
        Ok(g)
    }

    /// A grid from axis coordinates and a velocity function.
    pub fn from_fn(xs: &[f64], ys: &[f64], f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let mut positions = Vec::with_capacity(xs.len() * ys.len());
        let mut velocities = Vec::with_capacity(xs.len() * ys.len());
        for &y in ys {
            for &x in xs {
                positions.push([x, y]);
                velocities.push(f(x, y));
            }
        }
        FlowGrid { nx: xs.len(), ny: ys.len(), positions, velocities }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    fn validate(&self) -> Result<(), PartitionError> {
        let n = self.nx * self.ny;
        if n == 0 {
            return Err(PartitionError::Grid("grid is empty".into()));
        }
        if self.positions.len() != n || self.velocities.len() != n {
            return Err(PartitionError::Grid(format!(
                "{} cells for a {}×{} grid",
                self.positions.len(),
                self.nx,
                self.ny
            )));
        }
        if self.velocities.iter().flatten().chain(self.positions.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(PartitionError::Grid("non-finite value".into()));
        }
        let scale = self.positions.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
        let tol = 1e-9 * scale;
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let p = self.positions[self.index(ix, iy)];
                let (px, py) = (self.positions[ix][0], self.positions[self.index(0, iy)][1]);
                if (p[0] - px).abs() > tol || (p[1] - py).abs() > tol {
                    return Err(PartitionError::Grid(format!("cell ({ix}, {iy}) is off the lattice")));
                }
            }
        }
        Ok(())
    }

    /// Reads `x,y,u,v` rows. The row length `nx` is the number of leading
    /// rows sharing the first `y`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, PartitionError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header_line = 1;
        let headers = rdr
            .headers()
            .map_err(|e| PartitionError::Csv { line: header_line, msg: e.to_string() })?
            .clone();
        let names: Vec<&str> = headers.iter().collect();
        if names != ["x", "y", "u", "v"] {
            return Err(PartitionError::Csv {
                line: header_line,
                msg: format!("expected header x,y,u,v, found {}", names.join(",")),
            });
        }
        let mut positions = Vec::new();
        let mut velocities = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| PartitionError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != 4 {
                return Err(PartitionError::Csv { line, msg: format!("expected 4 fields, found {}", rec.len()) });
            }
            let mut vals = [0.0; 4];
            for (k, f) in rec.iter().enumerate() {
                vals[k] = f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| PartitionError::Csv {
                    line,
                    msg: format!("field {} is not a finite number: {f:?}", headers.get(k).unwrap_or("?")),
                })?;
            }
            positions.push([vals[0], vals[1]]);
            velocities.push([vals[2], vals[3]]);
        }
        let Some(first) = positions.first() else {
            return Err(PartitionError::Grid("no data rows".into()));
        };
        let nx = positions.iter().take_while(|p| p[1] == first[1]).count();
        if positions.len() % nx != 0 {
            return Err(PartitionError::Grid(format!(
                "{} rows do not fill rows of {nx} cells",
                positions.len()
            )));
        }
        let ny = positions.len() / nx;
        FlowGrid::new(nx, ny, positions, velocities)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["x", "y", "u", "v"]).expect("in-memory write");
        for (p, v) in self.positions.iter().zip(&self.velocities) {
            w.serialize((p[0], p[1], v[0], v[1])).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv is utf-8")
    }

    /// `(min, max)` corners of the sample positions.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.positions {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Per-cell features `[|x|/max|x|, |y|/max|y|, u/max‖u‖, v/max‖u‖]`.
pub fn feature_vectors(grid: &FlowGrid) -> Result<Vec<[f64; 4]>, PartitionError> {
    if grid.is_empty() {
        return Err(PartitionError::Grid("grid is empty".into()));
    }
    let mx = grid.positions.iter().fold(0.0_f64, |m, p| m.max(p[0].abs()));
    let my = grid.positions.iter().fold(0.0_f64, |m, p| m.max(p[1].abs()));
    let mu = grid.velocities.iter().fold(0.0_f64, |m, v| m.max(v[0].hypot(v[1])));
    if mu == 0.0 {
        return Err(PartitionError::ZeroFlow);
    }
    let sx = if mx > 0.0 { mx } else { 1.0 };
    let sy = if my > 0.0 { my } else { 1.0 };
    Ok(grid
        .positions
        .iter()
        .zip(&grid.velocities)
        .map(|(p, v)| [p[0].abs() / sx, p[1].abs() / sy, v[0] / mu, v[1] / mu])
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Independent seedings; the lowest final objective wins.
    pub n_init: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions { max_iter: 300, n_init: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans {
    pub labels: Vec<usize>,
    pub centroids: Vec<[f64; 4]>,
    /// Objective `Σ ‖y − μ‖²` after the initial assignment and after each
    /// iteration of the winning run.
    pub objective_history: Vec<f64>,
    pub converged: bool,
}

impl KMeans {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().unwrap_or(&f64::NAN)
    }
}

#[inline]
fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's k-means with distance-weighted seeding.
pub fn kmeans(features: &[[f64; 4]], k: usize, seed: u64, opts: KMeansOptions) -> Result<KMeans, PartitionError> {
    let mut distinct: Vec<[f64; 4]> = features.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    distinct.dedup();
    if k == 0 || k > distinct.len() {
        return Err(PartitionError::InvalidK { k, n: distinct.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans> = None;
    for _ in 0..opts.n_init.max(1) {
        let run = lloyd(features, k, &mut rng, opts.max_iter);
        if best.as_ref().is_none_or(|b| run.objective() < b.objective()) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

fn seed_centroids(features: &[[f64; 4]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 4]> {
    let mut cents = vec![features[rng.random_range(0..features.len())]];
    let mut d2: Vec<f64> = features.iter().map(|f| dist2(f, &cents[0])).collect();
    while cents.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = features.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if r < *w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.random_range(0..features.len())
        };
        let c = features[pick];
        for (d, f) in d2.iter_mut().zip(features) {
            *d = d.min(dist2(f, &c));
        }
        cents.push(c);
    }
    cents
}

fn assign(features: &[[f64; 4]], cents: &[[f64; 4]]) -> (Vec<usize>, f64) {
    let mut obj = 0.0;
    let labels = features
        .iter()
        .map(|f| {
            let (j, d) = cents
                .iter()
                .enumerate()
                .map(|(j, c)| (j, dist2(f, c)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("k >= 1");
            obj += d;
            j
        })
        .collect();
    (labels, obj)
}

fn objective(features: &[[f64; 4]], labels: &[usize], cents: &[[f64; 4]]) -> f64 {
    features.iter().zip(labels).map(|(f, &l)| dist2(f, &cents[l])).sum()
}

fn lloyd(features: &[[f64; 4]], k: usize, rng: &mut ChaCha8Rng, max_iter: usize) -> KMeans {
    let mut cents = seed_centroids(features, k, rng);
    let (mut labels, obj) = assign(features, &cents);
    let mut history = vec![obj];
    let mut converged = false;
    for _ in 0..max_iter {
        // update step
        let mut sums = vec![[0.0; 4]; k];
        let mut counts = vec![0usize; k];
        for (f, &l) in features.iter().zip(&labels) {
            counts[l] += 1;
            for d in 0..4 {
                sums[l][d] += f[d];
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                for d in 0..4 {
                    cents[j][d] = sums[j][d] / counts[j] as f64;
                }
            }
        }
        for j in 0..k {
            if counts[j] == 0 {
                // reseed to the point farthest from its centroid
                let far = (0..features.len())
                    .max_by(|&a, &b| {
                        dist2(&features[a], &cents[labels[a]]).total_cmp(&dist2(&features[b], &cents[labels[b]]))
                    })
                    .expect("nonempty");
                cents[j] = features[far];
                counts[labels[far]] -= 1;
                labels[far] = j;
                counts[j] = 1;
            }
        }
        history.push(objective(features, &labels, &cents));
        let (next, obj) = assign(features, &cents);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
        history.push(obj);
    }
    KMeans { labels, centroids: cents, objective_history: history, converged }
}

/// Midpoints between 4-neighbours with different labels, keyed by
/// `(smaller label, larger label)`.
pub fn boundary_points(grid: &FlowGrid, labels: &[usize]) -> BTreeMap<(usize, usize), Vec<[f64; 2]>> {
    let mut out: BTreeMap<(usize, usize), Vec<[f64; 2]>> = BTreeMap::new();
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let i = grid.index(ix, iy);
            let mut nbrs = Vec::with_capacity(2);
            if ix + 1 < grid.nx {
                nbrs.push(grid.index(ix + 1, iy));
            }
            if iy + 1 < grid.ny {
                nbrs.push(grid.index(ix, iy + 1));
            }
            for j in nbrs {
                let (a, b) = (labels[i], labels[j]);
                if a != b {
                    let (p, q) = (grid.positions[i], grid.positions[j]);
                    out.entry((a.min(b), a.max(b)))
                        .or_default()
                        .push([(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]);
                }
            }
        }
    }
    out
}

/// Objective of [`fit_line`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineFitLoss {
    /// Sum of squared perpendicular distances (closed form).
    #[default]
    Squared,
    /// Sum of perpendicular distances (iteratively reweighted).
    Absolute,
}

/// A fitted boundary line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum FittedLine {
    /// `a·x + y + c = 0`.
    Sloped { a: f64, c: f64 },
    /// `x = x`, which the sloped form cannot express.
    Vertical { x: f64 },
}

impl FittedLine {
    /// Perpendicular distance from `p` to the line.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        match *self {
            FittedLine::Sloped { a, c } => (a * p[0] + p[1] + c).abs() / a.hypot(1.0),
            FittedLine::Vertical { x } => (p[0] - x).abs(),
        }
    }

    /// The part of the line inside the box `lo`–`hi`, if any.
    pub fn clip(&self, lo: [f64; 2], hi: [f64; 2]) -> Option<[[f64; 2]; 2]> {
        match *self {
            FittedLine::Vertical { x } => (x >= lo[0] && x <= hi[0]).then_some([[x, lo[1]], [x, hi[1]]]),
            FittedLine::Sloped { a, c } => {
                // y = -a x - c, parametrized by x, clipped in y
                let (mut x0, mut x1) = (lo[0], hi[0]);
                if a != 0.0 {
                    let xa = (-c - lo[1]) / a;
                    let xb = (-c - hi[1]) / a;
                    x0 = x0.max(xa.min(xb));
                    x1 = x1.min(xa.max(xb));
                } else if -c < lo[1] || -c > hi[1] {
                    return None;
                }
                (x0 <= x1).then_some([[x0, -a * x0 - c], [x1, -a * x1 - c]])
            }
        }
    }
}

/// Straight line through `points` by orthogonal regression.
pub fn fit_line(points: &[[f64; 2]], loss: LineFitLoss) -> Result<FittedLine, PartitionError> {
    let first = points.first().ok_or(PartitionError::TooFewPoints)?;
    if !points.iter().any(|p| (p[0] - first[0]).hypot(p[1] - first[1]) > 0.0) {
        return Err(PartitionError::TooFewPoints);
    }
    let mut weights = vec![1.0; points.len()];
    let mut line = weighted_fit(points, &weights);
    if loss == LineFitLoss::Absolute {
        for _ in 0..100 {
            for (w, p) in weights.iter_mut().zip(points) {
                *w = 1.0 / line.distance(*p).max(1e-9);
            }
            let next = weighted_fit(points, &weights);
            let moved = match (line, next) {
                (FittedLine::Sloped { a, c }, FittedLine::Sloped { a: a2, c: c2 }) => (a - a2).abs() + (c - c2).abs(),
                (FittedLine::Vertical { x }, FittedLine::Vertical { x: x2 }) => (x - x2).abs(),
                _ => f64::INFINITY,
            };
            line = next;
            if moved < 1e-12 {
                break;
            }
        }
    }
    Ok(line)
}

fn weighted_fit(points: &[[f64; 2]], w: &[f64]) -> FittedLine {
    let total: f64 = w.iter().sum();
    let cx = points.iter().zip(w).map(|(p, w)| w * p[0]).sum::<f64>() / total;
    let cy = points.iter().zip(w).map(|(p, w)| w * p[1]).sum::<f64>() / total;
    let mut cov = Matrix2::zeros();
    for (p, w) in points.iter().zip(w) {
        let d = Vector2::new(p[0] - cx, p[1] - cy);
        cov += d * d.transpose() * *w;
    }
    let eig = SymmetricEigen::new(cov);
    let i = if eig.eigenvalues[0] <= eig.eigenvalues[1] { 0 } else { 1 };
    let n = eig.eigenvectors.column(i).into_owned();
    if n.y.abs() <= 1e-9 * n.norm() {
        return FittedLine::Vertical { x: cx };
    }
    let a = n.x / n.y;
    FittedLine::Sloped { a, c: -(a * cx + cy) }
}

/// Mean velocity of each label class.
pub fn region_mean_flow(grid: &FlowGrid, labels: &[usize], k: usize) -> Result<Vec<[f64; 2]>, PartitionError> {
    let mut sums = vec![[0.0; 2]; k];
    let mut counts = vec![0usize; k];
    for (v, &l) in grid.velocities.iter().zip(labels) {
        sums[l][0] += v[0];
        sums[l][1] += v[1];
        counts[l] += 1;
    }
    (0..k)
        .map(|j| {
            if counts[j] == 0 {
                Err(PartitionError::EmptyCluster(j))
            } else {
                Ok([sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64])
            }
        })
        .collect()
}

/// Spherical Mercator projection of `(lon, lat)` in degrees about
/// `(lon0, lat0)`, in the units of `radius`.
pub fn mercator(lon: f64, lat: f64, lon0: f64, lat0: f64, radius: f64) -> [f64; 2] {
    let y = |phi: f64| (std::f64::consts::FRAC_PI_4 + phi.to_radians() / 2.0).tan().ln();
    [radius * (lon - lon0).to_radians(), radius * (y(lat) - y(lat0))]
}

/// Splits boundary midpoints into connected curves: two points belong to
/// the same curve when a chain of points less than `1.5 × spacing` apart
/// links them. Curves come out in order of their first point.
pub fn boundary_curves(points: &[[f64; 2]], spacing: f64) -> Vec<Vec<[f64; 2]>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let reach = 1.5 * spacing;
    for i in 0..n {
        for j in i + 1..n {
            let d = (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
            if d < reach {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<[f64; 2]>> = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(*p);
    }
    groups.into_values().collect()
}

/// Largest distance between neighbouring lattice lines.
pub fn lattice_spacing(grid: &FlowGrid) -> f64 {
    let dx = (1..grid.nx).map(|i| grid.positions[i][0] - grid.positions[i - 1][0]);
    let dy = (1..grid.ny).map(|j| grid.positions[grid.index(0, j)][1] - grid.positions[grid.index(0, j - 1)][1]);
    dx.chain(dy).map(f64::abs).fold(0.0, f64::max)
}

/// One connected boundary curve between two clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterBoundary {
    pub pair: [usize; 2],
    pub points: Vec<[f64; 2]>,
    /// `None` when the points cannot define a line.
    pub line: Option<FittedLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub k: usize,
    pub labels: Vec<usize>,
    pub centroids: Vec<[f64; 4]>,
    pub mean_flows: Vec<[f64; 2]>,
    pub boundaries: Vec<ClusterBoundary>,
    pub objective_history: Vec<f64>,
}

/// Runs the full pipeline.
pub fn partition(
    grid: &FlowGrid,
    k: usize,
    seed: u64,
    opts: KMeansOptions,
    loss: LineFitLoss,
) -> Result<PartitionResult, PartitionError> {
    let features = feature_vectors(grid)?;
    let km = kmeans(&features, k, seed, opts)?;
    let mean_flows = region_mean_flow(grid, &km.labels, k)?;
    let spacing = lattice_spacing(grid);
    let boundaries = boundary_points(grid, &km.labels)
        .into_iter()
        .flat_map(|((a, b), points)| {
            boundary_curves(&points, spacing).into_iter().map(move |points| {
                let line = fit_line(&points, loss).ok();
                ClusterBoundary { pair: [a, b], points, line }
            })
        })
        .collect();
    Ok(PartitionResult {
        k,
        labels: km.labels,
        centroids: km.centroids,
        mean_flows,
        boundaries,
        objective_history: km.objective_history,
    })
}

/// Scene-file JSON to finish by hand: the grid's bounding box, one region
/// per cluster with its mean flow and no geometry, and each fitted line
/// clipped to the box as a boundary.
pub fn scene_skeleton(grid: &FlowGrid, result: &PartitionResult) -> serde_json::Value {
    let (lo, hi) = grid.bounds();
    let regions: Vec<_> = result
        .mean_flows
        .iter()
        .enumerate()
        .map(|(i, f)| serde_json::json!({ "id": i + 1, "flow": f, "vertices": [] }))
        .collect();
    let boundaries: Vec<_> = result
        .boundaries
        .iter()
        .filter_map(|b| {
            let seg = b.line?.clip(lo, hi)?;
            Some(serde_json::json!({ "pair": [b.pair[0] + 1, b.pair[1] + 1], "endpoints": seg }))
        })
        .collect();
    serde_json::json!({
        "name": "partition",
        "dimension": 2,
        "domain": { "min": lo, "max": hi },
        "regions": regions,
        "boundaries": boundaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn features_normalize() {
        let g = FlowGrid::new(2, 1, vec![[-2.0, 4.0], [1.0, 4.0]], vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let f = feature_vectors(&g).unwrap();
        assert_eq!(f[0], [1.0, 1.0, 1.0, 0.0]);
        assert_eq!(f[1], [0.5, 1.0, 0.0, 1.0]);
        let single = FlowGrid::new(1, 1, vec![[3.0, 5.0]], vec![[2.0, 0.0]]).unwrap();
        assert_eq!(feature_vectors(&single).unwrap()[0], [1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn zero_flow_is_an_error() {
        let g = FlowGrid::new(1, 1, vec![[1.0, 1.0]], vec![[0.0, 0.0]]).unwrap();
        assert!(matches!(feature_vectors(&g), Err(PartitionError::ZeroFlow)));
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let f = vec![[0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0]];
        let km = kmeans(&f, 1, 3, KMeansOptions::default()).unwrap();
        assert_eq!(km.labels, vec![0, 0, 0]);
        for (c, e) in km.centroids[0].iter().zip([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_k() {
        let f = vec![[0.0; 4], [0.0; 4]];
        assert!(matches!(kmeans(&f, 2, 0, KMeansOptions::default()), Err(PartitionError::InvalidK { .. })));
        assert!(matches!(kmeans(&f, 0, 0, KMeansOptions::default()), Err(PartitionError::InvalidK { .. })));
    }

    #[test]
    fn separated_blobs() {
        let mut f = Vec::new();
        for i in 0..20 {
            let e = i as f64 * 1e-3;
            f.push([e, 0.0, 0.0, 0.0]);
            f.push([5.0 + e, 5.0, 0.0, 0.0]);
        }
        let km = kmeans(&f, 2, 11, KMeansOptions::default()).unwrap();
        for pair in km.labels.chunks(2) {
            assert_ne!(pair[0], pair[1]);
        }
        assert!(km.labels.iter().step_by(2).all(|l| *l == km.labels[0]));
    }

    #[test]
    fn two_cell_boundary() {
        let g = FlowGrid::new(2, 1, vec![[0.0, 0.0], [1.0, 0.0]], vec![[1.0, 0.0], [0.0, 0.0]]).unwrap();
        let b = boundary_points(&g, &[0, 1]);
        assert_eq!(b[&(0, 1)], vec![[0.5, 0.0]]);
        assert!(boundary_points(&g, &[1, 1]).is_empty());
    }

    #[test]
    fn exact_line_fits() {
        let l = fit_line(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], LineFitLoss::Squared).unwrap();
        let FittedLine::Sloped { a, c } = l else { panic!("{l:?}") };
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
        let l = fit_line(&[[0.0, 1.0], [1.0, 2.0], [2.0, 3.0]], LineFitLoss::Squared).unwrap();
        let FittedLine::Sloped { a, c } = l else { panic!("{l:?}") };
        assert_abs_diff_eq!(a, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, -1.0, epsilon = 1e-12);
        let l = fit_line(&[[2.0, 0.0], [2.0, 1.0], [2.0, 5.0]], LineFitLoss::Squared).unwrap();
        assert_eq!(l, FittedLine::Vertical { x: 2.0 });
        assert!(fit_line(&[[1.0, 1.0], [1.0, 1.0]], LineFitLoss::Squared).is_err());
    }

    #[test]
    fn absolute_loss_ignores_an_outlier() {
        let mut pts: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, 1.0]).collect();
        pts.push([10.0, 9.0]);
        let sq = fit_line(&pts, LineFitLoss::Squared).unwrap();
        let ab = fit_line(&pts, LineFitLoss::Absolute).unwrap();
        assert!(ab.distance([5.0, 1.0]) < 1e-3);
        assert!(sq.distance([5.0, 1.0]) > ab.distance([5.0, 1.0]));
    }

    #[test]
    fn mean_flows() {
        let g = FlowGrid::new(
            3,
            1,
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![[1.0, 0.0], [3.0, 0.0], [2.9, 0.0]],
        )
        .unwrap();
        assert_eq!(region_mean_flow(&g, &[0, 0, 1], 2).unwrap(), vec![[2.0, 0.0], [2.9, 0.0]]);
        assert!(matches!(region_mean_flow(&g, &[0, 0, 0], 2), Err(PartitionError::EmptyCluster(1))));
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let g = FlowGrid::from_fn(&[0.0, 1.0, 2.5], &[0.0, 2.0], |x, y| [x, -y]);
        let back = FlowGrid::from_csv(g.to_csv().as_bytes()).unwrap();
        assert_eq!(back, g);
        let err = FlowGrid::from_csv("x,y,u,v\n0,0,1,1\n1,0,abc,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        let err = FlowGrid::from_csv("x,y,speed\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 1:"), "{err}");
    }

    #[test]
    fn parallel_edges_are_separate_curves() {
        let mut pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 * 0.5, 7.5]).collect();
        pts.extend((0..10).map(|i| [i as f64 * 0.5, 10.5]));
        let curves = boundary_curves(&pts, 0.5);
        assert_eq!(curves.len(), 2);
        assert!(curves[0].iter().all(|p| p[1] == 7.5));
    }

    #[test]
    fn mercator_origin_and_equator() {
        assert_eq!(mercator(10.0, 20.0, 10.0, 20.0, 6371.0), [0.0, 0.0]);
        let p = mercator(1.0, 0.0, 0.0, 0.0, 1.0);
        assert_abs_diff_eq!(p[0], 1f64.to_radians(), epsilon = 1e-15);
    }

    #[test]
    fn clip_to_box() {
        let seg = FittedLine::Sloped { a: 0.0, c: -7.5 }.clip([-10.0, 0.0], [10.0, 20.0]).unwrap();
        assert_eq!(seg, [[-10.0, 7.5], [10.0, 7.5]]);
        assert!(FittedLine::Sloped { a: 0.0, c: -30.0 }.clip([-10.0, 0.0], [10.0, 20.0]).is_none());
    }
}
