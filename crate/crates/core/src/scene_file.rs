//! JSON scene format.
//!
//! ```json
//! {
//!   "name": "jet",
//!   "dimension": 2,
//!   "domain": { "min": [-10, 0], "max": [10, 20] },
//!   "regions": [
//!     { "id": 1, "flow": [0, 0], "vertices": [[-10, 0], [10, 0], [10, 7.5], [-10, 7.5]] }
//!   ],
//!   "boundaries": [
//!     { "pair": [1, 2], "endpoints": [[-10, 7.5], [10, 7.5]] }
//!   ],
//!   "start": [0, 0],
//!   "goal": [0, 20],
//!   "model": { "kind": "time", "speed": 3 }
//! }
//! ```
//!
//! 3D regions give `halfspaces` (`{"normal": [..], "offset": b}` meaning
//! `normal · x <= b`, clipped to the domain box) instead of `vertices`, and 3D
//! boundaries give `plane` and `extent` instead of `endpoints`. Unknown keys
//! are ignored with a warning.

use crate::cost::CostModel;
use crate::geometry::{BoundaryGeometry, Dimension, FlowScene, GeometryError, HalfSpace, Point, SceneBuilder};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneFileError {
    #[error("scene JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("scene: {0}")]
    Geometry(#[from] GeometryError),
    #[error("scene: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub id: u32,
    pub flow: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfSpaceSpec>>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub pair: [u32; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<[Vec<f64>; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plane: Option<HalfSpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<Vec<Vec<f64>>>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, serde_json::Value>,
}

/// Optional optimizer settings stored with a scene.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb_duration: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_descent_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub name: String,
    pub dimension: usize,
    pub domain: DomainSpec,
    pub regions: Vec<RegionSpec>,
    pub boundaries: Vec<BoundarySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<CostModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleOverrides>,
    #[serde(flatten, skip_serializing)]
    pub unknown: BTreeMap<String, serde_json::Value>,
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self, SceneFileError> {
        let file: SceneFile = serde_json::from_str(text)?;
        let unknown = file.unknown_keys();
        if !unknown.is_empty() {
            log::warn!("ignoring unknown scene keys: {}", unknown.join(", "));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialization cannot fail")
    }

    /// Dotted paths of keys the format does not define.
    pub fn unknown_keys(&self) -> Vec<String> {
        let mut out: Vec<String> = self.unknown.keys().cloned().collect();
        for (i, r) in self.regions.iter().enumerate() {
            out.extend(r.unknown.keys().map(|k| format!("regions[{i}].{k}")));
        }
        for (i, b) in self.boundaries.iter().enumerate() {
            out.extend(b.unknown.keys().map(|k| format!("boundaries[{i}].{k}")));
        }
        out
    }

    pub fn dimension(&self) -> Result<Dimension, SceneFileError> {
        Dimension::from_usize(self.dimension)
            .ok_or_else(|| SceneFileError::Schema(format!("dimension must be 2 or 3, got {}", self.dimension)))
    }

    pub fn start_point(&self) -> Result<Option<Point>, SceneFileError> {
        self.start.as_deref().map(|v| point(v, self.dimension, "start")).transpose()
    }

    pub fn goal_point(&self) -> Result<Option<Point>, SceneFileError> {
        self.goal.as_deref().map(|v| point(v, self.dimension, "goal")).transpose()
    }

    pub fn build(&self) -> Result<FlowScene, SceneFileError> {
        let dim = self.dimension()?;
        let n = self.dimension;
        let lo = point(&self.domain.min, n, "domain.min")?;
        let hi = point(&self.domain.max, n, "domain.max")?;
        let mut b = SceneBuilder::new(dim, lo, hi).name(self.name.clone());
        for r in &self.regions {
            let flow = point(&r.flow, n, &format!("region {} flow", r.id))?;
            match (dim, &r.vertices, &r.halfspaces) {
                (Dimension::Two, Some(vs), None) => {
                    let vs = vs
                        .iter()
                        .map(|v| point(v, 2, &format!("region {} vertex", r.id)).map(|p| [p.x, p.y]))
                        .collect::<Result<Vec<_>, _>>()?;
                    b = b.polygon(r.id, [flow.x, flow.y], &vs);
                }
                (Dimension::Three, None, Some(hs)) => {
                    let hs = hs
                        .iter()
                        .map(|h| {
                            point(&h.normal, 3, &format!("region {} half-space", r.id))
                                .map(|p| ([p.x, p.y, p.z], h.offset))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    b = b.polyhedron(r.id, [flow.x, flow.y, flow.z], &hs);
                }
                _ => {
                    return Err(SceneFileError::Schema(format!(
                        "region {} needs {} only",
                        r.id,
                        if dim == Dimension::Two { "vertices" } else { "halfspaces" }
                    )))
                }
            }
        }
        for bd in &self.boundaries {
            let [a, c] = bd.pair;
            match (dim, &bd.endpoints, &bd.plane, &bd.extent) {
                (Dimension::Two, Some([p1, p2]), None, None) => {
                    let p1 = point(p1, 2, "boundary endpoint")?;
                    let p2 = point(p2, 2, "boundary endpoint")?;
                    b = b.segment(a, c, [p1.x, p1.y], [p2.x, p2.y]);
                }
                (Dimension::Three, None, Some(plane), Some(extent)) => {
                    let nrm = point(&plane.normal, 3, "boundary plane")?;
                    let ext = extent
                        .iter()
                        .map(|v| point(v, 3, "boundary extent").map(|p| [p.x, p.y, p.z]))
                        .collect::<Result<Vec<_>, _>>()?;
                    b = b.patch(a, c, [nrm.x, nrm.y, nrm.z], plane.offset, &ext);
                }
                _ => {
                    return Err(SceneFileError::Schema(format!(
                        "boundary {a}-{c} needs {}",
                        if dim == Dimension::Two { "endpoints" } else { "plane and extent" }
                    )))
                }
            }
        }
        Ok(b.build()?)
    }

    /// The file form of a scene. 3D regions are written with every face of
    /// the region, including the domain box faces.
    pub fn from_scene(scene: &FlowScene) -> Self {
        let dim = scene.dimension().as_usize();
        let v = |p: &Point| p.iter().take(dim).copied().collect::<Vec<f64>>();
        let (lo, hi) = scene.domain();
        let regions = scene
            .regions()
            .iter()
            .map(|r| {
                let (vertices, halfspaces) = if dim == 2 {
                    (Some(r.vertices().iter().map(v).collect()), None)
                } else {
                    let hs = r
                        .halfspaces()
                        .iter()
                        .map(|h: &HalfSpace| HalfSpaceSpec { normal: v(&h.normal), offset: h.offset })
                        .collect();
                    (None, Some(hs))
                };
                RegionSpec { id: r.id.0, flow: v(&r.flow), vertices, halfspaces, unknown: BTreeMap::new() }
            })
            .collect();
        let boundaries = scene
            .boundaries()
            .iter()
            .map(|b| {
                let pair = [b.pair.0 .0, b.pair.1 .0];
                match &b.geometry {
                    BoundaryGeometry::Segment { p1, p2 } => BoundarySpec {
                        pair,
                        endpoints: Some([v(p1), v(p2)]),
                        plane: None,
                        extent: None,
                        unknown: BTreeMap::new(),
                    },
                    BoundaryGeometry::Patch(p) => BoundarySpec {
                        pair,
                        endpoints: None,
                        plane: Some(HalfSpaceSpec { normal: v(&p.normal), offset: p.offset }),
                        extent: Some(p.extent.iter().map(v).collect()),
                        unknown: BTreeMap::new(),
                    },
                }
            })
            .collect();
        SceneFile {
            name: scene.name().to_string(),
            dimension: dim,
            domain: DomainSpec { min: v(&lo), max: v(&hi) },
            regions,
            boundaries,
            start: None,
            goal: None,
            model: None,
            schedule: None,
            unknown: BTreeMap::new(),
        }
    }
}

fn point(v: &[f64], dim: usize, what: &str) -> Result<Point, SceneFileError> {
    if v.len() != dim {
        return Err(SceneFileError::Schema(format!("{what} has {} coordinates, expected {dim}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(SceneFileError::Schema(format!("{what} is not finite")));
    }
    let mut p = Point::zeros();
    for (k, c) in v.iter().enumerate() {
        p[k] = *c;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn unknown_keys_are_listed() {
        let text = fixtures::JET_JSON.replacen("\"dimension\"", "\"colour\": 1, \"dimension\"", 1);
        let f = SceneFile::from_json(&text).unwrap();
        assert_eq!(f.unknown_keys(), vec!["colour".to_string()]);
        f.build().unwrap();
    }

    #[test]
    fn wrong_arity_is_schema_error() {
        let text = fixtures::JET_JSON.replacen("\"start\": [0, 0]", "\"start\": [0, 0, 0]", 1);
        let f = SceneFile::from_json(&text).unwrap();
        assert!(matches!(f.start_point(), Err(SceneFileError::Schema(_))));
    }

    #[test]
    fn round_trip_preserves_scene() {
        for name in fixtures::NAMES {
            let scene = fixtures::by_name(name).unwrap();
            let text = SceneFile::from_scene(&scene).to_json();
            let again = SceneFile::from_json(&text).unwrap().build().unwrap();
            assert_eq!(scene.regions().len(), again.regions().len(), "{name}");
            for (a, b) in scene.regions().iter().zip(again.regions()) {
                assert_eq!(a.id, b.id);
                assert_eq!(a.flow, b.flow);
                assert!((a.measure(true) - b.measure(true)).abs() < 1e-9 || scene.dimension() == Dimension::Two);
                for v in a.vertices() {
                    assert!(b.vertices().iter().any(|w| (v - w).norm() < 1e-9), "{name}");
                }
            }
            assert_eq!(scene.boundaries(), again.boundaries(), "{name}");
        }
    }
}
