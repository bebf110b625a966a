//! Piecewise-constant flow scenes: convex regions, parametrized boundaries,
//! and the junction chains that thread a path through them.
//!
//! Points are stored as [`Point`] (a 3-vector) for both 2D and 3D scenes; a 2D
//! scene keeps `z = 0` everywhere, so norms and dot products need no special
//! casing. Boundary parameters are [`Lambda`] values, of which a 2D boundary
//! only uses the first component.

mod boundary;
mod chain;
mod region;
mod reroute;
mod scene;

pub use boundary::{Boundary, BoundaryGeometry, PlanarPatch};
pub use chain::{initial_chain, InitialChain, JunctionChain};
pub use region::{HalfSpace, Region};
pub use reroute::{corner_reroute, Reroute};
pub use scene::{Corner, FlowScene, SceneBuilder};

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// A point or vector in scene coordinates.
pub type Point = Vector3<f64>;

/// A boundary parameter. 2D boundaries use only `x`.
pub type Lambda = Vector2<f64>;

/// Absolute tolerance for coincidence of points and on-boundary tests.
pub const GEOM_TOL: f64 = 1e-9;

/// Identifier of a region, as declared in the scene file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub u32);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

/// Index of a boundary inside its [`FlowScene`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BoundaryId(pub usize);

impl fmt::Display for BoundaryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.0)
    }
}

/// Spatial dimension of a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn from_usize(d: usize) -> Option<Self> {
        match d {
            2 => Some(Dimension::Two),
            3 => Some(Dimension::Three),
            _ => None,
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }

    /// Number of free parameters of a boundary in this dimension.
    pub fn param_dim(self) -> usize {
        self.as_usize() - 1
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("parameter {lambda:?} lies outside the boundary parameter domain (clamped: {clamped:?})")]
    DomainViolation { lambda: Lambda, clamped: Lambda },
    #[error("point {0:?} is outside every region of the scene")]
    OutOfDomain(Point),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid corner reroute: {0}")]
    InvalidReroute(String),
    #[error("corner at {0:?} admits more than one reroute")]
    AmbiguousReroute(Point),
    #[error("no reroute around {0:?}: blocked by the domain edge")]
    NoReroute(Point),
    #[error("straight line from start to goal runs along a boundary")]
    DegenerateStraightLine,
}
