//! Globally optimal time- and energy-optimal paths through piecewise-constant
//! flow fields.
//!
//! A path through regions of constant flow is straight inside each region,
//! so it is fixed by its junction points on the region boundaries. [`mej`]
//! moves those junctions by gradient descent with intermittent bursts of
//! noise, rerouting the boundary chain when a junction slides around a
//! corner. [`cost`] supplies the closed-form per-segment costs and
//! [`partition`] turns a gridded flow field into a piecewise-constant one.
//!
//! ```
//! use flowpath::{fixtures, mej, CostModel, Point};
//!
//! let scene = fixtures::jet();
//! let schedule = mej::IDSchedule::default_for(&scene);
//! let plan = mej::optimize(
//!     &scene,
//!     Point::new(0.0, 0.0, 0.0),
//!     Point::new(0.0, 20.0, 0.0),
//!     &CostModel::time(3.0),
//!     &schedule,
//! )
//! .unwrap();
//! assert!((plan.cost - 6.7377).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod fixtures;
pub mod geometry;
pub mod mej;
pub mod metrics;
pub mod partition;
pub mod scene_file;

pub use cost::{CostKind, CostModel, SegmentSolution};
pub use geometry::{FlowScene, JunctionChain, Point, SceneBuilder};
pub use scene_file::SceneFile;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenes.md")]
    mod scenes {}
    #[doc = include_str!("../../../book/src/costs.md")]
    mod costs {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/repair.md")]
    mod repair {}
    #[doc = include_str!("../../../book/src/three_d.md")]
    mod three_d {}
    #[doc = include_str!("../../../book/src/partition.md")]
    mod partition {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
