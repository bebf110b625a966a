//! Bundled benchmark scenes.
//!
//! | name       | regions | notes                                              |
//! |------------|---------|----------------------------------------------------|
//! | `constant` | 3       | uniform flow `(1, 1)`, triple corner at `(2.5, 9.5)` |
//! | `jet`      | 3       | jet band `7.5 <= y <= 10.5` with flow `(2.9, 0)`     |
//! | `block`    | 5       | central counter-flow `(0, -2)`, side flows `∓1.5`    |
//! | `jet3d`    | 3       | slabs split at `z = 10` and `z = 15`                 |
//! | `triple_corner` | 3  | triple corner at `(2, 9.5)`, still water             |
//!
//! All 2D scenes span `[-10, 10] × [0, 20]` and run from `(0, 0)` to
//! `(0, 20)` at speed 3, except `triple_corner`, which runs from `(-5, 0)` to `(-5, 20)` at speed 1. The 3D scene spans
//! `[-10, 10]² × [0, 20]` and runs from the origin to `(0, 0, 20)`.

use crate::geometry::FlowScene;
use crate::scene_file::SceneFile;

pub const CONSTANT_JSON: &str = include_str!("../fixtures/constant.json");
pub const JET_JSON: &str = include_str!("../fixtures/jet.json");
pub const BLOCK_JSON: &str = include_str!("../fixtures/block.json");
pub const JET3D_JSON: &str = include_str!("../fixtures/jet3d.json");
pub const TRIPLE_CORNER_JSON: &str = include_str!("../fixtures/triple_corner.json");

/// Synthetic jet on a 40 × 40 cell-centred grid (`x,y,u,v` CSV).
pub const JET_GRID_CSV: &str = include_str!("../fixtures/jet_grid.csv");
/// Synthetic meandering current on a 48 × 40 grid (`x,y,u,v` CSV).
pub const MEANDER_GRID_CSV: &str = include_str!("../fixtures/meander_grid.csv");

pub const NAMES: [&str; 5] = ["constant", "jet", "block", "jet3d", "triple_corner"];

pub fn json(name: &str) -> Option<&'static str> {
    match name {
        "constant" => Some(CONSTANT_JSON),
        "jet" => Some(JET_JSON),
        "block" => Some(BLOCK_JSON),
        "jet3d" => Some(JET3D_JSON),
        "triple_corner" => Some(TRIPLE_CORNER_JSON),
        _ => None,
    }
}

pub fn file(name: &str) -> Option<SceneFile> {
    json(name).map(|t| SceneFile::from_json(t).expect("bundled scene parses"))
}

pub fn by_name(name: &str) -> Option<FlowScene> {
    file(name).map(|f| f.build().expect("bundled scene is valid"))
}

pub fn constant() -> FlowScene {
    by_name("constant").unwrap()
}

pub fn jet() -> FlowScene {
    by_name("jet").unwrap()
}

pub fn block() -> FlowScene {
    by_name("block").unwrap()
}

pub fn jet3d() -> FlowScene {
    by_name("jet3d").unwrap()
}

pub fn triple_corner() -> FlowScene {
    by_name("triple_corner").unwrap()
}
