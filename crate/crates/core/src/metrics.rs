//! Path angles used to compare plans with published tables.
//!
//! 2D headings are measured from `+y` in degrees. Path segment headings
//! are positive counter-clockwise (toward `−x`); the vehicle heading inside a
//! flow band is positive clockwise (toward `+x`).
//!
//! In 3D each segment leaves a boundary surface (the first one leaves the
//! plane through the start parallel to the first boundary). `θ` is the angle
//! between the segment and that surface, in `(0°, 90°]`, and `γ` is the angle
//! of the segment's projection onto the surface against the surface x-axis,
//! which is the world x-axis projected onto the surface.

use crate::geometry::{BoundaryGeometry, FlowScene, Point};
use crate::mej::PlanResult;

/// Heading of a displacement from `+y`, positive toward `−x`.
pub fn segment_heading_deg(d: &Point) -> f64 {
    (-d.x).atan2(d.y).to_degrees()
}

/// Heading of a vehicle velocity from `+y`, positive toward `+x`.
pub fn vehicle_heading_deg(v: &Point) -> f64 {
    v.x.atan2(v.y).to_degrees()
}

/// `[θ₁, β, α, θ₂]` of a three-segment 2D plan: the headings of the first,
/// middle and last segments, and the vehicle heading on the middle one.
pub fn band_crossing_angles(plan: &PlanResult, start: &Point, goal: &Point) -> Option<[f64; 4]> {
    let j = &plan.junction_points;
    if j.len() != 2 || plan.per_segment.len() != 3 {
        return None;
    }
    Some([
        segment_heading_deg(&(j[0] - start)),
        segment_heading_deg(&(j[1] - j[0])),
        vehicle_heading_deg(&plan.per_segment[1].v),
        segment_heading_deg(&(goal - j[1])),
    ])
}

/// `(θ, γ)` in degrees of displacement `d` leaving a surface with unit normal `n`.
pub fn surface_angles_deg(d: &Point, n: &Point) -> (f64, f64) {
    let theta = (d.dot(n).abs() / d.norm()).clamp(0.0, 1.0).asin().to_degrees();
    let mut xa = Point::x() - n * n.x;
    if xa.norm() < 1e-12 {
        xa = Point::y() - n * n.y;
    }
    let xa = xa.normalize();
    let ya = n.cross(&xa);
    let gamma = d.dot(&ya).atan2(d.dot(&xa)).to_degrees();
    (theta, gamma)
}

/// `θᵢ` and `γᵢ` of every segment of a 3D plan.
pub fn surface_angles(scene: &FlowScene, plan: &PlanResult) -> Vec<(f64, f64)> {
    let pts = plan.chain.waypoints(scene);
    let normal = |i: usize| match &scene.boundary(plan.chain.boundaries[i]).geometry {
        BoundaryGeometry::Patch(p) => p.normal,
        BoundaryGeometry::Segment { .. } => Point::z(),
    };
    if plan.chain.is_empty() {
        return Vec::new();
    }
    pts.windows(2)
        .enumerate()
        .map(|(i, w)| surface_angles_deg(&(w[1] - w[0]), &normal(i.saturating_sub(1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn heading_signs() {
        assert_abs_diff_eq!(segment_heading_deg(&Point::new(-1.0, 1.0, 0.0)), 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vehicle_heading_deg(&Point::new(-1.0, 1.0, 0.0)), -45.0, epsilon = 1e-12);
    }

    #[test]
    fn surface_angles_horizontal_plane() {
        let (t, g) = surface_angles_deg(&Point::new(0.0, -1.0, 1.0), &Point::z());
        assert_abs_diff_eq!(t, 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g, -90.0, epsilon = 1e-12);
        let (t, _) = surface_angles_deg(&Point::new(0.0, 0.0, -3.0), &Point::z());
        assert_abs_diff_eq!(t, 90.0, epsilon = 1e-12);
    }
}
