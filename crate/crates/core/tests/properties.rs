mod common;

use flowpath::cost::{energy_segment, time_segment};
use flowpath::geometry::{initial_chain, Lambda};
use flowpath::partition::{boundary_points, feature_vectors, fit_line, kmeans, FittedLine, FlowGrid, KMeansOptions, LineFitLoss};
use flowpath::{fixtures, Point};
use proptest::prelude::*;

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    [-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64]
}

fn pt(a: [f64; 3]) -> Point {
    Point::new(a[0], a[1], a[2])
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn time_leg_matches_quadratic_root(d in vec3(), u in [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64], v in 3.5..6.0f64) {
        prop_assume!(pt(d).norm() > 1e-3);
        let s = time_segment(&pt(d), &pt(u), v).unwrap();
        prop_assert!(rel(s.cost, common::min_time(d, u, v)) < 1e-12);
        prop_assert!(((pt(d) / s.t - pt(u)).norm() - v).abs() < 1e-9);
    }

    #[test]
    fn energy_leg_matches_oracle_and_bounds(
        d in vec3(),
        u in [-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64],
        v in 3.5..6.0f64,
        c in 0.01..20.0f64,
    ) {
        prop_assume!(pt(d).norm() > 1e-3);
        let e = energy_segment(&pt(d), &pt(u), v, c).unwrap();
        let t = time_segment(&pt(d), &pt(u), v).unwrap();
        prop_assert!(rel(e.cost, common::min_energy(d, u, v, c)) < 1e-10);
        // no energy path is faster than the fastest path
        prop_assert!(e.t >= t.t * (1.0 - 1e-12));
        prop_assert!(e.cost >= c * t.t * (1.0 - 1e-12));
        // the energy of the fastest path bounds the optimum from above
        prop_assert!(e.cost <= (v * v + c) * t.t * (1.0 + 1e-12));
        if e.max_speed_branch {
            prop_assert!(rel(e.cost / (v * v + c), t.cost) < 1e-9);
        } else {
            // ‖d/t − u‖² t + C t ≥ 2 |d| √(‖u‖²+C) − 2 d·u
            let s = (pt(u).norm_squared() + c).sqrt();
            prop_assert!(rel(e.cost, 2.0 * s * pt(d).norm() - 2.0 * pt(d).dot(&pt(u))) < 1e-10);
        }
    }

    #[test]
    fn boundary_points_lie_on_their_boundary(name in 0usize..5, l in 0.0..1.0f64, m in 0.0..1.0f64) {
        let scene = fixtures::by_name(fixtures::NAMES[name]).unwrap();
        for b in scene.boundaries() {
            let vs = b.vertices();
            let x = if vs.len() == 2 { vs[0] * l + vs[1] * (1.0 - l) } else {
                let a = vs[0] + (vs[1] - vs[0]) * l;
                let c = vs[3] + (vs[2] - vs[3]) * l;
                a + (c - a) * m
            };
            let lam = b.param_of(&x);
            prop_assert!(b.contains_param(&lam, 1e-12));
            let p = b.boundary_point(&lam).unwrap();
            prop_assert!((p - x).norm() < 1e-9);
            prop_assert!(b.implicit(&p).abs() < 1e-9);
        }
    }

    #[test]
    fn initial_chain_is_valid(name in 0usize..5, s in [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64], g in [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]) {
        let scene = fixtures::by_name(fixtures::NAMES[name]).unwrap();
        let (lo, hi) = scene.domain();
        let at = |f: [f64; 3]| Point::from_fn(|i, _| lo[i] + f[i] * (hi[i] - lo[i]));
        let (start, goal) = (at(s), at(g));
        if let Ok(init) = initial_chain(&scene, start, goal) {
            let c = init.chain;
            prop_assert!(c.validate(&scene).is_ok());
            prop_assert!(c.is_cycle_free());
            prop_assert_eq!(c.start, start);
            prop_assert_eq!(c.goal, goal);
            // junctions lie on the straight line, in order
            let dir = goal - start;
            let mut last = 0.0;
            for p in c.junction_points(&scene) {
                let s = (p - start).dot(&dir) / dir.norm_squared();
                prop_assert!(s >= last - 1e-9 && s <= 1.0 + 1e-9);
                prop_assert!(((p - start) - dir * s).norm() < 1e-6);
                last = s;
            }
        }
    }

    #[test]
    fn line_fit_is_translation_equivariant(dx in -50.0..50.0f64, dy in -50.0..50.0f64, seed in 0u64..1000) {
        let pts: Vec<[f64; 2]> = (0..30)
            .map(|i| {
                let x = i as f64 * 0.3;
                let wobble = ((i as u64 * 7919 + seed) % 101) as f64 / 1000.0 - 0.05;
                [x, 0.5 * x + 2.0 + wobble]
            })
            .collect();
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + dx, p[1] + dy]).collect();
        for loss in [LineFitLoss::Squared, LineFitLoss::Absolute] {
            let a = fit_line(&pts, loss).unwrap();
            let b = fit_line(&moved, loss).unwrap();
            for p in &pts {
                prop_assert!((a.distance(*p) - b.distance([p[0] + dx, p[1] + dy])).abs() < 1e-6);
            }
            if let FittedLine::Sloped { a: slope, c } = a {
                prop_assert!((-slope - 0.5).abs() < 0.02);
                prop_assert!((-c - 2.0).abs() < 0.1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kmeans_descends_to_a_fixed_point(seed in 0u64..10_000, k in 1usize..5) {
        let grid = FlowGrid::from_csv(fixtures::MEANDER_GRID_CSV.as_bytes()).unwrap();
        let f = feature_vectors(&grid).unwrap();
        let km = kmeans(&f, k, seed, KMeansOptions { n_init: 1, max_iter: 300 }).unwrap();
        prop_assert!(km.objective_history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(km.converged);
        // every point sits with its nearest centroid
        for (x, &l) in f.iter().zip(&km.labels) {
            let d = |c: &[f64; 4]| c.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            let own = d(&km.centroids[l]);
            prop_assert!(km.centroids.iter().all(|c| own <= d(c) + 1e-12));
        }
    }

    #[test]
    fn boundary_points_ignore_label_names(perm in Just([2usize, 0, 1]), cut in 2usize..38) {
        let grid = FlowGrid::from_csv(fixtures::JET_GRID_CSV.as_bytes()).unwrap();
        let labels: Vec<usize> = grid.positions.iter().map(|p| if p[1] < cut as f64 * 0.5 { 0 } else if p[0] < 0.0 { 1 } else { 2 }).collect();
        let renamed: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
        let a = boundary_points(&grid, &labels);
        let b = boundary_points(&grid, &renamed);
        for ((x, y), pts) in &a {
            let key = (perm[*x].min(perm[*y]), perm[*x].max(perm[*y]));
            let mut p1 = pts.clone();
            let mut p2 = b[&key].clone();
            p1.sort_by(|u, v| u.partial_cmp(v).unwrap());
            p2.sort_by(|u, v| u.partial_cmp(v).unwrap());
            prop_assert_eq!(p1, p2);
        }
    }
}

#[test]
fn bundled_grids_match_their_definitions() {
    let jet = FlowGrid::from_csv(fixtures::JET_GRID_CSV.as_bytes()).unwrap();
    assert_eq!((jet.nx, jet.ny), (40, 40));
    for (p, v) in jet.positions.iter().zip(&jet.velocities) {
        let want = if (7.5..=10.5).contains(&p[1]) { 2.9 } else { 0.0 };
        assert_eq!(*v, [want, 0.0]);
    }
    let meander = FlowGrid::from_csv(fixtures::MEANDER_GRID_CSV.as_bytes()).unwrap();
    assert_eq!((meander.nx, meander.ny), (48, 40));
    for (p, v) in meander.positions.iter().zip(&meander.velocities) {
        let w = std::f64::consts::TAU / 24.0;
        let yc = 10.0 + 3.0 * (w * p[0]).sin();
        if (p[1] - yc).abs() <= 2.0 {
            let slope = 3.0 * w * (w * p[0]).cos();
            let n = (1.0 + slope * slope).sqrt();
            assert!((v[0] - 2.0 / n).abs() <= 1e-6 && (v[1] - 2.0 * slope / n).abs() <= 1e-6);
        } else {
            assert_eq!(*v, [0.0, 0.0]);
        }
    }
}

#[test]
fn interior_lambda_is_on_segment() {
    let scene = fixtures::jet();
    let b = &scene.boundaries()[0];
    assert!(b.contains_param(&Lambda::new(0.5, 0.0), 0.0));
    assert!(!b.contains_param(&Lambda::new(1.5, 0.0), 1e-9));
}
