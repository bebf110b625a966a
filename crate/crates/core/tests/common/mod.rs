//! Reference computations written without the library's cost code.
#![allow(dead_code)]

pub type P = [f64; 3];

fn sub(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Least `t > 0` with `‖d − u t‖ = V t`, from the quadratic
/// `(V² − ‖u‖²) t² + 2 (d·u) t − ‖d‖² = 0`. Needs `V > ‖u‖`.
pub fn min_time(d: P, u: P, v: f64) -> f64 {
    let k = v * v - dot(u, u);
    assert!(k > 0.0, "oracle needs V > |u|");
    let a = dot(d, u);
    (-a + (a * a + k * dot(d, d)).sqrt()) / k
}

/// `min_t ‖d/t − u‖² t + C t` over durations the vehicle can manage.
pub fn min_energy(d: P, u: P, v: f64, c: f64) -> f64 {
    let dd = dot(d, d);
    let f = |t: f64| dd / t - 2.0 * dot(d, u) + (dot(u, u) + c) * t;
    let free = dd.sqrt() / (dot(u, u) + c).sqrt();
    f(free.max(min_time(d, u, v)))
}

#[derive(Clone, Copy, Debug)]
pub enum Objective {
    Time { v: f64 },
    Energy { v: f64, c: f64 },
}

impl Objective {
    pub fn leg(&self, d: P, u: P) -> f64 {
        match *self {
            Objective::Time { v } => min_time(d, u, v),
            Objective::Energy { v, c } => min_energy(d, u, v, c),
        }
    }

    /// Cost of the polyline `pts`, leg `i` in flow `flows[i]`.
    pub fn path(&self, pts: &[P], flows: &[P]) -> f64 {
        pts.windows(2).zip(flows).map(|(w, u)| self.leg(sub(w[1], w[0]), *u)).sum()
    }
}

/// Grid search over the box `lo..hi`: `n` points per axis, then repeated
/// 5-point zooms around the best point until the pitch drops below `tol`
/// times the box width. Returns `(argmin, min)`.
pub fn grid_min(lo: &[f64], hi: &[f64], n: usize, tol: f64, f: impl Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let dim = lo.len();
    let mut pitch: Vec<f64> = (0..dim).map(|i| (hi[i] - lo[i]) / (n - 1) as f64).collect();
    let mut best = (lo.to_vec(), f64::INFINITY);
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    loop {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = lo[i] + idx[i] as f64 * pitch[i];
        }
        let v = f(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
        if !advance(&mut idx, n) {
            break;
        }
    }
    while (0..dim).any(|i| pitch[i] > tol * (hi[i] - lo[i])) {
        let centre = best.0.clone();
        let mut idx = vec![0usize; dim];
        loop {
            for i in 0..dim {
                x[i] = (centre[i] + (idx[i] as f64 - 2.0) * pitch[i]).clamp(lo[i], hi[i]);
            }
            let v = f(&x);
            if v < best.1 {
                best = (x.clone(), v);
            }
            if !advance(&mut idx, 5) {
                break;
            }
        }
        for p in pitch.iter_mut() {
            *p /= 2.0;
        }
    }
    best
}

fn advance(idx: &mut [usize], n: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < n {
            return true;
        }
        *i = 0;
    }
    false
}

/// Global optimum over the two-junction chains of a horizontal-band scene:
/// junction `j` lies on `y = ys[j]` with `x` in `xr[j]`, and the legs run
/// through `flows`.
pub fn band_oracle(start: P, goal: P, ys: [f64; 2], xr: [[f64; 2]; 2], flows: [P; 3], obj: Objective) -> (Vec<f64>, f64) {
    grid_min(&[xr[0][0], xr[1][0]], &[xr[0][1], xr[1][1]], 1001, 1e-6, |x| {
        obj.path(&[start, [x[0], ys[0], 0.0], [x[1], ys[1], 0.0], goal], &flows)
    })
}

/// Time of the straight path through a stack of horizontal bands.
pub fn straight_time(ys: &[f64], flows: &[P], v: f64) -> f64 {
    ys.windows(2).zip(flows).map(|(w, u)| min_time([0.0, w[1] - w[0], 0.0], *u, v)).sum()
}
