//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use wsnloc::network::{Deployment, Node, NodeKind};
use wsnloc::Point;

/// `|a - b| <= tol * max(|a|, |b|)`, with an absolute floor for values near
/// zero.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let diff = (a - b).abs();
    diff <= tol * a.abs().max(b.abs()) || diff <= 1e-12
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// All-pairs hop counts by Floyd-Warshall over the unit-weight graph with
/// edges at distance `<= range`.
pub fn floyd_warshall_hops(pts: &[(f64, f64)], range: f64) -> Vec<Vec<Option<u32>>> {
    let n = pts.len();
    let inf = u32::MAX / 2;
    let mut h = vec![vec![inf; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
            if i == j {
                h[i][j] = 0;
            } else if (dx * dx + dy * dy).sqrt() <= range {
                h[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if h[i][k] + h[k][j] < h[i][j] {
                    h[i][j] = h[i][k] + h[k][j];
                }
            }
        }
    }
    h.into_iter()
        .map(|row| row.into_iter().map(|v| (v < inf).then_some(v)).collect())
        .collect()
}

pub fn deployment(w: f64, h: f64, range: f64, pts: &[(f64, f64)], anchors: &[usize]) -> Deployment {
    let nodes = pts
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| Node {
            id,
            x,
            y,
            kind: if anchors.contains(&id) { NodeKind::Anchor } else { NodeKind::Unknown },
        })
        .collect();
    Deployment::new(w, h, range, nodes).expect("valid test deployment")
}

/// Exact intersection of three circles whose centers are not collinear,
/// from the two radical lines through the first circle (Cramer's rule).
pub fn trilaterate3(c: [(f64, f64); 3], r: [f64; 3]) -> (f64, f64) {
    let row = |i: usize| {
        let a = 2.0 * (c[i].0 - c[0].0);
        let b = 2.0 * (c[i].1 - c[0].1);
        let rhs = r[0] * r[0] - r[i] * r[i] + c[i].0 * c[i].0 - c[0].0 * c[0].0 + c[i].1 * c[i].1 - c[0].1 * c[0].1;
        (a, b, rhs)
    };
    let (a1, b1, e1) = row(1);
    let (a2, b2, e2) = row(2);
    let det = a1 * b2 - a2 * b1;
    ((e1 * b2 - e2 * b1) / det, (a1 * e2 - a2 * e1) / det)
}

/// Twice the triangle area over the squared longest side: 0 for collinear
/// points, about 0.87 for an equilateral triangle.
pub fn triangle_quality(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let cross = ((b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)).abs();
    let d2 = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
    cross / d2(a, b).max(d2(b, c)).max(d2(a, c))
}

/// Sum of squared residuals of the circle-difference linearization in which
/// every circle is subtracted from the last one.
pub fn linearized_residual(refs: &[(Point, f64)], x: f64, y: f64) -> f64 {
    let (last, dl) = refs[refs.len() - 1];
    refs[..refs.len() - 1]
        .iter()
        .map(|&(p, d)| {
            // |X - p|^2 - |X - last|^2 = d^2 - dl^2, which is linear in X.
            let lhs = 2.0 * x * (last.x - p.x) + 2.0 * y * (last.y - p.y);
            let rhs = d * d - dl * dl + last.x * last.x - p.x * p.x + last.y * last.y - p.y * p.y;
            (lhs - rhs).powi(2)
        })
        .sum()
}

/// Minimizer of [`linearized_residual`] over a `step`-spaced grid covering
/// `[0, w] x [0, h]`.
pub fn grid_search(refs: &[(Point, f64)], w: f64, h: f64, step: f64) -> (f64, f64) {
    let (nx, ny) = ((w / step).round() as usize, (h / step).round() as usize);
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for i in 0..=nx {
        for j in 0..=ny {
            let (x, y) = (i as f64 * step, j as f64 * step);
            let r = linearized_residual(refs, x, y);
            if r < best.0 {
                best = (r, x, y);
            }
        }
    }
    (best.1, best.2)
}

pub fn random_points<R: Rng>(n: usize, w: f64, h: f64, rng: &mut R) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.random::<f64>() * w, rng.random::<f64>() * h)).collect()
}
