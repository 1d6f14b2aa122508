//! Bounding polygons of a polynomial's range over its natural square.
//!
//! Bernstein polynomials use the convex hull of their control points.
//! Power and Chebyshev polynomials use the zonogon
//! `{c_00 + Σ_{i+j>0} s_ij c_ij : −1 ≤ s_ij ≤ 1}`, valid because every basis
//! function other than `φ_0` is bounded by one in magnitude on `[−1,1]`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::Point2;
use crate::polybasis::{BasisKind, TensorPoly};

/// Slack used by [`contains_origin`]: points within this distance of the
/// polygon count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Relative tolerance under which two zonogon generators are merged as
/// parallel.
const PARALLEL_RTOL: f64 = 1e-13;

/// Convex polygon with counterclockwise vertices. One vertex is a point and
/// two vertices are a segment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Closed membership with `tol` slack in Euclidean distance.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => dist2(self.vertices[0], p) <= tol,
            2 => segment_distance(self.vertices[0], self.vertices[1], p) <= tol,
            k => (0..k).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % k];
                let e = [b[0] - a[0], b[1] - a[1]];
                let len = (e[0] * e[0] + e[1] * e[1]).sqrt();
                cross(e, [p[0] - a[0], p[1] - a[1]]) >= -tol * len
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `max(|lo|, |hi|)`.
    pub fn magnitude(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn dist2(a: Point2, b: Point2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let len2 = e[0] * e[0] + e[1] * e[1];
    if len2 == 0.0 {
        return dist2(a, p);
    }
    let t = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / len2).clamp(0.0, 1.0);
    dist2([a[0] + t * e[0], a[1] + t * e[1]], p)
}

/// Andrew's monotone chain. Collinear points are dropped, so the result has
/// no three collinear vertices.
pub fn convex_hull(points: &[Point2]) -> ConvexPolygon {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return ConvexPolygon { vertices: pts };
    }

    let turn = |o: Point2, a: Point2, b: Point2| cross([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    ConvexPolygon { vertices: hull }
}

/// The zonogon `{center + Σ s_k g_k : −1 ≤ s_k ≤ 1}`, built by walking its
/// boundary in order of generator angle.
pub fn zonogon(center: Point2, generators: &[Point2]) -> ConvexPolygon {
    // Each segment is symmetric, so every generator can be flipped into the
    // half-plane of angles [0, π).
    let mut gens: Vec<Point2> = generators
        .iter()
        .filter(|g| g[0] != 0.0 || g[1] != 0.0)
        .map(|&g| if g[1] < 0.0 || (g[1] == 0.0 && g[0] < 0.0) { [-g[0], -g[1]] } else { g })
        .collect();
    gens.sort_by(|a, b| {
        a[1].atan2(a[0])
            .partial_cmp(&b[1].atan2(b[0]))
            .unwrap_or(Ordering::Equal)
    });

    let parallel = |a: Point2, b: Point2| {
        let na = a[0].hypot(a[1]);
        let nb = b[0].hypot(b[1]);
        cross(a, b).abs() <= PARALLEL_RTOL * na * nb
    };
    let mut merged: Vec<Point2> = Vec::with_capacity(gens.len());
    for g in gens {
        match merged.last_mut() {
            Some(last) if parallel(*last, g) => {
                last[0] += g[0];
                last[1] += g[1];
            }
            _ => merged.push(g),
        }
    }
    // Directions just below π are parallel to those at 0.
    if merged.len() >= 2 && parallel(merged[0], merged[merged.len() - 1]) {
        let last = merged.pop().unwrap();
        merged[0][0] -= last[0];
        merged[0][1] -= last[1];
    }
    merged.retain(|g| g[0] != 0.0 || g[1] != 0.0);

    let mut start = center;
    for g in &merged {
        start[0] -= g[0];
        start[1] -= g[1];
    }
    let mut vertices = Vec::with_capacity(2 * merged.len().max(1));
    let mut v = start;
    vertices.push(v);
    for g in &merged {
        v = [v[0] + 2.0 * g[0], v[1] + 2.0 * g[1]];
        vertices.push(v);
    }
    for g in &merged {
        v = [v[0] - 2.0 * g[0], v[1] - 2.0 * g[1]];
        vertices.push(v);
    }
    if !merged.is_empty() {
        vertices.pop();
    }
    ConvexPolygon { vertices }
}

/// A convex polygon containing `{p(u,v) : (u,v) ∈ [l,h]²}` for a 2-valued
/// polynomial.
pub fn bounding_polygon(p: &TensorPoly) -> Result<ConvexPolygon> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.dim() });
    }
    let points: Vec<Point2> = p.iter_coeffs().map(|(_, _, c)| [c[0], c[1]]).collect();
    Ok(match p.basis() {
        BasisKind::Bernstein => convex_hull(&points),
        BasisKind::Power | BasisKind::Chebyshev => zonogon(points[0], &points[1..]),
    })
}

/// Closed membership of the origin, with [`MEMBERSHIP_TOL`] slack.
pub fn contains_origin(poly: &ConvexPolygon) -> bool {
    poly.contains([0.0, 0.0], MEMBERSHIP_TOL)
}

/// An interval containing the range of a scalar polynomial over `[l,h]²`.
pub fn scalar_range(p: &TensorPoly) -> Result<Interval> {
    if p.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: p.dim() });
    }
    let c = p.coeffs();
    Ok(match p.basis() {
        BasisKind::Bernstein => {
            let (lo, hi) = c
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            Interval::new(lo, hi)
        }
        BasisKind::Power | BasisKind::Chebyshev => {
            let spread: f64 = c[1..].iter().map(|x| x.abs()).sum();
            Interval::new(c[0] - spread, c[0] + spread)
        }
    })
}

/// Looseness factor of the basis's bounding polygon: every polygon point `y`
/// satisfies `‖y‖ ≤ θ · max ‖p‖` over the natural square.
pub fn theta(basis: BasisKind, m: usize, n: usize) -> f64 {
    let (mf, nf) = ((m + 1) as f64, (n + 1) as f64);
    match basis {
        BasisKind::Chebyshev => 2.0 * mf * nf,
        BasisKind::Power => {
            mf * nf * (3f64.powi(m as i32 + 1) - 1.0) * (3f64.powi(n as i32 + 1) - 1.0) / 2.0
        }
        BasisKind::Bernstein => bernstein_theta_factor(m) * bernstein_theta_factor(n),
    }
}

/// `Σ_i Π_{i'≠i} max(|d−i'|, |i'|) / |i−i'|`.
fn bernstein_theta_factor(d: usize) -> f64 {
    (0..=d)
        .map(|i| {
            (0..=d)
                .filter(|&k| k != i)
                .map(|k| (d - k).max(k) as f64 / (i as f64 - k as f64).abs())
                .product::<f64>()
        })
        .sum()
}

/// `γ(θ) = 1 / (4√(θ(4θ+1)) − 8θ)`, evaluated as the equivalent
/// `(√(4 + 1/θ) + 2) / 4` to avoid cancellation for large θ.
pub fn gamma(theta: f64) -> Result<f64> {
    if !(theta >= 1.0) || !theta.is_finite() {
        return Err(Error::InvalidTheta(theta));
    }
    Ok(((4.0 + 1.0 / theta).sqrt() + 2.0) / 4.0)
}
