//! Line / parametric-surface intersection.
//!
//! Writing the line as `p + t·d` and picking the axis `k` where `|d_k|` is
//! largest, the unknown `t` is eliminated with the cross equations
//! `d_k (S_a − p_a) − d_a (S_k − p_k) = 0` for the two other axes `a`. The
//! result is a 2-system in `(u, v)` in the surface's own basis. Its zeros
//! are lifted back to 3D through the pivot row.

use crate::driver::{solve, SolveConfig, SolveStats};
use crate::error::{Error, Result};
use crate::linalg::Point2;
use crate::polybasis::{linear_combine, Patch, TensorPoly};

/// Intersections whose 3D residual exceeds this are dropped.
pub const RESIDUAL_TOL: f64 = 1e-8;

pub type Point3 = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Line3 {
    pub p: Point3,
    pub d: Point3,
}

impl Line3 {
    pub fn new(p: Point3, d: Point3) -> Result<Self> {
        if d.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroDirection);
        }
        if !p.iter().chain(&d).all(|c| c.is_finite()) {
            return Err(Error::InvalidArgument("line coordinates must be finite".into()));
        }
        Ok(Line3 { p, d })
    }

    pub fn at(&self, t: f64) -> Point3 {
        [self.p[0] + t * self.d[0], self.p[1] + t * self.d[1], self.p[2] + t * self.d[2]]
    }

    /// Index of the largest `|d_k|`, lowest index on ties.
    pub fn pivot(&self) -> Result<usize> {
        let mut k = 0;
        for a in 1..3 {
            if self.d[a].abs() > self.d[k].abs() {
                k = a;
            }
        }
        if self.d[k] == 0.0 {
            return Err(Error::ZeroDirection);
        }
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Surface3 {
    poly: TensorPoly,
}

impl Surface3 {
    pub fn new(poly: TensorPoly) -> Result<Self> {
        if poly.dim() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, found: poly.dim() });
        }
        let (m, n) = poly.degrees();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("surface degrees must be at least 1".into()));
        }
        Ok(Surface3 { poly })
    }

    pub fn poly(&self) -> &TensorPoly {
        &self.poly
    }

    pub fn evaluate(&self, uv: Point2) -> Point3 {
        let mut out = [0.0; 3];
        self.poly.evaluate_into(uv, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Intersection {
    pub uv: Point2,
    pub t: f64,
    pub point: Point3,
    /// `‖S(uv) − (p + t·d)‖∞`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectResult {
    /// Sorted by `t`.
    pub intersections: Vec<Intersection>,
    pub stats: SolveStats,
    pub unresolved: Vec<Patch>,
}

impl IntersectResult {
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// The 2-system whose zeros in `[0,1]²` are the parameters of the
/// intersection points.
pub fn reduce(surface: &Surface3, line: &Line3) -> Result<TensorPoly> {
    let k = line.pivot()?;
    let (d, p) = (line.d, line.p);
    let mut rows = Vec::with_capacity(2);
    let mut shift = Vec::with_capacity(2);
    for a in (0..3).filter(|&a| a != k) {
        let mut row = vec![0.0; 3];
        row[a] = d[k];
        row[k] = -d[a];
        rows.push(row);
        shift.push(d[a] * p[k] - d[k] * p[a]);
    }
    linear_combine(&[&surface.poly], &rows, &shift)
}

/// Line parameter of the point matching `uv`, read off the pivot row.
pub fn recover_t(surface: &Surface3, line: &Line3, uv: Point2) -> Result<f64> {
    let k = line.pivot()?;
    Ok((surface.evaluate(uv)[k] - line.p[k]) / line.d[k])
}

/// Lifts parameter-space zeros to intersections, dropping any whose residual
/// exceeds [`RESIDUAL_TOL`], and sorts the rest by `t`.
pub fn lift(surface: &Surface3, line: &Line3, zeros: &[Point2]) -> Result<Vec<Intersection>> {
    let mut out = Vec::with_capacity(zeros.len());
    for &uv in zeros {
        let t = recover_t(surface, line, uv)?;
        let point = line.at(t);
        let s = surface.evaluate(uv);
        let residual = (0..3).map(|j| (s[j] - point[j]).abs()).fold(0.0, f64::max);
        if residual <= RESIDUAL_TOL {
            out.push(Intersection { uv, t, point, residual });
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// All intersections of the line with the surface patch over `[0,1]²`, for
/// every real `t`.
///
/// On [`Error::BudgetExhausted`] the partial solver result is passed on; its
/// zeros can be lifted with [`lift`].
pub fn intersect(surface: &Surface3, line: &Line3, config: &SolveConfig) -> Result<IntersectResult> {
    let reduced = reduce(surface, line)?;
    let result = solve(&reduced, config)?;
    Ok(IntersectResult {
        intersections: lift(surface, line, &result.zeros)?,
        stats: result.stats,
        unresolved: result.unresolved,
    })
}
