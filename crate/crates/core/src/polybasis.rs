//! Tensor-product polynomials `f(u,v) = Σ c_ij φ_i(u) φ_j(v)` with vector
//! coefficients, in one of three univariate bases.
//!
//! A polynomial is always a function of the raw `(u, v)` coordinates; the
//! basis only decides how it is stored and which square `[l,h]²` its bounding
//! polygon describes. [`TensorPoly::reparametrize`] produces the polynomial
//! whose natural square covers a given patch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, Point2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Power,
    Bernstein,
    Chebyshev,
}

impl BasisKind {
    /// The natural interval `[l, h]` of the basis.
    pub fn domain(self) -> (f64, f64) {
        match self {
            BasisKind::Bernstein => (0.0, 1.0),
            BasisKind::Power | BasisKind::Chebyshev => (-1.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BasisKind::Power => "power",
            BasisKind::Bernstein => "bernstein",
            BasisKind::Chebyshev => "chebyshev",
        }
    }

    /// Writes `φ_0(t), …, φ_deg(t)` into `out`.
    pub fn values_into(self, deg: usize, t: f64, out: &mut [f64]) {
        debug_assert!(out.len() > deg);
        match self {
            BasisKind::Power => {
                let mut p = 1.0;
                for slot in out.iter_mut().take(deg + 1) {
                    *slot = p;
                    p *= t;
                }
            }
            BasisKind::Bernstein => {
                // Build B_{i,k} level by level; each level sums to one.
                let s = 1.0 - t;
                out[0] = 1.0;
                for k in 1..=deg {
                    out[k] = t * out[k - 1];
                    for i in (1..k).rev() {
                        out[i] = s * out[i] + t * out[i - 1];
                    }
                    out[0] *= s;
                }
            }
            BasisKind::Chebyshev => {
                out[0] = 1.0;
                if deg >= 1 {
                    out[1] = t;
                }
                for k in 2..=deg {
                    out[k] = 2.0 * t * out[k - 1] - out[k - 2];
                }
            }
        }
    }

    pub fn values(self, deg: usize, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; deg + 1];
        self.values_into(deg, t, &mut out);
        out
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "power" | "monomial" => Ok(BasisKind::Power),
            "bernstein" | "bezier" => Ok(BasisKind::Bernstein),
            "chebyshev" => Ok(BasisKind::Chebyshev),
            other => Err(Error::InvalidArgument(format!("unknown basis `{other}`"))),
        }
    }
}

/// The closed infinity-norm ball `B̄(center, radius)`, i.e. an axis-aligned
/// square of side `2·radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Patch {
    pub center: Point2,
    pub radius: f64,
}

impl Patch {
    pub fn new(center: Point2, radius: f64) -> Self {
        Patch { center, radius }
    }

    /// The search region `[0,1]²`.
    pub fn unit() -> Self {
        Patch::new([0.5, 0.5], 0.5)
    }

    pub fn width(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn lo(&self) -> Point2 {
        [self.center[0] - self.radius, self.center[1] - self.radius]
    }

    pub fn hi(&self) -> Point2 {
        [self.center[0] + self.radius, self.center[1] + self.radius]
    }

    pub fn contains_point(&self, p: Point2) -> bool {
        crate::linalg::dist_inf(self.center, p) <= self.radius
    }

    /// The four equal quadrants, in the order (−,−), (+,−), (−,+), (+,+).
    pub fn quadrants(&self) -> [Patch; 4] {
        let r = 0.5 * self.radius;
        let [u, v] = self.center;
        [
            Patch::new([u - r, v - r], r),
            Patch::new([u + r, v - r], r),
            Patch::new([u - r, v + r], r),
            Patch::new([u + r, v + r], r),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

/// Bivariate tensor-product polynomial of degree `m` in `u` and `n` in `v`
/// with `dim`-dimensional coefficients stored densely, row-major in `(i, j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorPoly {
    basis: BasisKind,
    m: usize,
    n: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

impl TensorPoly {
    pub fn new(basis: BasisKind, m: usize, n: usize, dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("coefficient dimension must be positive".into()));
        }
        let expected = (m + 1) * (n + 1) * dim;
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: coeffs.len() });
        }
        Ok(TensorPoly { basis, m, n, dim, coeffs })
    }

    /// Builds a polynomial from a `(m+1) × (n+1)` grid of coefficient vectors.
    pub fn from_grid(basis: BasisKind, grid: &[Vec<Vec<f64>>]) -> Result<Self> {
        let rows = grid.len();
        if rows == 0 || grid[0].is_empty() {
            return Err(Error::InvalidArgument("empty coefficient grid".into()));
        }
        let cols = grid[0].len();
        let dim = grid[0][0].len();
        let mut coeffs = Vec::with_capacity(rows * cols * dim);
        for row in grid {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: row.len() });
            }
            for c in row {
                if c.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
                }
                coeffs.extend_from_slice(c);
            }
        }
        TensorPoly::new(basis, rows - 1, cols - 1, dim, coeffs)
    }

    pub fn zeros(basis: BasisKind, m: usize, n: usize, dim: usize) -> Self {
        TensorPoly { basis, m, n, dim, coeffs: vec![0.0; (m + 1) * (n + 1) * dim] }
    }

    /// Degree-(0,0) polynomial with the given constant value. Every basis
    /// represents constants by `φ_0 ≡ 1`.
    pub fn constant(basis: BasisKind, value: &[f64]) -> Self {
        TensorPoly { basis, m: 0, n: 0, dim: value.len(), coeffs: value.to_vec() }
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn degrees(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        (i * (self.n + 1) + j) * self.dim
    }

    pub fn coeff(&self, i: usize, j: usize) -> &[f64] {
        let o = self.offset(i, j);
        &self.coeffs[o..o + self.dim]
    }

    pub fn coeff_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let o = self.offset(i, j);
        let d = self.dim;
        &mut self.coeffs[o..o + d]
    }

    /// Iterates `(i, j, c_ij)` in storage order.
    pub fn iter_coeffs(&self) -> impl Iterator<Item = (usize, usize, &[f64])> + '_ {
        let cols = self.n + 1;
        self.coeffs
            .chunks_exact(self.dim)
            .enumerate()
            .map(move |(k, c)| (k / cols, k % cols, c))
    }

    /// The scalar polynomial formed by coefficient component `k`.
    pub fn component(&self, k: usize) -> TensorPoly {
        assert!(k < self.dim, "component {k} out of range");
        let coeffs = self.coeffs.chunks_exact(self.dim).map(|c| c[k]).collect();
        TensorPoly { basis: self.basis, m: self.m, n: self.n, dim: 1, coeffs }
    }

    pub fn evaluate_into(&self, point: Point2, out: &mut [f64]) {
        let mut bu = [0.0; 16];
        let mut bv = [0.0; 16];
        let mut bu_heap;
        let mut bv_heap;
        let phi_u: &mut [f64] = if self.m < 16 {
            &mut bu[..=self.m]
        } else {
            bu_heap = vec![0.0; self.m + 1];
            &mut bu_heap
        };
        let phi_v: &mut [f64] = if self.n < 16 {
            &mut bv[..=self.n]
        } else {
            bv_heap = vec![0.0; self.n + 1];
            &mut bv_heap
        };
        self.basis.values_into(self.m, point[0], phi_u);
        self.basis.values_into(self.n, point[1], phi_v);
        out[..self.dim].iter_mut().for_each(|x| *x = 0.0);
        for (i, &a) in phi_u.iter().enumerate() {
            for (j, &b) in phi_v.iter().enumerate() {
                let w = a * b;
                let c = self.coeff(i, j);
                for k in 0..self.dim {
                    out[k] += w * c[k];
                }
            }
        }
    }

    /// `Σ c_ij φ_i(u) φ_j(v)` at `point`.
    pub fn evaluate(&self, point: Point2) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(point, &mut out);
        out
    }

    /// Evaluation of a 2-dimensional system.
    pub fn evaluate2(&self, point: Point2) -> Point2 {
        debug_assert_eq!(self.dim, 2);
        let mut out = [0.0; 2];
        self.evaluate_into(point, &mut out);
        out
    }

    /// Applies the univariate linear map `mat` (`rows × (deg+1)`, row-major)
    /// to the coefficients along `axis`.
    fn map_axis(&self, axis: Axis, rows: usize, mat: &[f64]) -> TensorPoly {
        let (m, n) = match axis {
            Axis::U => (rows - 1, self.n),
            Axis::V => (self.m, rows - 1),
        };
        let mut out = TensorPoly::zeros(self.basis, m, n, self.dim);
        match axis {
            Axis::U => {
                let cols = self.m + 1;
                debug_assert_eq!(mat.len(), rows * cols);
                for k in 0..rows {
                    for i in 0..cols {
                        let w = mat[k * cols + i];
                        if w == 0.0 {
                            continue;
                        }
                        for j in 0..=self.n {
                            let src = self.offset(i, j);
                            let dst = out.offset(k, j);
                            for d in 0..self.dim {
                                out.coeffs[dst + d] += w * self.coeffs[src + d];
                            }
                        }
                    }
                }
            }
            Axis::V => {
                let cols = self.n + 1;
                debug_assert_eq!(mat.len(), rows * cols);
                for k in 0..rows {
                    for j in 0..cols {
                        let w = mat[k * cols + j];
                        if w == 0.0 {
                            continue;
                        }
                        for i in 0..=self.m {
                            let src = self.offset(i, j);
                            let dst = out.offset(i, k);
                            for d in 0..self.dim {
                                out.coeffs[dst + d] += w * self.coeffs[src + d];
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `∂p/∂axis` in the same basis. The degree along `axis` drops by one
    /// (a degree-0 axis stays at degree 0 with zero coefficients).
    pub fn partial_derivative(&self, axis: Axis) -> TensorPoly {
        let deg = match axis {
            Axis::U => self.m,
            Axis::V => self.n,
        };
        let (rows, mat) = derivative_matrix(self.basis, deg);
        self.map_axis(axis, rows, &mat)
    }

    /// Re-expresses the polynomial over `patch`: the result `f̂` satisfies
    /// `f̂(x̂) = f(x)` where `x̂ ∈ [l,h]²` maps affinely onto the patch.
    pub fn reparametrize(&self, patch: &Patch) -> TensorPoly {
        self.reparametrize_box(patch.lo(), patch.hi())
    }

    /// Same as [`reparametrize`](Self::reparametrize) for an axis-aligned box
    /// `[lo.0, hi.0] × [lo.1, hi.1]`.
    pub fn reparametrize_box(&self, lo: Point2, hi: Point2) -> TensorPoly {
        let mu = restriction_matrix(self.basis, self.m, lo[0], hi[0]);
        let mv = restriction_matrix(self.basis, self.n, lo[1], hi[1]);
        self.map_axis(Axis::U, self.m + 1, &mu)
            .map_axis(Axis::V, self.n + 1, &mv)
    }

    /// The point of the natural square `[l,h]²` that [`reparametrize_box`]
    /// maps onto `x`.
    ///
    /// [`reparametrize_box`]: Self::reparametrize_box
    pub fn local_coordinates(basis: BasisKind, lo: Point2, hi: Point2, x: Point2) -> Point2 {
        let (l, h) = basis.domain();
        let to = |k: usize| l + (x[k] - lo[k]) * (h - l) / (hi[k] - lo[k]);
        [to(0), to(1)]
    }

    /// `A·p + b` for a single polynomial; see [`linear_combine`].
    pub fn affine(&self, a: &[Vec<f64>], b: &[f64]) -> Result<TensorPoly> {
        linear_combine(&[self], a, b)
    }
}

/// `A·[p_1; …; p_k] + b`, where the components of the input polynomials are
/// stacked in order. All inputs must share basis and degrees. The constant
/// `b` is folded into the basis's representation of constants.
pub fn linear_combine(polys: &[&TensorPoly], a: &[Vec<f64>], b: &[f64]) -> Result<TensorPoly> {
    let first = polys
        .first()
        .ok_or_else(|| Error::InvalidArgument("no polynomials to combine".into()))?;
    if polys
        .iter()
        .any(|p| p.basis != first.basis || p.m != first.m || p.n != first.n)
    {
        return Err(Error::ShapeMismatch);
    }
    let in_dim: usize = polys.iter().map(|p| p.dim).sum();
    let out_dim = a.len();
    if out_dim == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if b.len() != out_dim {
        return Err(Error::DimensionMismatch { expected: out_dim, found: b.len() });
    }
    if let Some(row) = a.iter().find(|row| row.len() != in_dim) {
        return Err(Error::DimensionMismatch { expected: in_dim, found: row.len() });
    }

    let (m, n) = (first.m, first.n);
    let mut out = TensorPoly::zeros(first.basis, m, n, out_dim);
    let mut stacked = vec![0.0; in_dim];
    for i in 0..=m {
        for j in 0..=n {
            let mut at = 0;
            for p in polys {
                stacked[at..at + p.dim].copy_from_slice(p.coeff(i, j));
                at += p.dim;
            }
            let dst = out.coeff_mut(i, j);
            for (r, row) in a.iter().enumerate() {
                dst[r] = row.iter().zip(&stacked).map(|(x, y)| x * y).sum();
            }
        }
    }
    match first.basis {
        BasisKind::Bernstein => {
            for c in out.coeffs.chunks_exact_mut(out_dim) {
                for (x, y) in c.iter_mut().zip(b) {
                    *x += y;
                }
            }
        }
        BasisKind::Power | BasisKind::Chebyshev => {
            for (x, y) in out.coeff_mut(0, 0).iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    Ok(out)
}

/// Precomputed partial derivatives of a 2-system for repeated Jacobian
/// evaluation.
#[derive(Clone, Debug)]
pub struct JacobianPolys {
    du: TensorPoly,
    dv: TensorPoly,
}

impl JacobianPolys {
    pub fn new(f: &TensorPoly) -> Result<Self> {
        if f.dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: f.dim });
        }
        Ok(JacobianPolys {
            du: f.partial_derivative(Axis::U),
            dv: f.partial_derivative(Axis::V),
        })
    }

    /// `[∂f_i/∂x_j]` at `point`.
    pub fn at(&self, point: Point2) -> Mat2 {
        let a = self.du.evaluate2(point);
        let b = self.dv.evaluate2(point);
        [[a[0], b[0]], [a[1], b[1]]]
    }
}

pub fn jacobian(f: &TensorPoly, point: Point2) -> Result<Mat2> {
    Ok(JacobianPolys::new(f)?.at(point))
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for t in 0..k {
        acc = acc * (n - t) as f64 / (t + 1) as f64;
    }
    acc.round()
}

/// Derivative as a `deg × (deg+1)` matrix (`1 × 1` zero for degree 0).
fn derivative_matrix(basis: BasisKind, deg: usize) -> (usize, Vec<f64>) {
    let cols = deg + 1;
    if deg == 0 {
        return (1, vec![0.0]);
    }
    let rows = deg;
    let mut mat = vec![0.0; rows * cols];
    match basis {
        BasisKind::Power => {
            for k in 0..rows {
                mat[k * cols + k + 1] = (k + 1) as f64;
            }
        }
        BasisKind::Bernstein => {
            let n = deg as f64;
            for k in 0..rows {
                mat[k * cols + k] = -n;
                mat[k * cols + k + 1] = n;
            }
        }
        BasisKind::Chebyshev => {
            // d/dt T_i = Σ over k < i with i−k odd of 2i·T_k, halved for k = 0.
            for i in 1..=deg {
                let mut k = i - 1;
                loop {
                    let w = if k == 0 { i as f64 } else { 2.0 * i as f64 };
                    mat[k * cols + i] = w;
                    if k < 2 {
                        break;
                    }
                    k -= 2;
                }
            }
        }
    }
    (rows, mat)
}

/// Power-basis coefficients of `T_0 … T_deg`: column `i` holds `T_i`.
fn chebyshev_to_power(deg: usize) -> Vec<f64> {
    let n = deg + 1;
    let mut c = vec![0.0; n * n];
    c[0] = 1.0;
    if deg >= 1 {
        c[n + 1] = 1.0;
    }
    for i in 2..=deg {
        for k in 0..=i {
            let mut v = -c[k * n + i - 2];
            if k >= 1 {
                v += 2.0 * c[(k - 1) * n + i - 1];
            }
            c[k * n + i] = v;
        }
    }
    c
}

/// Inverse of an upper-triangular `n × n` matrix with nonzero diagonal.
fn upper_triangular_inverse(a: &[f64], n: usize) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for col in 0..n {
        for row in (0..=col).rev() {
            let mut s = if row == col { 1.0 } else { 0.0 };
            for k in row + 1..=col {
                s -= a[row * n + k] * inv[k * n + col];
            }
            inv[row * n + col] = s / a[row * n + row];
        }
    }
    inv
}

fn mat_mul_square(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += x * b[k * n + j];
            }
        }
    }
    out
}

/// Power-basis composition with `t = scale·s + shift`.
fn power_affine_matrix(deg: usize, scale: f64, shift: f64) -> Vec<f64> {
    let n = deg + 1;
    let mut mat = vec![0.0; n * n];
    for i in 0..=deg {
        for k in 0..=i {
            mat[k * n + i] = binomial(i, k) * scale.powi(k as i32) * shift.powi((i - k) as i32);
        }
    }
    mat
}

/// Univariate matrix taking coefficients over the raw variable to
/// coefficients over the natural interval mapped onto `[lo, hi]`.
fn restriction_matrix(basis: BasisKind, deg: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = deg + 1;
    match basis {
        BasisKind::Power => {
            // [−1,1] → [lo,hi]: t = (hi−lo)/2 · s + (hi+lo)/2
            power_affine_matrix(deg, 0.5 * (hi - lo), 0.5 * (hi + lo))
        }
        BasisKind::Chebyshev => {
            let to_power = chebyshev_to_power(deg);
            let from_power = upper_triangular_inverse(&to_power, n);
            let compose = power_affine_matrix(deg, 0.5 * (hi - lo), 0.5 * (hi + lo));
            let tmp = mat_mul_square(&compose, &to_power, n);
            mat_mul_square(&from_power, &tmp, n)
        }
        BasisKind::Bernstein => {
            // New control point k is the blossom with deg−k arguments lo and
            // k arguments hi; column i is that blossom applied to e_i.
            let mut mat = vec![0.0; n * n];
            let mut work = vec![0.0; n];
            for i in 0..n {
                for k in 0..n {
                    work.iter_mut().for_each(|w| *w = 0.0);
                    work[i] = 1.0;
                    for level in 0..deg {
                        let t = if level < deg - k { lo } else { hi };
                        for q in 0..deg - level {
                            work[q] = (1.0 - t) * work[q] + t * work[q + 1];
                        }
                    }
                    mat[k * n + i] = work[0];
                }
            }
            mat
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(basis: BasisKind, grid: &[&[f64]]) -> TensorPoly {
        let g: Vec<Vec<Vec<f64>>> = grid
            .iter()
            .map(|row| row.iter().map(|&c| vec![c]).collect())
            .collect();
        TensorPoly::from_grid(basis, &g).unwrap()
    }

    #[test]
    fn bernstein_constant_is_partition_of_unity() {
        let p = TensorPoly::from_grid(
            BasisKind::Bernstein,
            &vec![vec![vec![3.0, -1.0]; 4]; 3],
        )
        .unwrap();
        for &(u, v) in &[(0.0, 0.0), (0.3, 0.9), (1.0, 0.25), (0.77, 0.01)] {
            let y = p.evaluate([u, v]);
            assert!((y[0] - 3.0).abs() < 1e-14 && (y[1] + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_t2_at_half() {
        let p = scalar(BasisKind::Chebyshev, &[&[0.0], &[0.0], &[1.0]]);
        assert!((p.evaluate([0.5, 0.3])[0] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn power_system_vanishes_at_known_zero() {
        // (u² − .25, v − .8)
        let mut f = TensorPoly::zeros(BasisKind::Power, 2, 1, 2);
        f.coeff_mut(0, 0).copy_from_slice(&[-0.25, -0.8]);
        f.coeff_mut(2, 0)[0] = 1.0;
        f.coeff_mut(0, 1)[1] = 1.0;
        let y = f.evaluate([0.5, 0.8]);
        assert!(y[0].abs() < 1e-15 && y[1].abs() < 1e-15);
        let j = jacobian(&f, [0.5, 0.8]).unwrap();
        assert_eq!(j, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        for basis in [BasisKind::Power, BasisKind::Bernstein, BasisKind::Chebyshev] {
            let p = TensorPoly::constant(basis, &[4.0]);
            let d = p.partial_derivative(Axis::U);
            assert!(d.coeffs().iter().all(|&c| c == 0.0));
            assert_eq!(d.evaluate([0.3, 0.2])[0], 0.0);
        }
    }

    #[test]
    fn power_rule() {
        let p = scalar(BasisKind::Power, &[&[0.0], &[0.0], &[0.0], &[1.0]]);
        let d = p.partial_derivative(Axis::U);
        assert_eq!(d.degrees(), (2, 0));
        assert_eq!(d.coeffs(), &[0.0, 0.0, 3.0]);
    }

    #[test]
    fn chebyshev_t2_derivative_is_4t1() {
        let p = scalar(BasisKind::Chebyshev, &[&[0.0], &[0.0], &[1.0]]);
        let d = p.partial_derivative(Axis::U);
        assert_eq!(d.degrees(), (1, 0));
        assert_eq!(d.coeffs(), &[0.0, 4.0]);
    }

    #[test]
    fn chebyshev_derivative_matches_finite_differences() {
        let p = scalar(
            BasisKind::Chebyshev,
            &[&[0.3, -1.0, 0.2], &[1.1, 0.4, -0.7], &[-0.5, 0.9, 0.1], &[0.25, -0.3, 0.6]],
        );
        let du = p.partial_derivative(Axis::U);
        let dv = p.partial_derivative(Axis::V);
        let step = 1e-6;
        for k in 0..10 {
            let x = [-0.9 + 0.18 * k as f64, 0.7 - 0.13 * k as f64];
            let fd_u = (p.evaluate([x[0] + step, x[1]])[0] - p.evaluate([x[0] - step, x[1]])[0]) / (2.0 * step);
            let fd_v = (p.evaluate([x[0], x[1] + step])[0] - p.evaluate([x[0], x[1] - step])[0]) / (2.0 * step);
            assert!((du.evaluate(x)[0] - fd_u).abs() <= 1e-7, "u at {x:?}");
            assert!((dv.evaluate(x)[0] - fd_v).abs() <= 1e-7, "v at {x:?}");
        }
    }

    #[test]
    fn bernstein_derivative_drops_degree() {
        // u in Bernstein degree 2: controls 0, .5, 1
        let p = scalar(BasisKind::Bernstein, &[&[0.0], &[0.5], &[1.0]]);
        let d = p.partial_derivative(Axis::U);
        assert_eq!(d.degrees(), (1, 0));
        assert_eq!(d.coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn reparametrize_full_domain_is_identity() {
        let grid: &[&[f64]] = &[&[0.3, -1.0], &[1.1, 0.4], &[-0.5, 0.9]];
        for basis in [BasisKind::Power, BasisKind::Bernstein, BasisKind::Chebyshev] {
            let p = scalar(basis, grid);
            let (l, h) = basis.domain();
            let full = Patch::new([0.5 * (l + h); 2], 0.5 * (h - l));
            let q = p.reparametrize(&full);
            for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
                assert!((a - b).abs() <= 1e-12, "{basis}");
            }
        }
    }

    #[test]
    fn bernstein_linear_restricted_to_left_half() {
        let p = scalar(BasisKind::Bernstein, &[&[0.0], &[1.0]]);
        let q = p.reparametrize(&Patch::new([0.25, 0.5], 0.25));
        assert_eq!(q.degrees(), (1, 0));
        assert!(q.coeffs()[0].abs() < 1e-15);
        assert!((q.coeffs()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bernstein_restriction_may_extrapolate() {
        // u² over [−.5, 1.5]: f̂(s) = (2s − .5)² with s ∈ [0,1].
        let p = scalar(BasisKind::Bernstein, &[&[0.0], &[0.0], &[1.0]]);
        let q = p.reparametrize_box([-0.5, 0.0], [1.5, 1.0]);
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            let expect = (2.0 * s - 0.5).powi(2);
            assert!((q.evaluate([s, 0.5])[0] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_combine_identity_and_constant() {
        let mut f = TensorPoly::zeros(BasisKind::Bernstein, 1, 1, 2);
        f.coeff_mut(1, 0)[0] = 1.0;
        f.coeff_mut(1, 1)[0] = 1.0;
        f.coeff_mut(0, 1)[1] = 1.0;
        f.coeff_mut(1, 1)[1] = 1.0;
        let same = f.affine(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0]).unwrap();
        assert_eq!(same, f);

        for basis in [BasisKind::Power, BasisKind::Bernstein, BasisKind::Chebyshev] {
            let p = TensorPoly::from_grid(basis, &vec![vec![vec![0.7]; 3]; 2]).unwrap();
            let c = p.affine(&[vec![0.0]], &[1.5]).unwrap();
            for x in [[0.1, 0.2], [0.9, 0.4], [0.5, 0.5]] {
                assert!((c.evaluate(x)[0] - 1.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn linear_combine_swaps_components() {
        for basis in [BasisKind::Power, BasisKind::Bernstein, BasisKind::Chebyshev] {
            // (u, v) built in each basis via reparametrization of power form
            let mut f = TensorPoly::zeros(BasisKind::Power, 1, 1, 2);
            f.coeff_mut(1, 0)[0] = 1.0;
            f.coeff_mut(0, 1)[1] = 1.0;
            let f = to_basis(&f, basis);
            let g = f.affine(&[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.0, 0.0]).unwrap();
            for k in 0..10 {
                let x = [0.05 + 0.09 * k as f64, 0.93 - 0.07 * k as f64];
                let y = g.evaluate(x);
                assert!((y[0] - x[1]).abs() < 1e-14 && (y[1] - x[0]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn linear_combine_rejects_bad_shapes() {
        let f = TensorPoly::zeros(BasisKind::Power, 1, 1, 2);
        let g = TensorPoly::zeros(BasisKind::Power, 2, 1, 2);
        assert!(matches!(linear_combine(&[&f, &g], &[vec![1.0; 4]], &[0.0]), Err(Error::ShapeMismatch)));
        assert!(matches!(
            f.affine(&[vec![1.0, 0.0, 0.0]], &[0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            f.affine(&[vec![1.0, 0.0]], &[0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constructor_validates_lengths() {
        assert!(TensorPoly::new(BasisKind::Power, 1, 1, 2, vec![0.0; 7]).is_err());
        assert!(TensorPoly::from_grid(BasisKind::Power, &[vec![vec![1.0, 2.0], vec![1.0]]]).is_err());
        assert_eq!("Chebyshev".parse::<BasisKind>().unwrap(), BasisKind::Chebyshev);
        assert!("legendre".parse::<BasisKind>().is_err());
    }

    /// Converts a power-basis polynomial to `basis` by interpolating through
    /// the reparametrization machinery: the identity map of the power form
    /// onto each basis's natural square.
    fn to_basis(p: &TensorPoly, basis: BasisKind) -> TensorPoly {
        match basis {
            BasisKind::Power => p.clone(),
            BasisKind::Chebyshev => {
                let (m, n) = p.degrees();
                let cu = upper_triangular_inverse(&chebyshev_to_power(m), m + 1);
                let cv = upper_triangular_inverse(&chebyshev_to_power(n), n + 1);
                let q = p.map_axis(Axis::U, m + 1, &cu).map_axis(Axis::V, n + 1, &cv);
                TensorPoly { basis, ..q }
            }
            BasisKind::Bernstein => {
                // Power coefficients over [0,1] → Bernstein: b_k = Σ_{i≤k} C(k,i)/C(n,i) a_i
                let conv = |deg: usize| {
                    let n = deg + 1;
                    let mut mat = vec![0.0; n * n];
                    for k in 0..=deg {
                        for i in 0..=k {
                            mat[k * n + i] = binomial(k, i) / binomial(deg, i);
                        }
                    }
                    mat
                };
                let (m, n) = p.degrees();
                let q = p.map_axis(Axis::U, m + 1, &conv(m)).map_axis(Axis::V, n + 1, &conv(n));
                TensorPoly { basis, ..q }
            }
        }
    }
}
