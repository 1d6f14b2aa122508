//! Small fixed-size helpers for 2-vectors and 2×2 matrices, all in the
//! infinity norm.

pub type Point2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Relative pivot threshold below which a 2×2 matrix counts as singular.
pub const SINGULAR_RTOL: f64 = 1e-14;

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn dist_inf(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Induced infinity norm: the largest absolute row sum.
pub fn mat_norm_inf(m: &Mat2) -> f64 {
    (m[0][0].abs() + m[0][1].abs()).max(m[1][0].abs() + m[1][1].abs())
}

pub fn mat_vec(m: &Mat2, v: Point2) -> Point2 {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat_sub(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] - b[0][0], a[0][1] - b[0][1]],
        [a[1][0] - b[1][0], a[1][1] - b[1][1]],
    ]
}

/// Inverse of a 2×2 matrix, or `None` when `|det|` is at most
/// `SINGULAR_RTOL` times the product of the row infinity norms.
pub fn inverse(m: &Mat2) -> Option<Mat2> {
    let r0 = m[0][0].abs().max(m[0][1].abs());
    let r1 = m[1][0].abs().max(m[1][1].abs());
    if !(r0 > 0.0 && r1 > 0.0 && r0.is_finite() && r1.is_finite()) {
        return None;
    }
    // Determinant of the row-normalized matrix, immune to under/overflow.
    let (a, b) = (m[0][0] / r0, m[0][1] / r0);
    let (c, d) = (m[1][0] / r1, m[1][1] / r1);
    let det = a * d - b * c;
    if det.abs() <= SINGULAR_RTOL {
        return None;
    }
    let inv = [[d / det / r0, -b / det / r1], [-c / det / r0, a / det / r1]];
    inv.iter().flatten().all(|x| x.is_finite()).then_some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, 1.0], [-3.0, 0.5]];
        let inv = inverse(&m).unwrap();
        let id = mat_mul(&m, &inv);
        assert!((id[0][0] - 1.0).abs() < 1e-15);
        assert!(id[0][1].abs() < 1e-15);
        assert!(id[1][0].abs() < 1e-15);
        assert!((id[1][1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_detection_is_scale_invariant() {
        assert!(inverse(&[[1.0, 2.0], [2.0, 4.0]]).is_none());
        assert!(inverse(&[[1e-200, 2e-200], [2e-200, 4e-200]]).is_none());
        assert!(inverse(&[[1e-200, 0.0], [0.0, 1e-200]]).is_some());
        assert!(inverse(&[[0.0, 0.0], [0.0, 1.0]]).is_none());
    }

    #[test]
    fn norms() {
        assert_eq!(norm_inf(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(mat_norm_inf(&[[1.0, -2.0], [0.5, 0.5]]), 3.0);
        assert_eq!(dist_inf([0.0, 0.0], [0.25, -0.5]), 0.5);
    }
}
