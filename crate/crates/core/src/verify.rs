//! Independent oracles, conditioning estimates and test fixtures.
//!
//! [`brute_zeros`] finds zeros by screening a uniform grid and polishing
//! candidates with Newton's method; it shares nothing with the subdivision
//! driver beyond polynomial evaluation. [`estimate_condition`] samples the
//! quantities that make up the condition number of a system at its real
//! zeros. The fixtures build the systems with known closely spaced zeros and
//! known complex-conjugate near misses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounding::gamma;
use crate::error::{Error, Result};
use crate::kanto::{dprime, safe_region, theta_of};
use crate::linalg::{dist_inf, inverse, mat_mul, mat_norm_inf, mat_sub, Mat2, Point2};
use crate::newton::{newton_solve, DEFAULT_MAX_ITER};
use crate::polybasis::{BasisKind, JacobianPolys, TensorPoly};

/// Smallest grid accepted by the oracle.
pub const MIN_GRID: usize = 32;
/// Grid size that reliably finds every simple zero of degree ≤ 4 systems
/// with moderate conditioning.
pub const DEFAULT_GRID: usize = 256;

const ORACLE_STEP_TOL: f64 = 1e-14;
const ORACLE_DEDUP: f64 = 1e-6;
const ORACLE_BOX_SLACK: f64 = 1e-9;
const ORACLE_RESIDUAL: f64 = 1e-10;
const SAMPLE_SEED: u64 = 0x6b74_735f_636f_6e64;

/// Zeros of the 2-system `f` in `[0,1]²`, sorted lexicographically.
pub fn brute_zeros(f: &TensorPoly, grid_n: usize) -> Result<Vec<Point2>> {
    brute_zeros_in(f, grid_n, [0.0, 0.0], [1.0, 1.0])
}

/// Zeros of `f` in the box `[lo, hi]` (with slack `1e-9`).
///
/// Each grid cell whose corner values could plausibly straddle zero in both
/// components (a sign change, or a smallest magnitude within three times the
/// spread of the corner values) seeds Newton from its center and, failing
/// that, from its corners.
pub fn brute_zeros_in(f: &TensorPoly, grid_n: usize, lo: Point2, hi: Point2) -> Result<Vec<Point2>> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.dim() });
    }
    if grid_n < MIN_GRID {
        return Err(Error::InvalidArgument(format!("grid_n must be at least {MIN_GRID}")));
    }
    if !(lo[0] < hi[0] && lo[1] < hi[1]) {
        return Err(Error::InvalidArgument("empty search box".into()));
    }
    let step = [(hi[0] - lo[0]) / grid_n as f64, (hi[1] - lo[1]) / grid_n as f64];
    let node = |i: usize, j: usize| [lo[0] + i as f64 * step[0], lo[1] + j as f64 * step[1]];
    let stride = grid_n + 1;
    let values: Vec<Point2> = (0..stride * stride)
        .map(|idx| f.evaluate2(node(idx / stride, idx % stride)))
        .collect();

    let mut zeros: Vec<Point2> = Vec::new();
    for i in 0..grid_n {
        for j in 0..grid_n {
            let corners = [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)];
            let vals = corners.map(|(a, b)| values[a * stride + b]);
            if !(0..2).all(|c| plausible(vals.map(|v| v[c]))) {
                continue;
            }
            let center = [lo[0] + (i as f64 + 0.5) * step[0], lo[1] + (j as f64 + 0.5) * step[1]];
            let starts = std::iter::once(center).chain(corners.iter().map(|&(a, b)| node(a, b)));
            for x0 in starts {
                let out = newton_solve(f, x0, ORACLE_STEP_TOL, DEFAULT_MAX_ITER)?;
                if !out.converged || out.residual > ORACLE_RESIDUAL {
                    continue;
                }
                let z = out.zero;
                let inside = (0..2).all(|k| z[k] >= lo[k] - ORACLE_BOX_SLACK && z[k] <= hi[k] + ORACLE_BOX_SLACK);
                if inside && !zeros.iter().any(|&y| dist_inf(y, z) <= ORACLE_DEDUP) {
                    zeros.push(z);
                }
                break;
            }
        }
    }
    zeros.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    Ok(zeros)
}

fn plausible(v: [f64; 4]) -> bool {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min <= 0.0 && max >= 0.0 {
        return true;
    }
    let smallest = v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    smallest <= 3.0 * (max - min) + 1e-12
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionEstimate {
    /// Largest sampled Lipschitz quotient of `f′(x*)⁻¹f′`.
    pub omega_f_lb: f64,
    /// Largest sampled `‖f′(x*)⁻¹ f′(y)‖∞` over `y ∈ [0,1]²`.
    pub jacobian_ratio_lb: f64,
    pub cond_lb: f64,
    pub zeros_used: Vec<Point2>,
    /// Always true: complex zeros are not enumerated.
    pub is_lower_bound: bool,
}

/// Sampled lower bound of the condition number from the given real zeros.
///
/// Three families of samples contribute, each drawn from its own fixed random
/// stream so that a larger `sample_n` only adds samples:
/// - `y ∈ [0,1]²` for the Jacobian ratio at every zero;
/// - pairs in `D′ = [−γ, 1+γ]²` for the Lipschitz quotient anchored at zeros
///   inside `[0,1]²`;
/// - pairs in the computed safe region of every zero. That region lies inside
///   the exact uniqueness ball, so these quotients stay below `2/ρ*` of the
///   exact ball.
pub fn estimate_condition(f: &TensorPoly, zeros: &[Point2], sample_n: usize) -> Result<ConditionEstimate> {
    let jp = JacobianPolys::new(f)?;
    let gamma = gamma(theta_of(f))?;
    let (dlo, dhi) = dprime(gamma);

    let ys = sample_points(1, sample_n, 0.0, 1.0);
    let pairs_d: Vec<(Point2, Point2)> = sample_points(2, sample_n, dlo, dhi)
        .into_iter()
        .zip(sample_points(3, sample_n, dlo, dhi))
        .collect();
    let pairs_ball: Vec<(Point2, Point2)> = sample_points(4, sample_n, -1.0, 1.0)
        .into_iter()
        .zip(sample_points(5, sample_n, -1.0, 1.0))
        .collect();

    let mut jac_ratio: f64 = 0.0;
    let mut omega: f64 = 0.0;
    for &z in zeros {
        let jinv = inverse(&jp.at(z)).ok_or(Error::SingularJacobian)?;
        for &y in &ys {
            jac_ratio = jac_ratio.max(mat_norm_inf(&mat_mul(&jinv, &jp.at(y))));
        }
        let in_square = z.iter().all(|c| (0.0..=1.0).contains(c));
        if in_square {
            for &(y, w) in &pairs_d {
                omega = omega.max(quotient(&jp, &jinv, y, w));
            }
        }
        let rho = match safe_region(f, z) {
            Ok(region) => region.rho_star,
            Err(Error::NoConvergence) => 0.0,
            Err(e) => return Err(e),
        };
        if rho > 0.0 {
            let scale = |o: Point2| [z[0] + rho * o[0], z[1] + rho * o[1]];
            for &(a, b) in &pairs_ball {
                omega = omega.max(quotient(&jp, &jinv, scale(a), scale(b)));
            }
        }
    }
    Ok(ConditionEstimate {
        omega_f_lb: omega,
        jacobian_ratio_lb: jac_ratio,
        cond_lb: omega.max(jac_ratio),
        zeros_used: zeros.to_vec(),
        is_lower_bound: true,
    })
}

fn quotient(jp: &JacobianPolys, jinv: &Mat2, y: Point2, z: Point2) -> f64 {
    let dist = dist_inf(y, z);
    if dist == 0.0 {
        return 0.0;
    }
    mat_norm_inf(&mat_mul(jinv, &mat_sub(&jp.at(y), &jp.at(z)))) / dist
}

fn sample_points(stream: u64, n: usize, lo: f64, hi: f64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
    rng.set_stream(stream);
    (0..n)
        .map(|_| [rng.random_range(lo..=hi), rng.random_range(lo..=hi)])
        .collect()
}

/// A quadratic-by-affine system with zero `x*`, Jacobian `α` there, and a
/// second zero at infinity-norm distance exactly `2/ω` from `x*`.
///
/// The quadratic term goes on `u` when `|α₄| ≥ |α₃|` and on `v` otherwise.
pub fn fixture_nearest_zero(x_star: Point2, alpha: Mat2, omega: f64) -> Result<TensorPoly> {
    let [[a1, a2], [a3, a4]] = alpha;
    let det = a1 * a4 - a2 * a3;
    if inverse(&alpha).is_none() {
        return Err(Error::SingularJacobian);
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidArgument("omega must be positive".into()));
    }
    let [us, vs] = x_star;
    let mut f;
    if a4.abs() >= a3.abs() {
        let k = omega * det / (2.0 * a4);
        // k(u−u*)² + a1(u−u*) + a2(v−v*)
        f = TensorPoly::zeros(BasisKind::Power, 2, 1, 2);
        f.coeff_mut(0, 0)[0] = k * us * us - a1 * us - a2 * vs;
        f.coeff_mut(1, 0)[0] = a1 - 2.0 * k * us;
        f.coeff_mut(2, 0)[0] = k;
        f.coeff_mut(0, 1)[0] = a2;
    } else {
        let k = omega * det / (2.0 * a3);
        // a1(u−u*) + k(v−v*)² + a2(v−v*)
        f = TensorPoly::zeros(BasisKind::Power, 1, 2, 2);
        f.coeff_mut(0, 0)[0] = k * vs * vs - a1 * us - a2 * vs;
        f.coeff_mut(1, 0)[0] = a1;
        f.coeff_mut(0, 1)[0] = a2 - 2.0 * k * vs;
        f.coeff_mut(0, 2)[0] = k;
    }
    f.coeff_mut(0, 0)[1] = -a3 * us - a4 * vs;
    f.coeff_mut(1, 0)[1] = a3;
    f.coeff_mut(0, 1)[1] = a4;
    Ok(f)
}

/// Real and imaginary parts of `(z − (u0 − ε − iε))(z − (u0 + ε − iε))`
/// with `z = u + iv`. The real zeros `(u0 ± ε, −ε)` sit just below the unit
/// square and a conjugate pair `(u0, −ε ± iε)` completes the set.
pub fn fixture_illconditioned(u0: f64, epsilon: f64) -> Result<TensorPoly> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0, 1)".into()));
    }
    if !u0.is_finite() {
        return Err(Error::InvalidArgument("u0 must be finite".into()));
    }
    let e = epsilon;
    let mut f = TensorPoly::zeros(BasisKind::Power, 2, 2, 2);
    // u² − v² − 2u0·u − 2εv − 2ε² + u0²
    f.coeff_mut(0, 0)[0] = u0 * u0 - 2.0 * e * e;
    f.coeff_mut(1, 0)[0] = -2.0 * u0;
    f.coeff_mut(2, 0)[0] = 1.0;
    f.coeff_mut(0, 1)[0] = -2.0 * e;
    f.coeff_mut(0, 2)[0] = -1.0;
    // 2uv − 2u0·v + 2εu − 2εu0
    f.coeff_mut(0, 0)[1] = -2.0 * e * u0;
    f.coeff_mut(1, 0)[1] = 2.0 * e;
    f.coeff_mut(0, 1)[1] = -2.0 * u0;
    f.coeff_mut(1, 1)[1] = 2.0;
    Ok(f)
}

/// The biquadratic Bernstein test system with two zeros about `.42` apart.
pub fn reference_system() -> TensorPoly {
    let grid = vec![
        vec![vec![1.2, 0.5], vec![-0.6, -0.6], vec![0.1, 1.1]],
        vec![vec![-1.1, -0.3], vec![0.6, -2.3], vec![-2.0, -0.1]],
        vec![vec![0.6, 1.2], vec![-1.1, -1.2], vec![-0.5, 0.4]],
    ];
    TensorPoly::from_grid(BasisKind::Bernstein, &grid).expect("well-formed grid")
}

/// `(u³ − 2.2u² + 1.55u − .35, v² − .7v + .1)`, zeros at `u ∈ {.5, .7, 1}`
/// and `v ∈ {.2, .5}`.
pub fn cubic_system() -> TensorPoly {
    let mut f = TensorPoly::zeros(BasisKind::Power, 3, 2, 2);
    for (i, c) in [-0.35, 1.55, -2.2, 1.0].into_iter().enumerate() {
        f.coeff_mut(i, 0)[0] = c;
    }
    for (j, c) in [0.1, -0.7, 1.0].into_iter().enumerate() {
        f.coeff_mut(0, j)[1] = c;
    }
    f
}

/// A system of dimension `dim` with independent standard normal coefficients,
/// fully determined by `seed`.
pub fn random_poly(basis: BasisKind, m: usize, n: usize, dim: usize, seed: u64) -> TensorPoly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..(m + 1) * (n + 1) * dim).map(|_| rng.sample(StandardNormal)).collect();
    TensorPoly::new(basis, m, n, dim, coeffs).expect("sized to fit")
}

pub fn random_system(basis: BasisKind, m: usize, n: usize, seed: u64) -> TensorPoly {
    random_poly(basis, m, n, 2, seed)
}

/// Spearman rank correlation, with ties given their average rank. Returns
/// `None` for fewer than two samples or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Named systems whose conditioning spans several orders of magnitude.
pub fn conditioning_suite() -> Vec<(String, TensorPoly)> {
    let cubic_jac = [[0.1, 0.0], [0.0, 0.3]];
    let mut suite = vec![("reference".to_string(), reference_system())];
    for omega in [20.0, 2000.0, 200000.0] {
        let f = fixture_nearest_zero([0.5, 0.5], cubic_jac, omega).expect("nonsingular");
        suite.push((format!("nearest_zero_w{omega}"), f));
    }
    for eps in [0.3, 0.1, 0.03, 0.01] {
        let f = fixture_illconditioned(0.5, eps).expect("eps in range");
        suite.push((format!("illconditioned_e{eps}"), f));
    }
    suite.push(("random_b2_s11".to_string(), random_system(BasisKind::Bernstein, 2, 2, 11)));
    suite
}

/// Real zeros used for conditioning: those of `f` in `D′`.
pub fn conditioning_zeros(f: &TensorPoly) -> Result<Vec<Point2>> {
    let (lo, hi) = dprime(gamma(theta_of(f))?);
    brute_zeros_in(f, 3 * DEFAULT_GRID, [lo, lo], [hi, hi])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polybasis::jacobian;

    fn power2(terms: &[(usize, usize, [f64; 2])], m: usize, n: usize) -> TensorPoly {
        let mut f = TensorPoly::zeros(BasisKind::Power, m, n, 2);
        for &(i, j, c) in terms {
            f.coeff_mut(i, j).copy_from_slice(&c);
        }
        f
    }

    #[test]
    fn oracle_linear() {
        let f = power2(&[(0, 0, [-0.5, -0.5]), (1, 0, [1.0, 0.0]), (0, 1, [0.0, 1.0])], 1, 1);
        let z = brute_zeros(&f, 64).unwrap();
        assert_eq!(z.len(), 1);
        assert!(dist_inf(z[0], [0.5, 0.5]) < 1e-14);
    }

    #[test]
    fn oracle_border_zero() {
        let f = power2(&[(0, 0, [-0.25, -0.8]), (2, 0, [1.0, 0.0]), (0, 1, [0.0, 1.0])], 2, 1);
        let z = brute_zeros(&f, DEFAULT_GRID).unwrap();
        assert_eq!(z.len(), 1);
        assert!(dist_inf(z[0], [0.5, 0.8]) < 1e-12);
        let wide = brute_zeros_in(&f, 64, [-1.0, 0.0], [1.0, 1.0]).unwrap();
        assert_eq!(wide.len(), 2);
        assert!(dist_inf(wide[0], [-0.5, 0.8]) < 1e-12);
    }

    #[test]
    fn oracle_reference_instance() {
        let z = brute_zeros(&reference_system(), DEFAULT_GRID).unwrap();
        assert_eq!(z.len(), 2);
        assert!((dist_inf(z[0], z[1]) - 0.4196).abs() <= 1e-3);
    }

    #[test]
    fn oracle_rejects_small_grid() {
        assert!(brute_zeros(&reference_system(), 16).is_err());
    }

    #[test]
    fn condition_of_linear_system() {
        let f = power2(&[(0, 0, [-0.5, -0.5]), (1, 0, [1.0, 0.0]), (0, 1, [0.0, 1.0])], 1, 1);
        let c = estimate_condition(&f, &[[0.5, 0.5]], 200).unwrap();
        assert_eq!(c.jacobian_ratio_lb, 1.0);
        assert_eq!(c.omega_f_lb, 0.0);
        assert_eq!(c.cond_lb, 1.0);
        assert!(c.is_lower_bound);
    }

    #[test]
    fn condition_grows_for_illconditioned() {
        let f = fixture_illconditioned(0.5, 0.01).unwrap();
        let zeros = conditioning_zeros(&f).unwrap();
        assert_eq!(zeros.len(), 2);
        let c = estimate_condition(&f, &zeros, 500).unwrap();
        assert!(c.cond_lb >= 10.0, "cond_lb = {}", c.cond_lb);
    }

    #[test]
    fn condition_of_reference_instance() {
        let f = reference_system();
        let zeros = brute_zeros(&f, DEFAULT_GRID).unwrap();
        let c = estimate_condition(&f, &zeros, 1000).unwrap();
        assert!(c.cond_lb > 1.0 && c.cond_lb <= 3.5e3, "cond_lb = {}", c.cond_lb);
    }

    #[test]
    fn condition_is_monotone_in_samples() {
        let f = reference_system();
        let zeros = brute_zeros(&f, 64).unwrap();
        let mut last = 0.0;
        for n in [10, 50, 200] {
            let c = estimate_condition(&f, &zeros, n).unwrap().cond_lb;
            assert!(c >= last);
            last = c;
        }
    }

    #[test]
    fn nearest_zero_matches_worked_example() {
        let f = fixture_nearest_zero([0.5, 0.5], [[0.1, 0.0], [0.0, 0.3]], 20.0).unwrap();
        let expect = power2(
            &[(0, 0, [0.2, -0.15]), (1, 0, [-0.9, 0.0]), (2, 0, [1.0, 0.0]), (0, 1, [0.0, 0.3])],
            2,
            1,
        );
        for (a, b) in f.coeffs().iter().zip(expect.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
        for z in [[0.5, 0.5], [0.4, 0.5]] {
            let v = f.evaluate2(z);
            assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
        }
    }

    #[test]
    fn nearest_zero_identity_alpha() {
        let f = fixture_nearest_zero([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]], 2.0).unwrap();
        assert_eq!(f.evaluate2([-1.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn nearest_zero_construction_identities() {
        let cases = [
            ([0.3, 0.6], [[1.0, 2.0], [0.5, -1.5]], 7.0),
            ([0.8, 0.1], [[0.2, -1.0], [3.0, 0.4]], 50.0),
        ];
        for (x, a, w) in cases {
            let f = fixture_nearest_zero(x, a, w).unwrap();
            let v = f.evaluate2(x);
            assert!(v[0].abs() < 1e-12 && v[1].abs() < 1e-12);
            let j = jacobian(&f, x).unwrap();
            for r in 0..2 {
                for c in 0..2 {
                    assert!((j[r][c] - a[r][c]).abs() < 1e-12);
                }
            }
        }
        assert!(fixture_nearest_zero([0.0, 0.0], [[1.0, 2.0], [2.0, 4.0]], 1.0).is_err());
    }

    #[test]
    fn illconditioned_zeros() {
        let f = fixture_illconditioned(0.5, 0.1).unwrap();
        for z in [[0.4, -0.1], [0.6, -0.1]] {
            let v = f.evaluate2(z);
            assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
        }
        assert!(fixture_illconditioned(0.5, 0.0).is_err());
        assert!(fixture_illconditioned(0.5, 1.0).is_err());
    }

    #[test]
    fn cubic_zeros() {
        let f = cubic_system();
        let z = brute_zeros(&f, 128).unwrap();
        assert_eq!(z.len(), 6);
        assert!(dist_inf(z[0], [0.5, 0.2]) < 1e-12);
    }

    #[test]
    fn random_is_deterministic() {
        let a = random_system(BasisKind::Chebyshev, 3, 2, 5);
        assert_eq!(a, random_system(BasisKind::Chebyshev, 3, 2, 5));
        assert_ne!(a, random_system(BasisKind::Chebyshev, 3, 2, 6));
    }

    #[test]
    fn spearman_values() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]), Some(1.0));
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), None);
        // ranks (1.5, 1.5, 3) vs (1, 2, 3)
        let r = spearman(&[5.0, 5.0, 7.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r - 0.75f64.sqrt()).abs() < 1e-12);
    }
}
