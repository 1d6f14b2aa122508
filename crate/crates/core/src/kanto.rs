//! Kantorovich machinery: the computable Lipschitz bound `ω̂`, the
//! Kantorovich test on a patch, and the safe-region radius of a zero.

use crate::bounding::{gamma, scalar_range, theta};
use crate::error::{Error, Result};
use crate::linalg::{inverse, mat_vec, norm_inf, Mat2, Point2};
use crate::polybasis::{Axis, JacobianPolys, Patch, TensorPoly};

/// Lower end of the safe-radius bracket.
const RHO_MIN: f64 = 1e-8;
const MAX_BISECTIONS: usize = 200;
const BISECTION_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// `h = η·ω̂ > 1/4`.
    FailH,
    /// The `ρ−` ball leaves the domain the test is allowed to use.
    FailDomain,
    SingularJacobian,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KantorovichReport {
    pub center: Point2,
    pub eta: f64,
    pub omega_hat: f64,
    pub h: f64,
    pub rho_minus: Option<f64>,
    pub rho_plus: Option<f64>,
    pub verdict: Verdict,
}

impl KantorovichReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    fn singular(center: Point2) -> Self {
        KantorovichReport {
            center,
            eta: f64::INFINITY,
            omega_hat: f64::INFINITY,
            h: f64::INFINITY,
            rho_minus: None,
            rho_plus: None,
            verdict: Verdict::SingularJacobian,
        }
    }
}

/// Uniqueness ball `B̄(zero, rho_star)` with `omega_star = 2 / rho_star`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SafeRegion {
    pub zero: Point2,
    pub rho_star: f64,
    pub omega_star: f64,
    /// The bracket's upper end was reached: `ρ·ω̂(ρ) < 2` even there.
    pub capped: bool,
}

impl SafeRegion {
    /// Closed containment `‖x0 − zero‖ + r ≤ ρ*` of a patch.
    pub fn covers(&self, patch: &Patch) -> bool {
        crate::linalg::dist_inf(patch.center, self.zero) + patch.radius <= self.rho_star + 1e-12
    }

    pub fn contains_point(&self, x: Point2) -> bool {
        crate::linalg::dist_inf(x, self.zero) <= self.rho_star
    }
}

/// Second partials of `g = f′(x0)⁻¹ f`, ready to be bounded over any box.
struct HessianBound {
    uu: TensorPoly,
    uv: TensorPoly,
    vv: TensorPoly,
}

impl HessianBound {
    fn new(f: &TensorPoly, jinv: &Mat2) -> Result<Self> {
        let a = [jinv[0].to_vec(), jinv[1].to_vec()];
        let g = f.affine(&a, &[0.0, 0.0])?;
        let gu = g.partial_derivative(Axis::U);
        let gv = g.partial_derivative(Axis::V);
        Ok(HessianBound {
            uu: gu.partial_derivative(Axis::U),
            uv: gu.partial_derivative(Axis::V),
            vv: gv.partial_derivative(Axis::V),
        })
    }

    /// `4 · max_{i,j,k} max |ĝ″_ijk|` over the box, each maximum taken from the
    /// endpoints of the entry's bounding interval.
    fn over_box(&self, lo: Point2, hi: Point2) -> f64 {
        let mut worst: f64 = 0.0;
        for h in [&self.uu, &self.uv, &self.vv] {
            let local = h.reparametrize_box(lo, hi);
            for i in 0..2 {
                let range = scalar_range(&local.component(i)).expect("scalar component");
                worst = worst.max(range.magnitude());
            }
        }
        4.0 * worst
    }
}

fn jacobian_inverse(f: &TensorPoly, x0: Point2) -> Result<(Mat2, JacobianPolys)> {
    let jp = JacobianPolys::new(f)?;
    let inv = inverse(&jp.at(x0)).ok_or(Error::SingularJacobian)?;
    Ok((inv, jp))
}

/// `ω̂` for `f′(x0)⁻¹ f′` over `region`. It dominates the smallest Lipschitz
/// constant there.
pub fn lipschitz_bound(f: &TensorPoly, x0: Point2, region: &Patch) -> Result<f64> {
    lipschitz_bound_box(f, x0, region.lo(), region.hi())
}

pub fn lipschitz_bound_box(f: &TensorPoly, x0: Point2, lo: Point2, hi: Point2) -> Result<f64> {
    let (jinv, _) = jacobian_inverse(f, x0)?;
    Ok(HessianBound::new(f, &jinv)?.over_box(lo, hi))
}

/// The square `D′ = [−γ, 1+γ]²` as `(low, high)`.
pub fn dprime(gamma: f64) -> (f64, f64) {
    (-gamma, 1.0 + gamma)
}

/// θ of the polynomial's own basis and degrees.
pub fn theta_of(f: &TensorPoly) -> f64 {
    let (m, n) = f.degrees();
    theta(f.basis(), m, n)
}

/// Kantorovich test at the center `x0` of `patch` with Lipschitz domain
/// `B̄(x0, 2γ(θ)r) ∩ D′`.
///
/// Passing requires `h = η·ω̂ ≤ 1/4` and that `B̄(x0, ρ−)` lies inside the
/// Lipschitz domain (which itself lies in `D′`). When `ω̂ = 0` the system is
/// affine everywhere, `ρ− = η`, and only containment in `D′` is checked.
pub fn kantorovich_test(f: &TensorPoly, patch: &Patch, theta: f64) -> Result<KantorovichReport> {
    let gamma = gamma(theta)?;
    let x0 = patch.center;
    let (jinv, _) = match jacobian_inverse(f, x0) {
        Ok(v) => v,
        Err(Error::SingularJacobian) => return Ok(KantorovichReport::singular(x0)),
        Err(e) => return Err(e),
    };
    let step = mat_vec(&jinv, f.evaluate2(x0));
    let eta = norm_inf(&step);

    let (dlo, dhi) = dprime(gamma);
    let reach = 2.0 * gamma * patch.radius;
    let lo = [(x0[0] - reach).max(dlo), (x0[1] - reach).max(dlo)];
    let hi = [(x0[0] + reach).min(dhi), (x0[1] + reach).min(dhi)];
    let omega_hat = HessianBound::new(f, &jinv)?.over_box(lo, hi);
    let h = eta * omega_hat;

    let (rho_minus, rho_plus) = if h <= 0.5 {
        let s = (1.0 - 2.0 * h).sqrt();
        // (1 − s)/ω̂ written without cancellation; equals η when ω̂ = 0.
        let minus = 2.0 * eta / (1.0 + s);
        let plus = if omega_hat > 0.0 { (1.0 + s) / omega_hat } else { f64::INFINITY };
        (Some(minus), Some(plus))
    } else {
        (None, None)
    };

    let verdict = if h > 0.25 {
        Verdict::FailH
    } else {
        let rho = rho_minus.expect("h <= 1/4 implies rho_minus");
        let (blo, bhi) = if omega_hat > 0.0 { (lo, hi) } else { ([dlo; 2], [dhi; 2]) };
        let inside = (0..2).all(|k| x0[k] - rho >= blo[k] && x0[k] + rho <= bhi[k]);
        if inside {
            Verdict::Pass
        } else {
            Verdict::FailDomain
        }
    };

    Ok(KantorovichReport { center: x0, eta, omega_hat, h, rho_minus, rho_plus, verdict })
}

/// Safe region of a zero: the radius `ρ*` with `ρ*·ω̂(ρ*) = 2`, found by
/// bisection, where `ω̂(ρ)` is [`lipschitz_bound`] over `B̄(x*, ρ)`.
///
/// The returned radius is the lower end of the final bracket, so `ω̂(ρ*)`
/// never exceeds `ω* = 2/ρ*`. Since `ω̂` overestimates the true Lipschitz
/// constant, the region is never larger than the exact one.
pub fn safe_region(f: &TensorPoly, x_star: Point2) -> Result<SafeRegion> {
    let gamma = gamma(theta_of(f))?;
    let rho_max = 4.0 * (1.0 + 2.0 * gamma);
    let (jinv, _) = jacobian_inverse(f, x_star)?;
    let bound = HessianBound::new(f, &jinv)?;
    let excess = |rho: f64| {
        let w = bound.over_box([x_star[0] - rho, x_star[1] - rho], [x_star[0] + rho, x_star[1] + rho]);
        rho * w
    };

    if excess(rho_max) <= 2.0 {
        return Ok(SafeRegion { zero: x_star, rho_star: rho_max, omega_star: 2.0 / rho_max, capped: true });
    }
    if excess(RHO_MIN) > 2.0 {
        return Err(Error::NoConvergence);
    }
    let (mut lo, mut hi) = (RHO_MIN, rho_max);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= BISECTION_RTOL * lo {
            return Ok(SafeRegion { zero: x_star, rho_star: lo, omega_star: 2.0 / lo, capped: false });
        }
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 2.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence)
}

/// Right-hand side of the Kantorovich error bound
/// `‖x* − x^k‖ ≤ (η/h)·(1 − √(1−2h))^{2^k} / 2^k`, written so that it stays
/// finite as `h → 0`.
pub fn kantorovich_error_bound(eta: f64, h: f64, k: u32) -> f64 {
    let s = (1.0 - 2.0 * h).max(0.0).sqrt();
    let q = 1.0 - s;
    let p = 2f64.powi(k as i32);
    // (η/h)(1−s)^{2^k} = 2η/(1+s) · (1−s)^{2^k − 1}
    2.0 * eta / (1.0 + s) * q.powf(p - 1.0) / p
}
