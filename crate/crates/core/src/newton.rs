//! Plain (undamped) Newton iteration for 2×2 polynomial systems.

use crate::bounding::gamma;
use crate::error::Result;
use crate::kanto::theta_of;
use crate::linalg::{inverse, mat_vec, norm_inf, Point2};
use crate::polybasis::{JacobianPolys, TensorPoly};

pub const DEFAULT_STEP_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NewtonStatus {
    Converged,
    MaxIterations,
    SingularJacobian,
    Diverged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonOutcome {
    pub zero: Point2,
    /// Number of Newton steps taken.
    pub iterations: usize,
    /// `‖f(zero)‖∞`.
    pub residual: f64,
    pub converged: bool,
    pub status: NewtonStatus,
    /// `x^0, x^1, …` including the final point.
    pub iterates: Vec<Point2>,
}

/// Iterates `x ← x − f′(x)⁻¹ f(x)` from `x0` until the step's infinity norm
/// is at most `step_tol` or `max_iter` steps were taken. Iterates farther than
/// `10·(1 + 2γ(θ))` from the origin count as divergence.
pub fn newton_solve(f: &TensorPoly, x0: Point2, step_tol: f64, max_iter: usize) -> Result<NewtonOutcome> {
    let jp = JacobianPolys::new(f)?;
    let escape = 10.0 * (1.0 + 2.0 * gamma(theta_of(f))?);
    let mut x = x0;
    let mut iterates = vec![x];
    let mut status = NewtonStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < max_iter {
        let fx = f.evaluate2(x);
        if fx == [0.0, 0.0] {
            status = NewtonStatus::Converged;
            break;
        }
        let Some(jinv) = inverse(&jp.at(x)) else {
            status = NewtonStatus::SingularJacobian;
            break;
        };
        let step = mat_vec(&jinv, fx);
        x = [x[0] - step[0], x[1] - step[1]];
        iterations += 1;
        iterates.push(x);
        if !x.iter().all(|c| c.is_finite()) || norm_inf(&x) > escape {
            status = NewtonStatus::Diverged;
            break;
        }
        if norm_inf(&step) <= step_tol {
            status = NewtonStatus::Converged;
            break;
        }
    }

    let residual = norm_inf(&f.evaluate2(x));
    Ok(NewtonOutcome {
        zero: x,
        iterations,
        residual,
        converged: status == NewtonStatus::Converged,
        status,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polybasis::BasisKind;

    fn quad() -> TensorPoly {
        let mut f = TensorPoly::zeros(BasisKind::Power, 2, 1, 2);
        f.coeff_mut(0, 0).copy_from_slice(&[-0.25, -0.8]);
        f.coeff_mut(2, 0)[0] = 1.0;
        f.coeff_mut(0, 1)[1] = 1.0;
        f
    }

    #[test]
    fn start_at_zero() {
        let out = newton_solve(&quad(), [0.5, 0.8], DEFAULT_STEP_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 1);
        assert_eq!(out.zero, [0.5, 0.8]);
    }

    #[test]
    fn first_iterate_by_hand() {
        let out = newton_solve(&quad(), [0.6, 0.8], DEFAULT_STEP_TOL, DEFAULT_MAX_ITER).unwrap();
        // u1 = .6 − (.36 − .25)/1.2
        assert!((out.iterates[1][0] - (0.6 - 0.11 / 1.2)).abs() < 1e-15);
        assert!(out.converged);
        assert!((out.zero[0] - 0.5).abs() < 1e-15 && (out.zero[1] - 0.8).abs() < 1e-15);
        assert!(out.residual < 1e-15);
    }

    #[test]
    fn singular_start() {
        let out = newton_solve(&quad(), [0.0, 0.3], DEFAULT_STEP_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(out.status, NewtonStatus::SingularJacobian);
        assert!(!out.converged);
    }

    #[test]
    fn divergence_is_detected() {
        // u² + 1 has no real zero; iterates wander off and eventually jump far.
        let mut f = TensorPoly::zeros(BasisKind::Power, 2, 1, 2);
        f.coeff_mut(0, 0).copy_from_slice(&[1.0, 0.0]);
        f.coeff_mut(2, 0)[0] = 1.0;
        f.coeff_mut(0, 1)[1] = 1.0;
        let out = newton_solve(&f, [1e-9, 0.0], DEFAULT_STEP_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(out.status, NewtonStatus::Diverged);
    }
}
