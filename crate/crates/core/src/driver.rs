//! The subdivision loop.
//!
//! Patches are processed first-in first-out starting from `[0,1]²`. A patch
//! inside a recorded safe region is dropped. Otherwise the exclusion test
//! runs, and a patch that survives it gets a Kantorovich test; on a pass,
//! Newton runs from the patch center and a new zero gets its safe region
//! recorded. Every surviving patch is split into four quadrants whatever the
//! Kantorovich verdict was.

use std::collections::VecDeque;

use log::{debug, trace, warn};

use crate::bounding::{bounding_polygon, contains_origin};
use crate::error::{Error, Result};
use crate::kanto::{kantorovich_test, safe_region, theta_of, KantorovichReport, SafeRegion, Verdict};
use crate::linalg::{dist_inf, Point2};
use crate::newton::{newton_solve, NewtonOutcome, DEFAULT_MAX_ITER, DEFAULT_STEP_TOL};
use crate::polybasis::{Patch, TensorPoly};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    /// Patches narrower than this are reported as unresolved instead of
    /// being queued.
    pub min_patch_width: f64,
    pub max_patches: usize,
    pub newton_step_tol: f64,
    pub newton_max_iter: usize,
    pub zero_residual_tol: f64,
    pub duplicate_tol: f64,
    /// Keep a [`PatchEvent`] for every examined patch.
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            min_patch_width: 1e-6,
            max_patches: 1_000_000,
            newton_step_tol: DEFAULT_STEP_TOL,
            newton_max_iter: DEFAULT_MAX_ITER,
            zero_residual_tol: 1e-10,
            duplicate_tol: 1e-8,
            record_trace: false,
        }
    }
}

impl SolveConfig {
    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            self.min_patch_width,
            self.newton_step_tol,
            self.zero_residual_tol,
            self.duplicate_tol,
        ];
        if positive.iter().any(|x| !(*x > 0.0)) || self.max_patches == 0 || self.newton_max_iter == 0 {
            return Err(Error::InvalidArgument("solver tolerances and limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatchOutcome {
    InSafeRegion,
    Excluded,
    Tested {
        report: KantorovichReport,
        newton: Option<NewtonOutcome>,
        new_zero: bool,
    },
}

impl PatchOutcome {
    pub fn verdict(&self) -> Option<Verdict> {
        match self {
            PatchOutcome::Tested { report, .. } => Some(report.verdict),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchEvent {
    pub patch: Patch,
    pub outcome: PatchOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub patches_examined: usize,
    pub smallest_width: f64,
    pub max_newton_iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    /// Zeros in `[0,1]²` (up to `duplicate_tol`), in discovery order.
    pub zeros: Vec<Point2>,
    /// Safe regions of every zero found, including zeros outside the square.
    pub safe_regions: Vec<SafeRegion>,
    pub stats: SolveStats,
    /// Patches that could not be resolved above the width floor, or were
    /// still queued when the budget ran out.
    pub unresolved: Vec<Patch>,
    pub trace: Vec<PatchEvent>,
}

impl SolveResult {
    /// True when every patch was either excluded or covered by a safe region.
    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty()
    }
}

/// True when the bounding polygon of `f` over the patch excludes the origin,
/// which proves the patch holds no zero.
pub fn exclusion_test(f: &TensorPoly, patch: &Patch) -> Result<bool> {
    let local = f.reparametrize(patch);
    Ok(!contains_origin(&bounding_polygon(&local)?))
}

fn in_unit_square(x: Point2, tol: f64) -> bool {
    x.iter().all(|&c| (-tol..=1.0 + tol).contains(&c))
}

/// Finds the zeros of the 2-system `f` in `[0,1]²`.
///
/// Returns [`Error::BudgetExhausted`] carrying the partial result when more
/// than `max_patches` patches would be needed.
pub fn solve(f: &TensorPoly, config: &SolveConfig) -> Result<SolveResult> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.dim() });
    }
    config.validate()?;
    let theta = theta_of(f);

    let mut queue = VecDeque::from([Patch::unit()]);
    let mut result = SolveResult {
        zeros: Vec::new(),
        safe_regions: Vec::new(),
        stats: SolveStats { patches_examined: 0, smallest_width: 1.0, max_newton_iterations: 0 },
        unresolved: Vec::new(),
        trace: Vec::new(),
    };
    // Known zeros, including those outside the square and those whose safe
    // region could not be computed.
    let mut found: Vec<Point2> = Vec::new();
    let mut last_width = f64::INFINITY;

    while let Some(patch) = queue.pop_front() {
        if result.stats.patches_examined >= config.max_patches {
            queue.push_front(patch);
            result.unresolved.extend(queue);
            debug!("budget of {} patches exhausted", config.max_patches);
            return Err(Error::BudgetExhausted { limit: config.max_patches, partial: Box::new(result) });
        }
        debug_assert!(patch.width() <= last_width, "FIFO order must not grow patches");
        last_width = patch.width();
        result.stats.patches_examined += 1;
        result.stats.smallest_width = result.stats.smallest_width.min(patch.width());

        let outcome = if result.safe_regions.iter().any(|s| s.covers(&patch)) {
            PatchOutcome::InSafeRegion
        } else if exclusion_test(f, &patch)? {
            PatchOutcome::Excluded
        } else {
            let report = kantorovich_test(f, &patch, theta)?;
            let mut newton = None;
            let mut new_zero = false;
            if report.passed() {
                let out = newton_solve(f, patch.center, config.newton_step_tol, config.newton_max_iter)?;
                result.stats.max_newton_iterations = result.stats.max_newton_iterations.max(out.iterations);
                if out.converged {
                    new_zero = record_zero(f, config, &out, &mut found, &mut result);
                } else {
                    warn!("newton from certified start {:?} ended with {:?}", patch.center, out.status);
                }
                newton = Some(out);
            }
            for child in patch.quadrants() {
                if child.width() < config.min_patch_width {
                    result.unresolved.push(child);
                } else {
                    queue.push_back(child);
                }
            }
            PatchOutcome::Tested { report, newton, new_zero }
        };

        trace!(
            "patch center=({:.17e},{:.17e}) radius={:.17e} outcome={}",
            patch.center[0],
            patch.center[1],
            patch.radius,
            describe(&outcome)
        );
        if config.record_trace {
            result.trace.push(PatchEvent { patch, outcome });
        }
    }
    Ok(result)
}

/// Records a converged Newton limit unless it lies in a known safe region or
/// within `duplicate_tol` of a known zero. Returns whether it was new.
fn record_zero(
    f: &TensorPoly,
    config: &SolveConfig,
    out: &NewtonOutcome,
    found: &mut Vec<Point2>,
    result: &mut SolveResult,
) -> bool {
    let x = out.zero;
    let seen = result.safe_regions.iter().any(|s| s.contains_point(x))
        || found.iter().any(|&z| dist_inf(z, x) <= config.duplicate_tol);
    if seen {
        return false;
    }
    found.push(x);
    match safe_region(f, x) {
        Ok(region) => result.safe_regions.push(region),
        Err(e) => warn!("no safe region for zero {x:?}: {e}"),
    }
    if !in_unit_square(x, config.duplicate_tol) {
        debug!("zero {x:?} lies outside the unit square; kept for pruning only");
    } else if out.residual > config.zero_residual_tol {
        warn!("zero {x:?} has residual {:e} above tolerance; not reported", out.residual);
    } else {
        result.zeros.push(x);
    }
    true
}

fn describe(outcome: &PatchOutcome) -> String {
    match outcome {
        PatchOutcome::InSafeRegion => "safe-region".into(),
        PatchOutcome::Excluded => "excluded".into(),
        PatchOutcome::Tested { report, new_zero, .. } => {
            format!("kantorovich={:?} h={:.6e} new_zero={}", report.verdict, report.h, new_zero)
        }
    }
}
