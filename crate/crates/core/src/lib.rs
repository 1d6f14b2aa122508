//! Certified zero finding for bivariate polynomial systems on the unit square.
//!
//! The solver subdivides `[0,1]²` into a FIFO queue of square patches. Each
//! patch is either discarded because the bounding polygon of its image
//! excludes the origin, skipped because it lies in the uniqueness ball of a
//! zero already found, or checked with a Kantorovich test that certifies its
//! center as a quadratically convergent Newton start. Polynomials may be given
//! in the power, Bernstein or Chebyshev basis.
//!
//! [`intersect`] reduces a line / parametric-surface intersection problem in
//! 3D to such a system, and [`verify`] holds brute-force oracles, conditioning
//! estimates and the adversarial test fixtures.

pub mod bounding;
pub mod driver;
pub mod error;
pub mod intersect;
pub mod kanto;
pub mod linalg;
pub mod newton;
pub mod polybasis;
pub mod verify;

pub use bounding::{bounding_polygon, gamma, scalar_range, theta, ConvexPolygon, Interval};
pub use driver::{exclusion_test, solve, PatchEvent, PatchOutcome, SolveConfig, SolveResult, SolveStats};
pub use error::{Error, Result};
pub use intersect::{intersect, Intersection, IntersectResult, Line3, Surface3};
pub use kanto::{kantorovich_test, lipschitz_bound, safe_region, KantorovichReport, SafeRegion, Verdict};
pub use linalg::{Mat2, Point2};
pub use newton::{newton_solve, NewtonOutcome, NewtonStatus};
pub use polybasis::{jacobian, linear_combine, Axis, BasisKind, Patch, TensorPoly};
