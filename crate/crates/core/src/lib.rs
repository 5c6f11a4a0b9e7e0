//! Numerical laboratory for p-capacitary problems on star-shaped domains.
//!
//! The library has four layers:
//!
//! * [`geometry`]: star-shaped domains `rho(angle)` in the plane (N = 2) and
//!   axisymmetric surfaces of revolution (N = 3), with spectrally accurate
//!   boundary quadrature, curvature, and isoperimetric quantities.
//! * [`closed_forms`]: the exact scalar formulas of the radial theory
//!   (fundamental solution, ball capacity, overdetermined boundary constants,
//!   P-function values, conformal and punctured-domain constants).
//! * [`solver`]: finite-element solvers on mapped structured quad meshes for
//!   the exterior capacitary problem (1 < p < N), the conformal case p = N,
//!   the punctured interior problem, and the torsion problem, all driven by a
//!   damped lagged-diffusivity outer iteration with SPD inner solves.
//! * [`diagnostics`]: integral identity checks (Pohozaev, Minkowski, flux
//!   conservation), overdetermination profiles, P-function statistics, soap
//!   bubble and isoperimetric deficits, shape-derivative consistency, and a
//!   calibrated symmetry verdict, collected into a serializable report.
//!
//! Everything is deterministic: assembly, quadrature, and reductions run
//! serially in fixed order, so identical inputs produce bit-identical output.

pub mod closed_forms;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod solver;

pub use error::{Error, Result};
