//! Closed-form scalar formulas of the radial p-capacitary theory.
//!
//! Conventions used throughout (`N` = dimension, `1 < p <= N`,
//! `omega_N` = surface measure of the unit sphere, `m = (N-p)/(p-1)` the
//! decay rate of the fundamental solution):
//!
//! * Fundamental solution (p < N), normalized to unit p-flux:
//!   `mu(r) = (p-1)/(N-p) * omega_N^{-1/(p-1)} * r^{-(N-p)/(p-1)}`.
//! * Exterior ball potential: `u(x) = (R/|x|)^{(N-p)/(p-1)}`.
//! * Ball capacity: `Cap_p(B_R) = omega_N ((N-p)/(p-1))^{p-1} R^{N-p}`.
//! * Overdetermined boundary gradient: `c = (N-p)/(p-1) * H_0`,
//!   `H_0 = |Gamma| / (N |Omega|)`.
//! * Capacity from geometry under the overdetermined condition:
//!   `Cap = ((N-p)/(p-1))^{p-1} |Gamma|^p / (N |Omega|)^{p-1}`.
//! * `gamma = Cap^{1/(p-1)}`, the far-field amplitude `u ~ gamma mu`.
//! * P-function `P = |grad u|^p / u^{p(N-1)/(N-p)}`, its value at infinity
//!   and on the boundary under overdetermination.
//! * Conformal case p = N: `mu = -ln r / omega_N^{1/(N-1)}`, the identity
//!   `c^{N-1} |Gamma| = gamma^{N-1}`, and the isoperimetric residual
//!   `N |Omega| - |Gamma|^{N/(N-1)} / omega_N^{1/(N-1)}`.
//! * Punctured interior problem: singular expansion amplitude
//!   `(p-1)/(N-p) * (|Gamma|/omega_N)^{1/(p-1)} r^{-(N-p)/(p-1)}` and the
//!   boundary constant `c = (p-1)/(N-p) * N |Omega| / |Gamma|`.
//! * Capacity lower bound `omega_N ((N-p)/(p-1))^{p-1} (N |Omega| / omega_N)^{(N-p)/N}`.
//!
//! Every function validates its arguments and returns a typed error instead
//! of NaN.

use crate::error::{Error, Result};
use crate::geometry::unit_sphere_measure;

/// Validated exponent/dimension pair for the p-Laplace operator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PLaplaceParams {
    pub p: f64,
    pub dim: usize,
}

const CONFORMAL_TOL: f64 = 1e-12;

impl PLaplaceParams {
    /// Requires `1 < p <= N` and `N` in {2, 3}.
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::Exponent { p, dim, reason: "need p > 1" });
        }
        if p > dim as f64 + CONFORMAL_TOL {
            return Err(Error::Exponent { p, dim, reason: "need p <= N" });
        }
        Ok(PLaplaceParams { p, dim })
    }

    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    /// True in the conformal case p = N.
    pub fn is_conformal(&self) -> bool {
        (self.p - self.n()).abs() <= CONFORMAL_TOL
    }

    /// Decay exponent `m = (N-p)/(p-1)` of the fundamental solution;
    /// requires p < N.
    pub fn decay_exponent(&self) -> Result<f64> {
        self.require_sub_conformal()?;
        Ok((self.n() - self.p) / (self.p - 1.0))
    }

    pub fn require_sub_conformal(&self) -> Result<()> {
        if self.is_conformal() {
            return Err(Error::Exponent {
                p: self.p,
                dim: self.dim,
                reason: "formula requires p < N (sub-conformal)",
            });
        }
        Ok(())
    }

    pub fn require_conformal(&self) -> Result<()> {
        if !self.is_conformal() {
            return Err(Error::Exponent {
                p: self.p,
                dim: self.dim,
                reason: "formula requires p = N (conformal)",
            });
        }
        Ok(())
    }
}

fn check_positive(name: &str, v: f64) -> Result<f64> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Argument(format!("{name} must be finite and positive, got {v}")));
    }
    Ok(v)
}

/// Fundamental solution `mu(r)`, the p-harmonic radial profile with unit
/// p-flux through every sphere around the pole (p < N, r > 0).
pub fn fundamental_solution(params: &PLaplaceParams, r: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("r", r)?;
    let om = unit_sphere_measure(params.dim)?;
    Ok(1.0 / m * om.powf(-1.0 / (params.p - 1.0)) * r.powf(-m))
}

/// Exterior capacitary potential of the ball of radius `radius`:
/// `(radius / r)^{(N-p)/(p-1)}` (p < N).
pub fn ball_exterior_potential(params: &PLaplaceParams, radius: f64, r: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("radius", radius)?;
    check_positive("r", r)?;
    Ok((radius / r).powf(m))
}

/// p-capacity of the ball: `omega_N ((N-p)/(p-1))^{p-1} radius^{N-p}`.
pub fn ball_capacity(params: &PLaplaceParams, radius: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("radius", radius)?;
    let om = unit_sphere_measure(params.dim)?;
    Ok(om * m.powf(params.p - 1.0) * radius.powf(params.n() - params.p))
}

/// Boundary gradient forced by the overdetermined condition:
/// `c = (N-p)/(p-1) * h0` with `h0 = |Gamma| / (N |Omega|)`.
pub fn serrin_constant(params: &PLaplaceParams, h0: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("h0", h0)?;
    Ok(m * h0)
}

/// Capacity implied by the overdetermined condition:
/// `((N-p)/(p-1))^{p-1} |Gamma|^p / (N |Omega|)^{p-1}`.
pub fn capacity_from_geometry(params: &PLaplaceParams, surface: f64, volume: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("surface", surface)?;
    check_positive("volume", volume)?;
    Ok(m.powf(params.p - 1.0) * surface.powf(params.p)
        / (params.n() * volume).powf(params.p - 1.0))
}

/// Far-field amplitude `gamma = Cap^{1/(p-1)}`; `u ~ gamma mu` at infinity
/// and `gamma^{p-1}` equals the p-flux through large spheres.
pub fn gamma_from_capacity(params: &PLaplaceParams, capacity: f64) -> Result<f64> {
    check_positive("capacity", capacity)?;
    Ok(capacity.powf(1.0 / (params.p - 1.0)))
}

/// Pointwise P-function `|grad u|^p / u^{p(N-1)/(N-p)}` (p < N, u > 0).
pub fn p_function_value(params: &PLaplaceParams, u: f64, grad_norm: f64) -> Result<f64> {
    params.require_sub_conformal()?;
    check_positive("u", u)?;
    if !(grad_norm.is_finite() && grad_norm >= 0.0) {
        return Err(Error::Argument(format!("grad_norm must be nonnegative, got {grad_norm}")));
    }
    let expo = params.p * (params.n() - 1.0) / (params.n() - params.p);
    Ok(grad_norm.powf(params.p) / u.powf(expo))
}

/// Value of the P-function at infinity:
/// `((N-p)/(p-1))^p (omega_N (N |Omega|)^{p-1} / |Gamma|^p)^{p/(N-p)}`.
pub fn p_function_limit(params: &PLaplaceParams, surface: f64, volume: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("surface", surface)?;
    check_positive("volume", volume)?;
    let om = unit_sphere_measure(params.dim)?;
    let inner = om * (params.n() * volume).powf(params.p - 1.0) / surface.powf(params.p);
    Ok(m.powf(params.p) * inner.powf(params.p / (params.n() - params.p)))
}

/// Boundary value of the P-function under the overdetermined condition:
/// `((N-p)/(p-1))^p (|Gamma| / (N |Omega|))^p`, i.e. the Serrin constant to
/// the p-th power.
pub fn p_function_boundary(params: &PLaplaceParams, surface: f64, volume: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("surface", surface)?;
    check_positive("volume", volume)?;
    Ok((m * surface / (params.n() * volume)).powf(params.p))
}

/// Leading term of the conformal exterior potential (p = N):
/// `-c (|Gamma| / omega_N)^{1/(N-1)} ln r` (additive O(1) constant omitted).
pub fn conformal_log_potential(
    params: &PLaplaceParams,
    c: f64,
    surface: f64,
    r: f64,
) -> Result<f64> {
    params.require_conformal()?;
    check_positive("c", c)?;
    check_positive("surface", surface)?;
    check_positive("r", r)?;
    let om = unit_sphere_measure(params.dim)?;
    Ok(-c * (surface / om).powf(1.0 / (params.n() - 1.0)) * r.ln())
}

/// Residual of the conformal overdetermined identity
/// `c^{N-1} |Gamma| - gamma^{N-1}` (p = N).
pub fn conformal_identity_residual(
    params: &PLaplaceParams,
    c: f64,
    surface: f64,
    gamma: f64,
) -> Result<f64> {
    params.require_conformal()?;
    check_positive("c", c)?;
    check_positive("surface", surface)?;
    check_positive("gamma", gamma)?;
    let nm1 = params.n() - 1.0;
    Ok(c.powf(nm1) * surface - gamma.powf(nm1))
}

/// Conformal isoperimetric residual
/// `N |Omega| - |Gamma|^{N/(N-1)} / omega_N^{1/(N-1)}`: zero exactly on
/// balls, and equal to `-N` times the isoperimetric deficit in general.
pub fn conformal_isoperimetric_residual(dim: usize, surface: f64, volume: f64) -> Result<f64> {
    let om = unit_sphere_measure(dim)?;
    check_positive("surface", surface)?;
    check_positive("volume", volume)?;
    let n = dim as f64;
    Ok(n * volume - surface.powf(n / (n - 1.0)) / om.powf(1.0 / (n - 1.0)))
}

/// Leading singular term of the punctured interior solution:
/// `(p-1)/(N-p) * (|Gamma| / omega_N)^{1/(p-1)} * r^{-(N-p)/(p-1)}`.
pub fn interior_singular_potential(
    params: &PLaplaceParams,
    surface: f64,
    r: f64,
) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("surface", surface)?;
    check_positive("r", r)?;
    let om = unit_sphere_measure(params.dim)?;
    Ok(1.0 / m * (surface / om).powf(1.0 / (params.p - 1.0)) * r.powf(-m))
}

/// Boundary constant of the punctured interior problem with unit boundary
/// gradient: `c = (p-1)/(N-p) * N |Omega| / |Gamma|`.
pub fn interior_constant(params: &PLaplaceParams, surface: f64, volume: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("surface", surface)?;
    check_positive("volume", volume)?;
    Ok(1.0 / m * params.n() * volume / surface)
}

/// Isoperimetric lower bound for the capacity:
/// `omega_N ((N-p)/(p-1))^{p-1} (N |Omega| / omega_N)^{(N-p)/N}`, attained
/// exactly by balls.
pub fn capacity_isoperimetric_bound(params: &PLaplaceParams, volume: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    check_positive("volume", volume)?;
    let om = unit_sphere_measure(params.dim)?;
    Ok(om
        * m.powf(params.p - 1.0)
        * (params.n() * volume / om).powf((params.n() - params.p) / params.n()))
}
