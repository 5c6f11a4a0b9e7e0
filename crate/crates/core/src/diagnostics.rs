//! Radial-symmetry diagnostics computed from finished solves.
//!
//! Every operation takes a [`SolveResult`] and refuses unconverged input
//! unless `force` is set. The quantities mirror the closed-form layer
//! ([`crate::closed_forms`]): when the domain is a ball each diagnostic has
//! an exact value, and the deviations measured on general domains are the
//! symmetry signals summarized by [`symmetry_verdict`].
//!
//! Capacity is estimated two independent ways:
//!
//! * `capacity_flux`: boundary quadrature of `|grad u|^{p-1}` over Gamma
//!   using the recovered normal derivatives;
//! * `capacity_volume`: cell quadrature of `|grad u|^p` over the truncated
//!   exterior plus the analytic tail of the decay mode `u ~ A r^{-m}`
//!   beyond the truncation sphere, `Int_{r>R} |grad u|^p = (A m)^p omega_N
//!   R^{-m} / m`, with the amplitude `A` projected from the outer ring.
//!
//! The Pohozaev identity on the truncated annulus reads
//! `(N-p) (Int |grad u|^p + tail) = (p-1) Int_Gamma |grad u|^p <x - z, nu>`;
//! the same tail closes the far-sphere contribution exactly for the decay
//! mode, so the relative residual isolates discretization error.

use crate::closed_forms::{
    capacity_from_geometry, capacity_isoperimetric_bound, conformal_isoperimetric_residual,
    gamma_from_capacity, interior_singular_potential, serrin_constant, PLaplaceParams,
};
use crate::error::{Error, Result};
use crate::geometry::{
    angular_grid, boundary_samples, cos_series_value, h0, isoperimetric_deficit,
    minkowski_residual, star_support_min, surface_measure, unit_sphere_measure, volume,
    StarDomain,
};
use crate::mesh::{Mesh, MeshKind};
use crate::solver::{
    solve_conformal_exterior, solve_exterior_capacitary, solve_interior_punctured, solve_torsion,
    three_point_derivative, ProblemKind, SolveResult, SolverConfig,
};

fn ensure_usable(res: &SolveResult, force: bool) -> Result<()> {
    if !res.converged && !force {
        return Err(Error::UnconvergedInput);
    }
    Ok(())
}

fn require_kind(res: &SolveResult, allowed: &[ProblemKind], what: &str) -> Result<()> {
    if allowed.contains(&res.kind) {
        Ok(())
    } else {
        Err(Error::Argument(format!("{what} is not defined for a {:?} solve", res.kind)))
    }
}

/// Quadrature of `|grad u|^p` over the meshed region.
fn volume_p_energy(res: &SolveResult) -> f64 {
    let mesh = &res.mesh;
    let p = res.params.p;
    let mut total = 0.0;
    for i in 0..mesh.n_r() {
        for j in 0..mesh.n_a() {
            let cq = mesh.cell_quadrature(i, j);
            for q in &cq.qp {
                let mut g = [0.0f64; 2];
                for a in 0..4 {
                    let v = res.field[cq.nodes[a]];
                    g[0] += v * q.grads[a][0];
                    g[1] += v * q.grads[a][1];
                }
                total += (g[0] * g[0] + g[1] * g[1]).powf(0.5 * p) * q.weight;
            }
        }
    }
    total
}

/// Angular projection weights that isolate the radially symmetric mode:
/// uniform for N = 2, `sin(t) dt` (trapezoid) for N = 3, where the higher
/// spherical harmonics integrate to zero.
fn mode_weights(mesh: &Mesh) -> Vec<f64> {
    let cols = mesh.columns();
    if mesh.dim() == 2 {
        vec![1.0; cols]
    } else {
        let h = std::f64::consts::PI / mesh.n_a() as f64;
        (0..cols)
            .map(|j| {
                let ht = if j == 0 || j == mesh.n_a() { 0.5 * h } else { h };
                mesh.angles()[j].sin().abs() * ht
            })
            .collect()
    }
}

/// Decay-mode amplitude `A` of `u ~ A r^{-m}` projected from the outer ring.
fn outer_mode_amplitude(res: &SolveResult) -> Result<f64> {
    let mesh = &res.mesh;
    let m = res.params.decay_exponent()?;
    let w = mode_weights(mesh);
    let ring = mesh.n_r();
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let r = mesh.radius(ring, j);
        num += res.field[mesh.node(ring, j)] * r.powf(m) * wj;
        den += wj;
    }
    Ok(num / den)
}

fn tail_energy(params: &PLaplaceParams, amplitude: f64, r: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    let om = unit_sphere_measure(params.dim)?;
    Ok((amplitude.abs() * m).powf(params.p) * om * r.powf(-m) / m)
}

fn exterior_r_out(mesh: &Mesh) -> Result<f64> {
    match mesh.kind() {
        MeshKind::Exterior { r_out } => Ok(r_out),
        _ => Err(Error::Argument("operation needs an exterior mesh".into())),
    }
}

/// Capacity from the volume integral of `|grad u|^p` plus the analytic
/// far-field tail. Exterior capacitary runs only.
pub fn capacity_volume(res: &SolveResult, force: bool) -> Result<f64> {
    ensure_usable(res, force)?;
    require_kind(res, &[ProblemKind::ExteriorCapacitary], "capacity_volume")?;
    let r_out = exterior_r_out(&res.mesh)?;
    let amp = outer_mode_amplitude(res)?;
    Ok(volume_p_energy(res) + tail_energy(&res.params, amp, r_out)?)
}

/// Capacity from the boundary quadrature of `|grad u|^{p-1}` over Gamma.
pub fn capacity_flux(res: &SolveResult, force: bool) -> Result<f64> {
    ensure_usable(res, force)?;
    require_kind(
        res,
        &[
            ProblemKind::ExteriorCapacitary,
            ProblemKind::ConformalExterior,
            ProblemKind::InteriorPunctured,
        ],
        "capacity_flux",
    )?;
    let p = res.params.p;
    Ok(res.gamma.iter().map(|s| s.grad_norm.powf(p - 1.0) * s.weight).sum())
}

/// Flux-side capacity estimate read off the conserved discrete cut fluxes,
/// with `gamma = flux^{1/(p-1)}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GammaFluxEstimate {
    pub flux: f64,
    pub gamma: f64,
    pub ring_flux_spread: f64,
}

pub fn gamma_flux_estimate(res: &SolveResult, force: bool) -> Result<GammaFluxEstimate> {
    ensure_usable(res, force)?;
    require_kind(
        res,
        &[ProblemKind::ExteriorCapacitary, ProblemKind::ConformalExterior],
        "gamma_flux_estimate",
    )?;
    let flux = res.gamma_flux();
    if !(flux.is_finite() && flux > 0.0) {
        return Err(Error::Domain(format!("non-positive boundary flux {flux}")));
    }
    Ok(GammaFluxEstimate {
        flux,
        gamma: gamma_from_capacity(&res.params, flux)?,
        ring_flux_spread: res.ring_flux_spread(),
    })
}

/// Relative residual of the Pohozaev identity on the truncated exterior.
pub fn pohozaev_residual(res: &SolveResult, force: bool) -> Result<f64> {
    ensure_usable(res, force)?;
    require_kind(res, &[ProblemKind::ExteriorCapacitary], "pohozaev_residual")?;
    let params = &res.params;
    let n = params.n();
    let r_out = exterior_r_out(&res.mesh)?;
    let amp = outer_mode_amplitude(res)?;
    let lhs = (n - params.p) * (volume_p_energy(res) + tail_energy(params, amp, r_out)?);
    let rhs: f64 = (params.p - 1.0)
        * res
            .gamma
            .iter()
            .map(|s| s.grad_norm.powf(params.p) * s.support * s.weight)
            .sum::<f64>();
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()))
}

/// Pohozaev residual of an analytically given field, evaluated by polar
/// quadrature (composite Gauss in log radius, spectral in angle) over the
/// truncated exterior of `d`. `grad_norm` maps an ambient point to
/// `|grad u|`; `tail_amplitude` is `A` in `u ~ A r^{-m}`. This isolates pure
/// quadrature error: no finite-element field is involved.
pub fn pohozaev_residual_sampled(
    d: &StarDomain,
    params: &PLaplaceParams,
    grad_norm: &dyn Fn(&[f64]) -> f64,
    tail_amplitude: f64,
    n_r: usize,
    n_a: usize,
    r_out: f64,
) -> Result<f64> {
    let m = params.decay_exponent()?;
    let n = params.n();
    if !(r_out.is_finite() && r_out > d.circumradius()) {
        return Err(Error::Argument(format!("r_out {r_out} must exceed the circumradius")));
    }
    let center = d.center();
    let mut vol = 0.0;
    for (t, h) in angular_grid(d.dim(), n_a)? {
        let meas = if d.dim() == 2 { 1.0 } else { 2.0 * std::f64::consts::PI * t.sin().abs() };
        let rho = d.rho(t);
        let w_dir = d.omega(t);
        let log_span = (r_out / rho).ln();
        for i in 0..n_r {
            let s_mid = (i as f64 + 0.5) / n_r as f64;
            let s_half = 0.5 / n_r as f64;
            for g in crate::mesh::GAUSS_2 {
                let s = s_mid + s_half * g;
                let r = rho * (r_out / rho).powf(s);
                let x = if d.dim() == 2 {
                    vec![center[0] + r * w_dir[0], center[1] + r * w_dir[1]]
                } else {
                    vec![center[0] + r * w_dir[0], center[1], center[2] + r * w_dir[1]]
                };
                let f = grad_norm(&x).powf(params.p);
                vol += f * r.powf(n - 1.0) * r * log_span * s_half * h * meas;
            }
        }
    }
    let om = unit_sphere_measure(d.dim())?;
    let tail = (tail_amplitude.abs() * m).powf(params.p) * om * r_out.powf(-m) / m;
    let lhs = (n - params.p) * (vol + tail);
    let rhs: f64 = (params.p - 1.0)
        * boundary_samples(d, n_a.max(512))?
            .iter()
            .map(|s| grad_norm(&s.point).powf(params.p) * s.support * s.weight)
            .sum::<f64>();
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()))
}

/// Summary statistics of the P-function `|grad u|^p / u^{p(N-1)/(N-p)}`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PFunctionReport {
    /// Exponent `p (N-1) / (N-p)` of the denominator.
    pub alpha: f64,
    pub boundary_max: f64,
    /// Maximum over all non-boundary nodes.
    pub interior_max: f64,
    /// `(interior_max - boundary_max) / boundary_max`; the maximum principle
    /// predicts this to be non-positive up to discretization error.
    pub interior_excess_rel: f64,
    /// Mean over the ring adjacent to the far (or singular) end.
    pub far_ring_mean: f64,
    /// Limit value of the decay mode with the measured amplitude.
    pub mode_limit: f64,
    pub far_ring_vs_limit_rel: f64,
}

/// Nodal P-function values plus summary statistics.
#[derive(Debug, Clone)]
pub struct PFunctionField {
    pub nodal: Vec<f64>,
    pub stats: PFunctionReport,
}

fn mode_limit_from_amplitude(params: &PLaplaceParams, amplitude: f64) -> Result<f64> {
    let m = params.decay_exponent()?;
    let alpha = params.p * (params.n() - 1.0) / (params.n() - params.p);
    Ok(m.powf(params.p) * amplitude.powf(params.p - alpha))
}

/// Projected nodal gradient magnitudes (mass-lumped L2 projection of the
/// cell-quadrature gradients).
fn nodal_gradient_norms(mesh: &Mesh, u: &[f64]) -> Vec<f64> {
    let n = mesh.n_nodes();
    let mut num = vec![[0.0f64; 2]; n];
    let mut den = vec![0.0f64; n];
    for i in 0..mesh.n_r() {
        for j in 0..mesh.n_a() {
            let cq = mesh.cell_quadrature(i, j);
            for q in &cq.qp {
                let mut g = [0.0f64; 2];
                for a in 0..4 {
                    let v = u[cq.nodes[a]];
                    g[0] += v * q.grads[a][0];
                    g[1] += v * q.grads[a][1];
                }
                for a in 0..4 {
                    let w = q.shapes[a] * q.weight;
                    num[cq.nodes[a]][0] += g[0] * w;
                    num[cq.nodes[a]][1] += g[1] * w;
                    den[cq.nodes[a]] += w;
                }
            }
        }
    }
    (0..n)
        .map(|k| {
            let gx = num[k][0] / den[k];
            let gy = num[k][1] / den[k];
            (gx * gx + gy * gy).sqrt()
        })
        .collect()
}

/// Nodal P-function of a capacitary or punctured solve. Boundary-ring
/// gradients use the one-sided ray recovery (second order); interior nodes
/// use the projected gradients.
pub fn p_function_field(res: &SolveResult, force: bool) -> Result<PFunctionField> {
    ensure_usable(res, force)?;
    require_kind(
        res,
        &[ProblemKind::ExteriorCapacitary, ProblemKind::InteriorPunctured],
        "p_function_field",
    )?;
    let params = &res.params;
    params.require_sub_conformal()?;
    let mesh = &res.mesh;
    let alpha = params.p * (params.n() - 1.0) / (params.n() - params.p);
    let mut grad = nodal_gradient_norms(mesh, &res.field);
    let gamma_ring = mesh.gamma_ring();
    for s in &res.gamma {
        grad[mesh.node(gamma_ring, s.col)] = s.grad_norm;
    }
    // The opposite end ring (truncation sphere or excision sphere) also needs
    // one-sided recovery: the lumped projection is biased on boundary rows.
    // There the mesh surface is a coordinate sphere and the decay mode
    // dominates, so the radial derivative carries the whole gradient.
    let far_end = match mesh.kind() {
        MeshKind::Exterior { .. } => mesh.n_r(),
        _ => 0,
    };
    let step = if far_end == 0 { 1i64 } else { -1 };
    for j in 0..mesh.columns() {
        let rings = [
            far_end,
            (far_end as i64 + step) as usize,
            (far_end as i64 + 2 * step) as usize,
        ];
        let x = rings.map(|r| mesh.radius(r, j));
        let f = rings.map(|r| res.field[mesh.node(r, j)]);
        grad[mesh.node(far_end, j)] = three_point_derivative(x, f).abs();
    }
    let mut nodal = vec![0.0f64; mesh.n_nodes()];
    for (k, value) in nodal.iter_mut().enumerate() {
        let u = res.field[k];
        // `u <= 0` and NaN are both invalid here.
        if u <= 0.0 || u.is_nan() {
            return Err(Error::Domain(format!(
                "P-function needs positive field values, found {u}"
            )));
        }
        *value = grad[k].powf(params.p) / u.powf(alpha);
    }

    let mut boundary_max = f64::NEG_INFINITY;
    let mut interior_max = f64::NEG_INFINITY;
    for (k, &value) in nodal.iter().enumerate() {
        if mesh.ring_of(k) == gamma_ring {
            boundary_max = boundary_max.max(value);
        } else {
            interior_max = interior_max.max(value);
        }
    }

    // Ring adjacent to the far field (exterior) or the singularity
    // (interior annulus), where the decay mode dominates.
    let far_ring = match mesh.kind() {
        MeshKind::Exterior { .. } => mesh.n_r() - 1,
        _ => 1,
    };
    let w = mode_weights(mesh);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..mesh.columns() {
        num += nodal[mesh.node(far_ring, j)] * w[j];
        den += w[j];
    }
    let far_ring_mean = num / den;

    let amplitude = match res.kind {
        ProblemKind::ExteriorCapacitary => {
            let flux = res.gamma_flux();
            if !(flux.is_finite() && flux > 0.0) {
                return Err(Error::Domain(format!("non-positive boundary flux {flux}")));
            }
            // u ~ gamma mu = gamma mu(1) r^{-m}.
            gamma_from_capacity(params, flux)?
                * crate::closed_forms::fundamental_solution(params, 1.0)?
        }
        _ => interior_singular_potential(params, surface_measure(res.mesh.domain()), 1.0)?,
    };
    let mode_limit = mode_limit_from_amplitude(params, amplitude)?;

    let stats = PFunctionReport {
        alpha,
        boundary_max,
        interior_max,
        interior_excess_rel: (interior_max - boundary_max) / boundary_max,
        far_ring_mean,
        mode_limit,
        far_ring_vs_limit_rel: (far_ring_mean - mode_limit).abs() / mode_limit,
    };
    Ok(PFunctionField { nodal, stats })
}

/// Weighted profile of `|grad u|` along Gamma against the constant the
/// overdetermined (radially symmetric) configuration would force.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OverdeterminationProfile {
    /// Closed-form constant when the scenario pins one (exterior: Serrin
    /// constant; punctured interior: 1), otherwise None.
    pub expected: Option<f64>,
    pub mean: f64,
    pub weighted_std: f64,
    /// `weighted_std / |mean|`: the symmetry signal.
    pub rel_spread: f64,
    pub max_rel_deviation: f64,
    /// `|mean - expected| / expected` when an expected value exists.
    pub mean_vs_expected_rel: Option<f64>,
    /// (angle, |grad u|) pairs, including zero-weight pole columns.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

pub fn overdetermination_profile(res: &SolveResult, force: bool) -> Result<OverdeterminationProfile> {
    ensure_usable(res, force)?;
    require_kind(
        res,
        &[
            ProblemKind::ExteriorCapacitary,
            ProblemKind::ConformalExterior,
            ProblemKind::InteriorPunctured,
        ],
        "overdetermination_profile",
    )?;
    let d = res.mesh.domain();
    let expected = match res.kind {
        ProblemKind::ExteriorCapacitary => Some(serrin_constant(&res.params, h0(d))?),
        ProblemKind::InteriorPunctured => Some(1.0),
        _ => None,
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for s in &res.gamma {
        num += s.grad_norm * s.weight;
        den += s.weight;
    }
    let mean = num / den;
    let mut var = 0.0;
    let mut max_dev = 0.0f64;
    for s in &res.gamma {
        var += (s.grad_norm - mean).powi(2) * s.weight;
        if s.weight > 0.0 {
            max_dev = max_dev.max((s.grad_norm - mean).abs());
        }
    }
    let weighted_std = (var / den).sqrt();
    Ok(OverdeterminationProfile {
        expected,
        mean,
        weighted_std,
        rel_spread: weighted_std / mean.abs(),
        max_rel_deviation: max_dev / mean.abs(),
        mean_vs_expected_rel: expected.map(|e| (mean - e).abs() / e),
        samples: res.gamma.iter().map(|s| (s.angle, s.grad_norm)).collect(),
    })
}

/// Extremes of the curvature gap `H_0 - H` over the boundary.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CurvatureGap {
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    /// `H_0 - h_max` (most negative on elongated domains).
    pub gap_min: f64,
    /// `H_0 - h_min`.
    pub gap_max: f64,
}

pub fn curvature_gap(d: &StarDomain, n: usize) -> Result<CurvatureGap> {
    let samples = boundary_samples(d, n)?;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    for s in &samples {
        h_min = h_min.min(s.mean_curvature);
        h_max = h_max.max(s.mean_curvature);
    }
    let h = h0(d);
    Ok(CurvatureGap { h0: h, h_min, h_max, gap_min: h - h_max, gap_max: h - h_min })
}

/// Soap-bubble integral `Int (H_0 - H) |grad tau|^2 dS` of a torsion solve:
/// non-positive only in the radially symmetric configuration, positive on
/// genuinely aspherical domains.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SoapBubbleReport {
    pub deficit: f64,
    pub grad_sq_integral: f64,
    /// `deficit / grad_sq_integral`: the symmetry signal.
    pub relative: f64,
    pub h0: f64,
}

pub fn soap_bubble_deficit(res: &SolveResult, force: bool) -> Result<SoapBubbleReport> {
    ensure_usable(res, force)?;
    require_kind(res, &[ProblemKind::Torsion], "soap_bubble_deficit")?;
    let h = h0(res.mesh.domain());
    let mut deficit = 0.0;
    let mut grad_sq = 0.0;
    for s in &res.gamma {
        let g2 = s.u_nu * s.u_nu;
        deficit += (h - s.mean_curvature) * g2 * s.weight;
        grad_sq += g2 * s.weight;
    }
    Ok(SoapBubbleReport { deficit, grad_sq_integral: grad_sq, relative: deficit / grad_sq, h0: h })
}

/// Conformal-exponent diagnostics: boundary constant, far-field amplitude,
/// the overdetermined identity, and the isoperimetric residual.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConformalReport {
    /// Weighted mean of |grad u| over Gamma.
    pub c_boundary: f64,
    /// `flux^{1/(N-1)}` from the conserved cut flux.
    pub gamma: f64,
    /// `|c^{N-1} |Gamma| - gamma^{N-1}| / gamma^{N-1}`.
    pub identity_residual_rel: f64,
    /// `N |Omega| - |Gamma|^{N/(N-1)} / omega_N^{1/(N-1)}`.
    pub isoperimetric_residual: f64,
    /// `|residual + N * deficit|`: the exact relation between the residual
    /// and the isoperimetric deficit.
    pub deficit_relation_abs: f64,
}

pub fn conformal_checks(res: &SolveResult, force: bool) -> Result<ConformalReport> {
    ensure_usable(res, force)?;
    require_kind(res, &[ProblemKind::ConformalExterior], "conformal_checks")?;
    let d = res.mesh.domain();
    let surface = surface_measure(d);
    let vol = volume(d);
    let n = res.params.n();
    let flux = res.gamma_flux();
    if !(flux.is_finite() && flux > 0.0) {
        return Err(Error::Domain(format!("non-positive boundary flux {flux}")));
    }
    let gamma = flux.powf(1.0 / (n - 1.0));
    let c = res.gamma_mean_gradient();
    let identity_residual_rel = (c.powf(n - 1.0) * surface - flux).abs() / flux;
    let residual = conformal_isoperimetric_residual(d.dim(), surface, vol)?;
    let deficit_relation_abs = (residual + n * isoperimetric_deficit(d)).abs();
    Ok(ConformalReport {
        c_boundary: c,
        gamma,
        identity_residual_rel,
        isoperimetric_residual: residual,
        deficit_relation_abs,
    })
}

/// Hadamard shape derivative of the 2-capacity against a centered finite
/// difference of re-solved capacities.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShapeDerivativeReport {
    /// `Int_Gamma phi |grad u|^2 dS` with outward normal speed `phi`.
    pub hadamard: f64,
    pub finite_difference: f64,
    /// `|fd - hadamard| / scale`.
    pub relative_mismatch: f64,
    /// `Int_Gamma |phi| |grad u|^2 dS`, the natural comparison scale.
    pub scale: f64,
    pub step: f64,
    pub capacity_base: f64,
}

/// Compare the p = 2 Hadamard capacity derivative in a trigonometric
/// perturbation direction with a centered finite difference of capacities.
pub fn shape_derivative_check(
    d: &StarDomain,
    cfg: &SolverConfig,
    direction: &[f64],
    step: f64,
) -> Result<ShapeDerivativeReport> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    if direction.iter().all(|&c| c == 0.0) {
        return Err(Error::Argument("perturbation direction is zero".into()));
    }
    let base = solve_exterior_capacitary(d, 2.0, cfg)?;
    ensure_usable(&base, false)?;
    let mut hadamard = 0.0;
    let mut scale = 0.0;
    for s in &base.gamma {
        let rho = d.rho(s.angle);
        // Normal speed of the perturbation rho -> rho + step * delta_rho:
        // phi = delta_rho <omega, nu> = delta_rho * rho / g.
        let phi = cos_series_value(direction, s.angle) * s.support / rho;
        hadamard += phi * s.u_nu * s.u_nu * s.weight;
        scale += phi.abs() * s.u_nu * s.u_nu * s.weight;
    }
    let plus = solve_exterior_capacitary(&d.perturbed(direction, step)?, 2.0, cfg)?;
    let minus = solve_exterior_capacitary(&d.perturbed(direction, -step)?, 2.0, cfg)?;
    ensure_usable(&plus, false)?;
    ensure_usable(&minus, false)?;
    let fd = (plus.gamma_flux() - minus.gamma_flux()) / (2.0 * step);
    Ok(ShapeDerivativeReport {
        hadamard,
        finite_difference: fd,
        relative_mismatch: (fd - hadamard).abs() / scale,
        scale,
        step,
        capacity_base: base.gamma_flux(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWithBall,
    NotBall,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::ConsistentWithBall => "consistent_with_ball",
            Verdict::NotBall => "not_ball",
            Verdict::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Scale-free asphericity signals of a solve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SymmetrySignals {
    pub overdet_rel_spread: Option<f64>,
    pub soap_bubble_rel: Option<f64>,
    /// Isoperimetric deficit over `N |Omega|`.
    pub iso_deficit_rel: f64,
}

/// Decision thresholds, calibrated from an equal-volume ball run at the
/// same resolution (the null experiment).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VerdictThresholds {
    pub overdet_rel_spread: Option<f64>,
    pub soap_bubble_rel: Option<f64>,
    pub iso_deficit_rel: f64,
    /// A signal beyond `margin x threshold` is decisive.
    pub margin: f64,
}

pub fn symmetry_signals(res: &SolveResult, force: bool) -> Result<SymmetrySignals> {
    ensure_usable(res, force)?;
    let d = res.mesh.domain();
    let overdet = match res.kind {
        ProblemKind::ExteriorCapacitary
        | ProblemKind::ConformalExterior
        | ProblemKind::InteriorPunctured => {
            Some(overdetermination_profile(res, force)?.rel_spread)
        }
        _ => None,
    };
    let soap = match res.kind {
        ProblemKind::Torsion => Some(soap_bubble_deficit(res, force)?.relative),
        _ => None,
    };
    Ok(SymmetrySignals {
        overdet_rel_spread: overdet,
        soap_bubble_rel: soap,
        iso_deficit_rel: isoperimetric_deficit(d) / (res.params.n() * volume(d)),
    })
}

/// Ball of the same volume as `d` around the same center.
pub fn equal_volume_ball(d: &StarDomain) -> Result<StarDomain> {
    let n = d.dim() as f64;
    let om = unit_sphere_measure(d.dim())?;
    let r = (n * volume(d) / om).powf(1.0 / n);
    StarDomain::ball(d.dim(), d.center().to_vec(), r)
}

/// Run the matching scenario on the equal-volume ball and convert its (pure
/// discretization) signals into thresholds: three times the null signal,
/// floored away from zero, with a decision margin of 2.
pub fn calibrate_null_thresholds(
    kind: ProblemKind,
    d: &StarDomain,
    p: f64,
    cfg: &SolverConfig,
) -> Result<VerdictThresholds> {
    let ball = equal_volume_ball(d)?;
    let null_res = match kind {
        ProblemKind::ExteriorCapacitary => solve_exterior_capacitary(&ball, p, cfg)?,
        ProblemKind::ConformalExterior => solve_conformal_exterior(&ball, cfg)?,
        ProblemKind::InteriorPunctured => solve_interior_punctured(&ball, p, cfg)?,
        ProblemKind::Torsion => solve_torsion(&ball, cfg)?,
        ProblemKind::Custom => {
            return Err(Error::Argument("no null calibration for custom solves".into()))
        }
    };
    let signals = symmetry_signals(&null_res, false)?;
    Ok(VerdictThresholds {
        overdet_rel_spread: signals.overdet_rel_spread.map(|v| (3.0 * v.abs()).max(1e-6)),
        soap_bubble_rel: signals.soap_bubble_rel.map(|v| (3.0 * v.abs()).max(1e-9)),
        iso_deficit_rel: (3.0 * signals.iso_deficit_rel.abs()).max(1e-9),
        margin: 2.0,
    })
}

/// Classify a measured signal set against calibrated thresholds: any signal
/// beyond `margin x threshold` decides `not_ball`; all signals within their
/// thresholds decide `consistent_with_ball`; anything else is inconclusive.
pub fn symmetry_verdict(signals: &SymmetrySignals, thr: &VerdictThresholds) -> Verdict {
    let mut pairs: Vec<(f64, f64)> = vec![(signals.iso_deficit_rel, thr.iso_deficit_rel)];
    if let (Some(s), Some(t)) = (signals.overdet_rel_spread, thr.overdet_rel_spread) {
        pairs.push((s, t));
    }
    if let (Some(s), Some(t)) = (signals.soap_bubble_rel, thr.soap_bubble_rel) {
        pairs.push((s, t));
    }
    if pairs.iter().any(|&(s, t)| s > thr.margin * t) {
        Verdict::NotBall
    } else if pairs.iter().all(|&(s, t)| s <= t) {
        Verdict::ConsistentWithBall
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub signals: SymmetrySignals,
    pub thresholds: VerdictThresholds,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct MeshReport {
    pub layout: String,
    pub r_out: Option<f64>,
    pub excision: Option<f64>,
    pub nodes: usize,
    pub cells: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GeometryReport {
    pub volume: f64,
    pub surface: f64,
    pub h0: f64,
    pub isoperimetric_deficit: f64,
    pub isoperimetric_deficit_rel: f64,
    pub curvature: CurvatureGap,
    pub minkowski_residual: f64,
    pub star_support_min: f64,
    pub circumradius: f64,
    pub inradius: f64,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ConvergenceReport {
    pub converged: bool,
    pub outer_iterations: usize,
    pub damping_events: usize,
    pub linear_iterations: usize,
    pub epsilon: f64,
    pub final_energy: f64,
    pub final_energy_change: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CapacityReport {
    /// Boundary quadrature of `|grad u|^{p-1}`.
    pub flux: f64,
    /// Volume integral of `|grad u|^p` plus the analytic tail.
    pub volume_integral: f64,
    /// Relative gap between the two estimates.
    pub pair_rel_gap: f64,
    /// Conserved discrete cut flux through Gamma.
    pub cut_flux: f64,
    pub ring_flux_spread: f64,
    /// Capacity the overdetermined condition would force from |Gamma|, |Omega|.
    pub from_geometry: f64,
    /// Isoperimetric lower bound at this volume (equality on balls).
    pub isoperimetric_bound: f64,
    /// `(flux - bound) / bound >= 0` up to discretization.
    pub bound_excess_rel: f64,
    /// Far-field amplitude `flux^{1/(p-1)}`.
    pub gamma: f64,
}

/// Full diagnostics bundle of one solve; sections are present when the
/// scenario defines them.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub scenario: ProblemKind,
    pub p: f64,
    pub dimension: usize,
    pub n_r: usize,
    pub n_a: usize,
    pub mesh: MeshReport,
    pub convergence: ConvergenceReport,
    pub geometry: GeometryReport,
    pub capacity: Option<CapacityReport>,
    pub overdetermination: Option<OverdeterminationProfile>,
    pub pohozaev_relative_residual: Option<f64>,
    pub p_function: Option<PFunctionReport>,
    pub conformal: Option<ConformalReport>,
    pub soap_bubble: Option<SoapBubbleReport>,
    pub verdict: Option<VerdictReport>,
}

/// Assemble every diagnostic the scenario defines. Pass calibrated
/// thresholds to include a symmetry verdict.
pub fn run_diagnostics(
    res: &SolveResult,
    force: bool,
    thresholds: Option<&VerdictThresholds>,
) -> Result<DiagnosticsReport> {
    ensure_usable(res, force)?;
    let d = res.mesh.domain();
    let vol = volume(d);
    let surface = surface_measure(d);
    let deficit = isoperimetric_deficit(d);
    let geometry = GeometryReport {
        volume: vol,
        surface,
        h0: h0(d),
        isoperimetric_deficit: deficit,
        isoperimetric_deficit_rel: deficit / (res.params.n() * vol),
        curvature: curvature_gap(d, 1024)?,
        minkowski_residual: minkowski_residual(d, 1024)?,
        star_support_min: star_support_min(d, 2048)?,
        circumradius: d.circumradius(),
        inradius: d.inradius(),
        diameter: d.diameter(),
    };
    let (layout, r_out, excision) = match res.mesh.kind() {
        MeshKind::Exterior { r_out } => ("exterior", Some(r_out), None),
        MeshKind::InteriorAnnulus { excision } => ("interior_annulus", None, Some(excision)),
        MeshKind::Solid => ("solid", None, None),
    };
    let mesh = MeshReport {
        layout: layout.to_string(),
        r_out,
        excision,
        nodes: res.mesh.n_nodes(),
        cells: res.mesh.n_cells(),
    };
    let convergence = ConvergenceReport {
        converged: res.converged,
        outer_iterations: res.outer_iterations,
        damping_events: res.damping_events,
        linear_iterations: res.linear_iterations,
        epsilon: res.epsilon,
        final_energy: *res.energy_history.last().unwrap(),
        final_energy_change: res.final_energy_change,
    };

    let capacity = match res.kind {
        ProblemKind::ExteriorCapacitary => {
            let flux = capacity_flux(res, force)?;
            let volume_integral = capacity_volume(res, force)?;
            let bound = capacity_isoperimetric_bound(&res.params, vol)?;
            Some(CapacityReport {
                flux,
                volume_integral,
                pair_rel_gap: (flux - volume_integral).abs()
                    / (0.5 * (flux.abs() + volume_integral.abs())),
                cut_flux: res.gamma_flux(),
                ring_flux_spread: res.ring_flux_spread(),
                from_geometry: capacity_from_geometry(&res.params, surface, vol)?,
                isoperimetric_bound: bound,
                bound_excess_rel: (flux - bound) / bound,
                gamma: gamma_from_capacity(&res.params, flux)?,
            })
        }
        _ => None,
    };
    let overdetermination = match res.kind {
        ProblemKind::ExteriorCapacitary
        | ProblemKind::ConformalExterior
        | ProblemKind::InteriorPunctured => Some(overdetermination_profile(res, force)?),
        _ => None,
    };
    let pohozaev_relative_residual = match res.kind {
        ProblemKind::ExteriorCapacitary => Some(pohozaev_residual(res, force)?),
        _ => None,
    };
    let p_function = match res.kind {
        ProblemKind::ExteriorCapacitary | ProblemKind::InteriorPunctured => {
            Some(p_function_field(res, force)?.stats)
        }
        _ => None,
    };
    let conformal = match res.kind {
        ProblemKind::ConformalExterior => Some(conformal_checks(res, force)?),
        _ => None,
    };
    let soap_bubble = match res.kind {
        ProblemKind::Torsion => Some(soap_bubble_deficit(res, force)?),
        _ => None,
    };
    let verdict = match thresholds {
        Some(thr) => {
            let signals = symmetry_signals(res, force)?;
            Some(VerdictReport {
                verdict: symmetry_verdict(&signals, thr),
                signals,
                thresholds: *thr,
            })
        }
        None => None,
    };

    Ok(DiagnosticsReport {
        schema_version: 1,
        scenario: res.kind,
        p: res.params.p,
        dimension: res.params.dim,
        n_r: res.mesh.n_r(),
        n_a: res.mesh.n_a(),
        mesh,
        convergence,
        geometry,
        capacity,
        overdetermination,
        pohozaev_relative_residual,
        p_function,
        conformal,
        soap_bubble,
        verdict,
    })
}
