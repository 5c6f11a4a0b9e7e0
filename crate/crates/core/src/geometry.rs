//! Star-shaped domains with spectrally accurate boundary quadrature.
//!
//! A domain is described by a radius function `rho` over an angle:
//!
//! * N = 2: `rho(theta)`, theta the azimuth in `[0, 2*pi)`; the boundary is
//!   the polar graph `x = z + rho(theta) (cos theta, sin theta)`.
//! * N = 3: `rho(phi)`, phi the polar angle in `[0, pi]` measured from the
//!   symmetry axis; the boundary is the surface of revolution of the meridian
//!   graph `(rho sin phi, rho cos phi)` in cylindrical coordinates `(s, z)`.
//!
//! Profiles are either finite trigonometric series (C-infinity by
//! construction, positivity checked on a dense grid) or the exact ellipse
//! polar graph `rho = a b / sqrt(a^2 sin^2 t + b^2 cos^2 t)`, which several
//! closed-form test values require exactly (area `pi a b`, vertex curvature
//! `a / b^2`).
//!
//! Quadrature: periodic composite trapezoid in theta for N = 2 and the
//! pole-free midpoint grid `phi_j = (j + 1/2) pi / n` for N = 3. Both are
//! spectrally accurate for smooth profiles (the N = 3 integrands extend to
//! smooth even periodic functions), and the midpoint grid avoids the 0/0
//! azimuthal-curvature limit on the axis.
//!
//! Curvature conventions: `H` is the arithmetic mean of the principal
//! curvatures with respect to the outward normal, so H = 1/R on a sphere or
//! circle of radius R. In the plane the single curvature is
//! `kappa = (rho^2 + 2 rho'^2 - rho rho'') / (rho^2 + rho'^2)^{3/2}`;
//! on a surface of revolution the meridian curvature uses the same formula
//! and the azimuthal one is `(rho sin phi - rho' cos phi) / (g rho sin phi)`
//! with `g = sqrt(rho^2 + rho'^2)`, degenerating to the umbilic value
//! `(rho - rho'') / rho^2` on the axis.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Surface measure of the unit sphere S^{N-1}: `2 pi` for N = 2, `4 pi` for
/// N = 3. This is the constant `omega_N` appearing in every capacity formula.
pub fn unit_sphere_measure(dim: usize) -> Result<f64> {
    match dim {
        2 => Ok(2.0 * std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI),
        d => Err(Error::Dimension(d)),
    }
}

/// Radius profile of a star-shaped domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RadialProfile {
    /// `rho(t) = cos[0] + sum_k cos[k] cos(k t) + sum_k sin[k-1] sin(k t)`.
    Trig { cos: Vec<f64>, sin: Vec<f64> },
    /// Exact ellipse polar graph `rho(t) = a b / sqrt(a^2 sin^2 t + b^2 cos^2 t)`.
    /// For N = 3 this is the axisymmetric spheroid with semi-axis `a` along
    /// the symmetry axis and equatorial semi-axis `b`.
    Ellipse { a: f64, b: f64 },
}

/// Star-shaped C^2 domain: a validated radius profile around a center point.
///
/// Construction validates dimension (2 or 3), finiteness, strict positivity of
/// `rho` on a dense angular grid, and (N = 3 only) absence of sine modes,
/// which would break C^2 smoothness of the surface at the poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarDomain {
    dim: usize,
    center: Vec<f64>,
    profile: RadialProfile,
}

/// One boundary quadrature sample. For N = 3 a sample represents a full
/// azimuthal ring; `point` and `normal` are the azimuth-0 representatives and
/// `weight` carries the whole ring measure, so axisymmetric surface integrals
/// are plain weighted sums over samples.
#[derive(Debug, Clone, Serialize)]
pub struct BoundarySample {
    /// Parameter angle (azimuth for N = 2, polar angle for N = 3).
    pub angle: f64,
    /// Ambient boundary point (length = dimension).
    pub point: Vec<f64>,
    /// Outward unit normal (length = dimension).
    pub normal: Vec<f64>,
    /// Mean curvature H with respect to the outward normal.
    pub mean_curvature: f64,
    /// Quadrature weight; weights sum to the surface measure.
    pub weight: f64,
    /// Star support `<x - z, nu> = rho^2 / sqrt(rho^2 + rho'^2) > 0`.
    pub support: f64,
}

impl StarDomain {
    /// Trigonometric-profile domain.
    pub fn trig(dim: usize, center: Vec<f64>, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(dim, center, RadialProfile::Trig { cos, sin })
    }

    /// Exact ellipse / axisymmetric spheroid.
    pub fn ellipse(dim: usize, center: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        Self::new(dim, center, RadialProfile::Ellipse { a, b })
    }

    /// Ball of radius `r`.
    pub fn ball(dim: usize, center: Vec<f64>, r: f64) -> Result<Self> {
        Self::new(dim, center, RadialProfile::Trig { cos: vec![r], sin: vec![] })
    }

    pub fn new(dim: usize, center: Vec<f64>, profile: RadialProfile) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Dimension(dim));
        }
        if center.len() != dim {
            return Err(Error::Domain(format!(
                "center has {} entries, dimension is {dim}",
                center.len()
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("center entries must be finite".into()));
        }
        match &profile {
            RadialProfile::Trig { cos, sin } => {
                if cos.is_empty() {
                    return Err(Error::Domain("trig profile needs a constant term".into()));
                }
                if cos.iter().chain(sin.iter()).any(|c| !c.is_finite()) {
                    return Err(Error::Domain("profile coefficients must be finite".into()));
                }
                if dim == 3 && sin.iter().any(|&s| s != 0.0) {
                    return Err(Error::Domain(
                        "N = 3 profiles must be pure cosine series: sine modes have \
                         nonzero slope at the poles and the surface would not be C^2"
                            .into(),
                    ));
                }
            }
            RadialProfile::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::Domain(format!(
                        "ellipse semi-axes must be finite and positive, got a = {a}, b = {b}"
                    )));
                }
            }
        }
        let d = StarDomain { dim, center, profile };
        // Positivity of rho on a dense grid; trig profiles can dip negative.
        let n = 4096;
        let mut min_rho = f64::INFINITY;
        for j in 0..n {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            min_rho = min_rho.min(d.rho(t));
        }
        // `min_rho <= 0` and NaN both invalidate the profile.
        if min_rho <= 0.0 || min_rho.is_nan() {
            return Err(Error::Domain(format!(
                "radius function is not strictly positive (min sampled rho = {min_rho})"
            )));
        }
        Ok(d)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    /// Radius at parameter angle `t`.
    pub fn rho(&self, t: f64) -> f64 {
        match &self.profile {
            RadialProfile::Trig { cos, sin } => {
                let mut r = cos[0];
                for (k, c) in cos.iter().enumerate().skip(1) {
                    r += c * (k as f64 * t).cos();
                }
                for (i, s) in sin.iter().enumerate() {
                    r += s * ((i + 1) as f64 * t).sin();
                }
                r
            }
            RadialProfile::Ellipse { a, b } => {
                let d = ellipse_d(*a, *b, t);
                a * b / d.sqrt()
            }
        }
    }

    /// First derivative `rho'(t)`.
    pub fn rho_d1(&self, t: f64) -> f64 {
        match &self.profile {
            RadialProfile::Trig { cos, sin } => {
                let mut r = 0.0;
                for (k, c) in cos.iter().enumerate().skip(1) {
                    r -= c * k as f64 * (k as f64 * t).sin();
                }
                for (i, s) in sin.iter().enumerate() {
                    let k = (i + 1) as f64;
                    r += s * k * (k * t).cos();
                }
                r
            }
            RadialProfile::Ellipse { a, b } => {
                let d = ellipse_d(*a, *b, t);
                let dd = (a * a - b * b) * (2.0 * t).sin();
                -0.5 * a * b * dd / (d * d.sqrt())
            }
        }
    }

    /// Second derivative `rho''(t)`.
    pub fn rho_d2(&self, t: f64) -> f64 {
        match &self.profile {
            RadialProfile::Trig { cos, sin } => {
                let mut r = 0.0;
                for (k, c) in cos.iter().enumerate().skip(1) {
                    let k = k as f64;
                    r -= c * k * k * (k * t).cos();
                }
                for (i, s) in sin.iter().enumerate() {
                    let k = (i + 1) as f64;
                    r -= s * k * k * (k * t).sin();
                }
                r
            }
            RadialProfile::Ellipse { a, b } => {
                let d = ellipse_d(*a, *b, t);
                let dd = (a * a - b * b) * (2.0 * t).sin();
                let ddd = 2.0 * (a * a - b * b) * (2.0 * t).cos();
                a * b * (0.75 * dd * dd / (d * d * d.sqrt()) - 0.5 * ddd / (d * d.sqrt()))
            }
        }
    }

    /// Boundary arc speed `g = sqrt(rho^2 + rho'^2)`.
    pub fn arc_speed(&self, t: f64) -> f64 {
        let r = self.rho(t);
        let r1 = self.rho_d1(t);
        (r * r + r1 * r1).sqrt()
    }

    /// Working-plane coordinates of the boundary point, relative to the
    /// center: `(x, y)` for N = 2, `(s, z)` cylindrical for N = 3.
    pub fn rel_point(&self, t: f64) -> [f64; 2] {
        let r = self.rho(t);
        let w = self.omega(t);
        [r * w[0], r * w[1]]
    }

    /// Outward unit normal in working-plane coordinates:
    /// `nu = (rho omega - rho' omega') / g` with `omega' = d omega / dt`.
    pub fn unit_normal_rel(&self, t: f64) -> [f64; 2] {
        let r = self.rho(t);
        let r1 = self.rho_d1(t);
        let g = (r * r + r1 * r1).sqrt();
        let w = self.omega(t);
        let wp = self.omega_d1(t);
        [(r * w[0] - r1 * wp[0]) / g, (r * w[1] - r1 * wp[1]) / g]
    }

    /// Ambient boundary point (azimuth-0 representative for N = 3).
    pub fn ambient_point(&self, t: f64) -> Vec<f64> {
        let p = self.rel_point(t);
        match self.dim {
            2 => vec![self.center[0] + p[0], self.center[1] + p[1]],
            _ => vec![self.center[0] + p[0], self.center[1], self.center[2] + p[1]],
        }
    }

    /// Ambient outward unit normal (azimuth-0 representative for N = 3).
    pub fn ambient_normal(&self, t: f64) -> Vec<f64> {
        let n = self.unit_normal_rel(t);
        match self.dim {
            2 => vec![n[0], n[1]],
            _ => vec![n[0], 0.0, n[1]],
        }
    }

    /// Star support `<x - z, nu> = rho^2 / g`, strictly positive for any
    /// positive radial graph.
    pub fn support(&self, t: f64) -> f64 {
        let r = self.rho(t);
        let r1 = self.rho_d1(t);
        r * r / (r * r + r1 * r1).sqrt()
    }

    /// Mean curvature H at parameter angle `t` (outward convention, H = 1/R
    /// on a ball of radius R).
    pub fn mean_curvature(&self, t: f64) -> f64 {
        let r = self.rho(t);
        let r1 = self.rho_d1(t);
        let r2 = self.rho_d2(t);
        let g2 = r * r + r1 * r1;
        let km = (r * r + 2.0 * r1 * r1 - r * r2) / (g2 * g2.sqrt());
        match self.dim {
            2 => km,
            _ => {
                let s = t.sin();
                let kp = if s.abs() < 1e-6 {
                    // Umbilic limit on the axis: kappa_par -> (rho - rho'') / rho^2,
                    // equal to the meridian curvature there.
                    (r - r2) / (r * r)
                } else {
                    (r * s - r1 * t.cos()) / (g2.sqrt() * r * s)
                };
                0.5 * (km + kp)
            }
        }
    }

    /// Direction of the position ray: `(cos t, sin t)` for N = 2 and
    /// `(sin t, cos t)` (cylindrical) for N = 3.
    pub fn omega(&self, t: f64) -> [f64; 2] {
        match self.dim {
            2 => [t.cos(), t.sin()],
            _ => [t.sin(), t.cos()],
        }
    }

    fn omega_d1(&self, t: f64) -> [f64; 2] {
        match self.dim {
            2 => [-t.sin(), t.cos()],
            _ => [t.cos(), -t.sin()],
        }
    }

    /// Full angular parameter range: `2 pi` for N = 2, `pi` for N = 3.
    pub fn angle_span(&self) -> f64 {
        match self.dim {
            2 => 2.0 * std::f64::consts::PI,
            _ => std::f64::consts::PI,
        }
    }

    /// Largest sampled radius (circumradius about the center).
    pub fn circumradius(&self) -> f64 {
        let n = 2048;
        let mut m: f64 = 0.0;
        for j in 0..=n {
            m = m.max(self.rho(self.angle_span() * j as f64 / n as f64));
        }
        m
    }

    /// Smallest sampled radius (inradius about the center: every boundary
    /// point lies at distance `rho` from the center along its own ray).
    pub fn inradius(&self) -> f64 {
        let n = 2048;
        let mut m = f64::INFINITY;
        for j in 0..=n {
            m = m.min(self.rho(self.angle_span() * j as f64 / n as f64));
        }
        m
    }

    /// Diameter estimated as the largest pairwise distance between boundary
    /// samples (exact for the sampled polygon, spectrally close for smooth
    /// profiles).
    pub fn diameter(&self) -> f64 {
        let n = 256;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|j| self.rel_point(self.angle_span() * j as f64 / n as f64))
            .collect();
        let mut d2: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = pts[i][0] - pts[j][0];
                let dy = pts[i][1] - pts[j][1];
                d2 = d2.max(dx * dx + dy * dy);
            }
        }
        // For N = 3 the meridian half-plane has s >= 0; the mirror image
        // across the axis realizes the true diameter for antipodal pairs.
        if self.dim == 3 {
            for i in 0..n {
                for j in 0..n {
                    let dx = pts[i][0] + pts[j][0];
                    let dy = pts[i][1] - pts[j][1];
                    d2 = d2.max(dx * dx + dy * dy);
                }
            }
        }
        d2.sqrt()
    }

    /// Trig-profile domain with `step * dir[k]` added to the cosine
    /// coefficients (shape-derivative perturbation direction). Errors on
    /// ellipse profiles: perturbations are defined on the trig representation.
    pub fn perturbed(&self, dir: &[f64], step: f64) -> Result<StarDomain> {
        match &self.profile {
            RadialProfile::Trig { cos, sin } => {
                let mut c = cos.clone();
                if dir.len() > c.len() {
                    c.resize(dir.len(), 0.0);
                }
                for (k, d) in dir.iter().enumerate() {
                    c[k] += step * d;
                }
                StarDomain::new(self.dim, self.center.clone(), RadialProfile::Trig {
                    cos: c,
                    sin: sin.clone(),
                })
            }
            RadialProfile::Ellipse { .. } => Err(Error::Argument(
                "radial perturbations are defined for trig profiles only".into(),
            )),
        }
    }
}

fn ellipse_d(a: f64, b: f64, t: f64) -> f64 {
    let s = t.sin();
    let c = t.cos();
    a * a * s * s + b * b * c * c
}

/// Cosine-series evaluation `sum_k coeffs[k] cos(k t)`; the representation
/// used for shape-derivative perturbation directions.
pub fn cos_series_value(coeffs: &[f64], t: f64) -> f64 {
    let mut v = 0.0;
    for (k, c) in coeffs.iter().enumerate() {
        v += c * (k as f64 * t).cos();
    }
    v
}

/// Angular quadrature nodes and weights spanning the full parameter range:
/// periodic trapezoid `theta_j = 2 pi j / n` for N = 2, Gauss-Legendre in
/// `cos phi` for N = 3 (nodes strictly inside `(0, pi)`, reported weight
/// `h_j = w_j / sin phi_j` so that integrands carrying the usual `sin phi`
/// surface factor are integrated with Gauss accuracy). Both spectrally
/// accurate on smooth profiles.
pub fn angular_grid(dim: usize, n: usize) -> Result<Vec<(f64, f64)>> {
    if dim != 2 && dim != 3 {
        return Err(Error::Dimension(dim));
    }
    if n < 4 {
        return Err(Error::Argument(format!("need at least 4 angular samples, got {n}")));
    }
    if dim == 2 {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        return Ok((0..n).map(|j| (h * j as f64, h)).collect());
    }
    Ok(gauss_legendre(n)
        .into_iter()
        .rev() // descending x = ascending phi
        .map(|(x, w)| {
            let t = x.clamp(-1.0, 1.0).acos();
            (t, w / t.sin())
        })
        .collect())
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]` via Newton
/// iteration on the three-term recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let nf = n as f64;
    let mut out = vec![(0.0f64, 0.0f64); n];
    for i in 0..n.div_ceil(2) {
        // Tricomi-style initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let pk = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = pk;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                // One clean-up pass so `dp` matches the final node.
                let mut q0 = 1.0;
                let mut q1 = x;
                for k in 2..=n {
                    let kf = k as f64;
                    let qk = ((2.0 * kf - 1.0) * x * q1 - (kf - 1.0) * q0) / kf;
                    q0 = q1;
                    q1 = qk;
                }
                dp = nf * (x * q1 - q0) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[n - 1 - i] = (x, w);
        out[i] = (-x, w);
    }
    out
}

/// Boundary quadrature samples; weights sum to the surface measure with
/// spectral accuracy.
pub fn boundary_samples(d: &StarDomain, n: usize) -> Result<Vec<BoundarySample>> {
    let grid = angular_grid(d.dim(), n)?;
    let mut out = Vec::with_capacity(n);
    for (t, h) in grid {
        let g = d.arc_speed(t);
        let weight = match d.dim() {
            2 => g * h,
            _ => 2.0 * std::f64::consts::PI * d.rho(t) * t.sin() * g * h,
        };
        out.push(BoundarySample {
            angle: t,
            point: d.ambient_point(t),
            normal: d.ambient_normal(t),
            mean_curvature: d.mean_curvature(t),
            weight,
            support: d.support(t),
        });
    }
    Ok(out)
}

/// Adaptive doubling of the angular quadrature until two consecutive levels
/// agree to near machine precision. Spectral convergence makes this cheap.
fn adaptive_angular<F: Fn(f64) -> f64>(d: &StarDomain, f: F) -> f64 {
    let mut n = 64;
    let mut prev = f64::NAN;
    loop {
        let grid = angular_grid(d.dim(), n).expect("validated dimension");
        let val: f64 = grid.iter().map(|&(t, h)| f(t) * h).sum();
        if (val - prev).abs() <= 1e-13 * val.abs().max(1.0) || n >= (1 << 17) {
            return val;
        }
        prev = val;
        n *= 2;
    }
}

/// Enclosed volume: `1/2 int rho^2 dtheta` (N = 2) or
/// `2 pi / 3 int rho^3 sin phi dphi` (N = 3).
pub fn volume(d: &StarDomain) -> f64 {
    match d.dim() {
        2 => adaptive_angular(d, |t| 0.5 * d.rho(t) * d.rho(t)),
        _ => adaptive_angular(d, |t| {
            let r = d.rho(t);
            2.0 * std::f64::consts::PI / 3.0 * r * r * r * t.sin()
        }),
    }
}

/// Surface measure: `int g dtheta` (N = 2) or `2 pi int rho g sin phi dphi`
/// (N = 3), `g = sqrt(rho^2 + rho'^2)`.
pub fn surface_measure(d: &StarDomain) -> f64 {
    match d.dim() {
        2 => adaptive_angular(d, |t| d.arc_speed(t)),
        _ => adaptive_angular(d, |t| {
            2.0 * std::f64::consts::PI * d.rho(t) * d.arc_speed(t) * t.sin()
        }),
    }
}

/// Reference curvature `H_0 = |Gamma| / (N |Omega|)`, the exact mean
/// curvature of the ball with the same surface-to-volume ratio.
pub fn h0(d: &StarDomain) -> f64 {
    surface_measure(d) / (d.dim() as f64 * volume(d))
}

/// Isoperimetric deficit
/// `|Gamma|^{N/(N-1)} / (N omega_N^{1/(N-1)}) - |Omega|`, nonnegative and
/// zero exactly on balls.
pub fn isoperimetric_deficit(d: &StarDomain) -> f64 {
    let n = d.dim() as f64;
    let s = surface_measure(d);
    let om = unit_sphere_measure(d.dim()).expect("validated dimension");
    s.powf(n / (n - 1.0)) / (n * om.powf(1.0 / (n - 1.0))) - volume(d)
}

/// Residual of the Minkowski identity `int_Gamma H <x - z, nu> dS = |Gamma|`
/// evaluated with `n` boundary samples (absolute value).
pub fn minkowski_residual(d: &StarDomain, n: usize) -> Result<f64> {
    let samples = boundary_samples(d, n)?;
    let lhs: f64 = samples.iter().map(|s| s.mean_curvature * s.support * s.weight).sum();
    Ok((lhs - surface_measure(d)).abs())
}

/// Minimum of the star support `<x - z, nu>` over `n` boundary samples.
pub fn star_support_min(d: &StarDomain, n: usize) -> Result<f64> {
    let samples = boundary_samples(d, n)?;
    Ok(samples.iter().map(|s| s.support).fold(f64::INFINITY, f64::min))
}

/// Serializable domain description; the on-disk JSON config format.
///
/// Either `cos_coeffs`/`sin_coeffs` (trig profile) or `ellipse` must be
/// given, not both. `center` defaults to the origin.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DomainSpec {
    pub dimension: usize,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cos_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sin_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipse: Option<EllipseSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct EllipseSpec {
    pub a: f64,
    pub b: f64,
}

impl DomainSpec {
    pub fn to_domain(&self) -> Result<StarDomain> {
        let center = if self.center.is_empty() {
            vec![0.0; self.dimension]
        } else {
            self.center.clone()
        };
        match (&self.ellipse, self.cos_coeffs.is_empty()) {
            (Some(e), true) => {
                if !self.sin_coeffs.is_empty() {
                    return Err(Error::Config(
                        "domain config mixes ellipse and trig coefficients".into(),
                    ));
                }
                StarDomain::ellipse(self.dimension, center, e.a, e.b)
            }
            (None, false) => StarDomain::trig(
                self.dimension,
                center,
                self.cos_coeffs.clone(),
                self.sin_coeffs.clone(),
            ),
            (Some(_), false) => {
                Err(Error::Config("domain config mixes ellipse and trig coefficients".into()))
            }
            (None, true) => {
                Err(Error::Config("domain config needs cos_coeffs or ellipse".into()))
            }
        }
    }

    pub fn from_domain(d: &StarDomain) -> Self {
        match d.profile() {
            RadialProfile::Trig { cos, sin } => DomainSpec {
                dimension: d.dim(),
                center: d.center().to_vec(),
                cos_coeffs: cos.clone(),
                sin_coeffs: sin.clone(),
                ellipse: None,
            },
            RadialProfile::Ellipse { a, b } => DomainSpec {
                dimension: d.dim(),
                center: d.center().to_vec(),
                cos_coeffs: vec![],
                sin_coeffs: vec![],
                ellipse: Some(EllipseSpec { a: *a, b: *b }),
            },
        }
    }
}
