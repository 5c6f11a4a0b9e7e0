//! Mapped structured quadrilateral meshes over star-shaped domains.
//!
//! Every mesh is the image of an `(n_r + 1) x columns` parameter lattice:
//! radial index `i` along rays from the star center, angular index `j` over
//! the profile parameter. Working-plane coordinates are stored relative to
//! the center: `(x, y)` for N = 2 and meridian cylindrical `(s, z)` for
//! N = 3 (the azimuthal direction is a symmetry; volume and surface elements
//! carry the factor `2 pi s`).
//!
//! Three layouts:
//!
//! * exterior: from the boundary `rho(angle)` out to a truncation sphere of
//!   radius `r_out`, geometrically (log) graded in radius so cell aspect
//!   stays bounded on the decaying far field;
//! * interior annulus: from a small excision sphere of radius `delta` out to
//!   the boundary, log graded toward the singularity;
//! * solid: from the center to the boundary, uniform in radius, with the
//!   center ring collapsed to a single node. Collapsed cells are degenerate
//!   bilinear quads; their Jacobian is positive at every 2x2 Gauss point and
//!   the Galerkin row of the center node is the discrete flux balance of the
//!   surrounding cells.
//!
//! Elements are isoparametric bilinear quads integrated with 2x2 Gauss
//! quadrature. Jacobian sign consistency and non-degeneracy are checked at
//! build time.

use crate::error::{Error, Result};
use crate::geometry::StarDomain;

const INV_SQRT3: f64 = 0.577_350_269_189_625_8;
/// 2x2 Gauss points on [-1, 1]^2, unit weights.
pub const GAUSS_2X2: [[f64; 2]; 4] = [
    [-INV_SQRT3, -INV_SQRT3],
    [INV_SQRT3, -INV_SQRT3],
    [INV_SQRT3, INV_SQRT3],
    [-INV_SQRT3, INV_SQRT3],
];
/// 2-point Gauss on [-1, 1], unit weights.
pub const GAUSS_2: [f64; 2] = [-INV_SQRT3, INV_SQRT3];

/// Bilinear shape functions at a reference point.
pub fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    [
        0.25 * (1.0 - xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 - eta),
        0.25 * (1.0 + xi) * (1.0 + eta),
        0.25 * (1.0 - xi) * (1.0 + eta),
    ]
}

/// Reference gradients (d/dxi, d/deta) of the bilinear shape functions.
pub fn shape_ref_grads(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-0.25 * (1.0 - eta), -0.25 * (1.0 - xi)],
        [0.25 * (1.0 - eta), -0.25 * (1.0 + xi)],
        [0.25 * (1.0 + eta), 0.25 * (1.0 + xi)],
        [-0.25 * (1.0 + eta), 0.25 * (1.0 - xi)],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum MeshKind {
    /// Annulus between the domain boundary (ring 0) and a truncation sphere
    /// (ring n_r) of radius `r_out`.
    Exterior { r_out: f64 },
    /// Annulus between an excision sphere (ring 0) of radius `excision` and
    /// the domain boundary (ring n_r).
    InteriorAnnulus { excision: f64 },
    /// Full domain from the collapsed center (ring 0) to the boundary
    /// (ring n_r).
    Solid,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    domain: StarDomain,
    kind: MeshKind,
    n_r: usize,
    n_a: usize,
    n_cols: usize,
    periodic: bool,
    pole_collapsed: bool,
    angles: Vec<f64>,
    /// Radius along the column ray, lattice-indexed `i * n_cols + j`.
    radii: Vec<f64>,
    /// Working-plane coordinates relative to the center, per global node.
    coords: Vec<[f64; 2]>,
    n_nodes: usize,
}

/// Per-quadrature-point element data: total weight (Gauss x |det J| x
/// axisymmetric ring factor), physical shape gradients, shape values, and
/// the physical point (relative coordinates).
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub weight: f64,
    pub grads: [[f64; 2]; 4],
    pub shapes: [f64; 4],
    pub point: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct CellQuad {
    pub nodes: [usize; 4],
    pub qp: [QuadPoint; 4],
}

/// Boundary-edge quadrature on a mesh ring: two Gauss points with total
/// weights (arc length x axisymmetric ring factor) and the two edge shape
/// values per point.
#[derive(Debug, Clone)]
pub struct EdgeQuad {
    pub nodes: [usize; 2],
    pub qp: [(f64, [f64; 2], [f64; 2]); 2],
}

impl Mesh {
    /// Exterior mesh: log-graded radius from `rho(angle)` to `r_out`.
    pub fn exterior(d: &StarDomain, n_r: usize, n_a: usize, r_out: f64) -> Result<Mesh> {
        let circ = d.circumradius();
        if !(r_out.is_finite() && r_out >= 2.0 * circ) {
            return Err(Error::Config(format!(
                "truncation radius {r_out} must be at least twice the circumradius {circ}"
            )));
        }
        Self::build(d, n_r, n_a, MeshKind::Exterior { r_out })
    }

    /// Interior annulus: log-graded radius from the excision sphere to the
    /// boundary.
    pub fn interior_annulus(d: &StarDomain, n_r: usize, n_a: usize, excision: f64) -> Result<Mesh> {
        let inr = d.inradius();
        if !(excision.is_finite() && excision > 0.0 && excision <= 0.5 * inr) {
            return Err(Error::Config(format!(
                "excision radius {excision} must lie in (0, inradius/2 = {}]",
                0.5 * inr
            )));
        }
        Self::build(d, n_r, n_a, MeshKind::InteriorAnnulus { excision })
    }

    /// Solid mesh from the collapsed center to the boundary.
    pub fn solid(d: &StarDomain, n_r: usize, n_a: usize) -> Result<Mesh> {
        Self::build(d, n_r, n_a, MeshKind::Solid)
    }

    fn build(d: &StarDomain, n_r: usize, n_a: usize, kind: MeshKind) -> Result<Mesh> {
        if n_r < 4 {
            return Err(Error::Config(format!("need at least 4 radial cells, got {n_r}")));
        }
        if n_a < 8 {
            return Err(Error::Config(format!("need at least 8 angular cells, got {n_a}")));
        }
        let periodic = d.dim() == 2;
        let n_cols = if periodic { n_a } else { n_a + 1 };
        let span = d.angle_span();
        let angles: Vec<f64> = (0..n_cols).map(|j| span * j as f64 / n_a as f64).collect();

        let pole_collapsed = matches!(kind, MeshKind::Solid);
        let mut radii = vec![0.0; (n_r + 1) * n_cols];
        for (j, &t) in angles.iter().enumerate() {
            let rho = d.rho(t);
            for i in 0..=n_r {
                let s = i as f64 / n_r as f64;
                radii[i * n_cols + j] = match kind {
                    MeshKind::Exterior { r_out } => rho * (r_out / rho).powf(s),
                    MeshKind::InteriorAnnulus { excision } => excision * (rho / excision).powf(s),
                    MeshKind::Solid => s * rho,
                };
            }
        }

        let n_nodes =
            if pole_collapsed { 1 + n_r * n_cols } else { (n_r + 1) * n_cols };
        let mut mesh = Mesh {
            domain: d.clone(),
            kind,
            n_r,
            n_a,
            n_cols,
            periodic,
            pole_collapsed,
            angles,
            radii,
            coords: Vec::new(),
            n_nodes,
        };
        let mut coords = vec![[0.0; 2]; n_nodes];
        for i in 0..=n_r {
            for j in 0..n_cols {
                let t = mesh.angles[j];
                let w = d.omega(t);
                let r = mesh.radii[i * n_cols + j];
                coords[mesh.node(i, j)] = [r * w[0], r * w[1]];
            }
        }
        mesh.coords = coords;
        mesh.check_jacobians()?;
        Ok(mesh)
    }

    /// Consistent nonzero Jacobian sign at every Gauss point of every cell.
    fn check_jacobians(&self) -> Result<()> {
        let mut sign = 0.0f64;
        for i in 0..self.n_r {
            for j in 0..self.n_a {
                let x = self.cell_coords(i, j);
                for g in GAUSS_2X2 {
                    let det = jacobian_det(&x, g[0], g[1]);
                    if det == 0.0 || !det.is_finite() {
                        return Err(Error::Mesh(format!(
                            "degenerate Jacobian {det} in cell ({i}, {j})"
                        )));
                    }
                    if sign == 0.0 {
                        sign = det.signum();
                    } else if det.signum() != sign {
                        return Err(Error::Mesh(format!(
                            "Jacobian sign flip in cell ({i}, {j}): mesh folds over"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &StarDomain {
        &self.domain
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    /// Angular node columns: `n_a` when periodic (N = 2), `n_a + 1` otherwise.
    pub fn columns(&self) -> usize {
        self.n_cols
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_cells(&self) -> usize {
        self.n_r * self.n_a
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn is_pole_collapsed(&self) -> bool {
        self.pole_collapsed
    }

    /// Global node id of lattice position (ring, column).
    pub fn node(&self, ring: usize, col: usize) -> usize {
        debug_assert!(ring <= self.n_r && col < self.n_cols);
        if self.pole_collapsed {
            if ring == 0 {
                0
            } else {
                1 + (ring - 1) * self.n_cols + col
            }
        } else {
            ring * self.n_cols + col
        }
    }

    /// Ring index of a global node (the collapsed pole is ring 0).
    pub fn ring_of(&self, node: usize) -> usize {
        if self.pole_collapsed {
            if node == 0 {
                0
            } else {
                (node - 1) / self.n_cols + 1
            }
        } else {
            node / self.n_cols
        }
    }

    /// Column index of a global node (0 for the collapsed pole).
    pub fn col_of(&self, node: usize) -> usize {
        if self.pole_collapsed {
            if node == 0 {
                0
            } else {
                (node - 1) % self.n_cols
            }
        } else {
            node % self.n_cols
        }
    }

    /// Radius along the ray at lattice position (ring, column).
    pub fn radius(&self, ring: usize, col: usize) -> f64 {
        self.radii[ring * self.n_cols + col]
    }

    /// Relative working-plane coordinates of a global node.
    pub fn coord(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    /// Ring index of the domain boundary Gamma.
    pub fn gamma_ring(&self) -> usize {
        match self.kind {
            MeshKind::Exterior { .. } => 0,
            _ => self.n_r,
        }
    }

    /// Column pair (j, j_next) of each angular edge along a ring.
    pub fn ring_edges(&self) -> Vec<(usize, usize)> {
        (0..self.n_a)
            .map(|j| (j, if self.periodic { (j + 1) % self.n_cols } else { j + 1 }))
            .collect()
    }

    /// Corner node ids of cell (i, j) in reference order.
    pub fn cell_nodes(&self, i: usize, j: usize) -> [usize; 4] {
        let j2 = if self.periodic { (j + 1) % self.n_cols } else { j + 1 };
        [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j2), self.node(i, j2)]
    }

    fn cell_coords(&self, i: usize, j: usize) -> [[f64; 2]; 4] {
        let n = self.cell_nodes(i, j);
        [self.coords[n[0]], self.coords[n[1]], self.coords[n[2]], self.coords[n[3]]]
    }

    /// Axisymmetric measure factor at a relative point: `2 pi s` for N = 3
    /// (s = distance from the symmetry axis), 1 for N = 2.
    pub fn measure_factor(&self, point: [f64; 2]) -> f64 {
        if self.dim() == 3 {
            2.0 * std::f64::consts::PI * point[0].max(0.0)
        } else {
            1.0
        }
    }

    /// Full 2x2 Gauss data for cell (i, j).
    pub fn cell_quadrature(&self, i: usize, j: usize) -> CellQuad {
        let nodes = self.cell_nodes(i, j);
        let x = self.cell_coords(i, j);
        let mut qp = [QuadPoint {
            weight: 0.0,
            grads: [[0.0; 2]; 4],
            shapes: [0.0; 4],
            point: [0.0; 2],
        }; 4];
        for (q, g) in GAUSS_2X2.iter().enumerate() {
            let (xi, eta) = (g[0], g[1]);
            let shp = shape_values(xi, eta);
            let rg = shape_ref_grads(xi, eta);
            let mut jac = [[0.0f64; 2]; 2];
            for a in 0..4 {
                jac[0][0] += rg[a][0] * x[a][0];
                jac[0][1] += rg[a][0] * x[a][1];
                jac[1][0] += rg[a][1] * x[a][0];
                jac[1][1] += rg[a][1] * x[a][1];
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let inv_det = 1.0 / det;
            let mut grads = [[0.0f64; 2]; 4];
            for a in 0..4 {
                // With rows (d/dxi, d/deta) of (x, y), `jac` holds J^T; physical
                // gradients are jac^{-1} times the reference gradient.
                grads[a][0] = (jac[1][1] * rg[a][0] - jac[0][1] * rg[a][1]) * inv_det;
                grads[a][1] = (-jac[1][0] * rg[a][0] + jac[0][0] * rg[a][1]) * inv_det;
            }
            let mut point = [0.0f64; 2];
            for a in 0..4 {
                point[0] += shp[a] * x[a][0];
                point[1] += shp[a] * x[a][1];
            }
            qp[q] = QuadPoint {
                weight: det.abs() * self.measure_factor(point),
                grads,
                shapes: shp,
                point,
            };
        }
        CellQuad { nodes, qp }
    }

    /// 2-point Gauss data for the angular edge `j` of ring `ring`.
    pub fn ring_edge_quadrature(&self, ring: usize, j: usize) -> EdgeQuad {
        let j2 = if self.periodic { (j + 1) % self.n_cols } else { j + 1 };
        let n1 = self.node(ring, j);
        let n2 = self.node(ring, j2);
        let x1 = self.coords[n1];
        let x2 = self.coords[n2];
        let half_len = 0.5 * ((x2[0] - x1[0]).powi(2) + (x2[1] - x1[1]).powi(2)).sqrt();
        let mut qp = [(0.0, [0.0; 2], [0.0; 2]); 2];
        for (q, &s) in GAUSS_2.iter().enumerate() {
            let shapes = [0.5 * (1.0 - s), 0.5 * (1.0 + s)];
            let point = [
                shapes[0] * x1[0] + shapes[1] * x2[0],
                shapes[0] * x1[1] + shapes[1] * x2[1],
            ];
            qp[q] = (half_len * self.measure_factor(point), shapes, point);
        }
        EdgeQuad { nodes: [n1, n2], qp }
    }

    /// Node adjacency (including self) for the CSR pattern.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut rows: Vec<Vec<usize>> = (0..self.n_nodes).map(|i| vec![i]).collect();
        for i in 0..self.n_r {
            for j in 0..self.n_a {
                let c = self.cell_nodes(i, j);
                for &a in &c {
                    for &b in &c {
                        rows[a].push(b);
                    }
                }
            }
        }
        rows
    }

    /// Discrete volume of the meshed region (sum of quadrature weights).
    pub fn discrete_volume(&self) -> f64 {
        let mut v = 0.0;
        for i in 0..self.n_r {
            for j in 0..self.n_a {
                let cq = self.cell_quadrature(i, j);
                v += cq.qp.iter().map(|q| q.weight).sum::<f64>();
            }
        }
        v
    }
}

fn jacobian_det(x: &[[f64; 2]; 4], xi: f64, eta: f64) -> f64 {
    let rg = shape_ref_grads(xi, eta);
    let mut jac = [[0.0f64; 2]; 2];
    for a in 0..4 {
        jac[0][0] += rg[a][0] * x[a][0];
        jac[0][1] += rg[a][0] * x[a][1];
        jac[1][0] += rg[a][1] * x[a][0];
        jac[1][1] += rg[a][1] * x[a][1];
    }
    jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
}
