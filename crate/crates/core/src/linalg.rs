//! Sparse symmetric positive-definite linear algebra: CSR storage and a
//! conjugate-gradient solver with a symmetric Gauss-Seidel (SSOR, omega = 1)
//! preconditioner.
//!
//! The sparsity pattern is built once per mesh from the node adjacency and
//! the values are refilled on every outer nonlinear iteration. All loops run
//! serially in fixed index order, so results are bit-reproducible.

use crate::error::{Error, Result};

/// Compressed sparse row matrix with a fixed symmetric pattern.
#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds the pattern from per-row column lists (sorted, deduplicated
    /// here). Values start at zero.
    pub fn from_adjacency(mut rows: Vec<Vec<usize>>) -> Csr {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Csr { n, row_ptr, cols, vals: vec![0.0; nnz] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn zero_values(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    fn pos(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Adds `v` to entry (i, j); the pair must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        match self.pos(i, j) {
            Some(k) => self.vals[k] += v,
            None => panic!("entry ({i}, {j}) outside the assembled sparsity pattern"),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pos(i, j).map_or(0.0, |k| self.vals[k])
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        match self.pos(i, j) {
            Some(k) => self.vals[k] = v,
            None => panic!("entry ({i}, {j}) outside the assembled sparsity pattern"),
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        }
    }

    /// Row action (A x)_i.
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            s += self.vals[k] * x[self.cols[k]];
        }
        s
    }

    /// Symmetric Dirichlet elimination for node `d` with value `v`:
    /// moves the column into the right-hand side, zeroes row and column, and
    /// pins the diagonal. `diag_scale` keeps the pinned equation on the same
    /// scale as its neighbors.
    pub fn eliminate_dirichlet(&mut self, d: usize, v: f64, rhs: &mut [f64], diag_scale: f64) {
        // The pattern is symmetric: walking row d enumerates every row i
        // holding a (i, d) entry.
        for k in self.row_ptr[d]..self.row_ptr[d + 1] {
            let j = self.cols[k];
            if j == d {
                continue;
            }
            let kji = self.pos(j, d).expect("symmetric pattern");
            rhs[j] -= self.vals[kji] * v;
            self.vals[kji] = 0.0;
            self.vals[k] = 0.0;
        }
        let kd = self.pos(d, d).expect("diagonal in pattern");
        self.vals[kd] = diag_scale;
        rhs[d] = diag_scale * v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Outcome of a preconditioned CG solve.
#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients with an SSOR(1) preconditioner.
/// Solves A x = b for SPD A, starting from the provided `x` (warm start),
/// until ||b - A x|| <= rel_tol * ||b||.
pub fn pcg_ssor(a: &Csr, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> Result<CgStats> {
    let n = a.n();
    assert_eq!(b.len(), n);
    assert_eq!(x.len(), n);

    let diag = a.diagonal();
    // A diagonal entry that is non-positive or NaN rules out SPD.
    if let Some(i) = diag.iter().position(|&d| d <= 0.0 || d.is_nan()) {
        return Err(Error::Linear(format!(
            "non-positive diagonal entry {} at row {i}: matrix not SPD",
            diag[i]
        )));
    }

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats { iterations: 0, relative_residual: 0.0 });
    }

    let mut r = vec![0.0; n];
    a.mul_vec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    ssor_apply(a, &diag, &r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut res = norm2(&r) / b_norm;
    if res <= rel_tol {
        return Ok(CgStats { iterations: 0, relative_residual: res });
    }

    for it in 1..=max_iter {
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        // Non-positive or NaN curvature both mean the matrix is not SPD.
        if pap <= 0.0 || pap.is_nan() {
            return Err(Error::Linear(format!(
                "curvature p'Ap = {pap} not positive at iteration {it}: matrix not SPD"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r) / b_norm;
        if res <= rel_tol {
            return Ok(CgStats { iterations: it, relative_residual: res });
        }
        ssor_apply(a, &diag, &r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Linear(format!(
        "PCG stalled at relative residual {res:.3e} after {max_iter} iterations"
    )))
}

/// z = M^{-1} r for the SSOR(1) preconditioner
/// M = (D + L) D^{-1} (D + U): forward substitution, diagonal scaling,
/// backward substitution, all on the CSR pattern.
fn ssor_apply(a: &Csr, diag: &[f64], r: &[f64], z: &mut [f64]) {
    let n = a.n();
    // (D + L) y = r
    for i in 0..n {
        let mut s = r[i];
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[k];
            if j < i {
                s -= a.vals[k] * z[j];
            }
        }
        z[i] = s / diag[i];
    }
    // y := D y
    for i in 0..n {
        z[i] *= diag[i];
    }
    // (D + U) z = y
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[k];
            if j > i {
                s -= a.vals[k] * z[j];
            }
        }
        z[i] = s / diag[i];
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
