//! Jacobi-preconditioned conjugate gradients.

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Target for `‖A x − b‖ / ‖b‖`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖A x − b‖ / ‖b‖`.
    pub residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A`, starting from `x0` (or zero).
///
/// Hitting `max_iter` is not an error: the best iterate is returned with `converged = false`.
pub fn solve_spd(a: &SparseMatrix, b: &[f64], x0: Option<&[f64]>, opts: CgOptions) -> Result<CgOutcome> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: b.len() });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("matrix entries".into()));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side".into()));
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::InvalidArgument(format!("matrix is not positive definite: diagonal {i} is {}", diag[i])));
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, residual: 0.0, converged: true });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n && x0.iter().all(|v| v.is_finite()) => x0.to_vec(),
        Some(x0) if x0.len() != n => return Err(Error::LengthMismatch { expected: n, got: x0.len() }),
        _ => vec![0.0; n],
    };
    // Rows with no off-diagonal coupling (eliminated Dirichlet rows) are solved
    // directly and kept out of the Krylov iteration, so they come out exact.
    let decoupled: Vec<bool> = (0..n).map(|i| a.row(i).all(|(j, v)| j == i || v == 0.0)).collect();
    for i in 0..n {
        if decoupled[i] {
            x[i] = b[i] * inv_diag[i];
        }
    }
    let mut r = a.matvec(&x);
    for i in 0..n {
        r[i] = if decoupled[i] { 0.0 } else { b[i] - r[i] };
    }
    let mut res = dot(&r, &r).sqrt() / b_norm;
    if res <= opts.tol {
        return Ok(CgOutcome { x, iterations: 0, residual: res, converged: true });
    }
    let mut z: Vec<f64> = (0..n).map(|i| if decoupled[i] { 0.0 } else { r[i] * inv_diag[i] }).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::InvalidArgument(format!("matrix is not positive definite (pᵀAp = {pap:e})")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / b_norm;
        if res <= opts.tol {
            return Ok(CgOutcome { x, iterations: it, residual: res, converged: true });
        }
        for i in 0..n {
            z[i] = if decoupled[i] { 0.0 } else { r[i] * inv_diag[i] };
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(CgOutcome { x, iterations: opts.max_iter, residual: res, converged: false })
}
