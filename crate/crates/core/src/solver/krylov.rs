//! Preconditioned conjugate gradient kernel shared by the baseline solver,
//! the condition estimator and the chain checker.

use crate::numeric::{dot, norm2, project_mean_zero};

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
}

/// Solves `A x = b` from `x = 0`, stopping at `||r|| <= tol * ||b||`.
/// With `project` set, `b`, residuals and preconditioned residuals are kept
/// orthogonal to the all-ones vector (singular Laplacian systems).
pub fn cg<A, M>(mut apply_a: A, mut precond: M, b: &[f64], tol: f64, max_iter: usize, project: bool) -> CgOutcome
where
    A: FnMut(&[f64], &mut [f64]),
    M: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = b.to_vec();
    if project {
        project_mean_zero(&mut r);
    }
    let b_norm = norm2(&r);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return CgOutcome { x, iterations: 0, converged: true, relative_residual: 0.0 };
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    if project {
        project_mean_zero(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        apply_a(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return CgOutcome { x, iterations: it - 1, converged: false, relative_residual: rel };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if project {
            project_mean_zero(&mut r);
        }
        rel = norm2(&r) / b_norm;
        if rel <= tol {
            if project {
                project_mean_zero(&mut x);
            }
            return CgOutcome { x, iterations: it, converged: true, relative_residual: rel };
        }
        precond(&r, &mut z);
        if project {
            project_mean_zero(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if project {
        project_mean_zero(&mut x);
    }
    CgOutcome { x, iterations: max_iter, converged: false, relative_residual: rel }
}

pub fn identity(r: &[f64], z: &mut [f64]) {
    z.copy_from_slice(r);
}
