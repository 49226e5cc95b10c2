//! Iterative estimates of relative condition numbers between Laplacians.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};
use crate::laplacian::{CsrLaplacian, GraphLike};
use crate::numeric::{dot, project_mean_zero};
use crate::rng::rng_from_seed;
use crate::solver::krylov::cg;

/// Bracket `[lo, hi]` for the extreme generalized eigenvalues of the pencil
/// `(L_H, L_G)` on the complement of the all-ones vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub lo: f64,
    pub hi: f64,
    /// Ritz values before widening.
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Both power iterations met the residual tolerance.
    pub converged: bool,
}

const RESIDUAL_RTOL: f64 = 1e-7;
const INNER_TOL: f64 = 1e-13;

/// Power iteration on `L_G^+ L_H` (for the top of the spectrum) and on
/// `L_H^+ L_G` (for the bottom). Each end is widened by its residual bound:
/// with Ritz value `theta` and residual `r = L_H x - theta L_G x`, some
/// eigenvalue lies within `||r||_{L_G^+} / ||x||_{L_G}` of `theta`.
pub fn estimate_relative_condition<G, H>(g: &G, h: &H, iters: usize) -> Result<ConditionEstimate>
where
    G: GraphLike + ?Sized,
    H: GraphLike + ?Sized,
{
    let n = g.vertex_count();
    if h.vertex_count() != n {
        return Err(LaplaxError::DimensionMismatch { expected: n, got: h.vertex_count() });
    }
    let lg = CsrLaplacian::from_graph(g);
    let lh = CsrLaplacian::from_graph(h);
    for l in [&lg, &lh] {
        if !csr_connected(l) {
            return Err(LaplaxError::Disconnected);
        }
    }
    if n <= 1 {
        return Ok(ConditionEstimate { lo: 1.0, hi: 1.0, lambda_min: 1.0, lambda_max: 1.0, converged: true });
    }
    let (tmax, rmax, cmax) = top_eigen(&lh, &lg, iters, 0x10);
    let (tinv, rinv, cinv) = top_eigen(&lg, &lh, iters, 0x20);
    let lambda_min = 1.0 / tinv;
    let lo = 1.0 / (tinv + rinv);
    let hi = tmax + rmax;
    Ok(ConditionEstimate { lo, hi, lambda_min, lambda_max: tmax, converged: cmax && cinv })
}

/// Largest eigenvalue of `B^+ A`, returned with its residual bound.
fn top_eigen(a: &CsrLaplacian, b: &CsrLaplacian, iters: usize, seed: u64) -> (f64, f64, bool) {
    let n = a.n();
    let mut rng = rng_from_seed(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project_mean_zero(&mut x);
    let solve_b = |rhs: &[f64]| {
        cg(|p, q| b.apply_into(p, q), |r, z| jacobi(b, r, z), rhs, INNER_TOL, 20 * n + 100, true).x
    };
    let mut theta = 0.0;
    let mut res = f64::INFINITY;
    let mut converged = false;
    for _ in 0..iters.max(1) {
        let bx = b.apply(&x);
        let xbx = dot(&x, &bx);
        if xbx <= 0.0 {
            break;
        }
        let scale = 1.0 / xbx.sqrt();
        x.iter_mut().for_each(|v| *v *= scale);
        let ax = a.apply(&x);
        theta = dot(&x, &ax);
        let y = solve_b(&ax);
        // L_B^+ r = y - theta x, ||r||^2_{B^+} = r^T (y - theta x)
        let bx: Vec<f64> = bx.iter().map(|v| v * scale).collect();
        let r: Vec<f64> = ax.iter().zip(&bx).map(|(p, q)| p - theta * q).collect();
        let br: Vec<f64> = y.iter().zip(&x).map(|(p, q)| p - theta * q).collect();
        res = dot(&r, &br).max(0.0).sqrt();
        x = y;
        project_mean_zero(&mut x);
        if res <= RESIDUAL_RTOL * theta.abs() {
            converged = true;
            break;
        }
    }
    (theta, res, converged)
}

fn jacobi(l: &CsrLaplacian, r: &[f64], z: &mut [f64]) {
    for ((zi, ri), d) in z.iter_mut().zip(r).zip(l.diagonal()) {
        *zi = if *d > 0.0 { ri / d } else { *ri };
    }
}

fn csr_connected(l: &CsrLaplacian) -> bool {
    let n = l.n();
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for (y, _) in l.row(x) {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}
