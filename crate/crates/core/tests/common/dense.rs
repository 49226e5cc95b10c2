// Dense reference linear algebra for oracles: Cholesky, Gaussian elimination
// and cyclic Jacobi eigenvalues. Test code only.

pub type Dense = Vec<Vec<f64>>;

pub fn cholesky(a: &Dense) -> Dense {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "matrix not positive definite at {j} ({d})");
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    l
}

pub fn forward(l: &Dense, b: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i][k] * y[k];
        }
        y[i] /= l[i][i];
    }
    y
}

pub fn backward(l: &Dense, y: &[f64]) -> Vec<f64> {
    let n = l.len();
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= l[k][i] * x[k];
        }
        x[i] /= l[i][i];
    }
    x
}

pub fn cholesky_solve(l: &Dense, b: &[f64]) -> Vec<f64> {
    backward(l, &forward(l, b))
}

/// Removes row and column 0.
pub fn pinned(a: &Dense) -> Dense {
    a[1..].iter().map(|row| row[1..].to_vec()).collect()
}

/// Pseudoinverse solution of a connected Laplacian system (mean-zero result).
pub struct LaplacianFactor {
    l: Dense,
    n: usize,
}

impl LaplacianFactor {
    pub fn new(lap: &Dense) -> Self {
        let n = lap.len();
        let l = if n > 1 { cholesky(&pinned(lap)) } else { Vec::new() };
        Self { l, n }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mean_b = b.iter().sum::<f64>() / n as f64;
        let bp: Vec<f64> = b.iter().map(|v| v - mean_b).collect();
        let mut x = vec![0.0; n];
        if n > 1 {
            let y = cholesky_solve(&self.l, &bp[1..]);
            x[1..].copy_from_slice(&y);
        }
        let m = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= m);
        x
    }
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Dense = a.iter().cloned().collect();
    let mut x = b.to_vec();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap()).unwrap();
        m.swap(c, p);
        x.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                x[r] -= f * x[c];
            }
        }
    }
    for r in (0..n).rev() {
        for k in r + 1..n {
            x[r] -= m[r][k] * x[k];
        }
        x[r] /= m[r][r];
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Dense) -> Vec<f64> {
    let n = a.len();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let scale: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum::<f64>().max(1e-300);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

/// Generalized eigenvalues of `L_h x = lambda L_g x` on the complement of the
/// all-ones vector (both Laplacians connected, pinned at vertex 0).
pub fn pencil_eigenvalues(lg: &Dense, lh: &Dense) -> Vec<f64> {
    let g = pinned(lg);
    let h = pinned(lh);
    let c = cholesky(&g);
    let n = g.len();
    // M = C^{-1} H C^{-T}
    let mut tmp = vec![vec![0.0; n]; n];
    for j in 0..n {
        let col: Vec<f64> = (0..n).map(|i| h[i][j]).collect();
        let y = forward(&c, &col);
        for i in 0..n {
            tmp[i][j] = y[i];
        }
    }
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        let row = tmp[i].clone();
        let y = forward(&c, &row);
        m[i] = y;
    }
    // symmetrize rounding noise
    for i in 0..n {
        for j in i + 1..n {
            let s = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    jacobi_eigenvalues(&m)
}

pub fn mat_vec(a: &Dense, x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// `sqrt(x^T A x)`.
pub fn a_norm(a: &Dense, x: &[f64]) -> f64 {
    let ax = mat_vec(a, x);
    x.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>().max(0.0).sqrt()
}
