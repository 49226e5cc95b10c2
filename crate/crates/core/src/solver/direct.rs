use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};
use crate::laplacian::{CsrLaplacian, GraphLike};
use crate::numeric::project_mean_zero;

/// Dense Cholesky factor of a connected Laplacian with vertex 0 pinned to
/// zero. Solutions are returned with mean zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSolver {
    n: usize,
    /// Row-major lower triangle of the `(n-1) x (n-1)` factor.
    factor: Vec<f64>,
}

impl DirectSolver {
    pub fn new<G: GraphLike + ?Sized>(g: &G) -> Result<Self> {
        let lap = CsrLaplacian::from_graph(g);
        let n = lap.n();
        if n == 0 {
            return Err(LaplaxError::InvalidParameter("empty graph".into()));
        }
        let k = n - 1;
        let mut a = vec![0.0; k * k];
        for i in 1..n {
            a[(i - 1) * k + (i - 1)] = lap.diagonal()[i];
            for (j, w) in lap.row(i) {
                if j >= 1 {
                    a[(i - 1) * k + (j - 1)] -= w;
                }
            }
        }
        for j in 0..k {
            let mut d = a[j * k + j];
            for p in 0..j {
                d -= a[j * k + p] * a[j * k + p];
            }
            if !(d > 0.0) {
                return Err(LaplaxError::Disconnected);
            }
            let d = d.sqrt();
            a[j * k + j] = d;
            for i in j + 1..k {
                let mut s = a[i * k + j];
                for p in 0..j {
                    s -= a[i * k + p] * a[j * k + p];
                }
                a[i * k + j] = s / d;
            }
            for p in j + 1..k {
                a[j * k + p] = 0.0;
            }
        }
        Ok(Self { n, factor: a })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Work of one solve, counted as factor entries touched.
    pub fn work(&self) -> u64 {
        let k = self.n.saturating_sub(1) as u64;
        k * (k + 1)
    }

    /// Solves `L x = b - mean(b)`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(LaplaxError::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let mut rhs = b.to_vec();
        project_mean_zero(&mut rhs);
        let k = self.n - 1;
        let l = &self.factor;
        let mut y = rhs[1..].to_vec();
        for i in 0..k {
            let mut s = y[i];
            for p in 0..i {
                s -= l[i * k + p] * y[p];
            }
            y[i] = s / l[i * k + i];
        }
        for i in (0..k).rev() {
            let mut s = y[i];
            for p in i + 1..k {
                s -= l[p * k + i] * y[p];
            }
            y[i] = s / l[i * k + i];
        }
        let mut x = vec![0.0; self.n];
        x[1..].copy_from_slice(&y);
        project_mean_zero(&mut x);
        Ok(x)
    }

    pub(crate) fn raw_factor(&self) -> &[f64] {
        &self.factor
    }

    pub(crate) fn from_raw(n: usize, factor: Vec<f64>) -> Result<Self> {
        let k = n.saturating_sub(1);
        if n == 0 || factor.len() != k * k {
            return Err(LaplaxError::Container("direct factor has wrong size".into()));
        }
        Ok(Self { n, factor })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn single_edge() {
        let g = generators::path(2).unwrap();
        let x = DirectSolver::new(&g).unwrap().solve(&[1.0, -1.0]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn triangle() {
        let g = generators::ring(3).unwrap();
        let x = DirectSolver::new(&g).unwrap().solve(&[2.0, -1.0, -1.0]).unwrap();
        for (a, b) in x.iter().zip([2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs_and_residual() {
        let g = generators::random_connected(40, 60, 0.1, 10.0, 4).unwrap();
        let s = DirectSolver::new(&g).unwrap();
        assert!(s.solve(&vec![0.0; 40]).unwrap().iter().all(|&v| v == 0.0));
        let mut b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        project_mean_zero(&mut b);
        let x = s.solve(&b).unwrap();
        let r = CsrLaplacian::from_graph(&g).apply(&x);
        let err: f64 = r.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * b.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }

    #[test]
    fn single_vertex_and_disconnected() {
        let g = crate::graph::WeightedGraph::new(1, vec![]).unwrap();
        assert_eq!(DirectSolver::new(&g).unwrap().solve(&[3.0]).unwrap(), vec![0.0]);
        let g = crate::graph::WeightedGraph::new(3, vec![crate::graph::Edge::new(0, 1, 1.0)]).unwrap();
        assert!(DirectSolver::new(&g).is_err());
    }
}
