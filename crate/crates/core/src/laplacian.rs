//! Laplacian operators over graphs and graphs of samples.

use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;
use crate::numeric::CompensatedSum;

/// Anything that can be read as a (multi)set of weighted undirected edges.
pub trait GraphLike {
    fn vertex_count(&self) -> usize;
    fn for_each_edge<F: FnMut(usize, usize, f64)>(&self, f: F);

    fn edge_multiset(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        self.for_each_edge(|u, v, w| out.push((u, v, w)));
        out
    }
}

impl GraphLike for WeightedGraph {
    fn vertex_count(&self) -> usize {
        self.n()
    }

    fn for_each_edge<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        for e in self.edges() {
            f(e.u, e.v, e.w);
        }
    }
}

/// Quadratic form `x^T L x = sum_e w_e (x_u - x_v)^2`.
pub fn quadratic_form<G: GraphLike + ?Sized>(g: &G, x: &[f64]) -> Result<f64> {
    if x.len() != g.vertex_count() {
        return Err(LaplaxError::DimensionMismatch { expected: g.vertex_count(), got: x.len() });
    }
    let mut acc = CompensatedSum::new();
    g.for_each_edge(|u, v, w| {
        let d = x[u] - x[v];
        acc.add(w * d * d);
    });
    Ok(acc.value().max(0.0))
}

/// Borrowing Laplacian view: matrix-vector product and quadratic form over
/// the edge list of any [`GraphLike`].
pub struct LaplacianOperator<'a, G: GraphLike + ?Sized> {
    graph: &'a G,
}

impl<'a, G: GraphLike + ?Sized> LaplacianOperator<'a, G> {
    pub fn new(graph: &'a G) -> Self {
        Self { graph }
    }

    pub fn dim(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if x.len() != n {
            return Err(LaplaxError::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut y = vec![0.0; n];
        self.graph.for_each_edge(|u, v, w| {
            let d = w * (x[u] - x[v]);
            y[u] += d;
            y[v] -= d;
        });
        Ok(y)
    }

    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        quadratic_form(self.graph, x)
    }
}

/// Compressed-row Laplacian used on hot paths. The row order of the
/// accumulation is fixed, so products are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrLaplacian {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    weights: Vec<f64>,
    diag: Vec<f64>,
}

impl CsrLaplacian {
    pub fn from_graph<G: GraphLike + ?Sized>(g: &G) -> Self {
        let n = g.vertex_count();
        assert!(n <= u32::MAX as usize, "CSR column indices are 32-bit");
        let mut count = vec![0usize; n + 1];
        g.for_each_edge(|u, v, _| {
            count[u] += 1;
            count[v] += 1;
        });
        let mut row_ptr = vec![0usize; n + 1];
        for v in 0..n {
            row_ptr[v + 1] = row_ptr[v] + count[v];
        }
        let mut fill = row_ptr.clone();
        let nnz = row_ptr[n];
        let mut cols = vec![0u32; nnz];
        let mut weights = vec![0.0; nnz];
        g.for_each_edge(|u, v, w| {
            cols[fill[u]] = v as u32;
            weights[fill[u]] = w;
            fill[u] += 1;
            cols[fill[v]] = u as u32;
            weights[fill[v]] = w;
            fill[v] += 1;
        });
        let diag = (0..n)
            .map(|i| weights[row_ptr[i]..row_ptr[i + 1]].iter().sum())
            .collect();
        Self { n, row_ptr, cols, weights, diag }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges (half the off-diagonal count).
    pub fn edge_count(&self) -> usize {
        self.cols.len() / 2
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `y = L x`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.weights[k] * x[self.cols[k] as usize];
            }
            y[i] = self.diag[i] * x[i] - s;
        }
    }

    /// `y -= L x`.
    pub fn apply_sub(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for (w, &c) in self.weights[lo..hi].iter().zip(&self.cols[lo..hi]) {
                s += w * x[c as usize];
            }
            y[i] -= self.diag[i] * x[i] - s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.apply_into(x, &mut y);
        y
    }

    /// Off-diagonal neighbors of row `i` as `(column, edge weight)`; the
    /// matrix entry is the negated weight.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k] as usize, self.weights[k]))
    }

    /// Dense matrix (row-major); intended for small systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            a[i][i] = self.diag[i];
            for (j, w) in self.row(i) {
                a[i][j] -= w;
            }
        }
        a
    }
}
