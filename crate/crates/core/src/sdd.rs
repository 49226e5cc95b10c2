//! Symmetric diagonally dominant matrices, Matrix Market I/O and the
//! reduction of SDD systems to graph Laplacians.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};

const DOMINANCE_RTOL: f64 = 1e-12;

/// Symmetric sparse matrix in compressed row form. Both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SddMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SddMatrix {
    /// Builds the matrix from `(row, col, value)` triplets covering both
    /// triangles; duplicates are summed. Rejects asymmetric or non-dominant input.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut map: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, a) in triplets {
            if i >= n || j >= n {
                return Err(LaplaxError::VertexOutOfRange { vertex: i.max(j), n });
            }
            if !a.is_finite() {
                return Err(LaplaxError::InvalidParameter(format!("non-finite entry at ({i}, {j})")));
            }
            *map.entry((i, j)).or_insert(0.0) += a;
        }
        for (&(i, j), &a) in &map {
            if i != j && map.get(&(j, i)).copied() != Some(a) {
                let (row, col) = if i < j { (i, j) } else { (j, i) };
                return Err(LaplaxError::NotSymmetric { row, col });
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(map.len());
        let mut vals = Vec::with_capacity(map.len());
        for (&(i, j), &a) in &map {
            if a == 0.0 {
                continue;
            }
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(a);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let m = Self { n, row_ptr, cols, vals };
        m.check_dominance()?;
        Ok(m)
    }

    pub fn from_dense(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        let mut trip = Vec::new();
        for (i, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(LaplaxError::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, trip)
    }

    /// `L_G + diag(excess)`.
    pub fn from_laplacian(g: &WeightedGraph, excess: &[f64]) -> Result<Self> {
        if excess.len() != g.n() {
            return Err(LaplaxError::DimensionMismatch { expected: g.n(), got: excess.len() });
        }
        let mut trip = Vec::with_capacity(4 * g.m() + g.n());
        let mut diag = excess.to_vec();
        for e in g.edges() {
            trip.push((e.u, e.v, -e.w));
            trip.push((e.v, e.u, -e.w));
            diag[e.u] += e.w;
            diag[e.v] += e.w;
        }
        for (i, d) in diag.into_iter().enumerate() {
            trip.push((i, i, d));
        }
        Self::from_triplets(g.n(), trip)
    }

    fn check_dominance(&self) -> Result<()> {
        for i in 0..self.n {
            let (d, off) = self.diag_and_offsum(i);
            if d < off - DOMINANCE_RTOL * d.abs().max(off) {
                return Err(LaplaxError::NotDiagonallyDominant { row: i });
            }
        }
        Ok(())
    }

    fn diag_and_offsum(&self, i: usize) -> (f64, f64) {
        let mut d = 0.0;
        let mut off = 0.0;
        for (j, a) in self.row(i) {
            if j == i {
                d = a;
            } else {
                off += a.abs();
            }
        }
        (d, off)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, a)| a)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(LaplaxError::DimensionMismatch { expected: self.n, got: x.len() });
        }
        Ok((0..self.n).map(|i| self.row(i).map(|(j, a)| a * x[j]).sum()).collect())
    }

    /// `x^T A x`, clamped at zero.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        let ax = self.apply(x)?;
        Ok(crate::numeric::dot(x, &ax).max(0.0))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// Reads a `coordinate real|integer symmetric|general` Matrix Market file.
    pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, banner) = lines.next().ok_or(LaplaxError::Parse { line: 1, msg: "empty file".into() })?;
        let banner = banner?;
        let toks: Vec<String> = banner.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
        if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" || toks[2] != "coordinate" {
            return Err(LaplaxError::Parse { line: 1, msg: "expected '%%MatrixMarket matrix coordinate ...'".into() });
        }
        if toks[3] != "real" && toks[3] != "integer" {
            return Err(LaplaxError::Parse { line: 1, msg: format!("unsupported field '{}'", toks[3]) });
        }
        let symmetric = match toks[4].as_str() {
            "symmetric" => true,
            "general" => false,
            other => return Err(LaplaxError::Parse { line: 1, msg: format!("unsupported symmetry '{other}'") }),
        };
        let mut size: Option<(usize, usize)> = None;
        let mut trip = Vec::new();
        let mut read = 0usize;
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('%') {
                continue;
            }
            let f: Vec<&str> = body.split_whitespace().collect();
            let bad = |msg: String| LaplaxError::Parse { line: line_no, msg };
            match size {
                None => {
                    if f.len() != 3 {
                        return Err(bad("expected 'rows cols nnz'".into()));
                    }
                    let r: usize = f[0].parse().map_err(|_| bad("bad row count".into()))?;
                    let c: usize = f[1].parse().map_err(|_| bad("bad column count".into()))?;
                    let nnz: usize = f[2].parse().map_err(|_| bad("bad nnz".into()))?;
                    if r != c {
                        return Err(bad(format!("matrix is {r}x{c}, not square")));
                    }
                    size = Some((r, nnz));
                }
                Some((n, _)) => {
                    if f.len() != 3 {
                        return Err(bad("expected 'row col value'".into()));
                    }
                    let i: usize = f[0].parse().map_err(|_| bad("bad row index".into()))?;
                    let j: usize = f[1].parse().map_err(|_| bad("bad column index".into()))?;
                    let a: f64 = f[2].parse().map_err(|_| bad("bad value".into()))?;
                    if i == 0 || j == 0 || i > n || j > n {
                        return Err(bad(format!("index ({i}, {j}) out of range")));
                    }
                    if symmetric && j > i {
                        return Err(bad("symmetric file must list the lower triangle".into()));
                    }
                    trip.push((i - 1, j - 1, a));
                    if symmetric && i != j {
                        trip.push((j - 1, i - 1, a));
                    }
                    read += 1;
                }
            }
        }
        let (n, nnz) = size.ok_or(LaplaxError::Parse { line: 1, msg: "missing size line".into() })?;
        if read != nnz {
            return Err(LaplaxError::Parse { line: 0, msg: format!("expected {nnz} entries, found {read}") });
        }
        Self::from_triplets(n, trip)
    }

    /// Writes the lower triangle in `coordinate real symmetric` form.
    pub fn write_matrix_market<W: Write>(&self, mut out: W) -> Result<()> {
        let lower: Vec<(usize, usize, f64)> = (0..self.n)
            .flat_map(|i| self.row(i).filter(move |&(j, _)| j <= i).map(move |(j, a)| (i, j, a)))
            .collect();
        writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(out, "{} {} {}", self.n, self.n, lower.len())?;
        for (i, j, a) in lower {
            writeln!(out, "{} {} {}", i + 1, j + 1, a)?;
        }
        Ok(())
    }
}

/// How a reduced Laplacian system maps back to the original SDD system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionDescriptor {
    pub n_original: usize,
    /// Gremban doubling: vertex `i` and `i + n` are the two copies of row `i`.
    pub doubled: bool,
}

impl ReductionDescriptor {
    pub fn reduced_dim(&self) -> usize {
        if self.doubled {
            2 * self.n_original
        } else {
            self.n_original
        }
    }

    /// Right-hand side of the reduced system (`[b; -b]` when doubled).
    pub fn lift_rhs(&self, b: &[f64]) -> Vec<f64> {
        if self.doubled {
            b.iter().copied().chain(b.iter().map(|x| -x)).collect()
        } else {
            b.to_vec()
        }
    }

    /// Embedding of an original vector into the reduced space.
    pub fn lift_solution(&self, x: &[f64]) -> Vec<f64> {
        self.lift_rhs(x)
    }

    /// Maps a reduced vector back (`(y1 - y2) / 2` when doubled).
    pub fn restrict(&self, y: &[f64]) -> Vec<f64> {
        if self.doubled {
            let n = self.n_original;
            (0..n).map(|i| 0.5 * (y[i] - y[i + n])).collect()
        } else {
            y.to_vec()
        }
    }
}

/// Result of [`sdd_to_laplacian`]: `A` corresponds to `L_G + diag(excess)` on
/// the reduced vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianReduction {
    pub graph: WeightedGraph,
    pub excess: Vec<f64>,
    pub descriptor: ReductionDescriptor,
}

impl LaplacianReduction {
    /// `(L_G + D) y`.
    pub fn apply_reduced(&self, y: &[f64]) -> Vec<f64> {
        let mut out = crate::laplacian::CsrLaplacian::from_graph(&self.graph).apply(y);
        for (o, (d, x)) in out.iter_mut().zip(self.excess.iter().zip(y)) {
            *o += d * x;
        }
        out
    }
}

/// Splits an SDD matrix into a Laplacian plus a nonnegative diagonal, applying
/// the Gremban double cover when positive off-diagonal entries are present.
pub fn sdd_to_laplacian(a: &SddMatrix) -> LaplacianReduction {
    let n = a.n();
    let doubled = (0..n).any(|i| a.row(i).any(|(j, v)| j != i && v > 0.0));
    let mut edges = Vec::new();
    let mut excess = vec![0.0; n];
    for (i, slack) in excess.iter_mut().enumerate() {
        let mut d = 0.0;
        let mut off = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                d = v;
                continue;
            }
            off += v.abs();
            if j < i {
                continue;
            }
            if v < 0.0 {
                edges.push(Edge::new(i, j, -v));
                if doubled {
                    edges.push(Edge::new(i + n, j + n, -v));
                }
            } else {
                edges.push(Edge::new(i, j + n, v));
                edges.push(Edge::new(i + n, j, v));
            }
        }
        *slack = (d - off).max(0.0);
        // Slack below the dominance tolerance is rounding noise.
        if *slack <= DOMINANCE_RTOL * d.abs() {
            *slack = 0.0;
        }
    }
    let descriptor = ReductionDescriptor { n_original: n, doubled };
    if doubled {
        let copy = excess.clone();
        excess.extend(copy);
    }
    let graph = WeightedGraph::from_valid_sorted(descriptor.reduced_dim(), edges);
    LaplacianReduction { graph, excess, descriptor }
}

impl WeightedGraph {
    fn from_valid_sorted(n: usize, mut edges: Vec<Edge>) -> WeightedGraph {
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        WeightedGraph::from_valid(n, edges)
    }
}
