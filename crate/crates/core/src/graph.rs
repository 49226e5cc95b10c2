//! Undirected positive-weight graphs with an adjacency index.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};

/// An undirected edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, w: f64) -> Self {
        if u <= v {
            Self { u, v, w }
        } else {
            Self { u: v, v: u, w }
        }
    }

    /// The endpoint opposite to `x`.
    #[inline]
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Simple undirected graph: at most one edge per unordered pair, no self-loops,
/// strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    offsets: Vec<usize>,
    // (neighbor, edge id)
    adjacency: Vec<(usize, usize)>,
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let e = Edge::new(e.u, e.v, e.w);
            if e.v >= n {
                return Err(LaplaxError::VertexOutOfRange { vertex: e.v, n });
            }
            if e.u == e.v {
                return Err(LaplaxError::SelfLoop(e.u));
            }
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(LaplaxError::BadWeight { u: e.u, v: e.v, w: e.w });
            }
            if !seen.insert((e.u, e.v)) {
                return Err(LaplaxError::DuplicateEdge { u: e.u, v: e.v });
            }
            normalized.push(e);
        }
        Ok(Self::from_valid(n, normalized))
    }

    /// Builds a simple graph from a multiset of edges, adding the weights of
    /// parallel copies. The result lists edges in `(u, v)` order.
    pub fn from_edges_merging<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            let e = Edge::new(u, v, w);
            if e.v >= n {
                return Err(LaplaxError::VertexOutOfRange { vertex: e.v, n });
            }
            if e.u == e.v {
                return Err(LaplaxError::SelfLoop(e.u));
            }
            if !(e.w > 0.0 && e.w.is_finite()) {
                return Err(LaplaxError::BadWeight { u: e.u, v: e.v, w: e.w });
            }
            *merged.entry((e.u, e.v)).or_insert(0.0) += e.w;
        }
        let edges = merged.into_iter().map(|((u, v), w)| Edge { u, v, w }).collect();
        Ok(Self::from_valid(n, edges))
    }

    pub(crate) fn from_valid(n: usize, edges: Vec<Edge>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); 2 * edges.len()];
        for (id, e) in edges.iter().enumerate() {
            adjacency[fill[e.u]] = (e.v, id);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, id);
            fill[e.v] += 1;
        }
        Self { n, edges, offsets, adjacency }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Edge {
        self.edges[id]
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a).iter().find(|&&(x, _)| x == b).map(|&(_, id)| id)
    }

    pub fn total_weight(&self) -> f64 {
        crate::numeric::compensated_sum(self.edges.iter().map(|e| e.w))
    }

    /// Component label per vertex (labels are dense, ordered by smallest vertex).
    pub fn components(&self) -> (usize, Vec<usize>) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for &(y, _) in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().0 == 1
    }

    /// Induced subgraph on `vertices` (local id = position in the slice).
    /// Returns the subgraph and, per local edge, the host edge id.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> (WeightedGraph, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut edges = Vec::new();
        let mut host = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let (a, b) = (local[e.u], local[e.v]);
            if a != usize::MAX && b != usize::MAX {
                edges.push(Edge::new(a, b, e.w));
                host.push(id);
            }
        }
        (WeightedGraph::from_valid(vertices.len(), edges), host)
    }

    /// Same edge set with weights multiplied by `factor` on the selected edges.
    pub fn with_scaled_edges(&self, selected: &[bool], factor: f64) -> WeightedGraph {
        let edges = self
            .edges
            .iter()
            .zip(selected)
            .map(|(e, &s)| if s { Edge { w: e.w * factor, ..*e } } else { *e })
            .collect();
        WeightedGraph::from_valid(self.n, edges)
    }

    pub fn scaled(&self, factor: f64) -> WeightedGraph {
        let all = vec![true; self.m()];
        self.with_scaled_edges(&all, factor)
    }

    /// Reads the plain edge-list format: an optional `n m` header line followed
    /// by `u v w` lines. `#` and `%` start comments.
    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut header: Option<usize> = None;
        let mut edges = Vec::new();
        let mut max_id = None::<usize>;
        let mut first = true;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let body = line.split(['#', '%']).next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            let parse_id = |s: &str| {
                s.parse::<usize>().map_err(|_| LaplaxError::Parse {
                    line: line_no,
                    msg: format!("bad vertex id '{s}'"),
                })
            };
            if first && toks.len() == 2 {
                header = Some(parse_id(toks[0])?);
                first = false;
                continue;
            }
            first = false;
            if toks.len() != 3 {
                return Err(LaplaxError::Parse {
                    line: line_no,
                    msg: format!("expected 'u v w', got {} fields", toks.len()),
                });
            }
            let u = parse_id(toks[0])?;
            let v = parse_id(toks[1])?;
            let w: f64 = toks[2].parse().map_err(|_| LaplaxError::Parse {
                line: line_no,
                msg: format!("bad weight '{}'", toks[2]),
            })?;
            max_id = Some(max_id.map_or(u.max(v), |m: usize| m.max(u).max(v)));
            edges.push(Edge::new(u, v, w));
        }
        let n = header.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
        Self::new(n, edges)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {}", self.n, self.m())?;
        for e in &self.edges {
            writeln!(out, "{} {} {}", e.u, e.v, e.w)?;
        }
        Ok(())
    }
}
