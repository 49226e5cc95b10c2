use std::collections::BTreeMap;

use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::laplacian::GraphLike;
use crate::tree::SpanningTree;

/// One weighted copy of an off-tree edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    /// Edge id in the graph the sample was drawn from.
    pub parent: usize,
}

/// Multigraph made of a weighted spanning tree and a list of off-tree samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGraph {
    n: usize,
    /// `(u, v, weight, parent edge id)`.
    tree: Vec<(usize, usize, f64, usize)>,
    /// Sorted by parent edge id.
    samples: Vec<Sample>,
    /// `(parent edge id, start)` for each group of samples; the group ends at
    /// the next start.
    groups: Vec<(usize, usize)>,
}

impl SampleGraph {
    pub fn new(n: usize, tree: Vec<(usize, usize, f64, usize)>, mut samples: Vec<Sample>) -> Result<Self> {
        if tree.len() + 1 != n.max(1) {
            return Err(LaplaxError::NotSpanning(format!("{} tree edges for {n} vertices", tree.len())));
        }
        for &(u, v, w, _) in &tree {
            check(n, u, v, w)?;
        }
        for s in &samples {
            check(n, s.u, s.v, s.w)?;
        }
        samples.sort_by_key(|s| s.parent);
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            if groups.last().map(|g| g.0) != Some(s.parent) {
                groups.push((s.parent, i));
            }
        }
        Ok(Self { n, tree, samples, groups })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tree_edges(&self) -> &[(usize, usize, f64, usize)] {
        &self.tree
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    /// Parent edge ids that received at least one sample.
    pub fn sampled_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.groups.iter().map(|g| g.0)
    }

    /// The samples `L_e` drawn for edge `e`.
    pub fn samples_of(&self, e: usize) -> &[Sample] {
        match self.groups.binary_search_by_key(&e, |g| g.0) {
            Ok(i) => {
                let end = self.groups.get(i + 1).map_or(self.samples.len(), |g| g.1);
                &self.samples[self.groups[i].1..end]
            }
            Err(_) => &[],
        }
    }

    /// Spanning tree `T_H` with the tree weights carried by this graph.
    pub fn tree(&self, root: usize) -> Result<SpanningTree> {
        let edges: Vec<(usize, usize, f64)> = self.tree.iter().map(|&(u, v, w, _)| (u, v, w)).collect();
        SpanningTree::from_weighted_edges(self.n, &edges, root)
    }

    /// Simple graph with parallel samples summed, plus tree flags per edge of
    /// the result. Tree edges keep their weight.
    pub fn flatten(&self) -> Result<(WeightedGraph, Vec<bool>)> {
        let mut merged: BTreeMap<(usize, usize), (f64, bool)> = BTreeMap::new();
        for &(u, v, w, _) in &self.tree {
            merged.insert((u.min(v), u.max(v)), (w, true));
        }
        for s in &self.samples {
            let key = (s.u.min(s.v), s.u.max(s.v));
            let entry = merged.entry(key).or_insert((0.0, false));
            if entry.1 {
                return Err(LaplaxError::InvalidParameter(format!("sample parallel to tree edge {key:?}")));
            }
            entry.0 += s.w;
        }
        let mut edges = Vec::with_capacity(merged.len());
        let mut flags = Vec::with_capacity(merged.len());
        for ((u, v), (w, t)) in merged {
            edges.push(Edge { u, v, w });
            flags.push(t);
        }
        Ok((WeightedGraph::from_valid(self.n, edges), flags))
    }
}

fn check(n: usize, u: usize, v: usize, w: f64) -> Result<()> {
    if u >= n || v >= n {
        return Err(LaplaxError::VertexOutOfRange { vertex: u.max(v), n });
    }
    if u == v {
        return Err(LaplaxError::SelfLoop(u));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(LaplaxError::BadWeight { u, v, w });
    }
    Ok(())
}

impl GraphLike for SampleGraph {
    fn vertex_count(&self) -> usize {
        self.n
    }

    fn for_each_edge<F: FnMut(usize, usize, f64)>(&self, mut f: F) {
        for &(u, v, w, _) in &self.tree {
            f(u, v, w);
        }
        for s in &self.samples {
            f(s.u, s.v, s.w);
        }
    }
}
