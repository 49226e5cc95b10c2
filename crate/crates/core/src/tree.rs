//! Rooted spanning trees, offline LCA and stretch accounting.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;
use crate::numeric::CompensatedSum;

/// Rooted spanning tree over `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    root: usize,
    parent: Vec<usize>,
    parent_weight: Vec<f64>,
    depth: Vec<usize>,
    /// Vertices in BFS order from the root.
    order: Vec<usize>,
    /// Sum of reciprocal weights from the root.
    root_resistance: Vec<f64>,
    /// Membership of host-graph edges, empty when built without a host.
    in_tree: Vec<bool>,
    /// Host edge id of the edge to the parent (`usize::MAX` at the root or without a host).
    parent_edge: Vec<usize>,
}

impl SpanningTree {
    /// Tree made of the host edges `edge_ids`.
    pub fn from_edge_ids(g: &WeightedGraph, edge_ids: &[usize], root: usize) -> Result<Self> {
        let edges: Vec<(usize, usize, f64)> = edge_ids
            .iter()
            .map(|&id| {
                let e = g.edge(id);
                (e.u, e.v, e.w)
            })
            .collect();
        let mut t = Self::build(g.n(), &edges, Some(edge_ids), root)?;
        t.in_tree = vec![false; g.m()];
        for &id in edge_ids {
            t.in_tree[id] = true;
        }
        Ok(t)
    }

    /// Tree from membership flags over the host edge list.
    pub fn from_flags(g: &WeightedGraph, in_tree: &[bool], root: usize) -> Result<Self> {
        if in_tree.len() != g.m() {
            return Err(LaplaxError::DimensionMismatch { expected: g.m(), got: in_tree.len() });
        }
        let ids: Vec<usize> = (0..g.m()).filter(|&i| in_tree[i]).collect();
        Self::from_edge_ids(g, &ids, root)
    }

    /// Tree from an explicit list of weighted edges (no host graph).
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, f64)], root: usize) -> Result<Self> {
        Self::build(n, edges, None, root)
    }

    fn build(n: usize, edges: &[(usize, usize, f64)], ids: Option<&[usize]>, root: usize) -> Result<Self> {
        if n == 0 {
            return Err(LaplaxError::NotSpanning("empty vertex set".into()));
        }
        if root >= n {
            return Err(LaplaxError::VertexOutOfRange { vertex: root, n });
        }
        if edges.len() != n - 1 {
            return Err(LaplaxError::NotSpanning(format!("{} edges for {} vertices", edges.len(), n)));
        }
        let mut adj: Vec<Vec<(usize, f64, usize)>> = vec![Vec::new(); n];
        for (k, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(LaplaxError::VertexOutOfRange { vertex: u.max(v), n });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(LaplaxError::BadWeight { u, v, w });
            }
            let id = ids.map_or(usize::MAX, |ids| ids[k]);
            adj[u].push((v, w, id));
            adj[v].push((u, w, id));
        }
        let mut parent = vec![usize::MAX; n];
        let mut parent_weight = vec![0.0; n];
        let mut parent_edge = vec![usize::MAX; n];
        let mut depth = vec![0usize; n];
        let mut root_resistance = vec![0.0; n];
        let mut order = Vec::with_capacity(n);
        parent[root] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            order.push(x);
            for &(y, w, id) in &adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    parent_weight[y] = w;
                    parent_edge[y] = id;
                    depth[y] = depth[x] + 1;
                    root_resistance[y] = root_resistance[x] + 1.0 / w;
                    queue.push_back(y);
                }
            }
        }
        if order.len() != n {
            return Err(LaplaxError::NotSpanning(format!("tree reaches {} of {} vertices", order.len(), n)));
        }
        Ok(Self {
            root,
            parent,
            parent_weight,
            depth,
            order,
            root_resistance,
            in_tree: Vec::new(),
            parent_edge,
        })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> usize {
        self.parent[v]
    }

    pub fn parent_weight(&self, v: usize) -> f64 {
        self.parent_weight[v]
    }

    pub fn parent_edge(&self, v: usize) -> Option<usize> {
        (self.parent_edge[v] != usize::MAX).then_some(self.parent_edge[v])
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    pub fn in_tree(&self) -> &[bool] {
        &self.in_tree
    }

    /// Host edge ids of the tree edges, ascending.
    pub fn edge_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.parent_edge.iter().copied().filter(|&e| e != usize::MAX).collect();
        ids.sort_unstable();
        ids
    }

    /// `(child, parent, weight)` for every tree edge.
    pub fn tree_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).filter(move |&v| v != self.root).map(move |v| (v, self.parent[v], self.parent_weight[v]))
    }

    /// Resistance between the root and `v` along the tree.
    pub fn root_resistance(&self, v: usize) -> f64 {
        self.root_resistance[v]
    }

    /// Tree-path resistance by walking parent pointers; O(depth).
    pub fn path_resistance_walk(&self, mut u: usize, mut v: usize) -> f64 {
        let mut acc = CompensatedSum::new();
        while self.depth[u] > self.depth[v] {
            acc.add(1.0 / self.parent_weight[u]);
            u = self.parent[u];
        }
        while self.depth[v] > self.depth[u] {
            acc.add(1.0 / self.parent_weight[v]);
            v = self.parent[v];
        }
        while u != v {
            acc.add(1.0 / self.parent_weight[u]);
            acc.add(1.0 / self.parent_weight[v]);
            u = self.parent[u];
            v = self.parent[v];
        }
        acc.value()
    }

    /// Answers LCA queries with Tarjan's offline algorithm in one DFS.
    pub fn offline_lca(&self, queries: &[(usize, usize)]) -> Vec<usize> {
        let n = self.n();
        let mut children_ptr = vec![0usize; n + 1];
        for v in 0..n {
            if v != self.root {
                children_ptr[self.parent[v] + 1] += 1;
            }
        }
        for v in 0..n {
            children_ptr[v + 1] += children_ptr[v];
        }
        let mut fill = children_ptr.clone();
        let mut children = vec![0usize; n.saturating_sub(1)];
        for &v in &self.order {
            if v != self.root {
                let p = self.parent[v];
                children[fill[p]] = v;
                fill[p] += 1;
            }
        }

        let mut q_ptr = vec![0usize; n + 1];
        for &(u, v) in queries {
            q_ptr[u + 1] += 1;
            q_ptr[v + 1] += 1;
        }
        for v in 0..n {
            q_ptr[v + 1] += q_ptr[v];
        }
        let mut q_fill = q_ptr.clone();
        let mut q_list = vec![(0usize, 0usize); 2 * queries.len()];
        for (k, &(u, v)) in queries.iter().enumerate() {
            q_list[q_fill[u]] = (v, k);
            q_fill[u] += 1;
            q_list[q_fill[v]] = (u, k);
            q_fill[v] += 1;
        }

        let mut dsu = DisjointSets::new(n);
        let mut ancestor: Vec<usize> = (0..n).collect();
        let mut done = vec![false; n];
        let mut answer = vec![usize::MAX; queries.len()];
        // (vertex, next child index)
        let mut stack = vec![(self.root, children_ptr[self.root])];
        while let Some(top) = stack.len().checked_sub(1) {
            let (x, next) = stack[top];
            if next < children_ptr[x + 1] {
                let c = children[next];
                stack[top].1 += 1;
                stack.push((c, children_ptr[c]));
                continue;
            }
            done[x] = true;
            for &(y, k) in &q_list[q_ptr[x]..q_ptr[x + 1]] {
                if done[y] && answer[k] == usize::MAX {
                    answer[k] = ancestor[dsu.find(y)];
                }
            }
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                dsu.union(p, x);
                let r = dsu.find(p);
                ancestor[r] = p;
            }
        }
        answer
    }

    /// Tree-path resistances for a batch of vertex pairs via offline LCA.
    pub fn path_resistances(&self, pairs: &[(usize, usize)]) -> Vec<f64> {
        let lca = self.offline_lca(pairs);
        pairs
            .iter()
            .zip(lca)
            .map(|(&(u, v), a)| {
                let r = self.root_resistance[u] + self.root_resistance[v] - 2.0 * self.root_resistance[a];
                r.max(0.0)
            })
            .collect()
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Stretch of the off-tree edges of a graph (or of the samples of a graph of samples).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchReport {
    /// `(edge or sample index, stretch)`.
    pub per_edge: Vec<(usize, f64)>,
    pub total: f64,
    pub average: f64,
    pub max: f64,
}

impl StretchReport {
    pub fn from_values(per_edge: Vec<(usize, f64)>) -> Self {
        let mut acc = CompensatedSum::new();
        let mut max = 0.0f64;
        for &(_, s) in &per_edge {
            acc.add(s);
            max = max.max(s);
        }
        let total = acc.value();
        let average = if per_edge.is_empty() { 0.0 } else { total / per_edge.len() as f64 };
        Self { per_edge, total, average, max }
    }
}

/// Stretch `w * R_T(u, v)` for each `(u, v, w)`.
pub fn stretches(tree: &SpanningTree, items: &[(usize, usize, f64)]) -> Vec<f64> {
    let pairs: Vec<(usize, usize)> = items.iter().map(|&(u, v, _)| (u, v)).collect();
    tree.path_resistances(&pairs).into_iter().zip(items).map(|(r, &(_, _, w))| w * r).collect()
}

/// Off-tree stretch of `g` with respect to a tree built on `g`.
pub fn total_stretch(g: &WeightedGraph, tree: &SpanningTree) -> Result<StretchReport> {
    if tree.n() != g.n() {
        return Err(LaplaxError::NotSpanning(format!("tree has {} vertices, graph {}", tree.n(), g.n())));
    }
    if tree.in_tree().len() != g.m() {
        return Err(LaplaxError::NotSpanning("tree was not built on this graph".into()));
    }
    let ids: Vec<usize> = (0..g.m()).filter(|&i| !tree.in_tree()[i]).collect();
    let items: Vec<(usize, usize, f64)> = ids
        .iter()
        .map(|&i| {
            let e = g.edge(i);
            (e.u, e.v, e.w)
        })
        .collect();
    let s = stretches(tree, &items);
    Ok(StretchReport::from_values(ids.into_iter().zip(s).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    #[test]
    fn triangle_stretch() {
        let g = WeightedGraph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0)])
            .unwrap();
        let t = SpanningTree::from_edge_ids(&g, &[0, 1], 0).unwrap();
        let r = total_stretch(&g, &t).unwrap();
        assert_eq!(r.per_edge, vec![(2, 2.0)]);
        assert_eq!(r.total, 2.0);
    }

    #[test]
    fn weighted_stretch_formula() {
        // path weights (1, 2), off-tree weight 4: 4 * (1 + 1/2) = 6
        let g = WeightedGraph::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 2.0), Edge::new(0, 2, 4.0)])
            .unwrap();
        let t = SpanningTree::from_edge_ids(&g, &[0, 1], 2).unwrap();
        assert_eq!(total_stretch(&g, &t).unwrap().total, 6.0);
    }

    #[test]
    fn rejects_non_spanning() {
        let g = WeightedGraph::new(
            4,
            vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(0, 2, 1.0), Edge::new(2, 3, 1.0)],
        )
        .unwrap();
        assert!(matches!(SpanningTree::from_edge_ids(&g, &[0, 1, 2], 0), Err(LaplaxError::NotSpanning(_))));
        assert!(matches!(SpanningTree::from_edge_ids(&g, &[0, 1], 0), Err(LaplaxError::NotSpanning(_))));
    }

    #[test]
    fn lca_on_small_tree() {
        //      0
        //     / \
        //    1   2
        //   / \
        //  3   4
        let t = SpanningTree::from_weighted_edges(5, &[(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (1, 4, 1.0)], 0).unwrap();
        let l = t.offline_lca(&[(3, 4), (3, 2), (1, 4), (2, 2), (4, 3)]);
        assert_eq!(l, vec![1, 0, 1, 2, 1]);
    }
}
