#![allow(dead_code)]

// Oracles shared by the integration tests. None of them call into the
// library's own tree, queue or factorization code.

pub mod dense;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use laplax::WeightedGraph;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense Laplacian of an edge list.
pub fn dense_laplacian(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> dense::Dense {
    let mut a = vec![vec![0.0; n]; n];
    for (u, v, w) in edges {
        a[u][u] += w;
        a[v][v] += w;
        a[u][v] -= w;
        a[v][u] -= w;
    }
    a
}

pub fn graph_dense(g: &WeightedGraph) -> dense::Dense {
    dense_laplacian(g.n(), g.edges().iter().map(|e| (e.u, e.v, e.w)))
}

/// Tree rooted by breadth-first search over an explicit edge list.
pub struct RootedTree {
    parent: Vec<usize>,
    resistance: Vec<f64>,
    depth: Vec<usize>,
}

impl RootedTree {
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        assert_eq!(edges.len() + 1, n.max(1), "not a tree edge count");
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        let mut parent = vec![usize::MAX; n];
        let mut resistance = vec![0.0; n];
        let mut depth = vec![0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, w) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    resistance[y] = 1.0 / w;
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "tree edges do not span");
        Self { parent, resistance, depth }
    }

    /// Resistance of the tree path between `u` and `v`.
    pub fn path_resistance(&self, mut u: usize, mut v: usize) -> f64 {
        let mut r = 0.0;
        while self.depth[u] > self.depth[v] {
            r += self.resistance[u];
            u = self.parent[u];
        }
        while self.depth[v] > self.depth[u] {
            r += self.resistance[v];
            v = self.parent[v];
        }
        while u != v {
            r += self.resistance[u] + self.resistance[v];
            u = self.parent[u];
            v = self.parent[v];
        }
        r
    }
}

/// Sum over off-tree edges of `w(e)` times the tree path resistance.
pub fn off_tree_stretch(g: &WeightedGraph, in_tree: &[bool]) -> (f64, f64, usize) {
    let tree_edges: Vec<_> =
        g.edges().iter().zip(in_tree).filter(|(_, &t)| t).map(|(e, _)| (e.u, e.v, e.w)).collect();
    let t = RootedTree::new(g.n(), &tree_edges);
    let mut total = 0.0;
    let mut max = 0.0f64;
    let mut count = 0;
    for (e, &inside) in g.edges().iter().zip(in_tree) {
        if !inside {
            let s = e.w * t.path_resistance(e.u, e.v);
            total += s;
            max = max.max(s);
            count += 1;
        }
    }
    (total, max, count)
}

/// Spanning tree from Kruskal on a uniformly shuffled edge order.
pub fn random_spanning_tree(g: &WeightedGraph, seed: u64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..g.m()).collect();
    order.shuffle(&mut rng(seed));
    let mut root: Vec<usize> = (0..g.n()).collect();
    fn find(root: &mut [usize], mut x: usize) -> usize {
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    let mut in_tree = vec![false; g.m()];
    for e in order {
        let edge = g.edge(e);
        let (a, b) = (find(&mut root, edge.u), find(&mut root, edge.v));
        if a != b {
            root[a] = b;
            in_tree[e] = true;
        }
    }
    in_tree
}

/// Binary-heap Dijkstra with lazy deletion.
pub fn textbook_dijkstra(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, l) in edges {
        adj[u].push((v, l));
        adj[v].push((u, l));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((bits, x))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[x] {
            continue;
        }
        for &(y, l) in &adj[x] {
            let nd = d + l;
            if nd < dist[y] {
                dist[y] = nd;
                heap.push(Reverse((nd.to_bits(), y)));
            }
        }
    }
    dist
}
