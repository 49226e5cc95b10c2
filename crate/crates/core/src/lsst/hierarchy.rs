use rand::Rng;

use super::cuts::Scratch;
use super::dijkstra::{dijkstra_lengths, shortest_paths, LengthGraph};
use super::rounding::round_lengths;
use super::star::partition;
use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::tree::{DisjointSets, SpanningTree};

#[derive(Clone, Debug, PartialEq)]
pub struct LsstConfig {
    pub seed: u64,
    /// Pieces up to this size (and `brute_force_max_edges`) get an exact
    /// minimum-stretch tree.
    pub brute_force_max_vertices: usize,
    pub brute_force_max_edges: usize,
    /// Pieces up to this size get a shortest-path tree.
    pub leaf_max_vertices: usize,
}

impl Default for LsstConfig {
    fn default() -> Self {
        Self { seed: 0, brute_force_max_vertices: 8, brute_force_max_edges: 12, leaf_max_vertices: 16 }
    }
}

/// Low-stretch spanning tree of a connected graph, built by recursive star
/// partitions on lengths `1 / w`. The root is a seeded random vertex.
pub fn low_stretch_tree(g: &WeightedGraph, seed: u64) -> Result<SpanningTree> {
    low_stretch_tree_with(g, &LsstConfig { seed, ..LsstConfig::default() })
}

struct Piece {
    vertices: Vec<usize>,
    center: usize,
}

pub fn low_stretch_tree_with(g: &WeightedGraph, cfg: &LsstConfig) -> Result<SpanningTree> {
    let n = g.n();
    if n == 0 {
        return Err(LaplaxError::InvalidParameter("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(LaplaxError::Disconnected);
    }
    let mut rng = rng_from_seed(derive_seed(cfg.seed, tags::LSST_CENTER));
    let root = rng.gen_range(0..n);
    let lengths: Vec<f64> = g.edges().iter().map(|e| 1.0 / e.w).collect();
    let floor_factor = (n as f64).powi(-3);
    let mut tree_edges = Vec::with_capacity(n - 1);
    let mut local = vec![usize::MAX; n];
    let mut stack = vec![Piece { vertices: (0..n).collect(), center: root }];
    while let Some(piece) = stack.pop() {
        let k = piece.vertices.len();
        if k <= 1 {
            continue;
        }
        for (i, &v) in piece.vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut ends = Vec::new();
        let mut host = Vec::new();
        for (i, &v) in piece.vertices.iter().enumerate() {
            for &(w, e) in g.neighbors(v) {
                let j = local[w];
                if j != usize::MAX && i < j {
                    ends.push((i, j));
                    host.push(e);
                }
            }
        }
        let c = local[piece.center];
        if k <= cfg.brute_force_max_vertices && ends.len() <= cfg.brute_force_max_edges {
            let w: Vec<f64> = host.iter().map(|&e| g.edge(e).w).collect();
            tree_edges.extend(min_stretch_tree(k, &ends, &w).into_iter().map(|i| host[i]));
        } else {
            let mut adj = vec![Vec::new(); k];
            for (i, &(a, b)) in ends.iter().enumerate() {
                adj[a].push((b, i));
                adj[b].push((a, i));
            }
            let exact = dijkstra_lengths(k, |v| adj[v].clone(), |i| lengths[host[i]], c);
            if k <= cfg.leaf_max_vertices {
                tree_edges.extend(exact.parent.iter().flatten().map(|&(_, i)| host[i]));
            } else {
                let r = exact.dist.iter().cloned().fold(0.0, f64::max);
                let clamped: Vec<f64> = host.iter().map(|&e| lengths[e].clamp(r * floor_factor, r)).collect();
                let rounded = round_lengths(&clamped);
                let lg = LengthGraph::new(k, ends, rounded.class, rounded.class_values)?;
                let sp = shortest_paths(&lg, c)?;
                let mut scratch = Scratch::new(k);
                let star = partition(&lg, c, &sp, &mut scratch)?;
                tree_edges.extend(star.bridges.iter().map(|&i| host[i]));
                for (part, &anchor) in star.parts.iter().zip(&star.anchors) {
                    stack.push(Piece {
                        vertices: part.iter().map(|&i| piece.vertices[i]).collect(),
                        center: piece.vertices[anchor],
                    });
                }
            }
        }
        for &v in &piece.vertices {
            local[v] = usize::MAX;
        }
    }
    SpanningTree::from_edge_ids(g, &tree_edges, root)
}

/// Exhaustive search over spanning trees of a small connected graph for the
/// one with least total stretch. Returns edge indices.
pub fn min_stretch_tree(n: usize, ends: &[(usize, usize)], w: &[f64]) -> Vec<usize> {
    let mut best = (f64::INFINITY, Vec::new());
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    search(n, ends, w, 0, &mut chosen, &mut best);
    best.1
}

fn search(n: usize, ends: &[(usize, usize)], w: &[f64], next: usize, chosen: &mut Vec<usize>, best: &mut (f64, Vec<usize>)) {
    if chosen.len() + 1 == n {
        let s = tree_stretch(n, ends, w, chosen);
        if s < best.0 {
            *best = (s, chosen.clone());
        }
        return;
    }
    if ends.len() - next < n - 1 - chosen.len() {
        return;
    }
    let mut ds = DisjointSets::new(n);
    for &i in chosen.iter() {
        ds.union(ends[i].0, ends[i].1);
    }
    let (a, b) = ends[next];
    if ds.find(a) != ds.find(b) {
        chosen.push(next);
        search(n, ends, w, next + 1, chosen, best);
        chosen.pop();
    }
    search(n, ends, w, next + 1, chosen, best);
}

fn tree_stretch(n: usize, ends: &[(usize, usize)], w: &[f64], tree: &[usize]) -> f64 {
    let mut adj = vec![Vec::new(); n];
    for &i in tree {
        let (a, b) = ends[i];
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut parent = vec![(usize::MAX, 0.0); n];
    let mut depth = vec![0usize; n];
    let mut stack = vec![0];
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &(u, i) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                parent[u] = (v, 1.0 / w[i]);
                depth[u] = depth[v] + 1;
                stack.push(u);
            }
        }
    }
    let mut in_tree = vec![false; ends.len()];
    tree.iter().for_each(|&i| in_tree[i] = true);
    let mut total = 0.0;
    for (i, &(mut a, mut b)) in ends.iter().enumerate() {
        if in_tree[i] {
            continue;
        }
        let mut r = 0.0;
        while a != b {
            if depth[a] >= depth[b] {
                r += parent[a].1;
                a = parent[a].0;
            } else {
                r += parent[b].1;
                b = parent[b].0;
            }
        }
        total += w[i] * r;
    }
    total
}
