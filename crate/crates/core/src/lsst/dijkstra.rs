use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::mmq::MonotoneMultiQueue;
use super::rounding::RoundedLengths;
use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;

/// Undirected graph whose edge lengths come from a small set of classes.
#[derive(Clone, Debug)]
pub struct LengthGraph {
    n: usize,
    offsets: Vec<usize>,
    /// `(neighbor, edge)` pairs grouped by vertex.
    adj: Vec<(usize, usize)>,
    ends: Vec<(usize, usize)>,
    class: Vec<usize>,
    class_values: Vec<f64>,
}

impl LengthGraph {
    pub fn new(n: usize, ends: Vec<(usize, usize)>, class: Vec<usize>, class_values: Vec<f64>) -> Result<Self> {
        if ends.len() != class.len() {
            return Err(LaplaxError::DimensionMismatch { expected: ends.len(), got: class.len() });
        }
        if let Some(&c) = class.iter().find(|&&c| c >= class_values.len()) {
            return Err(LaplaxError::InvalidParameter(format!("length class {c} out of range")));
        }
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in &ends {
            if u >= n || v >= n {
                return Err(LaplaxError::VertexOutOfRange { vertex: u.max(v), n });
            }
            deg[u + 1] += 1;
            deg[v + 1] += 1;
        }
        for i in 0..n {
            deg[i + 1] += deg[i];
        }
        let offsets = deg;
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0); 2 * ends.len()];
        for (e, &(u, v)) in ends.iter().enumerate() {
            adj[fill[u]] = (v, e);
            fill[u] += 1;
            adj[fill[v]] = (u, e);
            fill[v] += 1;
        }
        Ok(Self { n, offsets, adj, ends, class, class_values })
    }

    pub fn from_graph(g: &WeightedGraph, rounded: &RoundedLengths) -> Result<Self> {
        if rounded.len() != g.m() {
            return Err(LaplaxError::DimensionMismatch { expected: g.m(), got: rounded.len() });
        }
        let ends = g.edges().iter().map(|e| (e.u, e.v)).collect();
        Self::new(g.n(), ends, rounded.class.clone(), rounded.class_values.clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ends.len()
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn ends(&self, e: usize) -> (usize, usize) {
        self.ends[e]
    }

    pub fn class(&self, e: usize) -> usize {
        self.class[e]
    }

    pub fn length(&self, e: usize) -> f64 {
        self.class_values[self.class[e]]
    }

    pub fn class_values(&self) -> &[f64] {
        &self.class_values
    }
}

/// Shortest-path distances, parent links and settle order from one source.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// `(parent vertex, edge)` on a shortest path; `None` for the source and
    /// for unreachable vertices.
    pub parent: Vec<Option<(usize, usize)>>,
    /// Reachable vertices in the order they were settled.
    pub order: Vec<usize>,
}

/// Dijkstra driven by a [`MonotoneMultiQueue`] over the length classes.
/// Unreachable vertices keep distance `+inf`.
pub fn shortest_paths(g: &LengthGraph, source: usize) -> Result<ShortestPaths> {
    if source >= g.n {
        return Err(LaplaxError::VertexOutOfRange { vertex: source, n: g.n });
    }
    let mut q = MonotoneMultiQueue::new(&g.class_values, g.n)?;
    let mut dist = vec![f64::INFINITY; g.n];
    let mut parent = vec![None; g.n];
    let mut order = Vec::new();
    q.insert_source(source)?;
    dist[source] = 0.0;
    while let Some((u, du)) = q.find_min() {
        for &(v, e) in g.neighbors(u) {
            if q.is_deleted(v) {
                continue;
            }
            let c = g.class[e];
            let cand = du + g.class_values[c];
            if cand < dist[v] {
                if q.contains(v) {
                    q.decrease_key(v, c)?;
                } else {
                    q.insert(v, c)?;
                }
                dist[v] = cand;
                parent[v] = Some((u, e));
            }
        }
        q.delete_min()?;
        order.push(u);
    }
    Ok(ShortestPaths { dist, parent, order })
}

/// Distances from `source` in `g` under the rounded lengths.
pub fn dijkstra_k_distinct(g: &WeightedGraph, rounded: &RoundedLengths, source: usize) -> Result<Vec<f64>> {
    let lg = LengthGraph::from_graph(g, rounded)?;
    Ok(shortest_paths(&lg, source)?.dist)
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) struct MinItem(pub f64, pub usize);

impl Eq for MinItem {}

impl Ord for MinItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for MinItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Binary-heap Dijkstra over arbitrary per-edge lengths.
pub fn dijkstra_lengths(
    n: usize,
    neighbors: impl Fn(usize) -> Vec<(usize, usize)>,
    length: impl Fn(usize) -> f64,
    source: usize,
) -> ShortestPaths {
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut order = Vec::new();
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(MinItem(0.0, source));
    while let Some(MinItem(d, u)) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        order.push(u);
        for (v, e) in neighbors(u) {
            let cand = d + length(e);
            if !done[v] && cand < dist[v] {
                dist[v] = cand;
                parent[v] = Some((u, e));
                heap.push(MinItem(cand, v));
            }
        }
    }
    ShortestPaths { dist, parent, order }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::Edge;
    use crate::lsst::rounding::round_lengths;
    use rand::{Rng, SeedableRng};

    fn textbook(g: &WeightedGraph, lengths: &[f64], s: usize) -> Vec<f64> {
        dijkstra_lengths(g.n(), |u| g.neighbors(u).to_vec(), |e| lengths[e], s).dist
    }

    #[test]
    fn path_distances() {
        let g = generators::path(6).unwrap();
        let r = round_lengths(&vec![1.0; g.m()]);
        assert_eq!(dijkstra_k_distinct(&g, &r, 0).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn star_from_center_and_unreachable() {
        let g = WeightedGraph::new(5, vec![Edge::new(0, 1, 1.0), Edge::new(0, 2, 1.0), Edge::new(0, 3, 1.0)]).unwrap();
        let r = round_lengths(&[1.0, 3.0, 9.0]);
        let d = dijkstra_k_distinct(&g, &r, 0).unwrap();
        assert_eq!(&d[..4], &[0.0, 1.0, 3.0, 9.0]);
        assert!(d[4].is_infinite());
    }

    #[test]
    fn random_graphs_match_textbook() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for trial in 0..30 {
            let n = rng.gen_range(2..=60);
            let g = generators::random_connected(n, rng.gen_range(0..3 * n), 1.0, 1.0, trial).unwrap();
            let k = rng.gen_range(1..=8);
            let values: Vec<f64> = (0..k).map(|i| 3f64.powi(i as i32) * rng.gen_range(1.0..1.1)).collect();
            let lens: Vec<f64> = (0..g.m()).map(|_| values[rng.gen_range(0..k)]).collect();
            let r = round_lengths(&lens);
            assert_eq!(r.rounded, lens);
            let s = rng.gen_range(0..n);
            assert_eq!(dijkstra_k_distinct(&g, &r, s).unwrap(), textbook(&g, &lens, s));
        }
    }
}
