//! Deterministic test-corpus generators.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::rng::rng_from_seed;

/// `rows x cols` unit-weight grid, vertex `r * cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<WeightedGraph> {
    if rows < 2 || cols < 2 {
        return Err(LaplaxError::InvalidParameter("grid dimensions must be at least 2".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push(Edge::new(id(r, c), id(r, c + 1), 1.0));
            }
            if r + 1 < rows {
                edges.push(Edge::new(id(r, c), id(r + 1, c), 1.0));
            }
        }
    }
    WeightedGraph::new(rows * cols, edges)
}

/// Grid with wrap-around in both directions. Needs dimensions of at least 3
/// so the wrap edges do not duplicate grid edges.
pub fn torus(rows: usize, cols: usize) -> Result<WeightedGraph> {
    if rows < 3 || cols < 3 {
        return Err(LaplaxError::InvalidParameter("torus dimensions must be at least 3".into()));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            edges.push(Edge::new(id(r, c), id(r, (c + 1) % cols), 1.0));
            edges.push(Edge::new(id(r, c), id((r + 1) % rows, c), 1.0));
        }
    }
    WeightedGraph::new(rows * cols, edges)
}

pub fn ring(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(LaplaxError::InvalidParameter("ring needs at least 3 vertices".into()));
    }
    WeightedGraph::new(n, (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0)).collect())
}

pub fn path(n: usize) -> Result<WeightedGraph> {
    if n < 1 {
        return Err(LaplaxError::InvalidParameter("path needs at least 1 vertex".into()));
    }
    WeightedGraph::new(n, (1..n).map(|i| Edge::new(i - 1, i, 1.0)).collect())
}

pub fn star(leaves: usize) -> Result<WeightedGraph> {
    WeightedGraph::new(leaves + 1, (1..=leaves).map(|i| Edge::new(0, i, 1.0)).collect())
}

/// Uniform-ish random `d`-regular simple graph via the pairing model with
/// rejection. Requires `d >= 3`, `d < n` and `n * d` even.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<WeightedGraph> {
    if d < 3 || d >= n || (n * d) % 2 != 0 {
        return Err(LaplaxError::InvalidParameter(format!(
            "random-regular needs d >= 3, d < n and n*d even (n={n}, d={d})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    for _ in 0..10_000 {
        points.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut ok = true;
        for pair in points.chunks_exact(2) {
            let e = Edge::new(pair[0], pair[1], 1.0);
            if e.u == e.v || !seen.insert((e.u, e.v)) {
                ok = false;
                break;
            }
            edges.push(e);
        }
        if ok {
            edges.sort_by_key(|e| (e.u, e.v));
            let g = WeightedGraph::new(n, edges)?;
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(LaplaxError::InvalidParameter("random-regular sampling did not converge".into()))
}

/// Connected random graph: a random recursive tree plus `extra` distinct random
/// edges; weights drawn log-uniformly from `[w_lo, w_hi]`.
pub fn random_connected(n: usize, extra: usize, w_lo: f64, w_hi: f64, seed: u64) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(LaplaxError::InvalidParameter("need at least 2 vertices".into()));
    }
    if !(w_lo > 0.0 && w_hi >= w_lo) {
        return Err(LaplaxError::InvalidParameter("weight range must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let weight = |rng: &mut crate::rng::Rng64| {
        if w_hi == w_lo {
            w_lo
        } else {
            (rng.gen_range(w_lo.ln()..w_hi.ln())).exp()
        }
    };
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let e = Edge::new(perm[i], perm[j], weight(&mut rng));
        seen.insert((e.u, e.v));
        edges.push(e);
    }
    let max_extra = n * (n - 1) / 2 - (n - 1);
    let target = extra.min(max_extra);
    let mut added = 0;
    while added < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v {
            continue;
        }
        let e = Edge::new(u, v, weight(&mut rng));
        if seen.insert((e.u, e.v)) {
            edges.push(e);
            added += 1;
        }
    }
    WeightedGraph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_ring_sizes() {
        let g = grid(2, 2).unwrap();
        assert_eq!((g.n(), g.m()), (4, 4));
        let r = ring(5).unwrap();
        assert_eq!((r.n(), r.m()), (5, 5));
        assert!(r.is_connected());
        assert_eq!(torus(3, 4).unwrap().m(), 24);
    }

    #[test]
    fn random_regular_degrees() {
        let g = random_regular(10, 3, 1).unwrap();
        assert_eq!(g.m(), 15);
        assert!((0..10).all(|v| g.degree(v) == 3));
        assert_eq!(g, random_regular(10, 3, 1).unwrap());
        assert!(random_regular(9, 3, 1).is_err());
        assert!(random_regular(10, 2, 1).is_err());
    }

    #[test]
    fn random_connected_is_connected() {
        let g = random_connected(50, 80, 0.5, 4.0, 3).unwrap();
        assert!(g.is_connected());
        assert_eq!(g.m(), 49 + 80);
    }
}
