use std::collections::BinaryHeap;

use super::dijkstra::{shortest_paths, LengthGraph, MinItem};
use crate::error::{LaplaxError, Result};
use crate::numeric::CompensatedSum;

/// Additive constant in the cone-cut volume terms.
pub const TAU: f64 = 1.0;

/// Cone lengths of an edge are at most twice its length.
pub const CONE_FACTOR: f64 = 2.0;

/// Both sides of the inequality a cut search established, recomputed from
/// the returned vertex set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutCertificate {
    pub cost: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    /// Vertices inside the cut, in increasing distance order.
    pub vertices: Vec<usize>,
    pub radius: f64,
    /// Edges with at least one endpoint inside.
    pub volume: usize,
    /// Edges with both endpoints inside the radius-`r_min` set.
    pub inner_volume: usize,
    pub certificate: CutCertificate,
}

/// Reusable per-vertex buffers so repeated cuts cost time proportional to the
/// explored region rather than the whole graph.
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    gen: u32,
    inside: Vec<u32>,
    seen: Vec<u32>,
    settled: Vec<u32>,
    cd: Vec<f64>,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Self { gen: 0, inside: vec![0; n], seen: vec![0; n], settled: vec![0; n], cd: vec![0.0; n] }
    }

    fn bump(&mut self) -> u32 {
        if self.gen == u32::MAX {
            self.inside.iter_mut().for_each(|x| *x = 0);
            self.seen.iter_mut().for_each(|x| *x = 0);
            self.settled.iter_mut().for_each(|x| *x = 0);
            self.gen = 0;
        }
        self.gen += 1;
        self.gen
    }
}

fn ball_bound(volume: usize, m: usize, width: f64) -> f64 {
    (volume as f64 + 1.0) * ((m as f64) + 1.0).log2() / width
}

fn cone_bound(volume: usize, inner: usize, m: usize, width: f64) -> f64 {
    let log = ((m as f64 + TAU) / (inner as f64 + TAU)).log2().max(1.0);
    CONE_FACTOR * (volume as f64 + TAU) / width * log
}

/// Exact boundary cost and volumes of `set` inside the active subgraph.
fn measure(g: &LengthGraph, active: &dyn Fn(usize) -> bool, set: &[usize], inner_set: &[usize], s: &mut Scratch) -> (f64, usize, usize) {
    let gen = s.bump();
    for &v in set {
        s.inside[v] = gen;
    }
    let mut cost = CompensatedSum::new();
    let mut touched = 0usize;
    for &v in set {
        for &(w, e) in g.neighbors(v) {
            if !active(w) {
                continue;
            }
            if s.inside[w] != gen {
                cost.add(1.0 / g.length(e));
                touched += 1;
            } else if v < w {
                touched += 1;
            }
        }
    }
    let gen = s.bump();
    for &v in inner_set {
        s.inside[v] = gen;
    }
    let mut inner = 0;
    for &v in inner_set {
        for &(w, _) in g.neighbors(v) {
            if v < w && active(w) && s.inside[w] == gen {
                inner += 1;
            }
        }
    }
    (cost.value(), touched, inner)
}

/// Grows the set along `keyed` (sorted by key) and stops at the first radius
/// in `[r_min, r_max)` whose boundary cost meets `bound(volume, inner)`.
/// Returns the number of vertices taken and the radius. When no radius
/// qualifies it returns the one with the best cost/bound ratio.
fn scan(
    g: &LengthGraph,
    active: &dyn Fn(usize) -> bool,
    keyed: &[(f64, usize)],
    r_min: f64,
    r_max: f64,
    bound: &dyn Fn(usize, usize) -> f64,
    s: &mut Scratch,
) -> (usize, f64) {
    let gen = s.bump();
    let mut cost = 0.0;
    let mut volume = 0usize;
    let mut internal = 0usize;
    let mut i = 0;
    let add = |v: usize, s: &mut Scratch, cost: &mut f64, volume: &mut usize, internal: &mut usize| {
        s.inside[v] = gen;
        for &(w, e) in g.neighbors(v) {
            if !active(w) {
                continue;
            }
            if s.inside[w] == gen {
                *cost -= 1.0 / g.length(e);
                *internal += 1;
            } else {
                *cost += 1.0 / g.length(e);
                *volume += 1;
            }
        }
    };
    while i < keyed.len() && keyed[i].0 <= r_min {
        add(keyed[i].1, s, &mut cost, &mut volume, &mut internal);
        i += 1;
    }
    let inner = internal;
    let mut r = r_min;
    let mut best = (f64::INFINITY, i, r);
    loop {
        let b = bound(volume, inner);
        let c = cost.max(0.0);
        if c <= b {
            return (i, r);
        }
        if c / b < best.0 {
            best = (c / b, i, r);
        }
        if i == keyed.len() || keyed[i].0 >= r_max {
            return (best.1, best.2);
        }
        r = keyed[i].0;
        while i < keyed.len() && keyed[i].0 <= r {
            add(keyed[i].1, s, &mut cost, &mut volume, &mut internal);
            i += 1;
        }
    }
}

fn check_range(r_min: f64, r_max: f64) -> Result<()> {
    if !(r_min >= 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(LaplaxError::InvalidParameter(format!("need 0 <= r_min < r_max, got [{r_min}, {r_max})")));
    }
    Ok(())
}

/// Ball cut given precomputed distances from the center and their settle
/// order (increasing distance).
pub fn ball_cut_with(g: &LengthGraph, dist: &[f64], order: &[usize], r_min: f64, r_max: f64, s: &mut Scratch) -> Result<Cut> {
    check_range(r_min, r_max)?;
    let keyed: Vec<(f64, usize)> = order.iter().map(|&v| (dist[v], v)).take_while(|&(d, _)| d < r_max).collect();
    let m = g.m();
    let all = |_: usize| true;
    let (count, radius) = scan(g, &all, &keyed, r_min, r_max, &|vol, _| ball_bound(vol, m, r_max - r_min), s);
    let vertices: Vec<usize> = keyed[..count].iter().map(|&(_, v)| v).collect();
    let inner_set: Vec<usize> = keyed.iter().take_while(|&&(d, _)| d <= r_min).map(|&(_, v)| v).collect();
    let (cost, volume, inner_volume) = measure(g, &all, &vertices, &inner_set, s);
    let bound = ball_bound(volume, m, r_max - r_min);
    Ok(Cut { vertices, radius, volume, inner_volume, certificate: certificate(cost, bound) })
}

/// Ball `{v : d(center, v) <= r}` for some `r` in `[r_min, r_max)` with
/// `cost(boundary) <= (vol + 1) log2(m + 1) / (r_max - r_min)`.
pub fn ball_cut(g: &LengthGraph, center: usize, r_min: f64, r_max: f64) -> Result<Cut> {
    let sp = shortest_paths(g, center)?;
    let mut s = Scratch::new(g.n());
    ball_cut_with(g, &sp.dist, &sp.order, r_min, r_max, &mut s)
}

fn certificate(cost: f64, bound: f64) -> CutCertificate {
    CutCertificate { cost, bound, holds: cost <= bound * (1.0 + 1e-9) }
}

/// Cone cut over the active vertices. `dist` holds distances from the star
/// center; the cone length of `u -> v` is `l(u,v) - (dist[v] - dist[u])`
/// floored at zero. `m` is the edge count used in the certificate's log term.
#[allow(clippy::too_many_arguments)]
pub fn cone_cut_with(
    g: &LengthGraph,
    dist: &[f64],
    active: &dyn Fn(usize) -> bool,
    apex: &[usize],
    r_min: f64,
    r_max: f64,
    m: usize,
    s: &mut Scratch,
) -> Result<Cut> {
    check_range(r_min, r_max)?;
    let gen = s.bump();
    let mut heap = BinaryHeap::new();
    for &a in apex {
        if a >= g.n() {
            return Err(LaplaxError::VertexOutOfRange { vertex: a, n: g.n() });
        }
        if s.seen[a] != gen {
            s.seen[a] = gen;
            s.cd[a] = 0.0;
            heap.push(MinItem(0.0, a));
        }
    }
    let mut keyed = Vec::new();
    while let Some(MinItem(d, u)) = heap.pop() {
        if s.settled[u] == gen || d > s.cd[u] {
            continue;
        }
        if d >= r_max {
            break;
        }
        s.settled[u] = gen;
        keyed.push((d, u));
        for &(v, e) in g.neighbors(u) {
            if !active(v) || s.settled[v] == gen {
                continue;
            }
            let rc = (g.length(e) - (dist[v] - dist[u])).max(0.0);
            let cand = d + rc;
            if s.seen[v] != gen || cand < s.cd[v] {
                s.seen[v] = gen;
                s.cd[v] = cand;
                heap.push(MinItem(cand, v));
            }
        }
    }
    let width = r_max - r_min;
    let (count, radius) = scan(g, active, &keyed, r_min, r_max, &|vol, inner| cone_bound(vol, inner, m, width), s);
    let vertices: Vec<usize> = keyed[..count].iter().map(|&(_, v)| v).collect();
    let inner_set: Vec<usize> = keyed.iter().take_while(|&&(d, _)| d <= r_min).map(|&(_, v)| v).collect();
    let (cost, volume, inner_volume) = measure(g, active, &vertices, &inner_set, s);
    let bound = cone_bound(volume, inner_volume, m, width);
    Ok(Cut { vertices, radius, volume, inner_volume, certificate: certificate(cost, bound) })
}

/// Cone cut on the whole graph with cone distances relative to distances
/// from `center`.
pub fn cone_cut(g: &LengthGraph, center: usize, apex: &[usize], r_min: f64, r_max: f64) -> Result<Cut> {
    let sp = shortest_paths(g, center)?;
    let mut s = Scratch::new(g.n());
    let all = |_: usize| true;
    cone_cut_with(g, &sp.dist, &all, apex, r_min, r_max, g.m(), &mut s)
}
