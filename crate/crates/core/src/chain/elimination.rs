use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::tree::SpanningTree;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum EliminationStep {
    /// Leaf `v` hanging off `u` by an edge of weight `w`.
    Degree1 { v: usize, u: usize, w: f64 },
    /// Path `u1 - v - u2` (`u1 < u2`) replaced by one edge of weight
    /// `(1/w1 + 1/w2)^-1 + w_existing`.
    Degree2 { v: usize, u1: usize, u2: usize, w1: f64, w2: f64, w_existing: f64 },
}

impl EliminationStep {
    pub fn vertex(&self) -> usize {
        match *self {
            EliminationStep::Degree1 { v, .. } | EliminationStep::Degree2 { v, .. } => v,
        }
    }
}

/// Ordered log of eliminations from a graph `H` on `n` vertices down to the
/// graph on the `kept` vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationRecord {
    pub n: usize,
    pub steps: Vec<EliminationStep>,
    /// Original id of each vertex of the reduced graph.
    pub kept: Vec<usize>,
}

impl EliminationRecord {
    /// No eliminations on `n` vertices.
    pub fn identity(n: usize) -> Self {
        Self { n, steps: Vec::new(), kept: (0..n).collect() }
    }

    pub fn reduced_n(&self) -> usize {
        self.kept.len()
    }

    /// Eliminates the steps from a right-hand side on `H`, returning the
    /// right-hand side on the kept vertices and the per-vertex work vector
    /// that [`Self::back_substitute`] needs.
    pub fn forward(&self, b: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut work = vec![0.0; self.n];
        let mut reduced = vec![0.0; self.kept.len()];
        self.forward_into(b, &mut work, &mut reduced)?;
        Ok((reduced, work))
    }

    /// In-place [`Self::forward`].
    pub fn forward_into(&self, b: &[f64], work: &mut [f64], reduced: &mut [f64]) -> Result<()> {
        self.check_len(b.len(), self.n)?;
        self.check_len(work.len(), self.n)?;
        self.check_len(reduced.len(), self.kept.len())?;
        work.copy_from_slice(b);
        for step in &self.steps {
            match *step {
                EliminationStep::Degree1 { v, u, .. } => work[u] += work[v],
                EliminationStep::Degree2 { v, u1, u2, w1, w2, .. } => {
                    let s = w1 + w2;
                    let bv = work[v];
                    work[u1] += w1 / s * bv;
                    work[u2] += w2 / s * bv;
                }
            }
        }
        for (r, &v) in reduced.iter_mut().zip(&self.kept) {
            *r = work[v];
        }
        Ok(())
    }

    /// Extends a solution on the reduced graph to all vertices, replaying the
    /// steps in reverse.
    pub fn back_substitute(&self, x_reduced: &[f64], work: &[f64]) -> Result<Vec<f64>> {
        let mut x = vec![0.0; self.n];
        self.back_substitute_into(x_reduced, work, &mut x)?;
        Ok(x)
    }

    /// In-place [`Self::back_substitute`].
    pub fn back_substitute_into(&self, x_reduced: &[f64], work: &[f64], x: &mut [f64]) -> Result<()> {
        self.check_len(x_reduced.len(), self.kept.len())?;
        self.check_len(work.len(), self.n)?;
        self.check_len(x.len(), self.n)?;
        for (i, &v) in self.kept.iter().enumerate() {
            x[v] = x_reduced[i];
        }
        for step in self.steps.iter().rev() {
            match *step {
                EliminationStep::Degree1 { v, u, w } => x[v] = x[u] + work[v] / w,
                EliminationStep::Degree2 { v, u1, u2, w1, w2, .. } => {
                    x[v] = (w1 * x[u1] + w2 * x[u2] + work[v]) / (w1 + w2);
                }
            }
        }
        Ok(())
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got == expected {
            Ok(())
        } else {
            Err(LaplaxError::DimensionMismatch { expected, got })
        }
    }

    /// Replays the record on `h`, checking every step against the evolving
    /// graph, and returns the reduced graph.
    pub fn replay(&self, h: &WeightedGraph) -> Result<WeightedGraph> {
        if h.n() != self.n {
            return Err(LaplaxError::DimensionMismatch { expected: self.n, got: h.n() });
        }
        let flags = vec![false; h.m()];
        let mut st = State::new(h, &flags);
        for (i, step) in self.steps.iter().enumerate() {
            let got = st.eliminate(step.vertex()).ok_or_else(|| {
                LaplaxError::Tripwire(format!("step {i}: vertex {} has degree {}", step.vertex(), st.adj[step.vertex()].len()))
            })?;
            if !same_step(&got, step) {
                return Err(LaplaxError::Tripwire(format!("step {i}: recorded {step:?}, replay gives {got:?}")));
            }
        }
        let kept = st.kept();
        if kept != self.kept {
            return Err(LaplaxError::Tripwire("kept vertex set differs on replay".into()));
        }
        Ok(st.reduced(&kept).0)
    }
}

fn same_step(a: &EliminationStep, b: &EliminationStep) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs());
    match (*a, *b) {
        (EliminationStep::Degree1 { v, u, w }, EliminationStep::Degree1 { v: v2, u: u2, w: w2 }) => v == v2 && u == u2 && close(w, w2),
        (
            EliminationStep::Degree2 { v, u1, u2, w1, w2, w_existing },
            EliminationStep::Degree2 { v: v_, u1: a1, u2: a2, w1: x1, w2: x2, w_existing: xe },
        ) => v == v_ && u1 == a1 && u2 == a2 && close(w1, x1) && close(w2, x2) && close(w_existing, xe),
        _ => false,
    }
}

/// Adjacency with tree flags, mutated by eliminations.
struct State {
    adj: Vec<BTreeMap<usize, (f64, bool)>>,
    alive: Vec<bool>,
    alive_count: usize,
}

impl State {
    fn new(g: &WeightedGraph, tree: &[bool]) -> Self {
        let mut adj = vec![BTreeMap::new(); g.n()];
        for (e, ed) in g.edges().iter().enumerate() {
            adj[ed.u].insert(ed.v, (ed.w, tree[e]));
            adj[ed.v].insert(ed.u, (ed.w, tree[e]));
        }
        Self { adj, alive: vec![true; g.n()], alive_count: g.n() }
    }

    /// Eliminates `v` if it has degree 1 or 2 and is not the last vertex.
    fn eliminate(&mut self, v: usize) -> Option<EliminationStep> {
        if !self.alive[v] || self.alive_count <= 1 {
            return None;
        }
        let step = match self.adj[v].len() {
            1 => {
                let (&u, &(w, _)) = self.adj[v].iter().next().unwrap();
                self.adj[u].remove(&v);
                EliminationStep::Degree1 { v, u, w }
            }
            2 => {
                let mut it = self.adj[v].iter();
                let (&u1, &(w1, t1)) = it.next().unwrap();
                let (&u2, &(w2, t2)) = it.next().unwrap();
                self.adj[u1].remove(&v);
                self.adj[u2].remove(&v);
                let (w_existing, t_existing) = self.adj[u1].get(&u2).copied().unwrap_or((0.0, false));
                let w = 1.0 / (1.0 / w1 + 1.0 / w2) + w_existing;
                let tree = (t1 && t2) || t_existing;
                self.adj[u1].insert(u2, (w, tree));
                self.adj[u2].insert(u1, (w, tree));
                EliminationStep::Degree2 { v, u1, u2, w1, w2, w_existing }
            }
            _ => return None,
        };
        self.adj[v].clear();
        self.alive[v] = false;
        self.alive_count -= 1;
        Some(step)
    }

    fn kept(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&v| self.alive[v]).collect()
    }

    fn reduced(&self, kept: &[usize]) -> (WeightedGraph, Vec<bool>) {
        let mut index = vec![usize::MAX; self.alive.len()];
        for (i, &v) in kept.iter().enumerate() {
            index[v] = i;
        }
        let mut edges = Vec::new();
        let mut flags = Vec::new();
        for &v in kept {
            for (&u, &(w, t)) in &self.adj[v] {
                if v < u {
                    edges.push(Edge { u: index[v], v: index[u], w });
                    flags.push(t);
                }
            }
        }
        (WeightedGraph::from_valid(kept.len(), edges), flags)
    }
}

/// Result of [`greedy_elimination`].
#[derive(Clone, Debug)]
pub struct Elimination {
    pub graph: WeightedGraph,
    pub tree: SpanningTree,
    pub record: EliminationRecord,
}

/// Repeatedly removes degree-1 vertices and splices out degree-2 vertices,
/// keeping the image of `tree` a spanning tree of what remains.
///
/// Vertices are processed from a FIFO queue seeded with every vertex of
/// degree at most 2 in increasing id order; a neighbor whose degree drops to
/// 2 or less is appended. Stops at a single vertex.
pub fn greedy_elimination(g: &WeightedGraph, tree: &SpanningTree) -> Result<Elimination> {
    if tree.n() != g.n() || tree.in_tree().len() != g.m() {
        return Err(LaplaxError::NotSpanning("tree was not built on this graph".into()));
    }
    let mut st = State::new(g, tree.in_tree());
    let mut queued = vec![false; g.n()];
    let mut queue = VecDeque::new();
    for v in 0..g.n() {
        if st.adj[v].len() <= 2 {
            queued[v] = true;
            queue.push_back(v);
        }
    }
    let mut steps = Vec::new();
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        if st.alive_count <= 1 {
            break;
        }
        let Some(step) = st.eliminate(v) else { continue };
        let touched: &[usize] = match step {
            EliminationStep::Degree1 { u, .. } => &[u],
            EliminationStep::Degree2 { u1, u2, .. } => &[u1, u2],
        };
        for &u in touched {
            if !queued[u] && st.adj[u].len() <= 2 {
                queued[u] = true;
                queue.push_back(u);
            }
        }
        steps.push(step);
    }
    let kept = st.kept();
    let (graph, flags) = st.reduced(&kept);
    let tree = SpanningTree::from_flags(&graph, &flags, 0)?;
    Ok(Elimination { graph, tree, record: EliminationRecord { n: g.n(), steps, kept } })
}
