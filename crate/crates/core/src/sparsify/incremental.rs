use serde::{Deserialize, Serialize};

use super::sample_graph::{Sample, SampleGraph};
use super::sampler::{sample_with_skip, SamplerConfig};
use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;
use crate::numeric::CompensatedSum;
use crate::tree::{total_stretch, SpanningTree};

/// Which branch produced the sparsifier and the quantities it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsifyStats {
    pub seed: u64,
    pub kappa: f64,
    pub c_s: f64,
    pub xi: f64,
    /// `|stretch_T(G)|` before scaling the tree.
    pub stretch: f64,
    /// `t_hat = |stretch_T(G)| / kappa`.
    pub t_hat: f64,
    /// `t = t_hat + n - 1`.
    pub t: f64,
    pub log_t: f64,
    pub q: usize,
    /// Number of draws that landed on off-tree edges.
    pub off_tree_draws: usize,
    /// Largest accepted off-tree draw count, `2 q t_hat / t`.
    pub threshold: f64,
    pub tree_branch: bool,
    /// Common stretch of every off-tree sample with respect to the output's
    /// tree, when samples were drawn.
    pub uniform_stretch: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SparsifyOutcome {
    Sparsified { graph: SampleGraph, stats: SparsifyStats },
    Fail { stats: SparsifyStats },
}

impl SparsifyOutcome {
    pub fn stats(&self) -> &SparsifyStats {
        match self {
            SparsifyOutcome::Sparsified { stats, .. } | SparsifyOutcome::Fail { stats } => stats,
        }
    }
}

/// Final scale applied to the tree `T' = kappa T` (three copies, then the
/// whole graph times four).
pub const TREE_SCALE: f64 = 12.0;
/// Final scale applied to kept samples.
pub const SAMPLE_SCALE: f64 = 4.0;

/// Sparsifier `H` on the edge set `E_T` plus off-tree samples with
/// `G <= H <= 54 kappa G` with high probability.
///
/// If the total off-tree stretch is at most 1 the result is `2T`. Otherwise
/// the tree is scaled by `kappa`, every edge is sampled with frequency equal
/// to its stretch in the scaled graph (1 for tree edges), tree samples are
/// replaced by three copies of the scaled tree and the result is multiplied
/// by four. Too many off-tree draws yields [`SparsifyOutcome::Fail`].
pub fn incremental_sparsify(g: &WeightedGraph, tree: &SpanningTree, kappa: f64, cfg: &SamplerConfig) -> Result<SparsifyOutcome> {
    cfg.validate()?;
    if !(kappa > 1.0 && kappa.is_finite()) {
        return Err(LaplaxError::InvalidParameter(format!("kappa must exceed 1, got {kappa}")));
    }
    let report = total_stretch(g, tree)?;
    let n = g.n();
    let in_tree = tree.in_tree();
    let tree_edges = |scale: f64| -> Vec<(usize, usize, f64, usize)> {
        (0..g.m()).filter(|&e| in_tree[e]).map(|e| {
            let ed = g.edge(e);
            (ed.u, ed.v, scale * ed.w, e)
        }).collect()
    };
    let mut stats = SparsifyStats {
        seed: cfg.seed,
        kappa,
        c_s: cfg.c_s,
        xi: cfg.xi,
        stretch: report.total,
        t_hat: report.total / kappa,
        t: report.total / kappa + (n as f64 - 1.0),
        log_t: 0.0,
        q: 0,
        off_tree_draws: 0,
        threshold: 0.0,
        tree_branch: false,
        uniform_stretch: None,
    };
    if report.total <= 1.0 {
        stats.tree_branch = true;
        let graph = SampleGraph::new(n, tree_edges(2.0), Vec::new())?;
        return Ok(SparsifyOutcome::Sparsified { graph, stats });
    }
    // frequencies: stretch w.r.t. T' = kappa T, which is 1 on tree edges
    let mut p_prime = vec![1.0; g.m()];
    for &(e, s) in &report.per_edge {
        p_prime[e] = s / kappa;
    }
    let weights: Vec<f64> = g.edges().iter().map(|e| e.w).collect();
    let draw = sample_with_skip(&weights, &p_prime, Some(in_tree), cfg)?;
    let mut t_hat = CompensatedSum::new();
    report.per_edge.iter().for_each(|&(e, _)| t_hat.add(p_prime[e]));
    stats.t_hat = t_hat.value();
    stats.t = draw.t;
    stats.log_t = draw.log_t;
    stats.q = draw.q;
    stats.off_tree_draws = draw.samples.len();
    stats.threshold = 2.0 * draw.q as f64 * stats.t_hat / draw.t;
    if draw.samples.len() as f64 > stats.threshold {
        return Ok(SparsifyOutcome::Fail { stats });
    }
    let samples: Vec<Sample> = draw
        .samples
        .iter()
        .map(|&(e, w)| {
            let ed = g.edge(e);
            Sample { u: ed.u, v: ed.v, w: SAMPLE_SCALE * w, parent: e }
        })
        .collect();
    stats.uniform_stretch = Some(draw.t / (3.0 * draw.q as f64));
    let graph = SampleGraph::new(n, tree_edges(TREE_SCALE * kappa), samples)?;
    Ok(SparsifyOutcome::Sparsified { graph, stats })
}

/// Stretch of every off-tree sample of `h` with respect to its own tree.
/// All of them must agree with `expected` to 1e-9 relative; otherwise the
/// offending samples are reported. Returns `None` when `h` has no samples.
pub fn off_tree_sample_stretch(h: &SampleGraph, expected: f64) -> Result<Option<f64>> {
    if h.samples().is_empty() {
        return Ok(None);
    }
    let t = h.tree(0)?;
    let pairs: Vec<(usize, usize)> = h.samples().iter().map(|s| (s.u, s.v)).collect();
    let r = t.path_resistances(&pairs);
    let mut bad = Vec::new();
    for (i, (s, r)) in h.samples().iter().zip(&r).enumerate() {
        let st = s.w * r;
        if (st - expected).abs() > 1e-9 * expected.abs() {
            bad.push(format!("sample {i} on edge {} ({}, {}): stretch {st}", s.parent, s.u, s.v));
        }
    }
    if !bad.is_empty() {
        let shown = bad.len().min(10);
        return Err(LaplaxError::Tripwire(format!(
            "{} of {} samples deviate from uniform stretch {expected}: {}",
            bad.len(),
            h.samples().len(),
            bad[..shown].join("; ")
        )));
    }
    Ok(Some(expected))
}
