//! Re-derives the good-chain conditions on a built chain.

use rand::Rng;
use serde::Serialize;

use super::build::{LevelKind, PreconChain};
use crate::graph::WeightedGraph;
use crate::laplacian::CsrLaplacian;
use crate::numeric::{dot, project_mean_zero};
use crate::rng::{derive_seed, rng_from_seed, tags};
use crate::spectral::estimate_relative_condition;
use crate::tree::SpanningTree;

/// Levels at most this large get a spectral estimate for condition 1.
pub const SPECTRAL_MAX_VERTICES: usize = 200;
/// Random vectors tried on larger levels.
pub const QUADRATIC_SAMPLES: usize = 24;
const REL_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SpectralMethod {
    /// `H` is `G` with tree edges scaled by `kappa`.
    Structural,
    PowerIteration,
    QuadraticForms,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSpectral {
    pub level: usize,
    pub method: SpectralMethod,
    /// Observed range of `x^T L_H x / x^T L_G x`.
    pub lo: f64,
    pub hi: f64,
    pub kappa: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub depth: usize,
    pub edge_counts: Vec<usize>,
    pub kappas: Vec<f64>,
    pub mu: Vec<f64>,
    /// `mu_i / mu_{i+1}` for `i = 1 .. d-1`.
    pub mu_ratios: Vec<f64>,
    /// `ceil(c_r sqrt(kappa_i))`.
    pub required_ratios: Vec<f64>,
    /// `6 l_i / kappa_c` over sampled levels.
    pub sample_witnesses: Vec<f64>,
    pub spectral: Vec<LevelSpectral>,
    pub conditions: Vec<ConditionResult>,
    /// Every `T_i` spans `G_i`.
    pub trees_span: bool,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }
}

/// Checks the seven conditions. Condition 1 is exact on level one, estimated
/// by power iteration on small levels and sampled with random quadratic forms
/// elsewhere. The base constant of condition 7 is the edge count of a complete
/// graph on `c_stop` vertices.
pub fn verify_chain(chain: &PreconChain) -> ChainReport {
    let cfg = &chain.config;
    let m = chain.m();
    let mu = chain.witnesses();
    let sizes = chain.edge_counts();
    let kappas = chain.kappas();
    let d = sizes.len();

    let spectral: Vec<LevelSpectral> = chain
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| spectral_check(i + 1, l.kind, &l.g, &l.h, l.kappa, derive_seed(cfg.seed, tags::CHECK.wrapping_add(i as u64))))
        .collect();
    let c1_fail: Vec<String> =
        spectral.iter().filter(|s| !s.passed).map(|s| format!("level {}: [{:.6}, {:.6}] vs [1, {}]", s.level, s.lo, s.hi, s.kappa)).collect();

    let mut c2_fail = Vec::new();
    for (i, l) in chain.levels.iter().enumerate() {
        let next = chain.levels.get(i + 1).map_or(&chain.last, |n| &n.g);
        match l.elimination.replay(&l.h) {
            Ok(g) if same_graph(&g, next) => {}
            Ok(_) => c2_fail.push(format!("level {}: replay differs from G_{}", i + 1, i + 2)),
            Err(e) => c2_fail.push(format!("level {}: {e}", i + 1)),
        }
        if next.n() > 1 && (0..next.n()).any(|v| next.degree(v) < 3) {
            c2_fail.push(format!("G_{} keeps a vertex of degree below 3", i + 2));
        }
    }

    let c3_fail: Vec<String> = (0..d).filter(|&i| mu[i] < sizes[i] as f64).map(|i| format!("mu_{} = {} < {}", i + 1, mu[i], sizes[i])).collect();
    let c4_fail: Vec<String> = (0..d.min(2)).filter(|&i| mu[i] > m as f64).map(|i| format!("mu_{} = {} > m = {m}", i + 1, mu[i])).collect();

    let mu_ratios: Vec<f64> = (0..d - 1).map(|i| if mu[i + 1] == 0.0 { f64::INFINITY } else { mu[i] / mu[i + 1] }).collect();
    let required_ratios: Vec<f64> = kappas.iter().map(|&k| cfg.iterations(k) as f64).collect();
    let c5_fail: Vec<String> = (1..d - 1)
        .filter(|&i| mu_ratios[i] < required_ratios[i])
        .map(|i| format!("mu_{}/mu_{} = {:.3} < {}", i + 1, i + 2, mu_ratios[i], required_ratios[i]))
        .collect();
    let c6_fail: Vec<String> =
        kappas.windows(2).enumerate().filter(|(_, w)| w[0] < w[1]).map(|(i, w)| format!("kappa_{} = {} < kappa_{} = {}", i + 1, w[0], i + 2, w[1])).collect();
    let base_bound = (cfg.c_stop * cfg.c_stop.saturating_sub(1) / 2).max(1) as f64;
    let c7_fail: Vec<String> = if mu[d - 1] <= base_bound { vec![] } else { vec![format!("mu_d = {} > {base_bound}", mu[d - 1])] };

    let result = |index, name, fails: Vec<String>| ConditionResult { index, name, passed: fails.is_empty(), detail: fails.join("; ") };
    let conditions = vec![
        result(1, "G_i <= H_i <= kappa_i G_i", c1_fail),
        result(2, "G_{i+1} = GreedyElimination(H_i)", c2_fail),
        result(3, "mu_i >= |E(G_i)|", c3_fail),
        result(4, "mu_1, mu_2 <= m", c4_fail),
        result(5, "mu_i / mu_{i+1} >= ceil(c_r sqrt(kappa_i))", c5_fail),
        result(6, "kappa_i >= kappa_{i+1}", c6_fail),
        result(7, "mu_d below the base constant", c7_fail),
    ];
    let trees_span = chain.levels.iter().all(|l| SpanningTree::from_flags(&l.g, &l.g_tree, 0).is_ok())
        && SpanningTree::from_flags(&chain.last, &chain.last_tree, 0).is_ok();
    ChainReport {
        depth: d,
        edge_counts: sizes,
        kappas,
        mu,
        mu_ratios,
        required_ratios,
        sample_witnesses: chain.sample_witnesses(),
        spectral,
        conditions,
        trees_span,
    }
}

fn same_graph(a: &WeightedGraph, b: &WeightedGraph) -> bool {
    a.n() == b.n()
        && a.m() == b.m()
        && a.edges().iter().all(|e| match b.find_edge(e.u, e.v) {
            Some(id) => (b.edge(id).w - e.w).abs() <= 1e-12 * e.w.max(1.0),
            None => false,
        })
}

fn spectral_check(level: usize, kind: LevelKind, g: &WeightedGraph, h: &WeightedGraph, kappa: f64, seed: u64) -> LevelSpectral {
    let within = |lo: f64, hi: f64| lo >= 1.0 - REL_TOL && hi <= kappa * (1.0 + REL_TOL);
    if kind == LevelKind::ScaledTree {
        let ok = kappa >= 1.0
            && g.n() == h.n()
            && g.m() == h.m()
            && g.edges().iter().zip(h.edges()).all(|(a, b)| {
                a.u == b.u && a.v == b.v && ((b.w - a.w).abs() <= 1e-12 * a.w || (b.w - kappa * a.w).abs() <= 1e-12 * kappa * a.w)
            });
        return LevelSpectral { level, method: SpectralMethod::Structural, lo: 1.0, hi: kappa, kappa, passed: ok };
    }
    if g.n() <= SPECTRAL_MAX_VERTICES {
        return match estimate_relative_condition(g, h, 300) {
            Ok(est) => {
                let (lo, hi) = if est.converged { (est.lo, est.hi) } else { (est.lambda_min, est.lambda_max) };
                LevelSpectral { level, method: SpectralMethod::PowerIteration, lo, hi, kappa, passed: within(lo, hi) }
            }
            Err(_) => LevelSpectral { level, method: SpectralMethod::PowerIteration, lo: 0.0, hi: f64::INFINITY, kappa, passed: false },
        };
    }
    let lg = CsrLaplacian::from_graph(g);
    let lh = CsrLaplacian::from_graph(h);
    let mut rng = rng_from_seed(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let n = g.n();
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for s in 0..QUADRATIC_SAMPLES {
        x.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        // Every other sample is smoothed by damped Jacobi sweeps on G.
        if s % 2 == 1 {
            for _ in 0..20 {
                lg.apply_into(&x, &mut y);
                for ((xi, yi), di) in x.iter_mut().zip(&y).zip(lg.diagonal()) {
                    *xi -= 0.6 * yi / di;
                }
            }
        }
        project_mean_zero(&mut x);
        lg.apply_into(&x, &mut y);
        let qg = dot(&x, &y);
        lh.apply_into(&x, &mut y);
        let qh = dot(&x, &y);
        if qg > 0.0 {
            let r = qh / qg;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    LevelSpectral { level, method: SpectralMethod::QuadraticForms, lo, hi, kappa, passed: within(lo, hi) }
}
