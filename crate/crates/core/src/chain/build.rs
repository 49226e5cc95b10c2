use serde::{Deserialize, Serialize};

use super::elimination::{greedy_elimination, EliminationRecord};
use crate::error::{LaplaxError, Result};
use crate::graph::WeightedGraph;
use crate::lsst::low_stretch_tree;
use crate::rng::{derive_seed, tags};
use crate::solver::direct::DirectSolver;
use crate::sparsify::{incremental_sparsify, SamplerConfig, SparsifyOutcome, SparsifyStats};
use crate::tree::{total_stretch, SpanningTree};

/// Condition bound of a sampled level relative to `kappa_c`.
pub const SAMPLED_FACTOR: f64 = 54.0;
/// Condition bound when the sparsifier returns twice the tree.
pub const TREE_BRANCH_KAPPA: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Level-one tree scale is `c1 ln^2 n (ln ln n)^2`.
    pub c1: f64,
    /// Sparsification parameter of the lower levels.
    pub kappa_c: f64,
    /// Levels stop once a graph has at most this many vertices.
    pub c_stop: usize,
    /// Sparsification attempts per level.
    pub retries: usize,
    /// Iteration constant: level `i` runs `ceil(c_r sqrt(kappa_i))` steps.
    pub c_r: f64,
    pub c_s: f64,
    /// Failure budget.
    pub p: f64,
    pub seed: u64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self { c1: 40.0, kappa_c: 200.0, c_stop: 100, retries: 5, c_r: 1.0, c_s: 4.0, p: 0.5, seed: 0 }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LaplaxError::InvalidParameter(msg));
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return bad(format!("c1 must be positive, got {}", self.c1));
        }
        if !(self.kappa_c > 1.0 && self.kappa_c.is_finite()) {
            return bad(format!("kappa_c must exceed 1, got {}", self.kappa_c));
        }
        if self.c_stop == 0 {
            return bad("c_stop must be at least 1".into());
        }
        if self.retries == 0 {
            return bad("retries must be at least 1".into());
        }
        if !(self.c_r > 0.0 && self.c_r.is_finite()) {
            return bad(format!("c_r must be positive, got {}", self.c_r));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return bad(format!("p must lie in (0, 1), got {}", self.p));
        }
        SamplerConfig { c_s: self.c_s, xi: 0.5, seed: 0 }.validate()
    }

    /// `c1 ln^2 n (ln ln n)^2`, with `ln n` floored at `e`.
    pub fn kappa_scale(&self, n: usize) -> f64 {
        let l = (n as f64).ln().max(std::f64::consts::E);
        self.c1 * l * l * l.ln().powi(2)
    }

    /// Failure parameter handed to each sparsification, `p / (2 ln n)`.
    pub fn xi_level(&self, n: usize) -> f64 {
        let l = (n as f64).ln().max(1.0);
        (self.p / (2.0 * l)).min(0.5)
    }

    pub fn sampled_kappa(&self) -> f64 {
        SAMPLED_FACTOR * self.kappa_c
    }

    /// Iterations at a level with condition bound `kappa`.
    pub fn iterations(&self, kappa: f64) -> usize {
        (self.c_r * kappa.sqrt()).ceil() as usize
    }

    /// Maximum number of levels before the depth tripwire fires.
    pub fn max_levels(&self, n: usize) -> usize {
        2 * (n.max(2) as f64).log2().ceil() as usize + 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LevelKind {
    /// `H = G` with the tree scaled up.
    ScaledTree,
    /// Sparsifier drawn by sampling.
    Sampled,
    /// Sparsifier equal to twice the tree.
    TreeOnly,
}

/// One pair `(G_i, H_i)` and the elimination from `H_i` to `G_{i+1}`.
#[derive(Clone, Debug)]
pub struct ChainLevel {
    pub kind: LevelKind,
    pub g: WeightedGraph,
    /// `T_i` as flags over the edges of `g`.
    pub g_tree: Vec<bool>,
    /// `H_i` with parallel samples merged.
    pub h: WeightedGraph,
    pub h_tree: Vec<bool>,
    /// Number of off-tree samples `l_i` (0 for non-sampled levels).
    pub samples: usize,
    pub kappa: f64,
    pub elimination: EliminationRecord,
    pub stats: Option<SparsifyStats>,
    /// Sparsification attempts used, including the successful one.
    pub attempts: usize,
}

#[derive(Clone, Debug)]
pub struct PreconChain {
    pub config: ChainConfig,
    pub levels: Vec<ChainLevel>,
    /// `G_d`.
    pub last: WeightedGraph,
    pub last_tree: Vec<bool>,
    pub direct: DirectSolver,
    /// Total stretch of the level-one tree in `G`.
    pub tree_stretch: f64,
}

impl PreconChain {
    pub fn n(&self) -> usize {
        self.levels.first().map_or(self.last.n(), |l| l.g.n())
    }

    pub fn m(&self) -> usize {
        self.levels.first().map_or(self.last.m(), |l| l.g.m())
    }

    /// Number of graphs `G_1 .. G_d`.
    pub fn depth(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.kappa).collect()
    }

    /// Edge counts of `G_1 .. G_d`.
    pub fn edge_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.g.m()).chain(std::iter::once(self.last.m())).collect()
    }

    /// Smallest witnesses meeting the size conditions: `mu_d = m_d`,
    /// `mu_i = max(m_i, ceil(c_r sqrt(kappa_i)) mu_{i+1})` for `i >= 2` and
    /// `mu_1 = m`.
    pub fn witnesses(&self) -> Vec<f64> {
        let sizes = self.edge_counts();
        let d = sizes.len();
        let mut mu = vec![0.0; d];
        mu[d - 1] = sizes[d - 1] as f64;
        for i in (1..d - 1).rev() {
            let ratio = self.config.iterations(self.levels[i].kappa) as f64;
            mu[i] = (sizes[i] as f64).max(ratio * mu[i + 1]);
        }
        mu[0] = sizes[0] as f64;
        mu
    }

    /// `6 l_i / kappa_c` for every sampled level.
    pub fn sample_witnesses(&self) -> Vec<f64> {
        self.levels
            .iter()
            .filter(|l| l.kind == LevelKind::Sampled)
            .map(|l| 6.0 * l.samples as f64 / self.config.kappa_c)
            .collect()
    }

    pub fn tree(&self, level: usize) -> Result<SpanningTree> {
        let l = &self.levels[level];
        SpanningTree::from_flags(&l.g, &l.g_tree, 0)
    }
}

/// Builds a preconditioning chain for a connected graph.
///
/// Level one keeps every edge of `G` and scales a low-stretch tree by
/// `max(kappa_scale(n), 54 kappa_c)`. Lower levels alternate incremental
/// sparsification with `kappa_c` and greedy elimination along the image of
/// the same tree until at most `c_stop` vertices remain.
pub fn build_chain(g: &WeightedGraph, cfg: &ChainConfig) -> Result<PreconChain> {
    cfg.validate()?;
    if g.n() == 0 {
        return Err(LaplaxError::InvalidParameter("empty graph".into()));
    }
    if !g.is_connected() {
        return Err(LaplaxError::Disconnected);
    }
    let n = g.n();
    let tree = low_stretch_tree(g, derive_seed(cfg.seed, tags::LSST_CENTER))?;
    let tree_stretch = total_stretch(g, &tree)?.total;
    let kappa1 = cfg.kappa_scale(n).max(cfg.sampled_kappa());
    let h1 = g.with_scaled_edges(tree.in_tree(), kappa1);
    let h1_tree = tree.in_tree().to_vec();
    let h1_spanning = SpanningTree::from_flags(&h1, &h1_tree, 0)?;
    let elim = greedy_elimination(&h1, &h1_spanning)?;
    check_stretch(&h1, &h1_spanning, &elim.graph, &elim.tree, 1)?;
    let mut levels = vec![ChainLevel {
        kind: LevelKind::ScaledTree,
        g: g.clone(),
        g_tree: tree.in_tree().to_vec(),
        h: h1,
        h_tree: h1_tree,
        samples: 0,
        kappa: kappa1,
        elimination: elim.record,
        stats: None,
        attempts: 0,
    }];
    let mut gi = elim.graph;
    let mut ti = elim.tree;
    let xi = cfg.xi_level(n);
    let max_levels = cfg.max_levels(n);
    while gi.n() > cfg.c_stop {
        let level = levels.len() + 1;
        if level > max_levels {
            return Err(LaplaxError::Tripwire(format!("chain exceeded {max_levels} levels with {} vertices left", gi.n())));
        }
        let mut found = None;
        let mut attempts = 0;
        for a in 0..cfg.retries {
            attempts += 1;
            let seed = derive_seed(derive_seed(cfg.seed, tags::SPARSIFY.wrapping_add(level as u64)), tags::RETRY.wrapping_add(a as u64));
            let sc = SamplerConfig { c_s: cfg.c_s, xi, seed };
            match incremental_sparsify(&gi, &ti, cfg.kappa_c, &sc)? {
                SparsifyOutcome::Sparsified { graph, stats } => {
                    found = Some((graph, stats));
                    break;
                }
                SparsifyOutcome::Fail { .. } => continue,
            }
        }
        let Some((sg, stats)) = found else {
            return Err(LaplaxError::SparsifyExhausted { level, attempts });
        };
        let (h, h_tree) = sg.flatten()?;
        let h_spanning = SpanningTree::from_flags(&h, &h_tree, 0)?;
        let elim = greedy_elimination(&h, &h_spanning)?;
        check_stretch(&h, &h_spanning, &elim.graph, &elim.tree, level)?;
        let (kind, kappa) = if stats.tree_branch {
            (LevelKind::TreeOnly, TREE_BRANCH_KAPPA)
        } else {
            (LevelKind::Sampled, cfg.sampled_kappa())
        };
        levels.push(ChainLevel {
            kind,
            g: gi,
            g_tree: ti.in_tree().to_vec(),
            h,
            h_tree,
            samples: sg.samples().len(),
            kappa,
            elimination: elim.record,
            stats: Some(stats),
            attempts,
        });
        gi = elim.graph;
        ti = elim.tree;
    }
    let direct = DirectSolver::new(&gi)?;
    Ok(PreconChain { config: cfg.clone(), levels, last_tree: ti.in_tree().to_vec(), last: gi, direct, tree_stretch })
}

fn check_stretch(h: &WeightedGraph, th: &SpanningTree, g: &WeightedGraph, tg: &SpanningTree, level: usize) -> Result<()> {
    let before = total_stretch(h, th)?.total;
    let after = total_stretch(g, tg)?.total;
    if after > before * (1.0 + 1e-9) + 1e-9 {
        return Err(LaplaxError::Tripwire(format!("level {level}: elimination raised stretch from {before} to {after}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::verify::verify_chain;
    use crate::chain::io::encode_chain;
    use crate::generators;

    #[test]
    fn tree_input_collapses_to_one_vertex() {
        let g = generators::path(50).unwrap();
        let ch = build_chain(&g, &ChainConfig::default()).unwrap();
        assert_eq!(ch.depth(), 2);
        assert_eq!(ch.last.n(), 1);
        assert_eq!(ch.tree_stretch, 0.0);
        assert!(verify_chain(&ch).passed());
    }

    #[test]
    fn small_graph_stops_after_level_one() {
        let g = generators::grid(8, 8).unwrap();
        let ch = build_chain(&g, &ChainConfig::default()).unwrap();
        assert_eq!(ch.levels.len(), 1);
        assert!(ch.last.n() <= 100);
        let r = verify_chain(&ch);
        assert!(r.passed(), "{:?}", r.conditions);
    }

    #[test]
    fn level_one_kappa_is_clamped_to_sampled_bound() {
        let cfg = ChainConfig::default();
        let g = generators::grid(24, 24).unwrap();
        let ch = build_chain(&g, &cfg).unwrap();
        let k1 = ch.levels[0].kappa;
        assert_eq!(k1, cfg.kappa_scale(g.n()).max(cfg.sampled_kappa()));
        assert!(ch.kappas().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn lower_levels_use_images_of_the_first_tree() {
        let g = generators::grid(30, 30).unwrap();
        let ch = build_chain(&g, &ChainConfig { c_stop: 20, ..Default::default() }).unwrap();
        assert!(ch.levels.len() >= 2);
        for l in &ch.levels {
            assert_eq!(l.g_tree.len(), l.g.m());
            assert!(SpanningTree::from_flags(&l.g, &l.g_tree, 0).is_ok());
            // samples never replace tree edges
            assert_eq!(l.h_tree.iter().filter(|&&t| t).count(), l.g.n() - 1);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let g = generators::random_regular(300, 4, 9).unwrap();
        let cfg = ChainConfig { seed: 17, ..Default::default() };
        let a = encode_chain(&build_chain(&g, &cfg).unwrap());
        let b = encode_chain(&build_chain(&g, &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        let g = WeightedGraph::new(4, vec![crate::graph::Edge::new(0, 1, 1.0), crate::graph::Edge::new(2, 3, 1.0)]).unwrap();
        assert_eq!(build_chain(&g, &ChainConfig::default()).unwrap_err(), LaplaxError::Disconnected);
        let g = generators::ring(10).unwrap();
        for bad in [
            ChainConfig { p: 1.0, ..Default::default() },
            ChainConfig { kappa_c: 1.0, ..Default::default() },
            ChainConfig { c_stop: 0, ..Default::default() },
            ChainConfig { retries: 0, ..Default::default() },
            ChainConfig { c_s: 1.0, ..Default::default() },
        ] {
            assert!(matches!(build_chain(&g, &bad), Err(LaplaxError::InvalidParameter(_))));
        }
    }

    #[test]
    fn witnesses_are_minimal() {
        let g = generators::grid(40, 40).unwrap();
        let ch = build_chain(&g, &ChainConfig { c_stop: 10, ..Default::default() }).unwrap();
        let mu = ch.witnesses();
        let sizes = ch.edge_counts();
        let d = mu.len();
        assert_eq!(mu[0], g.m() as f64);
        assert_eq!(mu[d - 1], sizes[d - 1] as f64);
        for i in 1..d - 1 {
            let need = ch.config.iterations(ch.levels[i].kappa) as f64 * mu[i + 1];
            assert_eq!(mu[i], need.max(sizes[i] as f64));
        }
    }
}
