//! Oversampling by tree stretch and incremental sparsification.

pub mod incremental;
pub mod sample_graph;
pub mod sampler;

pub use incremental::{incremental_sparsify, off_tree_sample_stretch, SparsifyOutcome, SparsifyStats};
pub use sample_graph::{Sample, SampleGraph};
pub use sampler::{sample, sample_with_skip, SampleDraw, SamplerConfig};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::graph::{Edge, WeightedGraph};
    use crate::laplacian::quadratic_form;
    use crate::tree::SpanningTree;
    use rand::{Rng, SeedableRng};

    fn sparsified(out: SparsifyOutcome) -> (SampleGraph, SparsifyStats) {
        match out {
            SparsifyOutcome::Sparsified { graph, stats } => (graph, stats),
            SparsifyOutcome::Fail { stats } => panic!("unexpected FAIL {stats:?}"),
        }
    }

    #[test]
    fn tree_input_returns_doubled_tree() {
        let g = generators::path(6).unwrap();
        let t = SpanningTree::from_edge_ids(&g, &(0..5).collect::<Vec<_>>(), 0).unwrap();
        let (h, stats) = sparsified(incremental_sparsify(&g, &t, 4.0, &SamplerConfig::default()).unwrap());
        assert!(stats.tree_branch);
        assert!(h.samples().is_empty());
        assert!(h.tree_edges().iter().all(|&(_, _, w, _)| w == 2.0));
        assert_eq!(off_tree_sample_stretch(&h, 1.0).unwrap(), None);
    }

    #[test]
    fn cycle_takes_sampling_branch() {
        let g = generators::ring(5).unwrap();
        let ids: Vec<usize> = (0..5).filter(|&e| g.edge(e) != Edge::new(0, 4, 1.0)).collect();
        let t = SpanningTree::from_edge_ids(&g, &ids, 0).unwrap();
        let cfg = SamplerConfig { c_s: 4.0, xi: 0.1, seed: 2 };
        let out = incremental_sparsify(&g, &t, 8.0, &cfg).unwrap();
        let stats = out.stats();
        assert_eq!(stats.stretch, 4.0);
        assert!(!stats.tree_branch);
        assert_eq!(stats.t_hat, 0.5);
    }

    #[test]
    fn triangle_hand_derivation() {
        let g = generators::ring(3).unwrap();
        let t = SpanningTree::from_edge_ids(&g, &[0, 1], 0).unwrap();
        let cfg = SamplerConfig { c_s: 4.0, xi: 0.25, seed: 11 };
        let (h, stats) = sparsified(incremental_sparsify(&g, &t, 2.0, &cfg).unwrap());
        // stretch of (0,2) is 2; in T' = 2T it is 1, so t_hat = 1, t = 3
        assert_eq!(stats.t_hat, 1.0);
        assert_eq!(stats.t, 3.0);
        let q = (4.0 * 3.0 * 3f64.ln() * 4f64.ln()).ceil() as usize;
        assert_eq!(stats.q, q);
        for s in h.samples() {
            // w_l = 4 * w_e / (p_e q) with p_e = 1/3
            assert!((s.w - 4.0 * 3.0 / q as f64).abs() < 1e-12);
        }
        let u = stats.uniform_stretch.unwrap();
        assert!((u - 3.0 / (3.0 * q as f64)).abs() < 1e-15);
        assert_eq!(off_tree_sample_stretch(&h, u).unwrap(), Some(u));
    }

    #[test]
    fn uniform_stretch_and_lower_bound_on_random_graphs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for seed in 0..10u64 {
            let g = generators::random_connected(60, 90, 0.5, 5.0, seed).unwrap();
            let t = crate::lsst::low_stretch_tree(&g, seed).unwrap();
            let cfg = SamplerConfig { c_s: 4.0, xi: 0.1, seed };
            let out = incremental_sparsify(&g, &t, 10.0, &cfg).unwrap();
            let SparsifyOutcome::Sparsified { graph: h, stats } = out else { continue };
            assert!(stats.off_tree_draws as f64 <= stats.threshold);
            off_tree_sample_stretch(&h, stats.uniform_stretch.unwrap()).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                assert!(quadratic_form(&g, &x).unwrap() <= quadratic_form(&h, &x).unwrap() * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn flatten_merges_parallel_samples() {
        let tree = vec![(0, 1, 1.0, 0), (1, 2, 1.0, 1)];
        let samples = vec![
            Sample { u: 0, v: 2, w: 0.25, parent: 2 },
            Sample { u: 2, v: 0, w: 0.5, parent: 2 },
        ];
        let h = SampleGraph::new(3, tree, samples).unwrap();
        assert_eq!(h.samples_of(2).len(), 2);
        assert!(h.samples_of(1).is_empty());
        let (f, flags) = h.flatten().unwrap();
        assert_eq!(f.m(), 3);
        let e = f.find_edge(0, 2).unwrap();
        assert_eq!(f.edge(e).w, 0.75);
        assert!(!flags[e]);
        assert_eq!(flags.iter().filter(|&&b| b).count(), 2);
        let _ = WeightedGraph::new(3, vec![]).unwrap();
    }
}
