mod common;

use common::RootedTree;
use laplax::chain::{decode_chain, encode_chain, greedy_elimination};
use laplax::generators::{grid, random_connected};
use laplax::{build_chain, verify_chain, ChainConfig, SpanningTree, WeightedGraph};
use proptest::prelude::*;

fn tree_edges(g: &WeightedGraph, flags: &[bool]) -> Vec<(usize, usize, f64)> {
    g.edges().iter().zip(flags).filter(|(_, &t)| t).map(|(e, _)| (e.u, e.v, e.w)).collect()
}

fn endpoints(edges: &[(usize, usize, f64)]) -> Vec<(usize, usize)> {
    let mut p: Vec<_> = edges.iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();
    p.sort();
    p
}

fn small_config(seed: u64) -> ChainConfig {
    ChainConfig { c1: 1.0, kappa_c: 20.0, c_stop: 30, seed, ..ChainConfig::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn chain_structure(n in 100usize..500, dens in 1usize..3, seed in any::<u64>()) {
        let g = random_connected(n, dens * n, 0.1, 10.0, seed).unwrap();
        let chain = build_chain(&g, &small_config(seed)).unwrap();
        prop_assert!(chain.depth() as f64 <= 2.0 * (n as f64).log2());
        for (i, level) in chain.levels.iter().enumerate() {
            let (next_g, next_tree) = match chain.levels.get(i + 1) {
                Some(l) => (&l.g, &l.g_tree),
                None => (&chain.last, &chain.last_tree),
            };
            // The tree of H_i is the tree of G_i, rescaled.
            let gt = tree_edges(&level.g, &level.g_tree);
            let ht = tree_edges(&level.h, &level.h_tree);
            prop_assert_eq!(endpoints(&gt), endpoints(&ht));
            RootedTree::new(level.h.n(), &ht);
            prop_assert_eq!(&level.elimination.replay(&level.h).unwrap(), next_g);
            let again = greedy_elimination(&level.h, &SpanningTree::from_flags(&level.h, &level.h_tree, 0).unwrap()).unwrap();
            prop_assert_eq!(&again.graph, next_g);
            prop_assert_eq!(again.tree.in_tree(), &next_tree[..]);
            RootedTree::new(next_g.n(), &tree_edges(next_g, next_tree));
        }
        let report = verify_chain(&chain);
        prop_assert!(report.passed(), "{:?}", report.conditions);
    }
}

#[test]
fn container_is_seed_determined() {
    let g = grid(40, 40).unwrap();
    let a = encode_chain(&build_chain(&g, &small_config(1)).unwrap());
    let b = encode_chain(&build_chain(&g, &small_config(1)).unwrap());
    let c = encode_chain(&build_chain(&g, &small_config(2)).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(encode_chain(&decode_chain(&a).unwrap()), a);
}

#[test]
fn sampled_levels_shrink_geometrically() {
    let g = grid(64, 64).unwrap();
    let chain = build_chain(&g, &small_config(5)).unwrap();
    let m = chain.edge_counts();
    assert!(chain.depth() >= 3, "{m:?}");
    for w in m.windows(2).skip(1) {
        assert!(w[1] < w[0], "{m:?}");
    }
}
