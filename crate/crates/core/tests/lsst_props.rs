mod common;

use common::{off_tree_stretch, textbook_dijkstra, RootedTree};
use laplax::generators::random_connected;
use laplax::lsst::{dijkstra_k_distinct, graph_lengths, low_stretch_tree, round_lengths};
use laplax::{total_stretch, SpanningTree};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rounded_tree_distances_bracket_true_ones(n in 2usize..150, seed in any::<u64>(), pairs in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..20)) {
        let t = random_connected(n, 0, 1e-3, 1e3, seed).unwrap();
        let d = graph_lengths(&t);
        let r = round_lengths(&d);
        let by = |lens: &[f64]| {
            let edges: Vec<_> = t.edges().iter().zip(lens).map(|(e, l)| (e.u, e.v, 1.0 / l)).collect();
            RootedTree::new(n, &edges)
        };
        let (exact, rounded) = (by(&d), by(&r.rounded));
        for (a, b) in pairs {
            let (u, v) = (a.index(n), b.index(n));
            let (dt, rt) = (exact.path_resistance(u, v), rounded.path_resistance(u, v));
            prop_assert!(0.5 * dt <= rt * (1.0 + 1e-12) && rt <= dt * (1.0 + 1e-12), "{} {}", dt, rt);
        }
    }

    #[test]
    fn dijkstra_matches_textbook(n in 2usize..200, extra in 0usize..400, seed in any::<u64>(), source in any::<prop::sample::Index>()) {
        let g = random_connected(n, extra, 0.01, 100.0, seed).unwrap();
        let r = round_lengths(&graph_lengths(&g));
        let s = source.index(n);
        let got = dijkstra_k_distinct(&g, &r, s).unwrap();
        let items: Vec<_> = g.edges().iter().zip(&r.rounded).map(|(e, &l)| (e.u, e.v, l)).collect();
        let want = textbook_dijkstra(n, &items, s);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{} vs {}", a, b);
        }
    }

    #[test]
    fn low_stretch_tree_spans_with_graph_edges(n in 2usize..300, extra in 0usize..600, seed in any::<u64>()) {
        let g = random_connected(n, extra, 0.05, 20.0, seed).unwrap();
        let t = low_stretch_tree(&g, seed).unwrap();
        prop_assert_eq!(t.in_tree().iter().filter(|&&b| b).count(), n - 1);
        let mut tree_edges = Vec::new();
        for (id, e) in g.edges().iter().enumerate() {
            if t.in_tree()[id] {
                tree_edges.push((e.u, e.v, e.w));
            }
        }
        // Panics unless the edges connect every vertex.
        RootedTree::new(n, &tree_edges);
        for (u, v, w) in t.tree_edges() {
            prop_assert!(tree_edges.iter().any(|&(a, b, x)| ((a, b) == (u, v) || (b, a) == (u, v)) && x == w));
        }
        let report = total_stretch(&g, &t).unwrap();
        let (oracle, max, count) = off_tree_stretch(&g, t.in_tree());
        prop_assert_eq!(report.per_edge.len(), count);
        prop_assert!((report.total - oracle).abs() <= 1e-9 * oracle.max(1.0));
        prop_assert!((report.max - max).abs() <= 1e-9 * max.max(1.0));
    }

    #[test]
    fn stretch_is_scale_invariant(n in 3usize..120, seed in any::<u64>(), c in 1e-4f64..1e4) {
        let g = random_connected(n, n, 0.1, 10.0, seed).unwrap();
        let t = low_stretch_tree(&g, seed).unwrap();
        let gs = g.scaled(c);
        let ts = SpanningTree::from_flags(&gs, t.in_tree(), 0).unwrap();
        let (a, b) = (total_stretch(&g, &t).unwrap().total, total_stretch(&gs, &ts).unwrap().total);
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{} vs {}", a, b);
    }
}
