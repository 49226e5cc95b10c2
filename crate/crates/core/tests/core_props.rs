mod common;

use common::dense::{mat_vec, Dense};
use common::graph_dense;
use laplax::{quadratic_form, sdd_to_laplacian, CsrLaplacian, Edge, SddMatrix, WeightedGraph};
use proptest::prelude::*;

/// Simple graph on `n` vertices from candidate pairs with positive weights.
fn graph_strategy(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n, 1e-3f64..1e3), 1..4 * n)))
        .prop_map(|(n, cand)| {
            let mut seen = std::collections::BTreeSet::new();
            let edges: Vec<Edge> = cand
                .into_iter()
                .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                .map(|(u, v, w)| Edge::new(u, v, w))
                .collect();
            WeightedGraph::new(n, edges).unwrap()
        })
}

/// Symmetric, diagonally dominant, mixed-sign off-diagonals.
fn sdd_strategy(max_n: usize) -> impl Strategy<Value = Dense> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(((0..n, 0..n), -5.0f64..5.0), 0..3 * n),
                prop::collection::vec(0.0f64..2.0, n),
            )
        })
        .prop_map(|(n, off, slack)| {
            let mut a = vec![vec![0.0; n]; n];
            for ((i, j), v) in off {
                if i != j {
                    a[i][j] += v;
                    a[j][i] += v;
                }
            }
            for i in 0..n {
                let s: f64 = (0..n).filter(|&j| j != i).map(|j| a[i][j].abs()).sum();
                a[i][i] = s + slack[i];
            }
            a
        })
}

fn rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_annihilates_constants(g in graph_strategy(60), c in -1e3f64..1e3) {
        let y = CsrLaplacian::from_graph(&g).apply(&vec![c; g.n()]);
        let scale = g.total_weight() * c.abs().max(1.0);
        prop_assert!(y.iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn quadratic_form_matches_dense(g in graph_strategy(100), seed in any::<u64>()) {
        let x: Vec<f64> = (0..g.n()).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 - 500.0) / 100.0).collect();
        let ax = mat_vec(&graph_dense(&g), &x);
        let dense: f64 = x.iter().zip(&ax).map(|(p, q)| p * q).sum();
        let q = quadratic_form(&g, &x).unwrap();
        prop_assert!((q - dense).abs() <= 1e-10 * dense.abs().max(1.0), "{} vs {}", q, dense);
    }

    #[test]
    fn removing_an_edge_never_increases_energy(g in graph_strategy(40), x in prop::collection::vec(-10.0f64..10.0, 40), pick in any::<prop::sample::Index>()) {
        prop_assume!(g.m() > 0);
        let x = &x[..g.n()];
        let drop = pick.index(g.m());
        let sub = WeightedGraph::new(g.n(), g.edges().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, e)| *e).collect()).unwrap();
        prop_assert!(quadratic_form(&sub, x).unwrap() <= quadratic_form(&g, x).unwrap());
    }

    #[test]
    fn sdd_reduction_reproduces_products(a in sdd_strategy(100), x in prop::collection::vec(-1.0f64..1.0, 100)) {
        let n = a.len();
        let x = &x[..n];
        let m = SddMatrix::from_dense(&a).unwrap();
        let red = sdd_to_laplacian(&m);
        let y = red.descriptor.restrict(&red.apply_reduced(&red.descriptor.lift_solution(x)));
        prop_assert!(rel_close(&y, &mat_vec(&a, x), 1e-10));
        prop_assert!(rel_close(&m.apply(x).unwrap(), &mat_vec(&a, x), 1e-12));
        prop_assert!(red.excess.iter().all(|&d| d >= 0.0));
    }
}

#[test]
fn edge_list_round_trip_preserves_graph() {
    let g = laplax::generators::random_connected(50, 80, 0.1, 9.0, 3).unwrap();
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    let back = WeightedGraph::read_edge_list(buf.as_slice()).unwrap();
    assert_eq!(back, g);
}

#[test]
fn matrix_market_round_trip_preserves_matrix() {
    let g = laplax::generators::grid(5, 7).unwrap();
    let excess: Vec<f64> = (0..g.n()).map(|i| (i % 3) as f64 * 0.25).collect();
    let a = SddMatrix::from_laplacian(&g, &excess).unwrap();
    let mut buf = Vec::new();
    a.write_matrix_market(&mut buf).unwrap();
    let back = SddMatrix::read_matrix_market(buf.as_slice()).unwrap();
    assert_eq!(back.to_dense(), a.to_dense());
}
