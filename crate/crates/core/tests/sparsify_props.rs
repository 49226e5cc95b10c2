mod common;

use common::rng;
use laplax::generators::random_connected;
use laplax::lsst::low_stretch_tree;
use laplax::sparsify::{incremental_sparsify, sample, SamplerConfig, SparsifyOutcome};
use laplax::quadratic_form;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn sampled_weights_are_unbiased() {
    let mut r = rng(21);
    let m = 12;
    let w: Vec<f64> = (0..m).map(|_| r.gen_range(0.1..10.0)).collect();
    let p: Vec<f64> = (0..m).map(|_| r.gen_range(0.05..1.0)).collect();
    let runs = 4000;
    let mut sum = vec![0.0; m];
    let mut q = 0;
    let mut t = 0.0;
    for seed in 0..runs {
        let d = sample(&w, &p, &SamplerConfig { seed, ..SamplerConfig::default() }).unwrap();
        q = d.q;
        t = d.t;
        for (e, x) in d.samples {
            sum[e] += x;
        }
    }
    for e in 0..m {
        let mean = sum[e] / runs as f64;
        let pe = p[e] / t;
        let per_draw = w[e] * t / (p[e] * q as f64);
        let sigma = (per_draw * per_draw * q as f64 * pe * (1.0 - pe) / runs as f64).sqrt();
        assert!((mean - w[e]).abs() <= 3.0 * sigma, "edge {e}: mean {mean}, weight {}, sigma {sigma}", w[e]);
    }
}

#[test]
fn failure_rate_is_small() {
    let mut fails = 0;
    for run in 0..200u64 {
        let g = random_connected(100, 150, 0.2, 5.0, 3000 + run).unwrap();
        let tree = low_stretch_tree(&g, run).unwrap();
        let cfg = SamplerConfig { seed: run, ..SamplerConfig::default() };
        if let SparsifyOutcome::Fail { .. } = incremental_sparsify(&g, &tree, 4.0, &cfg).unwrap() {
            fails += 1;
        }
    }
    assert!(fails <= 10, "{fails} failures in 200 runs");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sparsifier_dominates_and_respects_draw_bound(n in 10usize..150, extra in 5usize..300, kappa in 1.5f64..50.0, seed in any::<u64>()) {
        let g = random_connected(n, extra, 0.1, 10.0, seed).unwrap();
        let tree = low_stretch_tree(&g, seed).unwrap();
        let cfg = SamplerConfig { seed, ..SamplerConfig::default() };
        let SparsifyOutcome::Sparsified { graph, stats } = incremental_sparsify(&g, &tree, kappa, &cfg).unwrap() else {
            return Ok(());
        };
        if !stats.tree_branch {
            let bound = 2.0 * stats.q as f64 * stats.t_hat / stats.t;
            prop_assert!(stats.off_tree_draws as f64 <= bound);
            let nominal = 2.0 * cfg.c_s * stats.t_hat * stats.log_t * (1.0 / cfg.xi).ln();
            prop_assert!(bound <= nominal + 2.0 * stats.t_hat / stats.t);
        }
        let (h, _) = graph.flatten().unwrap();
        let mut r = rng(seed);
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
            let (qg, qh) = (quadratic_form(&g, &x).unwrap(), quadratic_form(&h, &x).unwrap());
            prop_assert!(qg <= qh * (1.0 + 1e-12), "{} > {}", qg, qh);
        }
    }
}
