//! Low-stretch spanning trees: length rounding, the monotone multi-queue,
//! Dijkstra over few distinct lengths, ball and cone cuts, and the recursive
//! star decomposition.

pub mod cuts;
pub mod dijkstra;
pub mod hierarchy;
pub mod mmq;
pub mod rounding;
pub mod star;

pub use cuts::{ball_cut, cone_cut, Cut, CutCertificate};
pub use dijkstra::{dijkstra_k_distinct, LengthGraph, ShortestPaths};
pub use hierarchy::{low_stretch_tree, low_stretch_tree_with, LsstConfig};
pub use mmq::MonotoneMultiQueue;
pub use rounding::{graph_lengths, round_graph, round_lengths, RoundedLengths};
pub use star::{star_partition, StarPartition};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::tree::total_stretch;

    #[test]
    fn tree_input_is_returned() {
        let g = generators::random_connected(40, 0, 0.5, 4.0, 3).unwrap();
        let t = low_stretch_tree(&g, 1).unwrap();
        assert_eq!(t.edge_ids(), (0..g.m()).collect::<Vec<_>>());
        assert_eq!(total_stretch(&g, &t).unwrap().total, 0.0);
    }

    #[test]
    fn cycle_stretch_is_n_minus_one() {
        for n in [5, 17, 40, 100] {
            let g = generators::ring(n).unwrap();
            let t = low_stretch_tree(&g, 9).unwrap();
            let r = total_stretch(&g, &t).unwrap();
            assert_eq!(r.per_edge.len(), 1);
            assert!((r.total - (n - 1) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_stretch_is_moderate() {
        let g = generators::grid(32, 32).unwrap();
        let t = low_stretch_tree(&g, 0).unwrap();
        let r = total_stretch(&g, &t).unwrap();
        let n = g.n() as f64;
        let avg = r.total / g.m() as f64;
        assert!(avg <= 3.0 * n.log2().powi(2), "avg stretch {avg}");
    }

    #[test]
    fn brute_force_beats_every_tree_on_k4() {
        let ends = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)];
        let w = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let best = hierarchy::min_stretch_tree(4, &ends, &w);
        assert_eq!(best.len(), 3);
        let g = crate::graph::WeightedGraph::new(
            4,
            ends.iter().zip(&w).map(|(&(a, b), &w)| crate::graph::Edge::new(a, b, w)).collect(),
        )
        .unwrap();
        let ids: Vec<usize> = best.iter().map(|&i| g.find_edge(ends[i].0, ends[i].1).unwrap()).collect();
        let t = crate::tree::SpanningTree::from_edge_ids(&g, &ids, 0).unwrap();
        let s = total_stretch(&g, &t).unwrap().total;
        // all 16 spanning trees of K4
        let mut min = f64::INFINITY;
        for mask in 0u32..64 {
            if mask.count_ones() != 3 {
                continue;
            }
            let ids: Vec<usize> = (0..6).filter(|i| mask >> i & 1 == 1).map(|i| g.find_edge(ends[i].0, ends[i].1).unwrap()).collect();
            if let Ok(t) = crate::tree::SpanningTree::from_edge_ids(&g, &ids, 0) {
                min = min.min(total_stretch(&g, &t).unwrap().total);
            }
        }
        assert!((s - min).abs() < 1e-12);
    }
}
