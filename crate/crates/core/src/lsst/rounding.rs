use crate::graph::WeightedGraph;

/// Edge lengths rounded down to a sparse set of representative values.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundedLengths {
    /// Rounded length per edge, in input order.
    pub rounded: Vec<f64>,
    /// Edge indices sorted by original length (stable).
    pub order: Vec<usize>,
    /// Length class per edge; indexes `class_values`.
    pub class: Vec<usize>,
    /// Distinct rounded values, strictly increasing.
    pub class_values: Vec<f64>,
}

impl RoundedLengths {
    pub fn len(&self) -> usize {
        self.rounded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounded.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_values.len()
    }
}

/// Lengths of a weighted graph: `d(e) = 1 / w(e)`.
pub fn graph_lengths(g: &WeightedGraph) -> Vec<f64> {
    g.edges().iter().map(|e| 1.0 / e.w).collect()
}

/// Walks the lengths in sorted order, starting a new representative whenever
/// the current length exceeds twice the representative.
pub fn round_lengths(lengths: &[f64]) -> RoundedLengths {
    let m = lengths.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| lengths[a].total_cmp(&lengths[b]));
    let mut rounded = vec![0.0; m];
    let mut class = vec![0; m];
    let mut class_values = Vec::new();
    let mut rep = f64::NAN;
    for &e in &order {
        let d = lengths[e];
        if class_values.is_empty() || d > 2.0 * rep {
            rep = d;
            class_values.push(d);
        }
        rounded[e] = rep;
        class[e] = class_values.len() - 1;
    }
    RoundedLengths { rounded, order, class, class_values }
}

/// Rounds the graph's lengths `1 / w`.
pub fn round_graph(g: &WeightedGraph) -> RoundedLengths {
    round_lengths(&graph_lengths(g))
}
