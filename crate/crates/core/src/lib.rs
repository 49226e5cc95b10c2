//! Near-linear time solver for symmetric diagonally dominant linear systems.
//!
//! Pipeline: [`sdd::sdd_to_laplacian`] reduces the matrix to a graph Laplacian,
//! [`lsst::low_stretch_tree`] finds a spanning tree,
//! [`chain::build_chain`] alternates [`sparsify::incremental_sparsify`] with
//! [`chain::greedy_elimination`], and [`solver`] runs recursive preconditioned
//! Chebyshev iteration over the resulting chain.

pub mod chain;
pub mod error;
pub mod generators;
pub mod graph;
pub mod laplacian;
pub mod lsst;
pub mod numeric;
pub mod rng;
pub mod sdd;
pub mod solver;
pub mod sparsify;
pub mod spectral;
pub mod tree;

pub use error::{LaplaxError, Result};
pub use graph::{Edge, WeightedGraph};
pub use laplacian::{quadratic_form, CsrLaplacian, GraphLike, LaplacianOperator};
pub use sdd::{sdd_to_laplacian, LaplacianReduction, ReductionDescriptor, SddMatrix};
pub use spectral::{estimate_relative_condition, ConditionEstimate};
pub use tree::{total_stretch, SpanningTree, StretchReport};
pub use chain::{build_chain, verify_chain, ChainConfig, PreconChain};
pub use solver::{pcg_baseline, solve, Preconditioner, SolveOptions, SolveReport, Solver};
