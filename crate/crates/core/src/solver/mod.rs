//! SDD solves: reduction to connected Laplacian systems, a chain-preconditioned
//! Chebyshev solve per component, a dense base solver and a PCG baseline.

pub mod chebyshev;
pub mod direct;
pub mod krylov;

use serde::{Deserialize, Serialize};

use crate::chain::{build_chain, ChainConfig, EliminationRecord, PreconChain};
use crate::error::{LaplaxError, Result};
use crate::graph::{Edge, WeightedGraph};
use crate::laplacian::CsrLaplacian;
use crate::numeric::{norm2, project_mean_zero};
use crate::rng::derive_seed;
use crate::sdd::{sdd_to_laplacian, LaplacianReduction, SddMatrix};
use chebyshev::{ChainSolver, LevelPlan, WorkCounters};
use direct::DirectSolver;

pub use chebyshev::{chebyshev_error_bound, iterations_for};

/// Largest system for which a dense reference solution is computed on request.
pub const REFERENCE_MAX_N: usize = 2000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Target `||x - A^+ b||_A / ||A^+ b||_A`.
    pub eps: f64,
    pub max_outer_iterations: usize,
    pub record_history: bool,
    /// Also solve densely and report the A-norm error (for `n <= 2000`).
    pub reference: bool,
    /// Record wall time in the report.
    pub timings: bool,
    pub chain: ChainConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { eps: 1e-6, max_outer_iterations: 1_000_000, record_history: false, reference: false, timings: false, chain: ChainConfig::default() }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(LaplaxError::InvalidParameter(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.max_outer_iterations == 0 {
            return Err(LaplaxError::InvalidParameter("max_outer_iterations must be positive".into()));
        }
        self.chain.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Single vertex: the solution is zero.
    Trivial,
    Direct,
    Chain,
    /// Conjugate gradient without a chain or direct preconditioner.
    Cg,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentReport {
    pub n: usize,
    pub m: usize,
    /// Contains the ground vertex added for the diagonal excess.
    pub grounded: bool,
    pub method: Method,
    pub kappas: Vec<f64>,
    pub plan: Vec<LevelPlan>,
    pub outer_iterations: usize,
    pub required_iterations: usize,
    pub error_bound: f64,
    pub work: WorkCounters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub n: usize,
    pub nnz: usize,
    pub eps: f64,
    /// The Gremban double cover was used.
    pub doubled: bool,
    /// Norm of the part of `b` outside the range of `A`, relative to `||b||`.
    pub projection: f64,
    /// `||A x - b'|| / ||b'||` with `b'` the projected right-hand side.
    pub relative_residual: f64,
    /// Relative A-norm error against a dense reference, when computed.
    pub a_norm_error: Option<f64>,
    /// Every component met its iteration requirement.
    pub converged: bool,
    pub diagnostic: Option<String>,
    pub work_total: u64,
    pub components: Vec<ComponentReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

enum Engine {
    Trivial,
    Direct(DirectSolver),
    Chain(Box<ChainSolver>),
}

struct Component {
    /// Vertex ids in the augmented graph.
    vertices: Vec<usize>,
    graph: WeightedGraph,
    grounded: bool,
    engine: Engine,
}

/// A prepared system: reduction, components and their chains, reusable
/// across right-hand sides.
pub struct Solver {
    a: SddMatrix,
    reduction: LaplacianReduction,
    /// Index of the ground vertex in the augmented graph.
    ground: Option<usize>,
    components: Vec<Component>,
    opts: SolveOptions,
}

/// Laplacian of the reduced graph plus a ground vertex joined to every row
/// with positive excess.
fn augment(red: &LaplacianReduction) -> (WeightedGraph, Option<usize>) {
    let n = red.graph.n();
    if red.excess.iter().all(|&d| d <= 0.0) {
        return (red.graph.clone(), None);
    }
    let mut edges: Vec<Edge> = red.graph.edges().to_vec();
    edges.extend(red.excess.iter().enumerate().filter(|(_, &d)| d > 0.0).map(|(i, &d)| Edge::new(i, n, d)));
    (WeightedGraph::new(n + 1, edges).expect("excess edges are new and positive"), Some(n))
}

impl Solver {
    pub fn new(a: &SddMatrix, opts: &SolveOptions) -> Result<Self> {
        Self::with_chain(a, opts, None)
    }

    /// Like [`Solver::new`], reusing `cached` for the component whose graph
    /// equals the chain's top graph.
    pub fn with_chain(a: &SddMatrix, opts: &SolveOptions, cached: Option<PreconChain>) -> Result<Self> {
        opts.validate()?;
        let reduction = sdd_to_laplacian(a);
        let (aug, ground) = augment(&reduction);
        let (count, label) = aug.components();
        let mut groups = vec![Vec::new(); count];
        for (v, &c) in label.iter().enumerate() {
            groups[c].push(v);
        }
        let mut cached = cached;
        let mut components = Vec::with_capacity(count);
        for (k, vertices) in groups.into_iter().enumerate() {
            let (graph, _) = aug.induced_subgraph(&vertices);
            let grounded = ground.is_some_and(|g| vertices.binary_search(&g).is_ok());
            let engine = if graph.n() == 1 {
                Engine::Trivial
            } else if graph.n() <= opts.chain.c_stop {
                Engine::Direct(DirectSolver::new(&graph)?)
            } else {
                let chain = match cached.take() {
                    Some(ch) if ch.levels.first().is_some_and(|l| l.g == graph) => ch,
                    other => {
                        cached = other;
                        let seed = if k == 0 { opts.chain.seed } else { derive_seed(opts.chain.seed, k as u64) };
                        build_chain(&graph, &ChainConfig { seed, ..opts.chain.clone() })?
                    }
                };
                Engine::Chain(Box::new(ChainSolver::new(chain)?))
            };
            components.push(Component { vertices, graph, grounded, engine });
        }
        if cached.is_some() {
            return Err(LaplaxError::InvalidParameter("cached chain matches no component of the system".into()));
        }
        Ok(Self { a: a.clone(), reduction, ground, components, opts: opts.clone() })
    }

    pub fn options(&self) -> &SolveOptions {
        &self.opts
    }

    /// Chains built for the components, in component order.
    pub fn chains(&self) -> impl Iterator<Item = &PreconChain> {
        self.components.iter().filter_map(|c| match &c.engine {
            Engine::Chain(s) => Some(s.chain()),
            _ => None,
        })
    }

    /// Per-component right-hand sides in the augmented graph, projected onto
    /// the range; also returns the projected right-hand side in original
    /// coordinates.
    fn split_rhs(&self, b: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let n = self.a.n();
        if b.len() != n {
            return Err(LaplaxError::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut lifted = self.reduction.descriptor.lift_rhs(b);
        if let Some(g) = self.ground {
            debug_assert_eq!(g, lifted.len());
            lifted.push(0.0);
        }
        let mut parts = Vec::with_capacity(self.components.len());
        for c in &self.components {
            let mut local: Vec<f64> = c.vertices.iter().map(|&v| lifted[v]).collect();
            if c.grounded {
                let pos = c.vertices.len() - 1;
                let s: f64 = crate::numeric::compensated_sum(local[..pos].iter().copied());
                local[pos] = -s;
            } else {
                project_mean_zero(&mut local);
            }
            for (&v, &x) in c.vertices.iter().zip(&local) {
                lifted[v] = x;
            }
            parts.push(local);
        }
        let reduced_n = self.reduction.descriptor.reduced_dim();
        let projected = self.reduction.descriptor.restrict(&lifted[..reduced_n]);
        Ok((parts, projected))
    }

    /// Maps per-component solutions back to original coordinates.
    fn assemble(&self, parts: &[Vec<f64>]) -> Vec<f64> {
        let total = self.reduction.descriptor.reduced_dim() + self.ground.is_some() as usize;
        let mut y = vec![0.0; total];
        for (c, x) in self.components.iter().zip(parts) {
            let shift = if c.grounded { x[x.len() - 1] } else { 0.0 };
            for (&v, &xv) in c.vertices.iter().zip(x) {
                y[v] = xv - shift;
            }
        }
        self.reduction.descriptor.restrict(&y[..self.reduction.descriptor.reduced_dim()])
    }

    fn finish(&self, b: &[f64], projected: &[f64], x: &[f64], components: Vec<ComponentReport>, start: std::time::Instant) -> Result<SolveReport> {
        let ax = self.a.apply(x)?;
        let r: Vec<f64> = ax.iter().zip(projected).map(|(a, p)| a - p).collect();
        let pn = norm2(projected);
        let bn = norm2(b);
        let diff: Vec<f64> = b.iter().zip(projected).map(|(a, p)| a - p).collect();
        let a_norm_error = if self.opts.reference && self.a.n() <= REFERENCE_MAX_N { Some(self.reference_error(x, b)?) } else { None };
        let converged = components.iter().all(|c| c.outer_iterations >= c.required_iterations);
        let diagnostic = (!converged).then(|| {
            let c = components.iter().find(|c| c.outer_iterations < c.required_iterations).expect("unconverged component");
            format!(
                "iteration cap {} reached; the accuracy target needs {} steps (error bound {:.3e})",
                self.opts.max_outer_iterations, c.required_iterations, c.error_bound
            )
        });
        let work_total = components.iter().map(|c| c.work.total()).sum();
        Ok(SolveReport {
            n: self.a.n(),
            nnz: self.a.nnz(),
            eps: self.opts.eps,
            doubled: self.reduction.descriptor.doubled,
            projection: if bn > 0.0 { norm2(&diff) / bn } else { 0.0 },
            relative_residual: if pn > 0.0 { norm2(&r) / pn } else { norm2(&r) },
            a_norm_error,
            converged,
            diagnostic,
            work_total,
            components,
            wall_time_ms: self.opts.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
        })
    }

    /// Relative A-norm distance from `x` to the dense solution.
    pub fn reference_error(&self, x: &[f64], b: &[f64]) -> Result<f64> {
        let (parts, _) = self.split_rhs(b)?;
        let exact: Vec<Vec<f64>> = self
            .components
            .iter()
            .zip(&parts)
            .map(|(c, rhs)| if c.graph.n() == 1 { Ok(vec![0.0]) } else { DirectSolver::new(&c.graph)?.solve(rhs) })
            .collect::<Result<_>>()?;
        let xr = self.assemble(&exact);
        let e: Vec<f64> = x.iter().zip(&xr).map(|(a, b)| a - b).collect();
        let den = self.a.energy(&xr)?.sqrt();
        let num = self.a.energy(&e)?.sqrt();
        Ok(if den > 0.0 { num / den } else { num })
    }

    /// Chain-preconditioned Chebyshev solve.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let start = std::time::Instant::now();
        let (parts, projected) = self.split_rhs(b)?;
        let mut xs = Vec::with_capacity(parts.len());
        let mut reports = Vec::with_capacity(parts.len());
        for (c, rhs) in self.components.iter().zip(&parts) {
            let (x, rep) = match &c.engine {
                Engine::Trivial => (vec![0.0], self.simple_report(c, Method::Trivial, 0)),
                Engine::Direct(d) => (d.solve(rhs)?, self.simple_report(c, Method::Direct, d.work())),
                Engine::Chain(s) => {
                    let sol = s.solve(rhs, self.opts.eps, self.opts.max_outer_iterations, self.opts.record_history)?;
                    let rep = ComponentReport {
                        n: c.graph.n(),
                        m: c.graph.m(),
                        grounded: c.grounded,
                        method: Method::Chain,
                        kappas: s.chain().kappas(),
                        plan: s.plan().to_vec(),
                        outer_iterations: sol.outer_iterations,
                        required_iterations: sol.required_iterations,
                        error_bound: sol.error_bound,
                        work: sol.work,
                        history: sol.history,
                    };
                    (sol.x, rep)
                }
            };
            xs.push(x);
            reports.push(rep);
        }
        let x = self.assemble(&xs);
        let report = self.finish(b, &projected, &x, reports, start)?;
        Ok((x, report))
    }

    fn simple_report(&self, c: &Component, method: Method, direct_work: u64) -> ComponentReport {
        ComponentReport {
            n: c.graph.n(),
            m: c.graph.m(),
            grounded: c.grounded,
            method,
            kappas: vec![],
            plan: vec![],
            outer_iterations: 1,
            required_iterations: 1,
            error_bound: 0.0,
            work: WorkCounters { direct: direct_work, ..Default::default() },
            history: None,
        }
    }

    /// Textbook preconditioned conjugate gradient on each component, stopped
    /// at relative residual `eps`.
    pub fn pcg(&self, b: &[f64], pre: Preconditioner) -> Result<(Vec<f64>, SolveReport)> {
        let start = std::time::Instant::now();
        let (parts, projected) = self.split_rhs(b)?;
        let mut xs = Vec::with_capacity(parts.len());
        let mut reports = Vec::with_capacity(parts.len());
        let cap = self.opts.max_outer_iterations;
        for (c, rhs) in self.components.iter().zip(&parts) {
            if c.graph.n() == 1 {
                xs.push(vec![0.0]);
                reports.push(self.simple_report(c, Method::Trivial, 0));
                continue;
            }
            let lap = CsrLaplacian::from_graph(&c.graph);
            let mut wc = WorkCounters::new(1);
            let mut matvecs = 0u64;
            let mut failure = None;
            let out = {
                let apply = |p: &[f64], q: &mut [f64]| {
                    lap.apply_into(p, q);
                    matvecs += 1;
                };
                match (pre, &c.engine) {
                    (Preconditioner::None, _) => krylov::cg(apply, krylov::identity, rhs, self.opts.eps, cap, true),
                    (Preconditioner::Jacobi, _) => {
                        let diag = lap.diagonal();
                        krylov::cg(apply, |r, z| z.iter_mut().zip(r).zip(diag).for_each(|((z, r), d)| *z = r / d), rhs, self.opts.eps, cap, true)
                    }
                    (Preconditioner::Chain, Engine::Chain(s)) => krylov::cg(
                        apply,
                        |r, z| match s.precondition(r, &mut wc) {
                            Ok(v) => z.copy_from_slice(&v),
                            Err(e) => {
                                failure.get_or_insert(e);
                                z.copy_from_slice(r);
                            }
                        },
                        rhs,
                        self.opts.eps,
                        cap,
                        true,
                    ),
                    (Preconditioner::Chain, Engine::Direct(d)) => krylov::cg(
                        apply,
                        |r, z| match d.solve(r) {
                            Ok(v) => z.copy_from_slice(&v),
                            Err(e) => {
                                failure.get_or_insert(e);
                                z.copy_from_slice(r);
                            }
                        },
                        rhs,
                        self.opts.eps,
                        cap,
                        true,
                    ),
                    (Preconditioner::Chain, Engine::Trivial) => unreachable!("single vertices are handled above"),
                }
            };
            if let Some(e) = failure {
                return Err(e);
            }
            wc.matvec[0] += matvecs * lap.edge_count() as u64;
            let method = match (pre, &c.engine) {
                (Preconditioner::Chain, Engine::Direct(_)) => Method::Direct,
                (Preconditioner::Chain, _) => Method::Chain,
                _ => Method::Cg,
            };
            let mut rep = self.simple_report(c, method, 0);
            rep.outer_iterations = out.iterations;
            rep.required_iterations = if out.converged { out.iterations } else { out.iterations + 1 };
            rep.error_bound = out.relative_residual;
            rep.work = wc;
            xs.push(out.x);
            reports.push(rep);
        }
        let x = self.assemble(&xs);
        let report = self.finish(b, &projected, &x, reports, start)?;
        Ok((x, report))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preconditioner {
    None,
    Jacobi,
    Chain,
}

impl std::str::FromStr for Preconditioner {
    type Err = LaplaxError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "jacobi" => Ok(Self::Jacobi),
            "chain" => Ok(Self::Chain),
            _ => Err(LaplaxError::InvalidParameter(format!("unknown preconditioner {s:?} (none, jacobi, chain)"))),
        }
    }
}

/// Solves `A x = b` for an SDD matrix to relative A-norm error `opts.eps`.
pub fn solve(a: &SddMatrix, b: &[f64], opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    Solver::new(a, opts)?.solve(b)
}

/// PCG comparator with the given preconditioner.
pub fn pcg_baseline(a: &SddMatrix, b: &[f64], pre: Preconditioner, opts: &SolveOptions) -> Result<(Vec<f64>, SolveReport)> {
    Solver::new(a, opts)?.pcg(b, pre)
}

/// Extends a solution `x_hat` of the eliminated system to every vertex of
/// `H`, given the right-hand side `b` on `H`.
pub fn extend_solution(rec: &EliminationRecord, x_hat: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let (_, work) = rec.forward(b)?;
    rec.back_substitute(x_hat, &work)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::greedy_elimination;
    use crate::chain::EliminationStep;
    use crate::generators;
    use crate::tree::SpanningTree;

    fn laplacian_system(g: &WeightedGraph) -> SddMatrix {
        SddMatrix::from_laplacian(g, &vec![0.0; g.n()]).unwrap()
    }

    fn rhs(n: usize, seed: u64) -> Vec<f64> {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn single_edge_with_excess() {
        let g = WeightedGraph::new(2, vec![Edge::new(0, 1, 1.0)]).unwrap();
        let a = SddMatrix::from_laplacian(&g, &[1.0, 1.0]).unwrap();
        let (x, rep) = solve(&a, &[1.0, -1.0], &SolveOptions::default()).unwrap();
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-14 && (x[1] + 1.0 / 3.0).abs() < 1e-14, "{x:?}");
        assert_eq!(rep.projection, 0.0);
        assert!(rep.components[0].grounded);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = generators::grid(15, 15).unwrap();
        let (x, rep) = solve(&laplacian_system(&g), &vec![0.0; g.n()], &SolveOptions::default()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        assert!(rep.converged);
        assert_eq!(rep.components[0].method, Method::Chain);
        assert_eq!(rep.components[0].outer_iterations, 0);
        assert_eq!(rep.work_total, 0);
    }

    #[test]
    fn grid_meets_a_norm_contract() {
        let g = generators::grid(32, 32).unwrap();
        let opts = SolveOptions { eps: 1e-8, reference: true, ..Default::default() };
        let (_, rep) = solve(&laplacian_system(&g), &rhs(g.n(), 1), &opts).unwrap();
        assert_eq!(rep.components[0].method, Method::Chain);
        assert!(rep.converged);
        assert!(rep.a_norm_error.unwrap() <= 1e-8, "{:?}", rep.a_norm_error);
        assert!(rep.projection > 0.0);
    }

    #[test]
    fn scaling_by_powers_of_two_is_exact() {
        let g = generators::random_regular(300, 4, 2).unwrap();
        let solver = Solver::new(&laplacian_system(&g), &SolveOptions::default()).unwrap();
        let b = rhs(g.n(), 3);
        let (x, _) = solver.solve(&b).unwrap();
        for c in [2.0, -0.5] {
            let bc: Vec<f64> = b.iter().map(|v| c * v).collect();
            let (xc, _) = solver.solve(&bc).unwrap();
            assert!(x.iter().zip(&xc).all(|(a, b)| c * a == *b));
        }
    }

    #[test]
    fn mixed_components_and_gremban_cover() {
        // component {0,1,2} grounded by excess, component {3,4} singular,
        // and a positive off-diagonal between 0 and 2
        let a = SddMatrix::from_triplets(
            5,
            [
                (0, 0, 3.0),
                (0, 1, -1.0),
                (1, 0, -1.0),
                (0, 2, 1.0),
                (2, 0, 1.0),
                (1, 1, 2.0),
                (1, 2, -1.0),
                (2, 1, -1.0),
                (2, 2, 2.5),
                (3, 3, 2.0),
                (3, 4, -2.0),
                (4, 3, -2.0),
                (4, 4, 2.0),
            ],
        )
        .unwrap();
        let b = [1.0, -2.0, 0.5, 3.0, 1.0];
        let opts = SolveOptions { reference: true, ..Default::default() };
        let (x, rep) = solve(&a, &b, &opts).unwrap();
        assert!(rep.doubled);
        assert!(rep.projection > 0.0);
        assert!(rep.a_norm_error.unwrap() < 1e-12);
        assert!(rep.relative_residual < 1e-12, "{}", rep.relative_residual);
        // the singular block sees b projected to (1, -1)
        assert!((x[3] - x[4] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let g = generators::path(40).unwrap();
        let mut ch = build_chain(&g, &ChainConfig::default()).unwrap();
        let tree = SpanningTree::from_flags(&g, &ch.levels[0].g_tree, 0).unwrap();
        let el = greedy_elimination(&g, &tree).unwrap();
        ch.levels[0].h = g.clone();
        ch.levels[0].kappa = 1.0;
        ch.levels[0].elimination = el.record;
        let s = ChainSolver::new(ch).unwrap();
        let mut b = rhs(40, 9);
        project_mean_zero(&mut b);
        let x = s.chebyshev_preconditioned(0, &b, 1).unwrap();
        let r: Vec<f64> = CsrLaplacian::from_graph(&g).apply(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&b));
    }

    #[test]
    fn base_level_is_a_direct_solve() {
        let g = generators::grid(20, 20).unwrap();
        let ch = build_chain(&g, &ChainConfig::default()).unwrap();
        let base = ch.last.clone();
        let d = ch.levels.len();
        let s = ChainSolver::new(ch).unwrap();
        let mut b = rhs(base.n(), 4);
        project_mean_zero(&mut b);
        let x = s.chebyshev_preconditioned(d, &b, 1).unwrap();
        let r: Vec<f64> = CsrLaplacian::from_graph(&base).apply(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-12 * norm2(&b).max(1e-300));
        assert!(s.chebyshev_preconditioned(d + 1, &b, 1).is_err());
    }

    #[test]
    fn extension_of_three_vertex_path() {
        let rec = EliminationRecord {
            n: 3,
            steps: vec![EliminationStep::Degree2 { v: 1, u1: 0, u2: 2, w1: 1.0, w2: 1.0, w_existing: 0.0 }],
            kept: vec![0, 2],
        };
        let b = [1.0, 0.0, -1.0];
        let (bh, _) = rec.forward(&b).unwrap();
        let reduced = WeightedGraph::new(2, vec![Edge::new(0, 1, 0.5)]).unwrap();
        let xh = DirectSolver::new(&reduced).unwrap().solve(&bh).unwrap();
        let x = extend_solution(&rec, &xh, &b).unwrap();
        let h = generators::path(3).unwrap();
        let r: Vec<f64> = CsrLaplacian::from_graph(&h).apply(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-12);
        assert_eq!(extend_solution(&EliminationRecord::identity(3), &[1.0, 2.0, 3.0], &b).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn star_extension_matches_dense_solve() {
        let g = generators::star(12).unwrap();
        let tree = SpanningTree::from_flags(&g, &vec![true; g.m()], 0).unwrap();
        let el = greedy_elimination(&g, &tree).unwrap();
        assert!(el.record.steps.iter().all(|s| matches!(s, EliminationStep::Degree1 { .. })));
        let mut b = rhs(g.n(), 5);
        project_mean_zero(&mut b);
        let (bh, _) = el.record.forward(&b).unwrap();
        assert_eq!(bh.len(), 1);
        let mut x = extend_solution(&el.record, &[0.0], &b).unwrap();
        project_mean_zero(&mut x);
        let exact = DirectSolver::new(&g).unwrap().solve(&b).unwrap();
        assert!(x.iter().zip(&exact).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn cg_on_identity_plus_edges_terminates() {
        let g = generators::path(5).unwrap();
        let a = SddMatrix::from_laplacian(&g, &[1.0; 5]).unwrap();
        let opts = SolveOptions { eps: 1e-12, ..Default::default() };
        let (_, rep) = pcg_baseline(&a, &[1.0, 2.0, 3.0, 4.0, 5.0], Preconditioner::None, &opts).unwrap();
        assert!(rep.converged);
        assert!(rep.components[0].outer_iterations <= 6);
    }

    #[test]
    fn jacobi_pcg_matches_reference() {
        let g = generators::grid(32, 32).unwrap();
        let opts = SolveOptions { eps: 1e-10, reference: true, ..Default::default() };
        let (_, rep) = pcg_baseline(&laplacian_system(&g), &rhs(g.n(), 6), Preconditioner::Jacobi, &opts).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.components[0].method, Method::Cg);
        assert!(rep.a_norm_error.unwrap() <= 1e-8);
    }

    #[test]
    fn iteration_cap_reports_partial_result() {
        let g = generators::grid(16, 16).unwrap();
        let opts = SolveOptions { max_outer_iterations: 3, ..Default::default() };
        let (x, rep) = solve(&laplacian_system(&g), &rhs(g.n(), 7), &opts).unwrap();
        assert!(!rep.converged);
        assert!(rep.diagnostic.unwrap().contains("iteration cap"));
        assert_eq!(x.len(), g.n());
    }

    #[test]
    fn rejects_bad_options() {
        let g = generators::path(3).unwrap();
        for eps in [0.0, 1.0, f64::NAN] {
            assert!(solve(&laplacian_system(&g), &[1.0, 0.0, -1.0], &SolveOptions { eps, ..Default::default() }).is_err());
        }
        assert!(solve(&laplacian_system(&g), &[1.0], &SolveOptions::default()).is_err());
        assert!("chain".parse::<Preconditioner>().is_ok() && "ilu".parse::<Preconditioner>().is_err());
    }
}
