//! Recursive preconditioned Chebyshev iteration over a preconditioning chain.

use serde::Serialize;

use crate::chain::{EliminationRecord, EliminationStep, PreconChain};
use crate::error::{LaplaxError, Result};
use crate::laplacian::CsrLaplacian;
use crate::numeric::{norm2, project_mean_zero};

/// A-norm error factor after `iters` Chebyshev steps when the preconditioned
/// spectrum spans a ratio `ratio = hi / lo`.
pub fn chebyshev_error_bound(ratio: f64, iters: usize) -> f64 {
    if ratio <= 1.0 {
        return 0.0;
    }
    let s = ratio.sqrt();
    let rho = (s - 1.0) / (s + 1.0);
    let p = rho.powf(iters as f64);
    2.0 * p / (1.0 + p * p)
}

/// Fewest steps whose error factor is at most `eps`.
pub fn iterations_for(ratio: f64, eps: f64) -> usize {
    if ratio <= 1.0 {
        return 1;
    }
    let s = ratio.sqrt();
    let rho = (s - 1.0) / (s + 1.0);
    let guess = ((2.0 / eps).ln() / -rho.ln()).floor().max(1.0) as usize;
    let mut n = guess.saturating_sub(2).max(1);
    while chebyshev_error_bound(ratio, n) > eps {
        n += 1;
    }
    n
}

/// Chebyshev iteration for `A x = b` from `x = 0` with the spectrum of `M A`
/// inside `[lo, hi]`. `sub_a(v, r)` performs `r -= A v`. Returns the number of
/// operator applications.
#[allow(clippy::too_many_arguments)]
fn chebyshev_run<A, M>(
    mut sub_a: A,
    mut precond: M,
    b: &[f64],
    x: &mut [f64],
    lo: f64,
    hi: f64,
    iters: usize,
    buf: &mut ChebBuffers,
    mut history: Option<&mut Vec<f64>>,
) -> u64
where
    A: FnMut(&[f64], &mut [f64]),
    M: FnMut(&[f64], &mut [f64]),
{
    let ChebBuffers { r, z, d } = buf;
    let theta = 0.5 * (hi + lo);
    let delta = 0.5 * (hi - lo);
    let sigma = if delta > 0.0 { theta / delta } else { f64::INFINITY };
    let mut rho = 1.0 / sigma;
    r.copy_from_slice(b);
    let mut matvecs = 0;
    if iters == 0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return matvecs;
    }
    precond(r, z);
    for ((xi, di), zi) in x.iter_mut().zip(d.iter_mut()).zip(z.iter()) {
        *di = zi / theta;
        *xi = *di;
    }
    for k in 1..=iters {
        if k == iters && history.is_none() {
            break;
        }
        sub_a(d, r);
        matvecs += 1;
        if let Some(h) = history.as_deref_mut() {
            h.push(norm2(r));
        }
        if k == iters {
            break;
        }
        precond(r, z);
        let (a, c) = if delta > 0.0 {
            let rho_next = 1.0 / (2.0 * sigma - rho);
            let coef = (rho_next * rho, 2.0 * rho_next / delta);
            rho = rho_next;
            coef
        } else {
            (0.0, 1.0 / theta)
        };
        for ((xi, di), zi) in x.iter_mut().zip(d.iter_mut()).zip(z.iter()) {
            *di = a * *di + c * zi;
            *xi += *di;
        }
    }
    project_mean_zero(x);
    matvecs
}

/// Elimination record flattened for substitution: Degree-1 steps use
/// `u2 = u1` and `c2 = 0`.
#[derive(Clone, Copy)]
struct Step {
    v: u32,
    u1: u32,
    u2: u32,
    c1: f64,
    c2: f64,
    inv: f64,
}

struct Substitution {
    steps: Vec<Step>,
    kept: Vec<u32>,
}

impl Substitution {
    fn new(rec: &EliminationRecord) -> Self {
        let steps = rec
            .steps
            .iter()
            .map(|s| match *s {
                EliminationStep::Degree1 { v, u, w } => Step { v: v as u32, u1: u as u32, u2: u as u32, c1: 1.0, c2: 0.0, inv: 1.0 / w },
                EliminationStep::Degree2 { v, u1, u2, w1, w2, .. } => {
                    let s = w1 + w2;
                    Step { v: v as u32, u1: u1 as u32, u2: u2 as u32, c1: w1 / s, c2: w2 / s, inv: 1.0 / s }
                }
            })
            .collect();
        Self { steps, kept: rec.kept.iter().map(|&v| v as u32).collect() }
    }

    fn forward(&self, b: &[f64], work: &mut [f64], reduced: &mut [f64]) {
        work.copy_from_slice(b);
        for s in &self.steps {
            let bv = work[s.v as usize];
            work[s.u1 as usize] += s.c1 * bv;
            work[s.u2 as usize] += s.c2 * bv;
        }
        for (r, &v) in reduced.iter_mut().zip(&self.kept) {
            *r = work[v as usize];
        }
    }

    fn back(&self, x_reduced: &[f64], work: &[f64], x: &mut [f64]) {
        for (&xr, &v) in x_reduced.iter().zip(&self.kept) {
            x[v as usize] = xr;
        }
        for s in self.steps.iter().rev() {
            x[s.v as usize] = s.c1 * x[s.u1 as usize] + s.c2 * x[s.u2 as usize] + work[s.v as usize] * s.inv;
        }
    }
}

struct ChebBuffers {
    r: Vec<f64>,
    z: Vec<f64>,
    d: Vec<f64>,
}

struct PrecondBuffers {
    work: Vec<f64>,
    b_next: Vec<f64>,
    x_next: Vec<f64>,
}

struct Workspace {
    cheb: ChebBuffers,
    pre: PrecondBuffers,
}

/// Per-level iteration plan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelPlan {
    pub n: usize,
    pub m: usize,
    pub kappa: f64,
    /// Steps per solve at this level, `ceil(c_r sqrt(kappa))`. The top level
    /// instead runs as many steps as the target accuracy needs.
    pub iterations: usize,
    /// Interval assumed for the preconditioned spectrum, widened by the
    /// error of the inner solves.
    pub lo: f64,
    pub hi: f64,
    /// A-norm error factor of one solve at this level.
    pub contraction: f64,
}

/// Exact work counters, in edge touches per level.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WorkCounters {
    /// `m_i` per Laplacian application at level `i`.
    pub matvec: Vec<u64>,
    /// Steps replayed by forward and back substitution from `H_i`.
    pub elimination: Vec<u64>,
    /// Multiply-adds spent in the dense base solve.
    pub direct: u64,
    /// Solves performed at each level.
    pub solves: Vec<u64>,
}

impl WorkCounters {
    pub fn new(levels: usize) -> Self {
        Self { matvec: vec![0; levels], elimination: vec![0; levels], direct: 0, solves: vec![0; levels + 1] }
    }

    pub fn total(&self) -> u64 {
        self.matvec.iter().sum::<u64>() + self.elimination.iter().sum::<u64>() + self.direct
    }

    pub fn add(&mut self, other: &WorkCounters) {
        let grow = |a: &mut Vec<u64>, b: &Vec<u64>| {
            if a.len() < b.len() {
                a.resize(b.len(), 0);
            }
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        };
        grow(&mut self.matvec, &other.matvec);
        grow(&mut self.elimination, &other.elimination);
        grow(&mut self.solves, &other.solves);
        self.direct += other.direct;
    }
}

#[derive(Clone, Debug)]
pub struct ChainSolution {
    pub x: Vec<f64>,
    pub outer_iterations: usize,
    /// Steps the accuracy target needs at the top level.
    pub required_iterations: usize,
    /// Chebyshev bound on `||x - x*||_A / ||x*||_A` for the steps taken.
    pub error_bound: f64,
    pub work: WorkCounters,
    /// Top-level residual 2-norms after each step, when requested.
    pub history: Option<Vec<f64>>,
}

/// Recursive solver bound to a chain.
pub struct ChainSolver {
    chain: PreconChain,
    ops: Vec<CsrLaplacian>,
    subs: Vec<Substitution>,
    plan: Vec<LevelPlan>,
}

impl ChainSolver {
    pub fn new(chain: PreconChain) -> Result<Self> {
        let ops: Vec<CsrLaplacian> = chain.levels.iter().map(|l| CsrLaplacian::from_graph(&l.g)).collect();
        let mut plan: Vec<LevelPlan> = Vec::with_capacity(ops.len());
        let mut inner = 0.0;
        for l in chain.levels.iter().rev() {
            if inner >= 1.0 {
                return Err(LaplaxError::Tripwire(format!("inner solves too inaccurate (error factor {inner})")));
            }
            let lo = (1.0 - inner) / l.kappa;
            let hi = 1.0 + inner;
            let iterations = chain.config.iterations(l.kappa).max(1);
            let contraction = if l.kappa <= 1.0 && inner == 0.0 { 0.0 } else { chebyshev_error_bound(hi / lo, iterations) };
            plan.push(LevelPlan { n: l.g.n(), m: l.g.m(), kappa: l.kappa, iterations, lo, hi, contraction });
            inner = contraction;
        }
        plan.reverse();
        let subs = chain.levels.iter().map(|l| Substitution::new(&l.elimination)).collect();
        Ok(Self { chain, ops, subs, plan })
    }

    pub fn plan(&self) -> &[LevelPlan] {
        &self.plan
    }

    pub fn chain(&self) -> &PreconChain {
        &self.chain
    }

    pub fn into_chain(self) -> PreconChain {
        self.chain
    }

    fn workspaces(&self) -> Vec<Workspace> {
        let nexts = self.chain.levels.iter().skip(1).map(|l| l.g.n()).chain(std::iter::once(self.chain.last.n()));
        self.chain
            .levels
            .iter()
            .zip(nexts)
            .map(|(l, nn)| {
                let n = l.g.n();
                Workspace {
                    cheb: ChebBuffers { r: vec![0.0; n], z: vec![0.0; n], d: vec![0.0; n] },
                    pre: PrecondBuffers { work: vec![0.0; n], b_next: vec![0.0; nn], x_next: vec![0.0; nn] },
                }
            })
            .collect()
    }

    /// Top-level solve to A-norm accuracy `eps`, taking at most `max_outer`
    /// steps.
    pub fn solve(&self, b: &[f64], eps: f64, max_outer: usize, record_history: bool) -> Result<ChainSolution> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LaplaxError::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        let n = self.chain.n();
        if b.len() != n {
            return Err(LaplaxError::DimensionMismatch { expected: n, got: b.len() });
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok(ChainSolution {
                x: vec![0.0; n],
                outer_iterations: 0,
                required_iterations: 0,
                error_bound: 0.0,
                work: WorkCounters::new(self.chain.levels.len()),
                history: record_history.then(Vec::new),
            });
        }
        let (required, ratio) = match self.plan.first() {
            Some(p) if !(p.kappa <= 1.0 && p.lo == p.hi) => {
                let ratio = p.hi / p.lo;
                (iterations_for(ratio, eps), ratio)
            }
            _ => (1, 1.0),
        };
        let iters = required.min(max_outer);
        let mut history = record_history.then(Vec::new);
        let (x, work) = self.run(0, b, iters, history.as_mut())?;
        Ok(ChainSolution {
            x,
            outer_iterations: iters,
            required_iterations: required,
            error_bound: chebyshev_error_bound(ratio, iters),
            work,
            history,
        })
    }

    /// Runs `iters` Chebyshev steps at `level` with the configured inner
    /// counts below it. `level` equal to the number of pairs is the base.
    pub fn chebyshev_preconditioned(&self, level: usize, b: &[f64], iters: usize) -> Result<Vec<f64>> {
        Ok(self.run(level, b, iters, None)?.0)
    }

    /// One cycle of the recursion from the top: `ceil(c_r sqrt(kappa_1))`
    /// Chebyshev steps on `G_1`, each preconditioned by the levels below.
    /// The result is a fixed symmetric positive definite map of `r`.
    pub fn precondition(&self, r: &[f64], wc: &mut WorkCounters) -> Result<Vec<f64>> {
        let n = self.chain.n();
        if r.len() != n {
            return Err(LaplaxError::DimensionMismatch { expected: n, got: r.len() });
        }
        if wc.matvec.len() < self.chain.levels.len() {
            wc.add(&WorkCounters::new(self.chain.levels.len()));
        }
        let mut rhs = r.to_vec();
        project_mean_zero(&mut rhs);
        let mut z = vec![0.0; n];
        let mut ws = self.workspaces();
        let iters = self.plan.first().map_or(1, |p| p.iterations);
        self.solve_level(0, &rhs, &mut z, iters, &mut ws, wc, None)?;
        project_mean_zero(&mut z);
        Ok(z)
    }

    fn run(&self, level: usize, b: &[f64], iters: usize, history: Option<&mut Vec<f64>>) -> Result<(Vec<f64>, WorkCounters)> {
        let d = self.chain.levels.len();
        if level > d {
            return Err(LaplaxError::InvalidParameter(format!("level {level} out of range 0..={d}")));
        }
        let n = if level == d { self.chain.last.n() } else { self.chain.levels[level].g.n() };
        if b.len() != n {
            return Err(LaplaxError::DimensionMismatch { expected: n, got: b.len() });
        }
        let mut rhs = b.to_vec();
        project_mean_zero(&mut rhs);
        let mut x = vec![0.0; n];
        let mut wc = WorkCounters::new(d);
        let mut ws = self.workspaces();
        self.solve_level(level, &rhs, &mut x, iters, &mut ws[level.min(d)..], &mut wc, history)?;
        Ok((x, wc))
    }

    #[allow(clippy::too_many_arguments)]
    fn solve_level(
        &self,
        i: usize,
        b: &[f64],
        x: &mut [f64],
        iters: usize,
        ws: &mut [Workspace],
        wc: &mut WorkCounters,
        history: Option<&mut Vec<f64>>,
    ) -> Result<()> {
        wc.solves[i] += 1;
        if i == self.chain.levels.len() {
            let sol = self.chain.direct.solve(b)?;
            x.copy_from_slice(&sol);
            wc.direct += self.chain.direct.work();
            return Ok(());
        }
        let (head, rest) = ws.split_first_mut().expect("workspace per level");
        let Workspace { cheb, pre } = head;
        let op = &self.ops[i];
        let sub = &self.subs[i];
        let plan = &self.plan[i];
        let next_iters = self.plan.get(i + 1).map_or(1, |p| p.iterations);
        let mut failure = None;
        let matvecs = chebyshev_run(
            |v, r| op.apply_sub(v, r),
            |r, z| {
                if failure.is_some() {
                    return;
                }
                sub.forward(r, &mut pre.work, &mut pre.b_next);
                if let Err(e) = self.solve_level(i + 1, &pre.b_next, &mut pre.x_next, next_iters, rest, wc, None) {
                    failure = Some(e);
                    return;
                }
                sub.back(&pre.x_next, &pre.work, z);
                wc.elimination[i] += 2 * sub.steps.len() as u64;
            },
            b,
            x,
            plan.lo,
            plan.hi,
            iters,
            cheb,
            history,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        wc.matvec[i] += matvecs * op.edge_count() as u64;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain, ChainConfig};
    use crate::generators;

    #[test]
    fn iteration_count_is_the_smallest_meeting_the_bound() {
        for ratio in [2.0, 10.0, 1e3, 3e4] {
            for eps in [1e-2, 1e-6, 1e-10] {
                let n = iterations_for(ratio, eps);
                assert!(chebyshev_error_bound(ratio, n) <= eps);
                assert!(n == 1 || chebyshev_error_bound(ratio, n - 1) > eps);
            }
        }
        assert_eq!(iterations_for(1.0, 1e-9), 1);
        assert_eq!(chebyshev_error_bound(1.0, 1), 0.0);
    }

    #[test]
    fn inner_errors_widen_the_interval() {
        let g = generators::grid(24, 24).unwrap();
        let s = ChainSolver::new(build_chain(&g, &ChainConfig::default()).unwrap()).unwrap();
        let p = s.plan();
        assert!(p.len() >= 2);
        for w in p.windows(2) {
            assert!((w[0].hi - (1.0 + w[1].contraction)).abs() < 1e-15);
            assert!((w[0].lo * w[0].kappa - (1.0 - w[1].contraction)).abs() < 1e-15);
            assert!(w[1].contraction < 1.0);
        }
    }

    #[test]
    fn residual_history_decreases_overall() {
        let g = generators::grid(20, 20).unwrap();
        let s = ChainSolver::new(build_chain(&g, &ChainConfig::default()).unwrap()).unwrap();
        let mut b: Vec<f64> = (0..g.n()).map(|i| (i % 7) as f64 - 3.0).collect();
        project_mean_zero(&mut b);
        let sol = s.solve(&b, 1e-8, usize::MAX, true).unwrap();
        let h = sol.history.unwrap();
        assert_eq!(h.len(), sol.outer_iterations);
        assert!(h.last().unwrap() < &(1e-3 * norm2(&b)));
        assert_eq!(sol.work.solves[0], 1);
        assert_eq!(sol.work.solves[1] as usize, sol.outer_iterations);
        // history does not change the iterate
        let plain = s.solve(&b, 1e-8, usize::MAX, false).unwrap();
        assert_eq!(plain.x, sol.x);
    }
}
