use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::time::Instant;

use laplax::chain::{read_chain, write_chain, ChainReport, LevelKind};
use laplax::generators;
use laplax::lsst::low_stretch_tree;
use laplax::rng::{derive_seed, splitmix64, tags};
use laplax::{
    build_chain, sdd_to_laplacian, total_stretch, verify_chain, LaplaxError, Preconditioner, SddMatrix, SolveReport, Solver,
    WeightedGraph,
};
use serde::Serialize;

use crate::config::RunConfig;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input.
    Usage(String),
    /// A resource or iteration cap stopped the run early.
    Cap(String),
    /// An internal invariant check fired.
    Tripwire(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Cap(_) => 2,
            CliError::Tripwire(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Cap(m) | CliError::Tripwire(m) => m,
        }
    }
}

impl From<LaplaxError> for CliError {
    fn from(e: LaplaxError) -> Self {
        match e {
            LaplaxError::Tripwire(_) | LaplaxError::SparsifyExhausted { .. } => CliError::Tripwire(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Matrix Market coordinate file.
    Mm,
    /// `n m` header followed by `u v w` lines.
    Edges,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum GraphKind {
    Grid,
    Torus,
    RandomRegular,
    Ring,
}

fn format_of(path: &str, format: Option<Format>) -> Format {
    format.unwrap_or(if path.ends_with(".mtx") || path.ends_with(".mm") { Format::Mm } else { Format::Edges })
}

fn open(path: &str) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Usage(format!("cannot open {path}: {e}")))
}

fn with_path<T>(path: &str, r: laplax::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        LaplaxError::Parse { .. } => CliError::Usage(format!("{path}: {e}")),
        other => other.into(),
    })
}

pub fn input_path<'a>(arg: &'a Option<String>, cfg: &'a RunConfig) -> CliResult<&'a str> {
    arg.as_deref().or(cfg.input.as_deref()).ok_or_else(|| CliError::Usage("no input file given".into()))
}

pub fn load_matrix(path: &str, format: Option<Format>) -> CliResult<SddMatrix> {
    match format_of(path, format) {
        Format::Mm => with_path(path, SddMatrix::read_matrix_market(open(path)?)),
        Format::Edges => {
            let g = with_path(path, WeightedGraph::read_edge_list(open(path)?))?;
            Ok(SddMatrix::from_laplacian(&g, &vec![0.0; g.n()])?)
        }
    }
}

/// Graph of an input file; a matrix contributes the graph of its Laplacian part.
pub fn load_graph(path: &str, format: Option<Format>) -> CliResult<WeightedGraph> {
    match format_of(path, format) {
        Format::Mm => Ok(sdd_to_laplacian(&load_matrix(path, Some(Format::Mm))?).graph),
        Format::Edges => with_path(path, WeightedGraph::read_edge_list(open(path)?)),
    }
}

/// Writes to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&str>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| CliError::Usage(format!("cannot create {p}: {e}")))?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Tripwire(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub struct GenerateArgs {
    pub kind: GraphKind,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub n: Option<usize>,
    pub degree: Option<usize>,
}

fn need(v: Option<usize>, flag: &str, kind: &str) -> CliResult<usize> {
    v.ok_or_else(|| CliError::Usage(format!("{kind} needs --{flag}")))
}

pub fn generate_graph(args: &GenerateArgs, seed: u64) -> CliResult<WeightedGraph> {
    let at_least = |v: usize, min: usize, what: &str| {
        if v >= min {
            Ok(v)
        } else {
            Err(CliError::Usage(format!("{what} must be at least {min}, got {v}")))
        }
    };
    let g = match args.kind {
        GraphKind::Grid | GraphKind::Torus => {
            let name = if args.kind == GraphKind::Grid { "grid" } else { "torus" };
            let rows = at_least(need(args.rows.or(args.n), "rows", name)?, 2, "rows")?;
            let cols = at_least(args.cols.unwrap_or(rows), 2, "cols")?;
            if args.kind == GraphKind::Grid {
                generators::grid(rows, cols)?
            } else {
                generators::torus(rows, cols)?
            }
        }
        GraphKind::Ring => generators::ring(at_least(need(args.n, "n", "ring")?, 3, "n")?)?,
        GraphKind::RandomRegular => {
            let n = at_least(need(args.n, "n", "random-regular")?, 2, "n")?;
            let d = at_least(args.degree.unwrap_or(3), 3, "degree")?;
            if n * d % 2 != 0 {
                return Err(CliError::Usage(format!("n * degree must be even, got {n} * {d}")));
            }
            if d >= n {
                return Err(CliError::Usage(format!("degree {d} needs more than {n} vertices")));
            }
            generators::random_regular(n, d, seed)?
        }
    };
    Ok(g)
}

pub fn graph_bytes(g: &WeightedGraph, format: Format) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        Format::Edges => g.write_edge_list(&mut out)?,
        Format::Mm => SddMatrix::from_laplacian(g, &vec![0.0; g.n()])?.write_matrix_market(&mut out)?,
    }
    Ok(out)
}

pub fn cmd_generate(args: &GenerateArgs, cfg: &RunConfig, format: Option<Format>) -> CliResult<()> {
    let g = generate_graph(args, cfg.seed)?;
    emit(cfg.output.as_deref(), &graph_bytes(&g, format.unwrap_or(Format::Edges))?)
}

/// Uniform vector in `[-1, 1)^n` drawn from the run seed.
pub fn random_rhs(n: usize, seed: u64) -> Vec<f64> {
    let base = derive_seed(seed, tags::RHS);
    (0..n as u64).map(|i| (splitmix64(base.wrapping_add(i)) >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0).collect()
}

fn read_vector(path: &str, n: usize) -> CliResult<Vec<f64>> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text)?;
    let mut b = Vec::with_capacity(n);
    for (i, line) in text.lines().enumerate() {
        let body = line.split(['#', '%']).next().unwrap_or("");
        for tok in body.split_whitespace() {
            b.push(tok.parse::<f64>().map_err(|_| CliError::Usage(format!("{path}: line {}: bad number {tok:?}", i + 1)))?);
        }
    }
    if b.len() != n {
        return Err(CliError::Usage(format!("{path}: expected {n} values, found {}", b.len())));
    }
    Ok(b)
}

pub fn vector_bytes(x: &[f64]) -> Vec<u8> {
    let mut s = String::with_capacity(24 * x.len());
    for v in x {
        let _ = writeln!(s, "{v:?}");
    }
    s.into_bytes()
}

pub struct SolveArgs {
    pub input: Option<String>,
    pub rhs: String,
    pub report: Option<String>,
    pub chain: Option<String>,
    pub reference: bool,
    pub history: bool,
    pub pcg: Option<Preconditioner>,
}

pub fn cmd_solve(args: &SolveArgs, cfg: &RunConfig, format: Option<Format>, timings: bool) -> CliResult<()> {
    let path = input_path(&args.input, cfg)?;
    let a = load_matrix(path, format)?;
    let b = match args.rhs.as_str() {
        "random" => random_rhs(a.n(), cfg.seed),
        "zero" => vec![0.0; a.n()],
        file => read_vector(file, a.n())?,
    };
    let mut opts = cfg.solve_options();
    opts.reference = args.reference;
    opts.record_history = args.history;
    opts.timings = timings;
    let cached = match &args.chain {
        Some(p) => Some(read_chain(open(p)?)?),
        None => None,
    };
    let solver = Solver::with_chain(&a, &opts, cached)?;
    let (x, report) = match args.pcg {
        Some(pre) => solver.pcg(&b, pre)?,
        None => solver.solve(&b)?,
    };
    emit(cfg.output.as_deref(), &vector_bytes(&x))?;
    let bytes = json(&report)?;
    match &args.report {
        Some(p) => emit(Some(p), &bytes)?,
        None => io::stderr().lock().write_all(&bytes)?,
    }
    check_converged(&report)
}

fn check_converged(report: &SolveReport) -> CliResult<()> {
    if report.converged {
        Ok(())
    } else {
        Err(CliError::Cap(report.diagnostic.clone().unwrap_or_else(|| "iteration cap reached".into())))
    }
}

#[derive(Serialize)]
struct ChainSummary {
    n: usize,
    m: usize,
    depth: usize,
    kinds: Vec<LevelKind>,
    kappas: Vec<f64>,
    edge_counts: Vec<usize>,
    attempts: Vec<usize>,
}

pub fn cmd_chain_build(input: &Option<String>, cfg: &RunConfig, format: Option<Format>) -> CliResult<()> {
    let path = input_path(input, cfg)?;
    let out = cfg.output.as_deref().ok_or_else(|| CliError::Usage("chain build needs --out for the container".into()))?;
    let g = load_graph(path, format)?;
    let chain = build_chain(&g, &cfg.chain())?;
    let mut f = BufWriter::new(File::create(out).map_err(|e| CliError::Usage(format!("cannot create {out}: {e}")))?);
    write_chain(&chain, &mut f)?;
    f.flush()?;
    let summary = ChainSummary {
        n: chain.n(),
        m: chain.m(),
        depth: chain.depth(),
        kinds: chain.levels.iter().map(|l| l.kind).collect(),
        kappas: chain.kappas(),
        edge_counts: chain.edge_counts(),
        attempts: chain.levels.iter().map(|l| l.attempts).collect(),
    };
    emit(None, &json(&summary)?)
}

pub fn cmd_chain_verify(path: &str, cfg: &RunConfig) -> CliResult<()> {
    let chain = read_chain(open(path)?)?;
    let report: ChainReport = verify_chain(&chain);
    emit(cfg.output.as_deref(), &json(&report)?)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<String> = report.conditions.iter().filter(|c| !c.passed).map(|c| c.index.to_string()).collect();
        Err(CliError::Tripwire(format!("chain fails conditions {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct LsstAudit {
    n: usize,
    m: usize,
    off_tree_edges: usize,
    total: f64,
    average: f64,
    max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_edge: Option<Vec<(usize, f64)>>,
}

pub fn cmd_lsst(input: &Option<String>, grid_sweep: &[usize], per_edge: bool, cfg: &RunConfig, format: Option<Format>, timings: bool) -> CliResult<()> {
    if !grid_sweep.is_empty() {
        let mut csv = String::from(if timings { "k,n,m,total,average,max,log2_n_squared,ms\n" } else { "k,n,m,total,average,max,log2_n_squared\n" });
        for &k in grid_sweep {
            let g = generate_graph(&GenerateArgs { kind: GraphKind::Grid, rows: Some(k), cols: Some(k), n: None, degree: None }, cfg.seed)?;
            let start = Instant::now();
            let report = total_stretch(&g, &low_stretch_tree(&g, cfg.seed)?)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let l2 = (g.n() as f64).log2().powi(2);
            let _ = write!(csv, "{k},{},{},{},{},{},{}", g.n(), g.m(), report.total, report.average, report.max, l2);
            if timings {
                let _ = write!(csv, ",{ms:.3}");
            }
            csv.push('\n');
        }
        return emit(cfg.output.as_deref(), csv.as_bytes());
    }
    let path = input_path(input, cfg)?;
    let g = load_graph(path, format)?;
    let report = total_stretch(&g, &low_stretch_tree(&g, cfg.seed)?)?;
    let audit = LsstAudit {
        n: g.n(),
        m: g.m(),
        off_tree_edges: report.per_edge.len(),
        total: report.total,
        average: report.average,
        max: report.max,
        per_edge: per_edge.then_some(report.per_edge),
    };
    emit(cfg.output.as_deref(), &json(&audit)?)
}

pub const BENCH_SCHEMA: &str = "# laplax-bench v1";
pub const BENCH_HEADER: &str = "n,m,build_ms,solve_ms,iterations,edge_touches";

pub struct BenchArgs {
    pub kind: GraphKind,
    pub sizes: Vec<usize>,
    pub degree: usize,
    pub max_edges: Option<usize>,
    pub jobs: usize,
}

struct BenchRow {
    n: usize,
    m: usize,
    build_ms: f64,
    solve_ms: f64,
    iterations: usize,
    work: u64,
    converged: bool,
}

fn bench_case(g: &WeightedGraph, cfg: &RunConfig, seed: u64) -> CliResult<BenchRow> {
    let a = SddMatrix::from_laplacian(g, &vec![0.0; g.n()])?;
    let opts = cfg.solve_options();
    let start = Instant::now();
    let solver = Solver::new(&a, &opts)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let (_, report) = solver.solve(&random_rhs(g.n(), seed))?;
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(BenchRow {
        n: g.n(),
        m: g.m(),
        build_ms,
        solve_ms,
        iterations: report.components.iter().map(|c| c.outer_iterations).sum(),
        work: report.work_total,
        converged: report.converged,
    })
}

/// Sweep CSV; timing columns stay empty unless `timings` is set so that
/// repeated runs give identical files.
pub fn bench_csv(args: &BenchArgs, cfg: &RunConfig, timings: bool) -> CliResult<(String, Option<CliError>)> {
    let mut graphs = Vec::new();
    let mut stop = None;
    for &size in &args.sizes {
        let spec = GenerateArgs { kind: args.kind, rows: Some(size), cols: Some(size), n: Some(size), degree: Some(args.degree) };
        let g = generate_graph(&spec, derive_seed(cfg.seed, size as u64))?;
        if let Some(cap) = args.max_edges {
            if g.m() > cap {
                stop = Some(format!("# cap exceeded: size {size} has {} edges, limit {cap}", g.m()));
                break;
            }
        }
        graphs.push(g);
    }
    let jobs = args.jobs.max(1);
    let mut rows: Vec<Option<CliResult<BenchRow>>> = (0..graphs.len()).map(|_| None).collect();
    for (chunk_idx, chunk) in graphs.chunks(jobs).enumerate() {
        let results: Vec<CliResult<BenchRow>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let seed = derive_seed(cfg.seed, (chunk_idx * jobs + i) as u64);
                    s.spawn(move || bench_case(g, cfg, seed))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Tripwire("bench case panicked".into())))).collect()
        });
        for (i, r) in results.into_iter().enumerate() {
            rows[chunk_idx * jobs + i] = Some(r);
        }
    }
    let mut csv = format!("{BENCH_SCHEMA}\n{BENCH_HEADER}\n");
    let mut unconverged = Vec::new();
    for row in rows.into_iter().flatten() {
        let row = row?;
        let (b, s) = if timings { (format!("{:.3}", row.build_ms), format!("{:.3}", row.solve_ms)) } else { (String::new(), String::new()) };
        let _ = writeln!(csv, "{},{},{b},{s},{},{}", row.n, row.m, row.iterations, row.work);
        if !row.converged {
            unconverged.push(row.n);
        }
    }
    let failure = if let Some(marker) = stop {
        csv.push_str(&marker);
        csv.push('\n');
        Some(CliError::Cap(marker.trim_start_matches("# ").to_string()))
    } else if !unconverged.is_empty() {
        Some(CliError::Cap(format!("iteration cap reached for n = {unconverged:?}")))
    } else {
        None
    };
    Ok((csv, failure))
}

pub fn cmd_bench(args: &BenchArgs, cfg: &RunConfig, timings: bool) -> CliResult<()> {
    let (csv, failure) = bench_csv(args, cfg, timings)?;
    emit(cfg.output.as_deref(), csv.as_bytes())?;
    failure.map_or(Ok(()), Err)
}
