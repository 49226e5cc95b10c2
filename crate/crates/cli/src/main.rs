//! `laplax`: generate graphs, build and check preconditioner chains, solve
//! SDD systems and run scaling sweeps.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use laplax::Preconditioner;

use commands::{BenchArgs, CliError, CliResult, Format, GenerateArgs, GraphKind, SolveArgs};
use config::RunConfig;

#[derive(Parser)]
#[command(name = "laplax", version, about = "Near-linear time SDD solver")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every subcommand. Each also reads `LAPLAX_<KEY>` and
/// the `--config` file; flags take precedence.
#[derive(Args)]
struct Global {
    /// `key = value` configuration file (also `LAPLAX_CONFIG`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Target relative A-norm error.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Oversampling constant.
    #[arg(long = "cs", global = true)]
    c_s: Option<f64>,
    #[arg(long, global = true)]
    kappa_c: Option<f64>,
    #[arg(long, global = true)]
    c_stop: Option<usize>,
    #[arg(long, global = true)]
    c1: Option<f64>,
    #[arg(long, global = true)]
    c_r: Option<f64>,
    #[arg(long, global = true)]
    retries: Option<usize>,
    /// Cap on top-level iterations; hitting it exits with code 2.
    #[arg(long, global = true)]
    max_iterations: Option<usize>,
    /// Primary output file (stdout when absent).
    #[arg(long, short = 'o', global = true)]
    out: Option<String>,
    /// Graph or matrix file format (default: by extension, `.mtx` is Matrix Market).
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Record wall-clock times in reports and sweeps.
    #[arg(long, global = true)]
    timings: bool,
}

impl Global {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let mut push = |k: &'static str, x: Option<String>| {
            if let Some(x) = x {
                v.push((k, x));
            }
        };
        push("seed", self.seed.map(|x| x.to_string()));
        push("eps", self.eps.map(|x| format!("{x:?}")));
        push("cs", self.c_s.map(|x| format!("{x:?}")));
        push("kappa_c", self.kappa_c.map(|x| format!("{x:?}")));
        push("c_stop", self.c_stop.map(|x| x.to_string()));
        push("c1", self.c1.map(|x| format!("{x:?}")));
        push("c_r", self.c_r.map(|x| format!("{x:?}")));
        push("retries", self.retries.map(|x| x.to_string()));
        push("max_iterations", self.max_iterations.map(|x| x.to_string()));
        push("output", self.out.clone());
        v
    }

    fn run_config(&self) -> CliResult<RunConfig> {
        let path = self.config.clone().or_else(|| std::env::var_os("LAPLAX_CONFIG").map(PathBuf::from));
        let text = match path {
            Some(p) => Some(
                std::fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?,
            ),
            None => None,
        };
        RunConfig::layered(text.as_deref(), |k| std::env::var(k).ok(), self.flag_pairs()).map_err(CliError::Usage)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list (or Matrix Market with `--format mm`).
    Generate {
        #[arg(value_enum)]
        kind: GraphKind,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Solve `A x = b`; the solution goes to `--out`, the JSON report to `--report` (stderr otherwise).
    Solve {
        input: Option<String>,
        /// File of values, `random` (seeded) or `zero`.
        #[arg(long, default_value = "random")]
        rhs: String,
        #[arg(long)]
        report: Option<String>,
        /// Reuse a chain container written by `chain build`.
        #[arg(long)]
        chain: Option<String>,
        /// Also compute the A-norm error against a dense solve (n <= 2000).
        #[arg(long)]
        reference: bool,
        /// Keep the residual history in the report.
        #[arg(long)]
        history: bool,
        /// Run conjugate gradients with this preconditioner (none, jacobi, chain) instead.
        #[arg(long)]
        pcg: Option<Preconditioner>,
    },
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Audit a low-stretch spanning tree, or tabulate a grid sweep.
    Lsst {
        input: Option<String>,
        /// Grid sides to audit as CSV instead of reading a file.
        #[arg(long, value_delimiter = ',')]
        grid_sweep: Vec<usize>,
        /// Include per-edge stretches.
        #[arg(long)]
        per_edge: bool,
    },
    /// Build-and-solve sweep written as CSV.
    Bench {
        #[arg(long, value_enum, default_value = "grid")]
        kind: GraphKind,
        /// Grid or torus side, or vertex count for rings and random-regular graphs.
        #[arg(long, default_value = "32,64,128,256")]
        sizes: String,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        /// Stop before any case with more edges, leaving a marker row.
        #[arg(long)]
        max_edges: Option<usize>,
        /// Cases run concurrently (each case is single threaded).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the effective configuration in the config file format.
    Config,
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Build a chain for a connected graph and write the container to `--out`.
    Build { input: Option<String> },
    /// Re-check the good-chain conditions of a container.
    Verify { chain: String },
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = cli.global.run_config()?;
    let g = &cli.global;
    match cli.command {
        Command::Config => commands::emit(None, cfg.to_file_string().as_bytes()),
        Command::Generate { kind, rows, cols, n, degree } => {
            commands::cmd_generate(&GenerateArgs { kind, rows, cols, n, degree }, &cfg, g.format)
        }
        Command::Solve { input, rhs, report, chain, reference, history, pcg } => commands::cmd_solve(
            &SolveArgs { input, rhs, report, chain, reference, history, pcg },
            &cfg,
            g.format,
            g.timings,
        ),
        Command::Chain(ChainCommand::Build { input }) => commands::cmd_chain_build(&input, &cfg, g.format),
        Command::Chain(ChainCommand::Verify { chain }) => commands::cmd_chain_verify(&chain, &cfg),
        Command::Lsst { input, grid_sweep, per_edge } => {
            commands::cmd_lsst(&input, &grid_sweep, per_edge, &cfg, g.format, g.timings)
        }
        Command::Bench { kind, sizes, degree, max_edges, jobs } => {
            let sizes = sizes
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| CliError::Usage(format!("bad size {s:?} in --sizes"))))
                .collect::<CliResult<Vec<usize>>>()?;
            commands::cmd_bench(&BenchArgs { kind, sizes, degree, max_edges, jobs }, &cfg, g.timings)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("laplax: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
