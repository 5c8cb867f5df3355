use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qvi_core::metrics::Metric;
use qvibench::{
    cmd_list, cmd_profile, cmd_rate, cmd_run, CliError, Format, Overrides, RateRequest,
    RunManifest, MAX_JOBS,
};

#[derive(Parser)]
#[command(name = "qvibench", version, about = "Benchmark harness for QVI projection solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Iters,
    Time,
}

#[derive(Subcommand)]
enum Command {
    /// Run solvers on problems and write one row per (problem, start, solver).
    Run {
        /// Problem files, builtin problem names, or `builtin` for the whole suite.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        problems: Vec<String>,
        /// Solver tags (proposed, gradproj, extragrad, relaxed1, relaxed2, inertial-relaxed) or `all`.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        solvers: Vec<String>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        /// Constant inertial parameter (overrides the default schedule).
        #[arg(long)]
        theta: Option<f64>,
        /// Constant relaxation parameter.
        #[arg(long)]
        alpha: Option<f64>,
        /// Constant inner relaxation parameter (relaxed2).
        #[arg(long)]
        beta: Option<f64>,
        /// Worker threads (default: available parallelism).
        #[arg(long, env = "QVIBENCH_JOBS")]
        jobs: Option<usize>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Performance profiles from a results file.
    Profile {
        #[arg(long, value_enum, default_value = "iters")]
        metric: MetricArg,
        results: PathBuf,
        /// Profile CSV output (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a gnuplot data file (one block per solver).
        #[arg(long)]
        gnuplot: Option<PathBuf>,
    },
    /// Check the linear-rate bound on one problem and print a JSON report.
    Rate {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value = "proposed")]
        solver: String,
        #[arg(long)]
        gamma: Option<f64>,
        /// Constant inertial parameter.
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
    },
    /// List the builtin problems.
    List,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            problems,
            solvers,
            gamma,
            tol,
            max_iter,
            theta,
            alpha,
            beta,
            jobs,
            out,
            format,
        } => {
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get().min(MAX_JOBS))
                    .unwrap_or(1)
            });
            cmd_run(&RunManifest {
                problems,
                solvers,
                overrides: Overrides {
                    gamma,
                    tol,
                    max_iter,
                    theta,
                    alpha,
                    beta,
                },
                output: out,
                format: match format {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                },
                jobs,
            })
        }
        Command::Profile {
            metric,
            results,
            out,
            gnuplot,
        } => {
            let metric = match metric {
                MetricArg::Iters => Metric::Iters,
                MetricArg::Time => Metric::Time,
            };
            cmd_profile(&results, metric, out.as_deref(), gnuplot.as_deref(), &mut io::stderr())
        }
        Command::Rate {
            problem,
            solver,
            gamma,
            theta,
            max_iter,
        } => cmd_rate(
            &RateRequest {
                problem,
                solver,
                gamma,
                theta,
                max_iter,
            },
            &mut io::stdout(),
        ),
        Command::List => cmd_list(&mut io::stdout()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
