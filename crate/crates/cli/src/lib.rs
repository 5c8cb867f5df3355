//! Benchmark harness behind the `qvibench` binary.
//!
//! Every command returns `Result<(), CliError>`; [`CliError::exit_code`]
//! maps failures onto the stable exit codes (2 usage/config, 3 I/O).

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use qvi_core::metrics::{
    log_grid, performance_ratios, profile_curve, rate_report, Metric, ProfileCurve, RateReport,
    RunRecord,
};
use qvi_core::problems::{builtin_suite, load_problem, reference_solution};
use qvi_core::{solve, Algorithm, ContractionParams, QviProblem, Schedule, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Upper bound on worker threads.
pub const MAX_JOBS: usize = 256;

pub const CSV_HEADER: &str = "problem,start_id,solver,iters,time_ms,opt,feas,status,eoc";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<qvi_core::Error> for CliError {
    fn from(e: qvi_core::Error) -> Self {
        match e {
            qvi_core::Error::Io { .. } => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Parameter overrides applied uniformly to every solver.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub gamma: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl Overrides {
    pub fn config_for(&self, algorithm: Algorithm) -> SolverConfig {
        let mut c = SolverConfig::paper_defaults(algorithm);
        if let Some(g) = self.gamma {
            c.gamma = g;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(n) = self.max_iter {
            c.max_iter = n;
        }
        if let Some(t) = self.theta {
            c.theta = Schedule::constant(t);
        }
        if let Some(a) = self.alpha {
            c.alpha = Schedule::constant(a);
        }
        if let Some(b) = self.beta {
            c.beta_sched = Schedule::constant(b);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// Paths, builtin problem names, or `builtin` for the whole suite.
    pub problems: Vec<String>,
    /// Solver tags, or `all`.
    pub solvers: Vec<String>,
    pub overrides: Overrides,
    /// `None` writes to stdout.
    pub output: Option<PathBuf>,
    pub format: Format,
    pub jobs: usize,
}

/// Resolves problem arguments: `builtin`, a builtin problem name, or a file path.
pub fn resolve_problems(specs: &[String]) -> CliResult<Vec<QviProblem>> {
    if specs.is_empty() {
        return Err(CliError::Usage("at least one problem is required".into()));
    }
    let mut out = Vec::new();
    for spec in specs {
        if spec == "builtin" {
            out.extend(builtin_suite());
            continue;
        }
        let path = Path::new(spec);
        if !path.exists() {
            if let Some(p) = builtin_suite().into_iter().find(|p| p.name() == spec) {
                out.push(p);
                continue;
            }
        }
        out.push(load_problem(path).map_err(|e| match e {
            qvi_core::Error::Io { .. } => CliError::Usage(format!(
                "cannot read problem `{spec}` (not a file or builtin problem name): {e}"
            )),
            other => CliError::Usage(format!("{spec}: {other}")),
        })?);
    }
    Ok(out)
}

pub fn resolve_solvers(tags: &[String]) -> CliResult<Vec<Algorithm>> {
    if tags.is_empty() {
        return Err(CliError::Usage("at least one solver is required".into()));
    }
    let mut out = Vec::new();
    for tag in tags {
        if tag == "all" {
            out.extend(Algorithm::ALL);
            continue;
        }
        let a: Algorithm = tag.parse().map_err(|_| {
            let known: Vec<&str> = Algorithm::ALL.iter().map(|a| a.tag()).collect();
            CliError::Usage(format!(
                "unknown solver tag `{tag}` (expected one of: {}, all)",
                known.join(", ")
            ))
        })?;
        out.push(a);
    }
    Ok(out)
}

/// Runs every (problem × start × solver) cell. Rows come back in that
/// canonical order regardless of `jobs`.
pub fn run_benchmark(
    problems: &[QviProblem],
    solvers: &[Algorithm],
    overrides: &Overrides,
    jobs: usize,
) -> CliResult<Vec<RunRecord>> {
    if !(1..=MAX_JOBS).contains(&jobs) {
        return Err(CliError::Usage(format!(
            "jobs must be between 1 and {MAX_JOBS}, got {jobs}"
        )));
    }
    let configs: Vec<SolverConfig> = solvers.iter().map(|&a| overrides.config_for(a)).collect();
    for c in &configs {
        c.validate()
            .map_err(|e| CliError::Usage(format!("solver {}: {e}", c.algorithm)))?;
    }
    let cells: Vec<(&QviProblem, usize, &SolverConfig)> = problems
        .iter()
        .flat_map(|p| {
            let configs = &configs;
            (0..p.starts().len()).flat_map(move |s| configs.iter().map(move |c| (p, s, c)))
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<CliResult<RunRecord>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, s, c)| {
                let trace = solve(p, c, &p.starts()[s]).map_err(|e| {
                    CliError::Usage(format!("{} start {s} with {}: {e}", p.name(), c.algorithm))
                })?;
                Ok(RunRecord::from_trace(p.name(), s, c.algorithm.tag(), &trace))
            })
            .collect()
    });
    results.into_iter().collect()
}

pub fn write_records(records: &[RunRecord], format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in records {
                w.serialize(r)?;
            }
            if records.is_empty() {
                w.write_record(CSV_HEADER.split(','))?;
            }
            w.flush()
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, records)?;
            writeln!(out)
        }
    }
}

/// Parses results written by [`write_records`] (CSV or JSON, detected from content).
pub fn read_records(text: &str) -> CliResult<Vec<RunRecord>> {
    let malformed = |e: &dyn std::fmt::Display| CliError::Usage(format!("malformed results: {e}"));
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| malformed(&e));
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| malformed(&e))?;
    let header: Vec<&str> = header.iter().collect();
    if header.join(",") != CSV_HEADER {
        return Err(CliError::Usage(format!(
            "malformed results: expected header `{CSV_HEADER}`, found `{}`",
            header.join(",")
        )));
    }
    rdr.deserialize()
        .collect::<Result<Vec<RunRecord>, _>>()
        .map_err(|e| malformed(&e))
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> CliResult<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn cmd_run(manifest: &RunManifest) -> CliResult<()> {
    let solvers = resolve_solvers(&manifest.solvers)?;
    let problems = resolve_problems(&manifest.problems)?;
    let records = run_benchmark(&problems, &solvers, &manifest.overrides, manifest.jobs)?;
    with_output(manifest.output.as_deref(), |w| {
        write_records(&records, manifest.format, w)
    })
}

/// Profile curves on a log-spaced grid over `[1, max finite ratio]`,
/// refined with every finite ratio so the step points are exact.
pub fn profile_curves(records: &[RunRecord], metric: Metric) -> CliResult<(Vec<ProfileCurve>, Vec<String>)> {
    let table = performance_ratios(records, metric)?;
    let warnings = table
        .excluded
        .iter()
        .map(|(p, s)| format!("warning: every solver failed on {p} start {s}; instance excluded"))
        .collect();
    let mut grid = log_grid(table.max_finite_ratio(), 50);
    grid.extend(table.ratios.iter().flatten().copied().filter(|r| r.is_finite()));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let curves = table
        .solvers
        .iter()
        .map(|s| profile_curve(&table, s, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((curves, warnings))
}

pub fn write_profile_csv(curves: &[ProfileCurve], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "solver,T,rho")?;
    for c in curves {
        for (t, rho) in &c.points {
            writeln!(out, "{},{},{}", c.solver, t, rho)?;
        }
    }
    Ok(())
}

/// One block per solver, separated by two blank lines (gnuplot `index`).
pub fn write_profile_gnuplot(curves: &[ProfileCurve], out: &mut dyn Write) -> io::Result<()> {
    for (i, c) in curves.iter().enumerate() {
        if i > 0 {
            writeln!(out, "\n")?;
        }
        writeln!(out, "# {}", c.solver)?;
        writeln!(out, "# T rho")?;
        for (t, rho) in &c.points {
            writeln!(out, "{t} {rho}")?;
        }
    }
    Ok(())
}

pub fn cmd_profile(
    results: &Path,
    metric: Metric,
    out: Option<&Path>,
    gnuplot: Option<&Path>,
    warn: &mut dyn Write,
) -> CliResult<()> {
    let mut text = String::new();
    File::open(results)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| io_err(results, e))?;
    let records = read_records(&text)?;
    let (curves, warnings) = profile_curves(&records, metric)?;
    for w in warnings {
        writeln!(warn, "{w}").map_err(|e| CliError::Io(e.to_string()))?;
    }
    with_output(out, |w| write_profile_csv(&curves, w))?;
    if let Some(g) = gnuplot {
        with_output(Some(g), |w| write_profile_gnuplot(&curves, w))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRequest {
    pub problem: String,
    pub solver: String,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    pub problem: String,
    pub solver: String,
    pub gamma: f64,
    pub theta: f64,
    pub beta: f64,
    pub gamma_interval: (f64, f64),
    pub rho_theoretical: f64,
    /// Largest fitted rate over all starts.
    pub rho_empirical: f64,
    /// Total over all starts.
    pub bound_violations: usize,
    pub geometric_violations_v0: usize,
    pub geometric_violations_x0: usize,
    pub worst_case_factor: f64,
    pub max_step_ratio: f64,
    /// Largest over starts; `None` if some start never reached the noise floor.
    pub converged_iters: Option<usize>,
    pub per_start: Vec<RateReport>,
}

pub fn rate_summary(req: &RateRequest) -> CliResult<RateSummary> {
    let algorithm: Algorithm = resolve_solvers(std::slice::from_ref(&req.solver))?[0];
    if algorithm != Algorithm::Proposed {
        return Err(CliError::Usage(format!(
            "rate verification applies to the `proposed` solver only, got `{}`",
            req.solver
        )));
    }
    if req.max_iter < qvi_core::metrics::MIN_RECORDS {
        return Err(CliError::Usage(format!(
            "max-iter must be at least {}",
            qvi_core::metrics::MIN_RECORDS
        )));
    }
    let problem = resolve_problems(std::slice::from_ref(&req.problem))?
        .into_iter()
        .next()
        .ok_or_else(|| CliError::Usage(format!("no problem named `{}`", req.problem)))?;
    let cert = problem.certified().ok_or_else(|| {
        CliError::Usage(format!(
            "problem `{}` has no certified parameters; add `gamma` and `theta` ([a, b]) to the problem file",
            problem.name()
        ))
    })?;
    let gamma = req.gamma.unwrap_or(cert.gamma);
    let (theta, a, b) = match req.theta {
        Some(t) => (t, t, t),
        None => (cert.a, cert.a, cert.b),
    };
    let params = ContractionParams::new(cert.mu, cert.lip, cert.lambda, gamma, a, b)?;
    let rho = params.rho();
    let x_star = match problem.reference() {
        Some(r) => r.clone(),
        None => reference_solution(&problem, 1e-13)?,
    };

    let config = SolverConfig::paper_defaults(Algorithm::Proposed)
        .with_gamma(gamma)
        .with_theta(Schedule::constant(theta))
        .with_max_iter(req.max_iter)
        .running_to_max_iter();
    let mut per_start = Vec::new();
    for start in problem.starts() {
        let trace = solve(&problem, &config, start)?;
        per_start.push(rate_report(&trace, &x_star, &params)?);
    }
    let max = |f: fn(&RateReport) -> f64| per_start.iter().map(f).fold(0.0, f64::max);
    Ok(RateSummary {
        problem: problem.name().to_string(),
        solver: algorithm.tag().to_string(),
        gamma,
        theta,
        beta: params.beta(),
        gamma_interval: params.gamma_interval(),
        rho_theoretical: rho,
        rho_empirical: max(|r| r.rho_empirical),
        bound_violations: per_start.iter().map(|r| r.bound_violations).sum(),
        geometric_violations_v0: per_start.iter().map(|r| r.geometric_violations_v0).sum(),
        geometric_violations_x0: per_start.iter().map(|r| r.geometric_violations_x0).sum(),
        worst_case_factor: max(|r| r.worst_case_factor),
        max_step_ratio: max(|r| r.max_step_ratio),
        converged_iters: per_start
            .iter()
            .map(|r| r.converged_iters)
            .collect::<Option<Vec<_>>>()
            .and_then(|v| v.into_iter().max()),
        per_start,
    })
}

pub fn cmd_rate(req: &RateRequest, out: &mut dyn Write) -> CliResult<()> {
    let summary = rate_summary(req)?;
    serde_json::to_writer_pretty(&mut *out, &summary)
        .map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).map_err(|e| CliError::Io(e.to_string()))
}

/// One catalog row per builtin problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogRow {
    pub name: String,
    pub n: usize,
    pub lambda: f64,
    pub mu: f64,
    pub lip: f64,
    /// Admissible γ interval intersected with (0, ∞).
    pub gamma_lo: f64,
    pub gamma_hi: f64,
    pub starts: usize,
}

pub fn catalog() -> Vec<CatalogRow> {
    builtin_suite()
        .iter()
        .map(|p| {
            let op = p.operator();
            let (lo, hi) =
                qvi_core::params::gamma_interval(op.mu(), op.lip(), p.lambda()).unwrap_or((f64::NAN, f64::NAN));
            CatalogRow {
                name: p.name().to_string(),
                n: p.dim(),
                lambda: p.lambda(),
                mu: op.mu(),
                lip: op.lip(),
                gamma_lo: lo.max(0.0),
                gamma_hi: hi,
                starts: p.starts().len(),
            }
        })
        .collect()
}

pub fn cmd_list(out: &mut dyn Write) -> CliResult<()> {
    let io = |e: io::Error| CliError::Io(e.to_string());
    writeln!(
        out,
        "{:<20} {:>4} {:>7} {:>8} {:>8} {:>20} {:>6}",
        "problem", "n", "lambda", "mu", "L", "gamma interval", "starts"
    )
    .map_err(io)?;
    for r in catalog() {
        writeln!(
            out,
            "{:<20} {:>4} {:>7.4} {:>8.4} {:>8.4} {:>20} {:>6}",
            r.name,
            r.n,
            r.lambda,
            r.mu,
            r.lip,
            format!("({:.4}, {:.4})", r.gamma_lo, r.gamma_hi),
            r.starts
        )
        .map_err(io)?;
    }
    Ok(())
}
