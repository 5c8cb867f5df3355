//! Benchmark records, performance ratios and performance profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{IterationTrace, Status};

use super::eoc::eoc;

/// Smallest time (ms) used when forming ratios, so instant runs do not divide by zero.
pub const TIME_FLOOR_MS: f64 = 1e-6;

/// Outcome of one (problem, start, solver) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem: String,
    pub start_id: usize,
    pub solver: String,
    pub iters: usize,
    pub time_ms: f64,
    #[serde(rename = "opt")]
    pub final_opt: f64,
    #[serde(rename = "feas")]
    pub final_feas: f64,
    pub status: Status,
    /// NaN when undefined (written as `NaN` in CSV, `null` in JSON).
    #[serde(deserialize_with = "number_or_nan")]
    pub eoc: f64,
}

fn number_or_nan<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl RunRecord {
    pub fn from_trace(problem: &str, start_id: usize, solver: &str, trace: &IterationTrace) -> Self {
        let last = trace.last();
        RunRecord {
            problem: problem.to_string(),
            start_id,
            solver: solver.to_string(),
            iters: trace.iterations,
            time_ms: trace.elapsed().as_secs_f64() * 1e3,
            final_opt: last.opt,
            final_feas: last.feas,
            status: trace.status,
            eoc: eoc(trace).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    Iters,
    Time,
}

/// `r[s][i] = t[s][i] / min_s' t[s'][i]`, failures at +∞.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTable {
    pub solvers: Vec<String>,
    /// Instances kept, as (problem, start_id).
    pub instances: Vec<(String, usize)>,
    /// Row per solver, column per kept instance.
    pub ratios: Vec<Vec<f64>>,
    /// Instances on which every solver failed.
    pub excluded: Vec<(String, usize)>,
}

impl RatioTable {
    pub fn ratios_for(&self, solver: &str) -> Option<&[f64]> {
        let s = self.solvers.iter().position(|x| x == solver)?;
        Some(&self.ratios[s])
    }

    /// Largest finite ratio (at least 1).
    pub fn max_finite_ratio(&self) -> f64 {
        self.ratios
            .iter()
            .flatten()
            .copied()
            .filter(|r| r.is_finite())
            .fold(1.0, f64::max)
    }
}

fn cost(record: &RunRecord, metric: Metric) -> f64 {
    if record.status != Status::SolvedToTol {
        return f64::INFINITY;
    }
    match metric {
        // a run that starts at the solution still counts as one unit of work
        Metric::Iters => (record.iters.max(1)) as f64,
        Metric::Time => record.time_ms.max(TIME_FLOOR_MS),
    }
}

/// Builds the ratio table. Every (solver, instance) pair must appear exactly once.
pub fn performance_ratios(records: &[RunRecord], metric: Metric) -> Result<RatioTable> {
    let mut solvers: Vec<String> = Vec::new();
    let mut instances: Vec<(String, usize)> = Vec::new();
    for r in records {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
        let inst = (r.problem.clone(), r.start_id);
        if !instances.contains(&inst) {
            instances.push(inst);
        }
    }
    if instances.is_empty() {
        return Err(Error::EmptyInstanceSet);
    }

    let mut t = vec![vec![None; instances.len()]; solvers.len()];
    for r in records {
        let s = solvers.iter().position(|x| *x == r.solver).unwrap();
        let i = instances
            .iter()
            .position(|(p, id)| *p == r.problem && *id == r.start_id)
            .unwrap();
        if t[s][i].is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate record for solver `{}` on {}#{}",
                r.solver, r.problem, r.start_id
            )));
        }
        t[s][i] = Some(cost(r, metric));
    }
    for (s, row) in t.iter().enumerate() {
        if let Some(i) = row.iter().position(Option::is_none) {
            return Err(Error::InvalidParameter(format!(
                "missing record for solver `{}` on {}#{}",
                solvers[s], instances[i].0, instances[i].1
            )));
        }
    }

    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, inst) in instances.into_iter().enumerate() {
        let col: Vec<f64> = t.iter().map(|row| row[i].unwrap()).collect();
        let best = col.iter().copied().fold(f64::INFINITY, f64::min);
        if best.is_infinite() {
            excluded.push(inst);
            continue;
        }
        columns.push(col.iter().map(|&c| c / best).collect());
        kept.push(inst);
    }
    let ratios = (0..solvers.len())
        .map(|s| columns.iter().map(|col| col[s]).collect())
        .collect();
    Ok(RatioTable {
        solvers,
        instances: kept,
        ratios,
        excluded,
    })
}

/// One solver's `ρ_s(T)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub solver: String,
    pub points: Vec<(f64, f64)>,
}

/// `ρ_s(T) = |{i : r_{s,i} ≤ T}| / |I|` on each grid point.
pub fn profile_curve(table: &RatioTable, solver: &str, grid: &[f64]) -> Result<ProfileCurve> {
    if table.instances.is_empty() {
        return Err(Error::EmptyInstanceSet);
    }
    let ratios = table
        .ratios_for(solver)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown solver `{solver}`")))?;
    if grid.iter().any(|&t| !(t >= 1.0)) || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter(
            "grid must be sorted with every T >= 1".into(),
        ));
    }
    let n = ratios.len() as f64;
    let points = grid
        .iter()
        .map(|&t| (t, ratios.iter().filter(|&&r| r <= t).count() as f64 / n))
        .collect();
    Ok(ProfileCurve {
        solver: solver.to_string(),
        points,
    })
}

/// `n` log-spaced points from 1 to `max` (just `[1]` when `max ≤ 1`).
pub fn log_grid(max: f64, n: usize) -> Vec<f64> {
    if !(max > 1.0) || n < 2 {
        return vec![1.0];
    }
    let top = max.ln();
    let mut grid: Vec<f64> = (0..n)
        .map(|j| (top * j as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = 1.0;
    grid[n - 1] = max;
    grid
}
