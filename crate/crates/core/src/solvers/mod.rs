//! The inertial projection method and five baseline projection methods,
//! sharing configuration, termination and tracing.

mod baselines;
mod proposed;

pub use baselines::{
    solve_extragradient, solve_gradient_projection, solve_inertial_relaxed, solve_relaxed1,
    solve_relaxed2,
};
pub use proposed::{extrapolate, solve_proposed};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::metrics::{feas_measure, opt_measure};
use crate::problems::QviProblem;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const DEFAULT_GAMMA: f64 = 0.5;
/// Iterates with norm above this are treated as divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// A parameter sequence indexed by the iteration counter `k ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Schedule {
    Constant { value: f64 },
    /// `(p·k + q) / (r·k + s)`.
    Rational { p: f64, q: f64, r: f64, s: f64 },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn rational(p: f64, q: f64, r: f64, s: f64) -> Self {
        Schedule::Rational { p, q, r, s }
    }

    pub fn at(&self, k: usize) -> f64 {
        match *self {
            Schedule::Constant { value } => value,
            Schedule::Rational { p, q, r, s } => {
                let k = k as f64;
                (p * k + q) / (r * k + s)
            }
        }
    }

    /// Checks `lo ≤ f(k) ≤ hi` (or `<` at an open end) for `k ∈ 0..=max_k`.
    fn check_range(&self, name: &str, max_k: usize, lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> Result<()> {
        let samples: Box<dyn Iterator<Item = usize>> = match self {
            Schedule::Constant { .. } => Box::new(std::iter::once(0)),
            Schedule::Rational { .. } => Box::new(0..=max_k),
        };
        for k in samples {
            let v = self.at(k);
            let above = if lo_open { v > lo } else { v >= lo };
            let below = if hi_open { v < hi } else { v <= hi };
            if !(v.is_finite() && above && below) {
                return Err(Error::InvalidParameter(format!(
                    "{name}_{k} = {v} outside {}{lo}, {hi}{}",
                    if lo_open { '(' } else { '[' },
                    if hi_open { ')' } else { ']' },
                )));
            }
        }
        Ok(())
    }

    /// `min f(k)` and `max f(k)` over `k ∈ 0..=max_k`.
    pub fn range(&self, max_k: usize) -> (f64, f64) {
        match *self {
            Schedule::Constant { value } => (value, value),
            Schedule::Rational { .. } => (0..=max_k)
                .map(|k| self.at(k))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Proposed,
    GradProj,
    ExtraGrad,
    Relaxed1,
    Relaxed2,
    InertialRelaxed,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Proposed,
        Algorithm::GradProj,
        Algorithm::ExtraGrad,
        Algorithm::Relaxed1,
        Algorithm::Relaxed2,
        Algorithm::InertialRelaxed,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Algorithm::Proposed => "proposed",
            Algorithm::GradProj => "gradproj",
            Algorithm::ExtraGrad => "extragrad",
            Algorithm::Relaxed1 => "relaxed1",
            Algorithm::Relaxed2 => "relaxed2",
            Algorithm::InertialRelaxed => "inertial-relaxed",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown solver tag `{s}`")))
    }
}

/// Algorithm choice plus step size, parameter schedules and stopping rule.
///
/// `theta` is the inertial parameter (Proposed, InertialRelaxed), `alpha`
/// the relaxation (Relaxed1/2, InertialRelaxed) and `beta_sched` the inner
/// relaxation of Relaxed2. Unused schedules are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub gamma: f64,
    pub theta: Schedule,
    pub alpha: Schedule,
    pub beta_sched: Schedule,
    pub tol: f64,
    pub max_iter: usize,
    /// Ignore the tolerance test and always run `max_iter` iterations.
    pub run_to_max_iter: bool,
}

impl SolverConfig {
    /// The published experimental settings: `γ = 0.5`,
    /// `θ_k = k/(5(k+1))`, `α_k = 1/(k+1)`, `β_k = 3k/(7k+9)`.
    pub fn paper_defaults(algorithm: Algorithm) -> Self {
        let theta = Schedule::rational(1.0, 0.0, 5.0, 5.0);
        let alpha = Schedule::rational(0.0, 1.0, 1.0, 1.0);
        let (theta, alpha, beta_sched) = match algorithm {
            Algorithm::Proposed => (theta, Schedule::constant(1.0), Schedule::constant(0.0)),
            Algorithm::GradProj | Algorithm::ExtraGrad => {
                (Schedule::constant(0.0), Schedule::constant(1.0), Schedule::constant(0.0))
            }
            Algorithm::Relaxed1 => (Schedule::constant(0.0), alpha, Schedule::constant(0.0)),
            Algorithm::Relaxed2 => (
                Schedule::constant(0.0),
                alpha,
                Schedule::rational(3.0, 0.0, 7.0, 9.0),
            ),
            Algorithm::InertialRelaxed => (theta, alpha, Schedule::constant(0.0)),
        };
        SolverConfig {
            algorithm,
            gamma: DEFAULT_GAMMA,
            theta,
            alpha,
            beta_sched,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            run_to_max_iter: false,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_theta(mut self, theta: Schedule) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_alpha(mut self, alpha: Schedule) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: Schedule) -> Self {
        self.beta_sched = beta;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn running_to_max_iter(mut self) -> Self {
        self.run_to_max_iter = true;
        self
    }

    /// Checks γ > 0, tol > 0 and the schedule ranges each algorithm needs.
    ///
    /// θ for the inertial methods may be 0 (the published schedule starts at
    /// `θ₀ = 0`); it must stay below 1.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} must be positive and finite",
                self.gamma
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
        }
        let n = self.max_iter;
        match self.algorithm {
            Algorithm::Proposed => self.theta.check_range("theta", n, 0.0, false, 1.0, true),
            Algorithm::GradProj | Algorithm::ExtraGrad => Ok(()),
            Algorithm::Relaxed1 => self.alpha.check_range("alpha", n, 0.0, true, 1.0, false),
            Algorithm::Relaxed2 => {
                self.alpha.check_range("alpha", n, 0.0, true, 1.0, false)?;
                self.beta_sched.check_range("beta", n, 0.0, false, 1.0, false)
            }
            Algorithm::InertialRelaxed => {
                self.theta.check_range("theta", n, 0.0, false, 1.0, true)?;
                self.alpha.check_range("alpha", n, 0.0, true, 1.0, false)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    SolvedToTol,
    MaxIterReached,
    Diverged,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::SolvedToTol => "SolvedToTol",
            Status::MaxIterReached => "MaxIterReached",
            Status::Diverged => "Diverged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SolvedToTol" => Ok(Status::SolvedToTol),
            "MaxIterReached" => Ok(Status::MaxIterReached),
            "Diverged" => Ok(Status::Diverged),
            _ => Err(Error::InvalidParameter(format!("unknown status `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vector,
    /// Averaged sequence `z_k` (Proposed only).
    pub z: Option<Vector>,
    /// `‖x_k − x_{k−1}‖` (for the first record: distance to the start).
    pub step_norm: f64,
    pub opt: f64,
    pub feas: f64,
    /// Time since the solve started.
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub algorithm: Algorithm,
    pub records: Vec<IterationRecord>,
    pub status: Status,
    /// Number of iterations performed (projection steps for Proposed,
    /// updates after the starting point for the baselines).
    pub iterations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("traces are never empty")
    }

    /// The reported solution: the final `x_k`.
    pub fn solution(&self) -> &Vector {
        &self.last().x
    }

    pub fn step_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step_norm).collect()
    }

    pub fn elapsed(&self) -> Duration {
        self.last().elapsed
    }
}

/// Optimality/feasibility at `x` and whether both are within `tol`.
pub fn check_termination(problem: &QviProblem, x: &Vector, tol: f64) -> Result<(f64, f64, bool)> {
    let opt = opt_measure(problem, x)?;
    let feas = feas_measure(problem, x);
    Ok((opt, feas, opt <= tol && feas <= tol))
}

/// Runs `config.algorithm` from `start`.
pub fn solve(problem: &QviProblem, config: &SolverConfig, start: &Vector) -> Result<IterationTrace> {
    match config.algorithm {
        Algorithm::Proposed => solve_proposed(problem, config, start),
        Algorithm::GradProj => solve_gradient_projection(problem, config, start),
        Algorithm::ExtraGrad => solve_extragradient(problem, config, start),
        Algorithm::Relaxed1 => solve_relaxed1(problem, config, start),
        Algorithm::Relaxed2 => solve_relaxed2(problem, config, start),
        Algorithm::InertialRelaxed => solve_inertial_relaxed(problem, config, start),
    }
}

fn check_start(problem: &QviProblem, config: &SolverConfig, start: &Vector) -> Result<()> {
    config.validate()?;
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: start.dim(),
        });
    }
    Ok(())
}

fn diverged(x: &Vector) -> bool {
    !x.is_finite() || x.norm() > DIVERGENCE_NORM
}

/// `P_{K(anchor)}(eval − γA(eval))`.
fn forward_step(problem: &QviProblem, gamma: f64, anchor: &Vector, eval: &Vector) -> Result<Vector> {
    let step = eval.add_scaled(-gamma, &problem.operator().apply(eval));
    problem.feasible().project(anchor, &step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedules() {
        let c = SolverConfig::paper_defaults(Algorithm::Proposed);
        assert_eq!(c.gamma, 0.5);
        assert_eq!(c.theta.at(0), 0.0);
        assert!((c.theta.at(1) - 0.1).abs() < 1e-15);
        assert!((c.theta.at(4) - 4.0 / 25.0).abs() < 1e-15);

        let c = SolverConfig::paper_defaults(Algorithm::Relaxed2);
        assert_eq!(c.alpha.at(0), 1.0);
        assert_eq!(c.alpha.at(3), 0.25);
        assert_eq!(c.beta_sched.at(0), 0.0);
        assert!((c.beta_sched.at(2) - 6.0 / 23.0).abs() < 1e-15);
        assert_eq!((c.tol, c.max_iter), (1e-4, 1000));
    }

    #[test]
    fn every_default_config_validates() {
        for a in Algorithm::ALL {
            SolverConfig::paper_defaults(a).validate().unwrap();
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = SolverConfig::paper_defaults(Algorithm::Relaxed1);
        assert!(base.clone().with_alpha(Schedule::constant(0.0)).validate().is_err());
        assert!(base.clone().with_gamma(0.0).validate().is_err());
        let p = SolverConfig::paper_defaults(Algorithm::Proposed);
        assert!(p.with_theta(Schedule::constant(1.0)).validate().is_err());
    }

    #[test]
    fn tags_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
        }
        assert!("newton".parse::<Algorithm>().is_err());
    }
}
