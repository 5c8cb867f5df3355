//! Executable check of the linear-rate bound for the inertial method.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::params::{worst_case_energy_factor, ContractionParams};
use crate::solvers::IterationTrace;

/// Additive slack in every bound comparison.
pub const BOUND_SLACK: f64 = 1e-9;
pub const MIN_RECORDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub beta: f64,
    pub gamma_interval: (f64, f64),
    pub rho_theoretical: f64,
    /// `exp` of the least-squares slope of `log V_k`, fitted over the tail
    /// half of the records preceding the first `V_k` at the noise floor.
    /// 0 when fewer than two such points exist.
    pub rho_empirical: f64,
    /// Count of `k` with `V_{k+1} > ϱV_k + slack`.
    pub bound_violations: usize,
    /// Largest observed `V_{k+1}/V_k` (over `V_k` above the noise floor).
    pub max_step_ratio: f64,
    /// Worst-case one-step energy ratio for constant θ in `[a, b]`.
    pub worst_case_factor: f64,
    /// Count of `k` with `‖x_{k+1}−x*‖² > ϱ^{k+1} V₀ + slack`.
    pub geometric_violations_v0: usize,
    /// Count of `k` with `‖x_{k+1}−x*‖² > 2ϱ^{k+1}‖x₀−x*‖² + slack`.
    pub geometric_violations_x0: usize,
    /// First iteration count at which `‖x_k − x*‖²` reached the noise floor.
    pub converged_iters: Option<usize>,
    pub records: usize,
}

/// Combined error `V_k = ‖x_k − x*‖² + ‖z_k − x*‖²` per record.
pub fn energy_sequence(trace: &IterationTrace, x_star: &Vector) -> Result<Vec<f64>> {
    trace
        .records
        .iter()
        .map(|r| {
            let z = r.z.as_ref().ok_or_else(|| {
                Error::InvalidParameter("rate report needs a trace with z iterates".into())
            })?;
            Ok((&r.x - x_star).norm_squared() + (z - x_star).norm_squared())
        })
        .collect()
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

pub fn rate_report(
    trace: &IterationTrace,
    x_star: &Vector,
    params: &ContractionParams,
) -> Result<RateReport> {
    if trace.records.len() < MIN_RECORDS {
        return Err(Error::TraceTooShort {
            len: trace.records.len(),
            needed: MIN_RECORDS,
        });
    }
    let v = energy_sequence(trace, x_star)?;
    let beta = params.beta();
    let rho = params.rho();
    let floor = 1e-18 * x_star.norm_squared().max(1.0);

    let bound_violations = v
        .windows(2)
        .filter(|w| w[1] > rho * w[0] + BOUND_SLACK)
        .count();
    let max_step_ratio = v
        .windows(2)
        .filter(|w| w[0] > floor)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);

    let informative = v.iter().position(|&e| e <= floor).unwrap_or(v.len());
    let tail: Vec<(f64, f64)> = (informative / 2..informative)
        .map(|k| (k as f64, v[k].ln()))
        .collect();
    let rho_empirical = if tail.len() < 2 {
        0.0
    } else {
        slope(&tail).exp()
    };

    let x_err: Vec<f64> = trace
        .records
        .iter()
        .map(|r| (&r.x - x_star).norm_squared())
        .collect();
    let v0 = v[0];
    let x0 = x_err[0];
    let mut geometric_violations_v0 = 0;
    let mut geometric_violations_x0 = 0;
    for (k, e) in x_err.iter().enumerate().skip(1) {
        let decay = rho.powi(k as i32);
        if *e > decay * v0 + BOUND_SLACK {
            geometric_violations_v0 += 1;
        }
        if *e > 2.0 * decay * x0 + BOUND_SLACK {
            geometric_violations_x0 += 1;
        }
    }

    let worst_case_factor = (0..=64)
        .map(|i| params.a + (params.b - params.a) * i as f64 / 64.0)
        .map(|theta| worst_case_energy_factor(beta, theta))
        .fold(0.0, f64::max);

    Ok(RateReport {
        beta,
        gamma_interval: params.gamma_interval(),
        rho_theoretical: rho,
        rho_empirical,
        bound_violations,
        max_step_ratio,
        worst_case_factor,
        geometric_violations_v0,
        geometric_violations_x0,
        converged_iters: x_err.iter().position(|&e| e <= floor).map(|k| k + 1),
        records: v.len(),
    })
}
