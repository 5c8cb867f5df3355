use std::time::Instant;

use crate::error::Result;
use crate::linalg::Vector;
use crate::metrics::{feas_measure, opt_or_residual};
use crate::problems::QviProblem;

use super::{
    check_start, diverged, forward_step, Algorithm, IterationRecord, IterationTrace, SolverConfig,
    Status,
};

/// Inertial point `z_k + ((1−2θ)/θ)(z_k − z_{k−1})`.
///
/// Equals `(1−θ)x_{k−1} + θz_{k−1}` whenever `z_k = (1−θ)z_{k−1} + θx_{k−1}`.
pub fn extrapolate(z: &Vector, z_prev: &Vector, theta_prev: f64) -> Vector {
    let factor = (1.0 - 2.0 * theta_prev) / theta_prev;
    z.add_scaled(factor, &(z - z_prev))
}

/// The inertial projection method.
///
/// Iteration `k` forms `y` from `(z_k, z_{k−1})` with `θ_{k−1}` (taking
/// `θ_{−1} = θ₀` and `z_{−1} = z₀`), sets `x_k = P_{K(y)}(y − γA(y))` and
/// `z_{k+1} = (1−θ_k)z_k + θ_k x_k`. When `θ_{k−1} = 0` the inertial form is
/// singular and `y` is taken from the equivalent convex form `x_{k−1}`.
/// Record `k` holds `(x_k, z_k)`; the reported solution is `x_k`.
pub fn solve_proposed(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    check_start(problem, config, start)?;
    let clock = Instant::now();
    let gamma = config.gamma;

    let mut z_prev = start.clone();
    let mut z = start.clone();
    let mut x_prev: Option<Vector> = None;
    let mut records = Vec::new();
    let mut status = Status::MaxIterReached;

    for k in 0..config.max_iter {
        let y = match &x_prev {
            None => z.clone(),
            Some(xp) => {
                let tp = config.theta.at(k - 1);
                if tp == 0.0 {
                    xp.clone()
                } else {
                    let y = extrapolate(&z, &z_prev, tp);
                    debug_assert!({
                        let convex = Vector::combine(1.0 - tp, xp, tp, &z_prev);
                        let scale = convex.norm().max(z.norm()).max(1.0);
                        !y.is_finite() || y.distance(&convex) <= 1e-10 * scale
                    });
                    y
                }
            }
        };

        let x = forward_step(problem, gamma, &y, &y)?;
        let step_norm = x.distance(x_prev.as_ref().unwrap_or(start));
        if diverged(&x) {
            records.push(IterationRecord {
                k,
                x,
                z: Some(z),
                step_norm,
                opt: f64::INFINITY,
                feas: f64::INFINITY,
                elapsed: clock.elapsed(),
            });
            status = Status::Diverged;
            break;
        }
        let opt = opt_or_residual(problem, &x, gamma)?;
        let feas = feas_measure(problem, &x);
        let theta = config.theta.at(k);
        let z_next = Vector::combine(1.0 - theta, &z, theta, &x);
        records.push(IterationRecord {
            k,
            x: x.clone(),
            z: Some(z.clone()),
            step_norm,
            opt,
            feas,
            elapsed: clock.elapsed(),
        });
        if !config.run_to_max_iter && opt <= config.tol && feas <= config.tol {
            status = Status::SolvedToTol;
            break;
        }
        z_prev = std::mem::replace(&mut z, z_next);
        x_prev = Some(x);
    }

    Ok(IterationTrace {
        algorithm: Algorithm::Proposed,
        iterations: records.len(),
        records,
        status,
    })
}
