use std::time::Instant;

use crate::error::Result;
use crate::linalg::Vector;
use crate::metrics::{feas_measure, opt_or_residual};
use crate::problems::QviProblem;

use super::{
    check_start, diverged, forward_step, Algorithm, IterationRecord, IterationTrace, SolverConfig,
    Status,
};

/// Shared driver: record 0 is the start; `update(k, x_k, x_{k−1})` returns `x_{k+1}`.
fn run(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
    algorithm: Algorithm,
    mut update: impl FnMut(usize, &Vector, &Vector) -> Result<Vector>,
) -> Result<IterationTrace> {
    debug_assert_eq!(config.algorithm, algorithm);
    check_start(problem, config, start)?;
    let clock = Instant::now();
    let gamma = config.gamma;

    let opt = opt_or_residual(problem, start, gamma)?;
    let feas = feas_measure(problem, start);
    let mut records = vec![IterationRecord {
        k: 0,
        x: start.clone(),
        z: None,
        step_norm: 0.0,
        opt,
        feas,
        elapsed: clock.elapsed(),
    }];
    let done = |opt: f64, feas: f64| !config.run_to_max_iter && opt <= config.tol && feas <= config.tol;
    if done(opt, feas) {
        return Ok(IterationTrace {
            algorithm,
            records,
            status: Status::SolvedToTol,
            iterations: 0,
        });
    }

    let mut x_prev = start.clone();
    let mut x = start.clone();
    let mut status = Status::MaxIterReached;
    for k in 0..config.max_iter {
        let next = update(k, &x, &x_prev)?;
        let step_norm = next.distance(&x);
        if diverged(&next) {
            records.push(IterationRecord {
                k: k + 1,
                x: next,
                z: None,
                step_norm,
                opt: f64::INFINITY,
                feas: f64::INFINITY,
                elapsed: clock.elapsed(),
            });
            status = Status::Diverged;
            break;
        }
        let opt = opt_or_residual(problem, &next, gamma)?;
        let feas = feas_measure(problem, &next);
        records.push(IterationRecord {
            k: k + 1,
            x: next.clone(),
            z: None,
            step_norm,
            opt,
            feas,
            elapsed: clock.elapsed(),
        });
        x_prev = std::mem::replace(&mut x, next);
        if done(opt, feas) {
            status = Status::SolvedToTol;
            break;
        }
    }

    Ok(IterationTrace {
        algorithm,
        iterations: records.len() - 1,
        records,
        status,
    })
}

/// `x_{k+1} = P_{K(x_k)}(x_k − γA(x_k))`.
pub fn solve_gradient_projection(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    let gamma = config.gamma;
    run(problem, config, start, Algorithm::GradProj, |_, x, _| {
        forward_step(problem, gamma, x, x)
    })
}

/// `y_k = P_{K(x_k)}(x_k − γA(x_k))`, `x_{k+1} = P_{K(x_k)}(x_k − γA(y_k))`.
pub fn solve_extragradient(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    let gamma = config.gamma;
    run(problem, config, start, Algorithm::ExtraGrad, |_, x, _| {
        let y = forward_step(problem, gamma, x, x)?;
        let step = x.add_scaled(-gamma, &problem.operator().apply(&y));
        problem.feasible().project(x, &step)
    })
}

/// `x_{k+1} = (1−α_k)x_k + α_k P_{K(x_k)}(x_k − γA(x_k))`.
pub fn solve_relaxed1(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    let gamma = config.gamma;
    run(problem, config, start, Algorithm::Relaxed1, |k, x, _| {
        let alpha = config.alpha.at(k);
        let t = forward_step(problem, gamma, x, x)?;
        Ok(Vector::combine(1.0 - alpha, x, alpha, &t))
    })
}

/// `y_k = (1−β_k)x_k + β_k P_{K(x_k)}(x_k − γA(x_k))`,
/// `x_{k+1} = (1−α_k)x_k + α_k P_{K(y_k)}(y_k − γA(y_k))`.
pub fn solve_relaxed2(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    let gamma = config.gamma;
    run(problem, config, start, Algorithm::Relaxed2, |k, x, _| {
        let alpha = config.alpha.at(k);
        let beta = config.beta_sched.at(k);
        let t = forward_step(problem, gamma, x, x)?;
        let y = Vector::combine(1.0 - beta, x, beta, &t);
        let ty = forward_step(problem, gamma, &y, &y)?;
        Ok(Vector::combine(1.0 - alpha, x, alpha, &ty))
    })
}

/// `y_k = x_k + θ_k(x_k − x_{k−1})`,
/// `x_{k+1} = (1−α_k)y_k + α_k P_{K(y_k)}(y_k − γA(y_k))`, with `x_{−1} = x₀`.
pub fn solve_inertial_relaxed(
    problem: &QviProblem,
    config: &SolverConfig,
    start: &Vector,
) -> Result<IterationTrace> {
    let gamma = config.gamma;
    run(problem, config, start, Algorithm::InertialRelaxed, |k, x, x_prev| {
        let theta = config.theta.at(k);
        let alpha = config.alpha.at(k);
        let y = x.add_scaled(theta, &(x - x_prev));
        let ty = forward_step(problem, gamma, &y, &y)?;
        Ok(Vector::combine(1.0 - alpha, &y, alpha, &ty))
    })
}
