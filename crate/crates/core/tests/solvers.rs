//! Solver behaviour on hand-checkable problems and structural reductions
//! between the methods.

use qvi_core::linalg::{AffineOperator, DenseMatrix, Vector};
use qvi_core::problems::builtin_suite;
use qvi_core::projections::{ConvexSet, FeasibleMap};
use qvi_core::solvers::{check_termination, extrapolate};
use qvi_core::{solve, Algorithm, QviProblem, Schedule, SolverConfig, Status};

fn v(x: &[f64]) -> Vector {
    Vector::new(x.to_vec()).unwrap()
}

/// `A(x) = x`, `K = [−1, 1]`.
fn identity_on_interval(start: f64) -> QviProblem {
    let op = AffineOperator::new(DenseMatrix::identity(1), v(&[0.0])).unwrap();
    let set = ConvexSet::new_box(v(&[-1.0]), v(&[1.0])).unwrap();
    QviProblem::new("id", op, FeasibleMap::constant(set), vec![v(&[start])]).unwrap()
}

fn analytic() -> QviProblem {
    builtin_suite()
        .into_iter()
        .find(|p| p.name() == "analytic_1d")
        .unwrap()
}

fn fixed_steps(cfg: SolverConfig, n: usize) -> SolverConfig {
    cfg.with_max_iter(n).running_to_max_iter()
}

#[test]
fn unit_step_lands_on_solution() {
    let p = identity_on_interval(0.7);
    let cfg = SolverConfig::paper_defaults(Algorithm::Proposed).with_gamma(1.0);
    let trace = solve(&p, &cfg, &p.starts()[0]).unwrap();
    assert_eq!(trace.status, Status::SolvedToTol);
    assert_eq!(trace.iterations, 1);
    assert_eq!(trace.solution()[0], 0.0);

    let cfg = SolverConfig::paper_defaults(Algorithm::GradProj).with_gamma(1.0);
    let trace = solve(&p, &cfg, &p.starts()[0]).unwrap();
    assert_eq!(trace.iterations, 1);
    assert_eq!(trace.solution()[0], 0.0);
}

#[test]
fn every_solver_converges_on_analytic_problem() {
    let p = analytic();
    for alg in Algorithm::ALL {
        let cfg = SolverConfig::paper_defaults(alg)
            .with_gamma(1.0)
            .with_tol(1e-10)
            .with_max_iter(5000);
        let cfg = match alg {
            // The harmonic α_k schedules converge sublinearly; constant
            // relaxation keeps this test fast.
            Algorithm::Relaxed1 | Algorithm::Relaxed2 | Algorithm::InertialRelaxed => {
                cfg.with_alpha(Schedule::constant(0.5))
            }
            _ => cfg,
        };
        for s in p.starts() {
            let trace = solve(&p, &cfg, s).unwrap();
            assert_eq!(trace.status, Status::SolvedToTol, "{alg}");
            assert!((trace.solution()[0] - 0.125).abs() < 1e-8, "{alg}: {}", trace.solution()[0]);
        }
    }
}

#[test]
fn start_at_solution_is_stationary() {
    let p = analytic();
    let x_star = p.reference().unwrap().clone();
    for alg in Algorithm::ALL {
        let cfg = fixed_steps(SolverConfig::paper_defaults(alg).with_gamma(1.0), 20);
        let trace = solve(&p, &cfg, &x_star).unwrap();
        for r in &trace.records {
            assert!(r.x.distance(&x_star) < 1e-12, "{alg} moved at k={}", r.k);
        }
    }
}

#[test]
fn singleton_set_gives_zero_after_one_projection() {
    let op = AffineOperator::new(DenseMatrix::identity(2), v(&[1.0, -3.0])).unwrap();
    let set = ConvexSet::new_box(Vector::zeros(2), Vector::zeros(2)).unwrap();
    let p = QviProblem::new("pt", op, FeasibleMap::constant(set), vec![v(&[4.0, -2.0])]).unwrap();
    for alg in [Algorithm::Proposed, Algorithm::GradProj, Algorithm::ExtraGrad] {
        let trace = solve(&p, &SolverConfig::paper_defaults(alg), &p.starts()[0]).unwrap();
        assert_eq!(trace.status, Status::SolvedToTol);
        assert_eq!(trace.solution().as_slice(), &[0.0, 0.0]);
    }
}

fn assert_same_x(a: &[Vector], b: &[Vector], what: &str) {
    assert_eq!(a.len(), b.len(), "{what}: lengths");
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        let scale = x.norm().max(1.0);
        assert!(x.distance(y) <= 1e-12 * scale, "{what}: iterate {k} differs");
    }
}

fn xs(p: &QviProblem, cfg: &SolverConfig) -> Vec<Vector> {
    solve(p, cfg, &p.starts()[0])
        .unwrap()
        .records
        .into_iter()
        .map(|r| r.x)
        .collect()
}

fn reduction_problems() -> Vec<QviProblem> {
    builtin_suite()
        .into_iter()
        .filter(|p| ["analytic_1d", "mov_ball_5", "mov_box_5", "vi_box_5"].contains(&p.name()))
        .collect()
}

#[test]
fn half_inertia_is_krasnoselskii_relaxation() {
    for p in reduction_problems() {
        let n = 40;
        let prop = fixed_steps(
            SolverConfig::paper_defaults(Algorithm::Proposed).with_theta(Schedule::constant(0.5)),
            n,
        );
        let zs: Vec<Vector> = solve(&p, &prop, &p.starts()[0])
            .unwrap()
            .records
            .into_iter()
            .map(|r| r.z.unwrap())
            .collect();
        let relax = fixed_steps(
            SolverConfig::paper_defaults(Algorithm::Relaxed1).with_alpha(Schedule::constant(0.5)),
            n - 1,
        );
        assert_same_x(&zs, &xs(&p, &relax), p.name());
    }
}

#[test]
fn unit_relaxation_is_gradient_projection() {
    for p in reduction_problems() {
        let r1 = fixed_steps(
            SolverConfig::paper_defaults(Algorithm::Relaxed1).with_alpha(Schedule::constant(1.0)),
            30,
        );
        let gp = fixed_steps(SolverConfig::paper_defaults(Algorithm::GradProj), 30);
        assert_same_x(&xs(&p, &r1), &xs(&p, &gp), p.name());
    }
}

#[test]
fn zero_inner_relaxation_and_zero_inertia_reduce_to_relaxed1() {
    for p in reduction_problems() {
        let r1 = fixed_steps(SolverConfig::paper_defaults(Algorithm::Relaxed1), 30);
        let r2 = fixed_steps(
            SolverConfig::paper_defaults(Algorithm::Relaxed2).with_beta(Schedule::constant(0.0)),
            30,
        );
        let ir = fixed_steps(
            SolverConfig::paper_defaults(Algorithm::InertialRelaxed)
                .with_theta(Schedule::constant(0.0)),
            30,
        );
        let base = xs(&p, &r1);
        assert_same_x(&base, &xs(&p, &r2), p.name());
        assert_same_x(&base, &xs(&p, &ir), p.name());
    }
}

#[test]
fn inertial_and_convex_forms_agree() {
    for p in reduction_problems() {
        for theta in [Schedule::constant(0.3), Schedule::rational(1.0, 0.0, 5.0, 5.0)] {
            let cfg = fixed_steps(
                SolverConfig::paper_defaults(Algorithm::Proposed).with_theta(theta),
                60,
            );
            let rec = solve(&p, &cfg, &p.starts()[0]).unwrap().records;
            for k in 1..rec.len() - 1 {
                let tp = theta.at(k - 1);
                if tp == 0.0 {
                    continue;
                }
                let z_k = rec[k].z.as_ref().unwrap();
                let z_prev = rec[k - 1].z.as_ref().unwrap();
                let inertial = extrapolate(z_k, z_prev, tp);
                let convex = Vector::combine(1.0 - tp, &rec[k - 1].x, tp, z_prev);
                let scale = convex.norm().max(1.0);
                assert!(inertial.distance(&convex) <= 1e-10 * scale, "{} k={k}", p.name());
                // z recursion
                let z_next = Vector::combine(1.0 - theta.at(k), z_k, theta.at(k), &rec[k].x);
                assert!(z_next.distance(rec[k + 1].z.as_ref().unwrap()) <= 1e-14 * scale);
            }
        }
    }
}

#[test]
fn runs_are_deterministic() {
    for p in builtin_suite().into_iter().take(4) {
        for alg in Algorithm::ALL {
            let cfg = SolverConfig::paper_defaults(alg);
            let a = solve(&p, &cfg, &p.starts()[1 % p.starts().len()]).unwrap();
            let b = solve(&p, &cfg, &p.starts()[1 % p.starts().len()]).unwrap();
            assert_eq!(a.iterations, b.iterations);
            assert_eq!(a.status, b.status);
            for (ra, rb) in a.records.iter().zip(&b.records) {
                assert_eq!(ra.x, rb.x);
                assert_eq!(ra.opt.to_bits(), rb.opt.to_bits());
            }
        }
    }
}

#[test]
fn huge_step_diverges() {
    let p = identity_on_interval(0.5);
    // Unbounded constraint: a half-line, so the reflection grows without bound.
    let op = AffineOperator::new(DenseMatrix::identity(1), v(&[0.0])).unwrap();
    let half = ConvexSet::new_halfspace(v(&[1.0]), 1e300).unwrap();
    let q = QviProblem::new("h", op, FeasibleMap::constant(half), p.starts().to_vec()).unwrap();
    let cfg = SolverConfig::paper_defaults(Algorithm::GradProj).with_gamma(3.0);
    let trace = solve(&q, &cfg, &q.starts()[0]).unwrap();
    assert_eq!(trace.status, Status::Diverged);
    assert!(trace.last().opt.is_infinite());
}

#[test]
fn max_iter_status_and_invalid_configs() {
    let p = analytic();
    let cfg = SolverConfig::paper_defaults(Algorithm::Proposed).with_tol(1e-300).with_max_iter(7);
    let t = solve(&p, &cfg, &p.starts()[0]).unwrap();
    assert_eq!(t.status, Status::MaxIterReached);
    assert_eq!(t.iterations, 7);

    let bad = [
        SolverConfig::paper_defaults(Algorithm::Proposed).with_gamma(0.0),
        SolverConfig::paper_defaults(Algorithm::Proposed).with_theta(Schedule::constant(1.0)),
        SolverConfig::paper_defaults(Algorithm::Relaxed1).with_alpha(Schedule::constant(0.0)),
        SolverConfig::paper_defaults(Algorithm::Relaxed2).with_beta(Schedule::constant(1.5)),
        SolverConfig::paper_defaults(Algorithm::GradProj).with_tol(0.0),
    ];
    for cfg in bad {
        assert!(solve(&p, &cfg, &p.starts()[0]).is_err());
    }
    let wrong_dim = v(&[0.0, 0.0]);
    assert!(solve(&p, &SolverConfig::paper_defaults(Algorithm::GradProj), &wrong_dim).is_err());
}

#[test]
fn termination_check_reports_both_measures() {
    let p = analytic();
    let (opt, feas, ok) = check_termination(&p, &v(&[0.125]), 1e-8).unwrap();
    assert!(opt <= 1e-12 && feas == 0.0 && ok);
    // x = 0 violates the moving lower bound 0.1 by 0.1.
    let (_, feas, ok) = check_termination(&p, &v(&[0.0]), 1e-4).unwrap();
    assert!((feas - 0.1).abs() < 1e-15 && !ok);
}
