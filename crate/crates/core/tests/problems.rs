//! Builtin suite contents and the reference oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qvi_core::metrics::{feas_measure, natural_residual, opt_measure};
use qvi_core::params::check_lambda_condition;
use qvi_core::problems::{builtin_suite, from_json_str, reference_solution_from, to_json_string};
use qvi_core::{FeasibleMap, Vector};

#[test]
fn suite_has_required_members() {
    let suite = builtin_suite();
    assert!(suite.len() >= 10);
    let analytic = suite.iter().find(|p| p.name() == "analytic_1d").unwrap();
    assert!((analytic.reference().unwrap()[0] - 0.125).abs() < 1e-12);
    assert!(suite.iter().any(|p| matches!(p.feasible(), FeasibleMap::Constant(_))));
    assert!(suite.iter().any(|p| p.dim() >= 50));
}

#[test]
fn suite_constants_are_consistent() {
    for p in builtin_suite() {
        let op = p.operator();
        assert!(check_lambda_condition(op.mu(), op.lip(), p.lambda()).unwrap(), "{}", p.name());
        if let FeasibleMap::Constant(_) = p.feasible() {
            assert_eq!(p.lambda(), 0.0);
        }
        let cert = p.certified().expect("suite problems are certified");
        let (lo, hi) = cert.gamma_interval();
        assert!(cert.gamma > lo.max(0.0) && cert.gamma < hi, "{}", p.name());
        assert!(cert.rate_bound_provable(), "{}", p.name());
        assert!(cert.rho() < 1.0);
    }
}

#[test]
fn references_are_fixed_points_and_solutions() {
    for p in builtin_suite() {
        let r = p.reference().unwrap();
        let res = natural_residual(&p, r, p.oracle_gamma()).unwrap();
        assert!(res <= 1e-11, "{}: residual {res:e}", p.name());
        assert!(opt_measure(&p, r).unwrap() <= 1e-8, "{}", p.name());
        assert!(feas_measure(&p, r) <= 1e-8, "{}", p.name());
    }
}

#[test]
fn oracle_is_start_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for p in builtin_suite() {
        let r = p.reference().unwrap();
        for _ in 0..5 {
            let start = Vector::from(
                (0..p.dim()).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>(),
            );
            let x = reference_solution_from(&p, 1e-13, &start).unwrap();
            assert!(x.distance(r) <= 1e-9, "{}: {:e}", p.name(), x.distance(r));
        }
    }
}

#[test]
fn opt_nonnegative_at_feasible_points_of_constant_problems() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in builtin_suite() {
        let FeasibleMap::Constant(set) = p.feasible() else {
            continue;
        };
        for _ in 0..50 {
            let u = Vector::from(
                (0..p.dim()).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<f64>>(),
            );
            let x = set.project(&u).unwrap();
            assert!(opt_measure(&p, &x).unwrap() >= -1e-10, "{}", p.name());
        }
    }
}

#[test]
fn suite_problems_round_trip_through_json() {
    for p in builtin_suite() {
        let text = to_json_string(&p);
        let back = from_json_str(&text).unwrap();
        assert_eq!(back, p, "{}", p.name());
    }
}
