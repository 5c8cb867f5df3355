//! The builtin benchmark suite.
//!
//! Problems are generated once from the recipes in [`SUITE_SPECS`] with a
//! seeded ChaCha stream and stored as JSON under `suite/`; the library
//! embeds those files, so loading never touches a random number generator.
//! Every problem is certified in the regime where the stated rate constant
//! provably bounds the per-step error decrease.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, AffineOperator, DenseMatrix, Vector};
use crate::params::ContractionParams;
use crate::projections::{ConvexSet, FeasibleMap};

use super::format::from_json_str;
use super::{reference_solution, QviProblem};

const EMBEDDED: [(&str, &str); 10] = [
    ("mov_ball_2", include_str!("../../suite/mov_ball_2.json")),
    ("mov_ball_5", include_str!("../../suite/mov_ball_5.json")),
    ("mov_ball_20", include_str!("../../suite/mov_ball_20.json")),
    ("mov_box_2", include_str!("../../suite/mov_box_2.json")),
    ("mov_box_5", include_str!("../../suite/mov_box_5.json")),
    ("mov_box_50", include_str!("../../suite/mov_box_50.json")),
    ("vi_box_5", include_str!("../../suite/vi_box_5.json")),
    ("vi_ball_3", include_str!("../../suite/vi_ball_3.json")),
    ("analytic_1d", include_str!("../../suite/analytic_1d.json")),
    ("box_intersection_4", include_str!("../../suite/box_intersection_4.json")),
];

/// The ten builtin problems, parsed from the embedded suite files.
pub fn builtin_suite() -> Vec<QviProblem> {
    EMBEDDED
        .iter()
        .map(|(name, text)| {
            from_json_str(text).unwrap_or_else(|e| panic!("builtin problem {name} is invalid: {e}"))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseShape {
    UnitBall,
    /// `[−1, 1]^n`.
    CubeBox,
    /// `[−1, 1]^n ∩ (shifted box)`.
    TwoBoxes,
}

/// Recipe for one random suite problem: `M = s(I + a·K + b·S)` with `K`
/// skew and `S` symmetric positive semidefinite (both of unit spectral
/// norm), `q = −M x̄` with `‖x̄‖ = shift`, and `c(x) = Cx + d` with
/// `σ_max(C) = λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSpec {
    pub name: &'static str,
    pub n: usize,
    pub scale: f64,
    pub skew: f64,
    pub sym: f64,
    pub shape: BaseShape,
    pub lambda: f64,
    pub shift: f64,
    pub seed: u64,
    pub description: &'static str,
}

pub const SUITE_SPECS: [SuiteSpec; 8] = [
    SuiteSpec {
        name: "mov_ball_2",
        n: 2,
        scale: 1.0,
        skew: 0.15,
        sym: 0.005,
        shape: BaseShape::UnitBall,
        lambda: 0.1,
        shift: 2.5,
        seed: 0x5156_0001,
        description: "moving unit ball, lambda 0.1",
    },
    SuiteSpec {
        name: "mov_ball_5",
        n: 5,
        scale: 2.0,
        skew: 0.08,
        sym: 0.0,
        shape: BaseShape::UnitBall,
        lambda: 0.2,
        shift: 2.5,
        seed: 0x5156_0002,
        description: "moving unit ball, lambda 0.2",
    },
    SuiteSpec {
        name: "mov_ball_20",
        n: 20,
        scale: 1.5,
        skew: 0.15,
        sym: 0.005,
        shape: BaseShape::UnitBall,
        lambda: 0.1,
        shift: 2.5,
        seed: 0x5156_0003,
        description: "moving unit ball, lambda 0.1",
    },
    SuiteSpec {
        name: "mov_box_2",
        n: 2,
        scale: 4.2,
        skew: 0.15,
        sym: 0.005,
        shape: BaseShape::CubeBox,
        lambda: 0.1,
        shift: 2.5,
        seed: 0x5156_0004,
        description: "moving box with a stiff operator (L > 4)",
    },
    SuiteSpec {
        name: "mov_box_5",
        n: 5,
        scale: 0.8,
        skew: 0.08,
        sym: 0.0,
        shape: BaseShape::CubeBox,
        lambda: 0.2,
        shift: 2.5,
        seed: 0x5156_0005,
        description: "moving box, lambda 0.2",
    },
    SuiteSpec {
        name: "mov_box_50",
        n: 50,
        scale: 2.5,
        skew: 0.15,
        sym: 0.005,
        shape: BaseShape::CubeBox,
        lambda: 0.1,
        shift: 4.0,
        seed: 0x5156_0006,
        description: "moving box, lambda 0.1",
    },
    SuiteSpec {
        name: "vi_box_5",
        n: 5,
        scale: 1.2,
        skew: 0.2,
        sym: 0.01,
        shape: BaseShape::CubeBox,
        lambda: 0.0,
        shift: 2.5,
        seed: 0x5156_0007,
        description: "constant box (plain variational inequality)",
    },
    SuiteSpec {
        name: "vi_ball_3",
        n: 3,
        scale: 4.2,
        skew: 0.2,
        sym: 0.01,
        shape: BaseShape::UnitBall,
        lambda: 0.0,
        shift: 2.5,
        seed: 0x5156_0008,
        description: "constant ball (plain variational inequality)",
    },
];

const INTERSECTION_SPEC: SuiteSpec = SuiteSpec {
    name: "box_intersection_4",
    n: 4,
    scale: 1.0,
    skew: 0.15,
    sym: 0.005,
    shape: BaseShape::TwoBoxes,
    lambda: 0.0,
    shift: 2.5,
    seed: 0x5156_000a,
    description: "constant intersection of two boxes (Dykstra projection)",
};

/// Inertial bounds `θ ≡ 1/4` used for the random problems.
const SUITE_THETA: f64 = 0.25;
const ORACLE_TOL: f64 = 1e-13;

fn normal_matrix(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let data = (0..n * n).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_row_major(n, n, data).expect("finite samples")
}

fn normalized(m: DenseMatrix, target: f64) -> DenseMatrix {
    let s = spectral_norm(&m);
    if s == 0.0 {
        return DenseMatrix::zeros(m.rows(), m.cols());
    }
    let k = target / s;
    let data = m.as_row_major().iter().map(|v| v * k).collect();
    DenseMatrix::from_row_major(m.rows(), m.cols(), data).expect("finite")
}

fn uniform_vector(rng: &mut ChaCha8Rng, n: usize, half_width: f64) -> Vector {
    Vector::from((0..n).map(|_| rng.random_range(-half_width..half_width)).collect::<Vec<_>>())
}

fn certify(problem: QviProblem, theta: f64) -> Result<QviProblem> {
    let op = problem.operator();
    let gamma = problem.oracle_gamma();
    let params = ContractionParams::new(op.mu(), op.lip(), problem.lambda(), gamma, theta, theta)?;
    if !params.rate_bound_provable() {
        return Err(Error::InvalidProblem {
            name: problem.name().to_string(),
            reason: format!(
                "beta = {} is outside the regime where the rate constant is a valid bound",
                params.beta()
            ),
        });
    }
    let problem = problem.with_certified(params)?;
    let reference = reference_solution(&problem, ORACLE_TOL)?;
    problem.with_reference(reference)
}

fn generate(spec: &SuiteSpec) -> Result<QviProblem> {
    let n = spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let g = normal_matrix(&mut rng, n);
    let skew = {
        let gt = g.transpose();
        let data = g
            .as_row_major()
            .iter()
            .zip(gt.as_row_major())
            .map(|(a, b)| 0.5 * (a - b))
            .collect();
        normalized(DenseMatrix::from_row_major(n, n, data)?, 1.0)
    };
    let h = normal_matrix(&mut rng, n);
    let sym = normalized(h.matmul(&h.transpose()), 1.0);
    let m_data = (0..n * n)
        .map(|idx| {
            let id = if idx / n == idx % n { 1.0 } else { 0.0 };
            spec.scale
                * (id + spec.skew * skew.as_row_major()[idx] + spec.sym * sym.as_row_major()[idx])
        })
        .collect();
    let m = DenseMatrix::from_row_major(n, n, m_data)?;

    let dir = Vector::from((0..n).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>());
    let xbar = dir.scale(spec.shift / dir.norm());
    let q = -&m.mul_vec(&xbar);
    let operator = AffineOperator::new(m, q)?;

    let c = normalized(normal_matrix(&mut rng, n), spec.lambda);
    let d = uniform_vector(&mut rng, n, 0.3);

    let base = match spec.shape {
        BaseShape::UnitBall => ConvexSet::new_ball(Vector::zeros(n), 1.0)?,
        BaseShape::CubeBox => ConvexSet::new_box(Vector::filled(n, -1.0), Vector::filled(n, 1.0))?,
        BaseShape::TwoBoxes => {
            let shift = uniform_vector(&mut rng, n, 0.5);
            ConvexSet::new_intersection(vec![
                ConvexSet::new_box(Vector::filled(n, -1.0), Vector::filled(n, 1.0))?,
                ConvexSet::new_box(shift.map(|s| s - 0.8), shift.map(|s| s + 1.2))?,
            ])?
        }
    };
    let feasible = if spec.lambda == 0.0 {
        FeasibleMap::constant(base)
    } else {
        FeasibleMap::moving(base, c, d)?
    };

    let mut starts = vec![Vector::zeros(n)];
    starts.extend((0..2).map(|_| uniform_vector(&mut rng, n, 2.0)));

    let problem = QviProblem::new(spec.name, operator, feasible, starts)?
        .with_seed(spec.seed)
        .with_description(spec.description);
    certify(problem, SUITE_THETA)
}

/// `A(x) = x`, `K(x) = [0.2x + 0.1, 0.2x + 10]`, solution `x* = 0.125`.
fn analytic_1d() -> Result<QviProblem> {
    let operator = AffineOperator::new(DenseMatrix::identity(1), Vector::zeros(1))?;
    let base = ConvexSet::new_box(Vector::zeros(1), Vector::filled(1, 9.9))?;
    let feasible =
        FeasibleMap::moving(base, DenseMatrix::diagonal(&[0.2]), Vector::filled(1, 0.1))?;
    let starts = vec![Vector::zeros(1), Vector::filled(1, 0.5)];
    let problem = QviProblem::new("analytic_1d", operator, feasible, starts)?
        .with_description("one-dimensional moving box with solution 0.125");
    certify(problem, 1.0 / 3.0)
}

/// Regenerates the whole suite from its recipes (slow path; the embedded
/// files are the canonical copies).
pub fn generate_suite() -> Result<Vec<QviProblem>> {
    let mut out = SUITE_SPECS.iter().map(generate).collect::<Result<Vec<_>>>()?;
    out.push(analytic_1d()?);
    out.push(generate(&INTERSECTION_SPEC)?);
    Ok(out)
}
