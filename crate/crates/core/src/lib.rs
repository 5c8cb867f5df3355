//! Projection-type solvers for quasi-variational inequalities
//! `find x* ∈ K(x*) with ⟨A(x*), y − x*⟩ ≥ 0 for all y ∈ K(x*)`,
//! with affine `A(x) = Mx + q` and moving feasible sets `K(x) = c(x) + K₀`.

pub mod error;
pub mod linalg;
pub mod metrics;
pub mod params;
pub mod problems;
pub mod projections;
pub mod solvers;

pub use error::{Error, Result};
pub use linalg::{AffineOperator, DenseMatrix, Vector};
pub use params::ContractionParams;
pub use projections::{ConvexSet, FeasibleMap};
pub use problems::QviProblem;
pub use solvers::{solve, Algorithm, IterationTrace, Schedule, SolverConfig, Status};
