//! QVI problem instances, the problem-file format, the builtin suite and
//! the fixed-point reference oracle.

mod format;
mod suite;

pub use format::{from_json_str, load_problem, save_problem, to_json_string, ProblemFile};
pub use suite::{builtin_suite, generate_suite, SuiteSpec, SUITE_SPECS};

use crate::error::{Error, Result};
use crate::linalg::{AffineOperator, Vector};
use crate::metrics::{feas_measure, natural_residual, opt_measure};
use crate::params::{check_lambda_condition, ContractionParams};
use crate::projections::FeasibleMap;

/// Tolerance a stored reference solution must meet.
pub const REFERENCE_CHECK_TOL: f64 = 1e-8;

/// A QVI instance: operator, feasible map, starting points and optional
/// certified rate constants and reference solution.
#[derive(Debug, Clone, PartialEq)]
pub struct QviProblem {
    name: String,
    operator: AffineOperator,
    feasible: FeasibleMap,
    starts: Vec<Vector>,
    reference: Option<Vector>,
    certified: Option<ContractionParams>,
    seed: Option<u64>,
    description: Option<String>,
}

impl QviProblem {
    pub fn new(
        name: impl Into<String>,
        operator: AffineOperator,
        feasible: FeasibleMap,
        starts: Vec<Vector>,
    ) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidProblem {
            name: name.clone(),
            reason,
        };
        let n = operator.dim();
        if feasible.dim() != n {
            return Err(invalid(format!(
                "feasible map has dimension {}, operator has {n}",
                feasible.dim()
            )));
        }
        if starts.is_empty() {
            return Err(invalid("at least one starting point is required".into()));
        }
        if let Some((i, s)) = starts.iter().enumerate().find(|(_, s)| s.dim() != n) {
            return Err(invalid(format!(
                "start {i} has dimension {}, expected {n}",
                s.dim()
            )));
        }
        Ok(QviProblem {
            name,
            operator,
            feasible,
            starts,
            reference: None,
            certified: None,
            seed: None,
            description: None,
        })
    }

    /// Attaches certified constants; they must be valid for this problem.
    pub fn with_certified(mut self, params: ContractionParams) -> Result<Self> {
        let op = &self.operator;
        let reason = if params.mu > op.mu() + 1e-9 {
            Some(format!("certified mu {} exceeds operator mu {}", params.mu, op.mu()))
        } else if params.lip < op.lip() - 1e-9 {
            Some(format!("certified lip {} is below operator lip {}", params.lip, op.lip()))
        } else if params.lambda < self.feasible.lambda() - 1e-9 {
            Some(format!(
                "certified lambda {} is below feasible-map lambda {}",
                params.lambda,
                self.feasible.lambda()
            ))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidProblem {
                name: self.name,
                reason,
            });
        }
        // Re-validate the interval conditions.
        ContractionParams::new(params.mu, params.lip, params.lambda, params.gamma, params.a, params.b)
            .map_err(|e| Error::InvalidProblem {
                name: self.name.clone(),
                reason: e.to_string(),
            })?;
        self.certified = Some(params);
        Ok(self)
    }

    /// Attaches a reference solution; it must pass the optimality and
    /// feasibility checks at [`REFERENCE_CHECK_TOL`].
    pub fn with_reference(mut self, reference: Vector) -> Result<Self> {
        if reference.dim() != self.dim() {
            let dim = self.dim();
            return Err(Error::InvalidProblem {
                name: self.name,
                reason: format!(
                    "reference has dimension {}, expected {}",
                    reference.dim(),
                    dim
                ),
            });
        }
        let opt = match opt_measure(&self, &reference) {
            Ok(v) => v,
            Err(Error::UnboundedSet) => {
                natural_residual(&self, &reference, self.oracle_gamma())?
            }
            Err(e) => return Err(e),
        };
        let feas = feas_measure(&self, &reference);
        if !(opt <= REFERENCE_CHECK_TOL && feas <= REFERENCE_CHECK_TOL) {
            return Err(Error::InvalidProblem {
                name: self.name,
                reason: format!(
                    "reference is not a solution (opt = {opt:e}, feas = {feas:e})"
                ),
            });
        }
        self.reference = Some(reference);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn operator(&self) -> &AffineOperator {
        &self.operator
    }

    pub fn feasible(&self) -> &FeasibleMap {
        &self.feasible
    }

    pub fn starts(&self) -> &[Vector] {
        &self.starts
    }

    pub fn reference(&self) -> Option<&Vector> {
        self.reference.as_ref()
    }

    pub fn certified(&self) -> Option<&ContractionParams> {
        self.certified.as_ref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn lambda(&self) -> f64 {
        self.feasible.lambda()
    }

    /// `μ/L²`, the β-minimizing step size.
    pub fn oracle_gamma(&self) -> f64 {
        self.operator.mu() / (self.operator.lip() * self.operator.lip())
    }
}

/// Banach–Picard iteration `x ← P_{K(x)}(x − γ*A(x))` with `γ* = μ/L²`
/// from the first starting point.
pub fn reference_solution(problem: &QviProblem, tol: f64) -> Result<Vector> {
    reference_solution_from(problem, tol, &problem.starts()[0])
}

pub const ORACLE_MAX_ITER: usize = 1_000_000;

/// [`reference_solution`] from an explicit start.
///
/// Stops when `‖x_{k+1} − x_k‖ ≤ tol·max(1, ‖x_k‖)`. Requires the
/// λ-condition, which makes the map a contraction at `γ*`.
pub fn reference_solution_from(problem: &QviProblem, tol: f64, start: &Vector) -> Result<Vector> {
    let op = problem.operator();
    if !check_lambda_condition(op.mu(), op.lip(), problem.lambda())? {
        return Err(Error::InvalidProblem {
            name: problem.name().to_string(),
            reason: "lambda condition fails; the fixed-point oracle is not a contraction".into(),
        });
    }
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: start.dim(),
        });
    }
    let gamma = problem.oracle_gamma();
    let mut x = start.clone();
    for _ in 0..ORACLE_MAX_ITER {
        let next = problem.feasible().project(&x, &x.add_scaled(-gamma, &op.apply(&x)))?;
        let step = next.distance(&x);
        let scale = x.norm().max(1.0);
        x = next;
        if !x.is_finite() {
            break;
        }
        if step <= tol * scale {
            return Ok(x);
        }
    }
    Err(Error::OracleStalled {
        iterations: ORACLE_MAX_ITER,
    })
}
