//! JSON problem files.
//!
//! ```json
//! {
//!   "name": "tiny",
//!   "n": 1,
//!   "M": [[1.0]],
//!   "q": [0.0],
//!   "feasible": {
//!     "kind": "moving",
//!     "base": { "kind": "box", "lo": [0.0], "hi": [9.9] },
//!     "C": [[0.2]],
//!     "d": [0.1]
//!   },
//!   "starts": [[0.0], [0.5]],
//!   "gamma": 1.0,
//!   "theta": [0.3333333333333333, 0.3333333333333333]
//! }
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{AffineOperator, DenseMatrix, Vector};
use crate::params::ContractionParams;
use crate::projections::{ConvexSet, FeasibleMap, SetKind};

use super::QviProblem;

/// On-disk representation of a [`QviProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub n: usize,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub feasible: FeasibleSpec,
    pub starts: Vec<Vec<f64>>,
    /// Certified step size; requires `theta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Bounds `[a, b]` on the inertial parameters used with `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeasibleSpec {
    Constant {
        set: SetSpec,
    },
    Moving {
        base: SetSpec,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        d: Vec<f64>,
        /// Lipschitz certificate for `c`; defaults to `σ_max(C)`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lambda: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Intersection {
        members: Vec<SetSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dykstra_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dykstra_max_iter: Option<usize>,
    },
}

impl SetSpec {
    fn build(&self) -> Result<ConvexSet> {
        match self {
            SetSpec::Box { lo, hi } => {
                ConvexSet::new_box(Vector::new(lo.clone())?, Vector::new(hi.clone())?)
            }
            SetSpec::Ball { center, radius } => {
                ConvexSet::new_ball(Vector::new(center.clone())?, *radius)
            }
            SetSpec::Halfspace { normal, offset } => {
                ConvexSet::new_halfspace(Vector::new(normal.clone())?, *offset)
            }
            SetSpec::Intersection {
                members,
                dykstra_tol,
                dykstra_max_iter,
            } => {
                let members = members.iter().map(SetSpec::build).collect::<Result<Vec<_>>>()?;
                ConvexSet::new_intersection_with(
                    members,
                    dykstra_tol.unwrap_or(crate::projections::DEFAULT_DYKSTRA_TOL),
                    dykstra_max_iter.unwrap_or(crate::projections::DEFAULT_DYKSTRA_MAX_ITER),
                )
            }
        }
    }

    fn from_set(set: &ConvexSet) -> Self {
        match set.kind() {
            SetKind::Box { lo, hi } => SetSpec::Box {
                lo: lo.as_slice().to_vec(),
                hi: hi.as_slice().to_vec(),
            },
            SetKind::Ball { center, radius } => SetSpec::Ball {
                center: center.as_slice().to_vec(),
                radius: *radius,
            },
            SetKind::Halfspace { normal, offset } => SetSpec::Halfspace {
                normal: normal.as_slice().to_vec(),
                offset: *offset,
            },
            SetKind::Intersection {
                members,
                dykstra_tol,
                dykstra_max_iter,
            } => SetSpec::Intersection {
                members: members.iter().map(SetSpec::from_set).collect(),
                dykstra_tol: Some(*dykstra_tol),
                dykstra_max_iter: Some(*dykstra_max_iter),
            },
        }
    }
}

impl ProblemFile {
    pub fn from_problem(problem: &QviProblem) -> Self {
        let feasible = match problem.feasible() {
            FeasibleMap::Constant(set) => FeasibleSpec::Constant {
                set: SetSpec::from_set(set),
            },
            FeasibleMap::Moving(m) => FeasibleSpec::Moving {
                base: SetSpec::from_set(m.base()),
                c: m.c_matrix().to_rows(),
                d: m.c_offset().as_slice().to_vec(),
                lambda: Some(m.lambda()),
            },
        };
        let certified = problem.certified();
        ProblemFile {
            name: problem.name().to_string(),
            description: problem.description().map(str::to_string),
            seed: problem.seed(),
            n: problem.dim(),
            m: problem.operator().matrix().to_rows(),
            q: problem.operator().offset().as_slice().to_vec(),
            feasible,
            starts: problem
                .starts()
                .iter()
                .map(|s| s.as_slice().to_vec())
                .collect(),
            gamma: certified.map(|c| c.gamma),
            theta: certified.map(|c| [c.a, c.b]),
            reference: problem.reference().map(|r| r.as_slice().to_vec()),
        }
    }

    /// Validates and certifies: `μ, L` from `M`, λ from the feasible map.
    pub fn into_problem(self) -> Result<QviProblem> {
        let name = self.name.clone();
        let invalid = |e: Error| match e {
            e @ Error::InvalidProblem { .. } => e,
            other => Error::InvalidProblem {
                name: name.clone(),
                reason: other.to_string(),
            },
        };
        self.build().map_err(invalid)
    }

    fn build(self) -> Result<QviProblem> {
        let n = self.n;
        let dim_err = |what: &str, found: usize| {
            Error::InvalidParameter(format!("{what} has dimension {found}, expected n = {n}"))
        };
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if self.m.len() != n {
            return Err(dim_err("M", self.m.len()));
        }
        let m = DenseMatrix::from_rows(&self.m)?;
        if m.cols() != n {
            return Err(dim_err("M row", m.cols()));
        }
        if self.q.len() != n {
            return Err(dim_err("q", self.q.len()));
        }
        let operator = AffineOperator::new(m, Vector::new(self.q)?)?;

        let feasible = match self.feasible {
            FeasibleSpec::Constant { set } => FeasibleMap::constant(set.build()?),
            FeasibleSpec::Moving { base, c, d, lambda } => {
                let base = base.build()?;
                let c = DenseMatrix::from_rows(&c)?;
                let d = Vector::new(d)?;
                match lambda {
                    Some(l) => FeasibleMap::moving_with_lambda(base, c, d, l)?,
                    None => FeasibleMap::moving(base, c, d)?,
                }
            }
        };
        if feasible.dim() != n {
            return Err(dim_err("feasible set", feasible.dim()));
        }

        let starts = self
            .starts
            .into_iter()
            .map(Vector::new)
            .collect::<Result<Vec<_>>>()?;
        let mut problem = QviProblem::new(self.name, operator, feasible, starts)?;

        match (self.gamma, self.theta) {
            (Some(gamma), Some([a, b])) => {
                let op = problem.operator();
                let params =
                    ContractionParams::new(op.mu(), op.lip(), problem.lambda(), gamma, a, b)?;
                problem = problem.with_certified(params)?;
            }
            (Some(_), None) => {
                return Err(Error::InvalidParameter(
                    "field `theta` ([a, b]) is required when `gamma` is given".into(),
                ))
            }
            (None, Some(_)) => {
                return Err(Error::InvalidParameter(
                    "field `gamma` is required when `theta` is given".into(),
                ))
            }
            (None, None) => {}
        }
        if let Some(r) = self.reference {
            problem = problem.with_reference(Vector::new(r)?)?;
        }
        if let Some(seed) = self.seed {
            problem = problem.with_seed(seed);
        }
        if let Some(d) = self.description {
            problem = problem.with_description(d);
        }
        Ok(problem)
    }
}

/// Parses and validates a problem from JSON text.
pub fn from_json_str(text: &str) -> Result<QviProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    file.into_problem()
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string(problem: &QviProblem) -> String {
    let mut s = serde_json::to_string_pretty(&ProblemFile::from_problem(problem))
        .expect("problem files always serialize");
    s.push('\n');
    s
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<QviProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    from_json_str(&text)
}

pub fn save_problem(problem: &QviProblem, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json_string(problem)).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
