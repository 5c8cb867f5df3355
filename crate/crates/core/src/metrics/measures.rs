//! Optimality and feasibility measures.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::problems::QviProblem;
use crate::projections::{ConvexSet, SetKind};

/// `opt(x) = −min_{z ∈ K(x)} A(x)ᵀ(z − x)`.
///
/// Closed form for boxes, balls and intersections of boxes; other bounded
/// intersections use a projected-step estimate that over-reports the gap
/// by at most 1e-10 (relative). Unbounded `K(x)` yields
/// [`Error::UnboundedSet`]; use [`natural_residual`] instead.
pub fn opt_measure(problem: &QviProblem, x: &Vector) -> Result<f64> {
    if x.dim() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            found: x.dim(),
        });
    }
    let f = problem.operator().apply(x);
    let set = problem.feasible().set_at(x);
    let min = linear_minimum(&set, &f, x)?;
    Ok(f.dot(x) - min)
}

/// Lower estimate of `min_{z ∈ set} f·z` (exact for the closed-form cases).
fn linear_minimum(set: &ConvexSet, f: &Vector, x: &Vector) -> Result<f64> {
    match set.kind() {
        SetKind::Box { lo, hi } => Ok(box_minimum(lo, hi, f)),
        SetKind::Ball { center, radius } => Ok(f.dot(center) - radius * f.norm()),
        SetKind::Halfspace { .. } => Err(Error::UnboundedSet),
        SetKind::Intersection { members, .. } => {
            if !set.is_bounded() {
                return Err(Error::UnboundedSet);
            }
            let all_boxes = members
                .iter()
                .all(|m| matches!(m.kind(), SetKind::Box { .. }));
            if all_boxes {
                let (lo, hi) = set.bounding_box().expect("bounded");
                if (0..lo.dim()).any(|i| lo[i] > hi[i]) {
                    return Err(Error::InvalidSet("intersection of boxes is empty".into()));
                }
                return Ok(box_minimum(&lo, &hi, f));
            }
            projected_minimum(set, f, x)
        }
    }
}

fn box_minimum(lo: &Vector, hi: &Vector, f: &Vector) -> f64 {
    (0..f.dim())
        .map(|i| if f[i] >= 0.0 { f[i] * lo[i] } else { f[i] * hi[i] })
        .sum()
}

/// For `z_t = P(x − t f)` the projection inequality gives, for all `y` in
/// the set, `f·z_t − f·y ≤ ‖x − z_t‖·D/t` with `D` the bounding-box
/// diameter. Doubles `t` until that gap is negligible and returns the
/// certified lower bound `f·z_t − gap`.
fn projected_minimum(set: &ConvexSet, f: &Vector, x: &Vector) -> Result<f64> {
    let (lo, hi) = set.bounding_box().ok_or(Error::UnboundedSet)?;
    let diameter = lo.distance(&hi);
    let mut t = 1.0;
    let mut bound = f64::NEG_INFINITY;
    for _ in 0..80 {
        let z = set.project(&x.add_scaled(-t, f))?;
        let value = f.dot(&z);
        let gap = x.distance(&z) * diameter / t;
        bound = value - gap;
        if gap <= 1e-10 * value.abs().max(1.0) {
            break;
        }
        t *= 2.0;
    }
    Ok(bound)
}

/// `feas(x)`: largest violation of `x` against `K(x)`.
pub fn feas_measure(problem: &QviProblem, x: &Vector) -> f64 {
    problem.feasible().violation(x, x)
}

/// `‖x − P_{K(x)}(x − γA(x))‖`; zero exactly at solutions.
pub fn natural_residual(problem: &QviProblem, x: &Vector, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} must be positive"
        )));
    }
    let step = x.add_scaled(-gamma, &problem.operator().apply(x));
    Ok(x.distance(&problem.feasible().project(x, &step)?))
}

/// Optimality measure with the natural-residual fallback for unbounded sets.
pub(crate) fn opt_or_residual(problem: &QviProblem, x: &Vector, gamma: f64) -> Result<f64> {
    match opt_measure(problem, x) {
        Err(Error::UnboundedSet) => natural_residual(problem, x, gamma),
        other => other,
    }
}
