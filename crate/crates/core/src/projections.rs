//! Exact metric projections onto boxes, balls, halfspaces and their
//! intersections, plus the moving-set map `K(x) = c(x) + K₀`.

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, DenseMatrix, Vector};

pub const DEFAULT_DYKSTRA_TOL: f64 = 1e-12;
pub const DEFAULT_DYKSTRA_MAX_ITER: usize = 10_000;

/// A closed convex set with an exact (or Dykstra-exact) projection.
///
/// Constructed only through the validating constructors, so every value
/// satisfies its family's invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet(SetKind);

/// Read-only view of a [`ConvexSet`].
#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    Box {
        lo: Vector,
        hi: Vector,
    },
    Ball {
        center: Vector,
        radius: f64,
    },
    /// `{z : normal·z ≤ offset}`.
    Halfspace {
        normal: Vector,
        offset: f64,
    },
    Intersection {
        members: Vec<ConvexSet>,
        dykstra_tol: f64,
        dykstra_max_iter: usize,
    },
}

impl ConvexSet {
    pub fn new_box(lo: Vector, hi: Vector) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::DimensionMismatch {
                expected: lo.dim(),
                found: hi.dim(),
            });
        }
        if lo.dim() == 0 {
            return Err(Error::InvalidSet("box must have positive dimension".into()));
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidSet("box bounds must be finite".into()));
        }
        if let Some(i) = (0..lo.dim()).find(|&i| lo[i] > hi[i]) {
            return Err(Error::InvalidSet(format!(
                "box requires lo <= hi, but lo[{i}] = {} > hi[{i}] = {}",
                lo[i], hi[i]
            )));
        }
        Ok(ConvexSet(SetKind::Box { lo, hi }))
    }

    pub fn new_ball(center: Vector, radius: f64) -> Result<Self> {
        if center.dim() == 0 {
            return Err(Error::InvalidSet("ball must have positive dimension".into()));
        }
        if !center.is_finite() {
            return Err(Error::InvalidSet("ball center must be finite".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidSet(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(ConvexSet(SetKind::Ball { center, radius }))
    }

    pub fn new_halfspace(normal: Vector, offset: f64) -> Result<Self> {
        if normal.dim() == 0 {
            return Err(Error::InvalidSet(
                "halfspace must have positive dimension".into(),
            ));
        }
        if !normal.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidSet("halfspace data must be finite".into()));
        }
        if normal.norm_squared() == 0.0 {
            return Err(Error::InvalidSet("halfspace normal must be nonzero".into()));
        }
        Ok(ConvexSet(SetKind::Halfspace { normal, offset }))
    }

    pub fn new_intersection(members: Vec<ConvexSet>) -> Result<Self> {
        Self::new_intersection_with(members, DEFAULT_DYKSTRA_TOL, DEFAULT_DYKSTRA_MAX_ITER)
    }

    /// Nonemptiness of the intersection is the caller's responsibility.
    pub fn new_intersection_with(
        members: Vec<ConvexSet>,
        dykstra_tol: f64,
        dykstra_max_iter: usize,
    ) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::InvalidSet(
                "intersection needs at least one member".into(),
            ));
        };
        let n = first.dim();
        if let Some(m) = members.iter().find(|m| m.dim() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.dim(),
            });
        }
        if !(dykstra_tol > 0.0 && dykstra_tol.is_finite()) {
            return Err(Error::InvalidSet(format!(
                "dykstra_tol must be positive, got {dykstra_tol}"
            )));
        }
        if dykstra_max_iter == 0 {
            return Err(Error::InvalidSet("dykstra_max_iter must be positive".into()));
        }
        Ok(ConvexSet(SetKind::Intersection {
            members,
            dykstra_tol,
            dykstra_max_iter,
        }))
    }

    pub fn kind(&self) -> &SetKind {
        &self.0
    }

    pub fn dim(&self) -> usize {
        match &self.0 {
            SetKind::Box { lo, .. } => lo.dim(),
            SetKind::Ball { center, .. } => center.dim(),
            SetKind::Halfspace { normal, .. } => normal.dim(),
            SetKind::Intersection { members, .. } => members[0].dim(),
        }
    }

    /// Bounded iff it is a box or ball, or an intersection with at least
    /// one bounded member. (Bounded polytopes cut out purely by halfspaces
    /// are conservatively reported as unbounded.)
    pub fn is_bounded(&self) -> bool {
        match &self.0 {
            SetKind::Box { .. } | SetKind::Ball { .. } => true,
            SetKind::Halfspace { .. } => false,
            SetKind::Intersection { members, .. } => members.iter().any(ConvexSet::is_bounded),
        }
    }

    /// Axis-aligned box containing the set, if bounded.
    pub fn bounding_box(&self) -> Option<(Vector, Vector)> {
        match &self.0 {
            SetKind::Box { lo, hi } => Some((lo.clone(), hi.clone())),
            SetKind::Ball { center, radius } => {
                Some((center.map(|c| c - radius), center.map(|c| c + radius)))
            }
            SetKind::Halfspace { .. } => None,
            SetKind::Intersection { members, .. } => members
                .iter()
                .filter_map(ConvexSet::bounding_box)
                .reduce(|(lo1, hi1), (lo2, hi2)| (lo1.zip_map(&lo2, f64::max), hi1.zip_map(&hi2, f64::min))),
        }
    }

    /// Largest constraint violation of `v` (0 when `v` is in the set).
    ///
    /// Halfspace violation is `normal·v − offset`, i.e. not normalized by ‖normal‖.
    pub fn violation(&self, v: &Vector) -> f64 {
        match &self.0 {
            SetKind::Box { lo, hi } => (0..v.dim())
                .map(|i| (lo[i] - v[i]).max(v[i] - hi[i]))
                .fold(0.0, f64::max),
            SetKind::Ball { center, radius } => (v.distance(center) - radius).max(0.0),
            SetKind::Halfspace { normal, offset } => (normal.dot(v) - offset).max(0.0),
            SetKind::Intersection { members, .. } => {
                members.iter().map(|m| m.violation(v)).fold(0.0, f64::max)
            }
        }
    }

    /// Metric projection `P(z)`.
    pub fn project(&self, z: &Vector) -> Result<Vector> {
        if z.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.dim(),
            });
        }
        Ok(match &self.0 {
            SetKind::Box { lo, hi } => {
                Vector::from_raw((0..z.dim()).map(|i| z[i].max(lo[i]).min(hi[i])).collect())
            }
            SetKind::Ball { center, radius } => {
                let d = z - center;
                let dist = d.norm();
                if dist <= *radius {
                    z.clone()
                } else {
                    center.add_scaled(radius / dist, &d)
                }
            }
            SetKind::Halfspace { normal, offset } => {
                let excess = normal.dot(z) - offset;
                if excess <= 0.0 {
                    z.clone()
                } else {
                    z.add_scaled(-excess / normal.norm_squared(), normal)
                }
            }
            SetKind::Intersection {
                members,
                dykstra_tol,
                dykstra_max_iter,
            } => dykstra(members, z, *dykstra_tol, *dykstra_max_iter)?,
        })
    }
}

/// Dykstra's alternating projections with correction terms.
///
/// Stops when the iterate moves less than `tol` over a full sweep.
fn dykstra(members: &[ConvexSet], z: &Vector, tol: f64, max_iter: usize) -> Result<Vector> {
    if members.len() == 1 {
        return members[0].project(z);
    }
    let mut x = z.clone();
    let mut corrections = vec![Vector::zeros(z.dim()); members.len()];
    let mut change = f64::INFINITY;
    for _ in 0..max_iter {
        let start = x.clone();
        for (set, p) in members.iter().zip(corrections.iter_mut()) {
            let shifted = &x + p;
            let y = set.project(&shifted)?;
            *p = &shifted - &y;
            x = y;
        }
        change = x.distance(&start);
        if change < tol {
            return Ok(x);
        }
    }
    Err(Error::DykstraNotConverged {
        iterations: max_iter,
        residual: change,
        last: x,
    })
}

/// Free-function form of [`ConvexSet::project`].
pub fn project(set: &ConvexSet, z: &Vector) -> Result<Vector> {
    set.project(z)
}

/// The feasible map `x ↦ K(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleMap {
    Constant(ConvexSet),
    /// `K(x) = Cx + d + base`.
    Moving(MovingSet),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingSet {
    base: ConvexSet,
    c_matrix: DenseMatrix,
    c_offset: Vector,
    lambda: f64,
}

impl MovingSet {
    pub fn base(&self) -> &ConvexSet {
        &self.base
    }

    pub fn c_matrix(&self) -> &DenseMatrix {
        &self.c_matrix
    }

    pub fn c_offset(&self) -> &Vector {
        &self.c_offset
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl FeasibleMap {
    pub fn constant(set: ConvexSet) -> Self {
        FeasibleMap::Constant(set)
    }

    /// Moving set with λ certified as `σ_max(C)`.
    pub fn moving(base: ConvexSet, c_matrix: DenseMatrix, c_offset: Vector) -> Result<Self> {
        let lambda = spectral_norm(&c_matrix);
        Self::moving_with_lambda(base, c_matrix, c_offset, lambda)
    }

    /// Moving set with a caller-supplied λ, which must be ≥ `σ_max(C) − 1e-9`.
    pub fn moving_with_lambda(
        base: ConvexSet,
        c_matrix: DenseMatrix,
        c_offset: Vector,
        lambda: f64,
    ) -> Result<Self> {
        let n = base.dim();
        if c_matrix.rows() != n || c_matrix.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if c_matrix.rows() != n {
                    c_matrix.rows()
                } else {
                    c_matrix.cols()
                },
            });
        }
        if c_offset.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c_offset.dim(),
            });
        }
        if !c_offset.is_finite() {
            return Err(Error::InvalidSet("moving-set offset must be finite".into()));
        }
        let sigma = spectral_norm(&c_matrix);
        if !(lambda.is_finite() && lambda >= 0.0 && lambda >= sigma - 1e-9) {
            return Err(Error::InvalidSet(format!(
                "lambda = {lambda} is not a valid Lipschitz certificate (sigma_max(C) = {sigma})"
            )));
        }
        Ok(FeasibleMap::Moving(MovingSet {
            base,
            c_matrix,
            c_offset,
            lambda,
        }))
    }

    pub fn dim(&self) -> usize {
        self.base().dim()
    }

    pub fn base(&self) -> &ConvexSet {
        match self {
            FeasibleMap::Constant(s) => s,
            FeasibleMap::Moving(m) => &m.base,
        }
    }

    /// Translation `c(x)`; `None` for constant maps.
    pub fn shift(&self, x: &Vector) -> Option<Vector> {
        match self {
            FeasibleMap::Constant(_) => None,
            FeasibleMap::Moving(m) => Some(&m.c_matrix.mul_vec(x) + &m.c_offset),
        }
    }

    /// `P_{K(x)}(z) = c(x) + P_base(z − c(x))`.
    pub fn project(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        match self.shift(x) {
            None => self.base().project(z),
            Some(c) => {
                if z.dim() != c.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: c.dim(),
                        found: z.dim(),
                    });
                }
                let p = self.base().project(&(z - &c))?;
                Ok(&c + &p)
            }
        }
    }

    /// Violation of `v` against `K(x)`.
    pub fn violation(&self, x: &Vector, v: &Vector) -> f64 {
        match self.shift(x) {
            None => self.base().violation(v),
            Some(c) => self.base().violation(&(v - &c)),
        }
    }

    /// The set `K(x)` as a standalone set (translating the base).
    pub fn set_at(&self, x: &Vector) -> ConvexSet {
        match self.shift(x) {
            None => self.base().clone(),
            Some(c) => translate(self.base(), &c),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            FeasibleMap::Constant(_) => 0.0,
            FeasibleMap::Moving(m) => m.lambda,
        }
    }
}

/// `c + set`.
pub fn translate(set: &ConvexSet, c: &Vector) -> ConvexSet {
    ConvexSet(match &set.0 {
        SetKind::Box { lo, hi } => SetKind::Box {
            lo: lo + c,
            hi: hi + c,
        },
        SetKind::Ball { center, radius } => SetKind::Ball {
            center: center + c,
            radius: *radius,
        },
        SetKind::Halfspace { normal, offset } => SetKind::Halfspace {
            normal: normal.clone(),
            offset: offset + normal.dot(c),
        },
        SetKind::Intersection {
            members,
            dykstra_tol,
            dykstra_max_iter,
        } => SetKind::Intersection {
            members: members.iter().map(|m| translate(m, c)).collect(),
            dykstra_tol: *dykstra_tol,
            dykstra_max_iter: *dykstra_max_iter,
        },
    })
}

pub fn project_feasible_map(k: &FeasibleMap, x: &Vector, z: &Vector) -> Result<Vector> {
    k.project(x, z)
}

/// Stored λ: `σ_max(C)` (or the supplied certificate) for moving sets, 0 for constant maps.
pub fn lambda_certificate(k: &FeasibleMap) -> f64 {
    k.lambda()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn unit_box(n: usize) -> ConvexSet {
        ConvexSet::new_box(Vector::zeros(n), Vector::filled(n, 1.0)).unwrap()
    }

    #[test]
    fn project_examples() {
        assert_eq!(project(&unit_box(2), &v(&[2.0, -1.0])).unwrap(), v(&[1.0, 0.0]));

        let ball = ConvexSet::new_ball(Vector::zeros(2), 1.0).unwrap();
        let p = project(&ball, &v(&[3.0, 4.0])).unwrap();
        assert!(p.distance(&v(&[0.6, 0.8])) < 1e-15);

        let h = ConvexSet::new_halfspace(v(&[1.0, 0.0]), 0.0).unwrap();
        assert_eq!(project(&h, &v(&[2.0, 3.0])).unwrap(), v(&[0.0, 3.0]));
    }

    #[test]
    fn quadrant_projection_matches_grid_search() {
        let quadrant = ConvexSet::new_intersection(vec![
            ConvexSet::new_halfspace(v(&[-1.0, 0.0]), 0.0).unwrap(),
            ConvexSet::new_halfspace(v(&[0.0, -1.0]), 0.0).unwrap(),
        ])
        .unwrap();
        let z = v(&[-1.0, -1.0]);
        let p = project(&quadrant, &z).unwrap();

        // brute force over a grid of the quadrant
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            for j in 0..=200 {
                let y = (i as f64 * 0.01, j as f64 * 0.01);
                let d = (z[0] - y.0).powi(2) + (z[1] - y.1).powi(2);
                if d < best.0 {
                    best = (d, y.0, y.1);
                }
            }
        }
        assert!(p.distance(&v(&[best.1, best.2])) < 1e-12);
    }

    #[test]
    fn dykstra_reports_non_convergence() {
        let set = ConvexSet::new_intersection_with(
            vec![
                ConvexSet::new_ball(v(&[0.0, 0.0]), 1.0).unwrap(),
                ConvexSet::new_ball(v(&[1.9, 0.0]), 1.0).unwrap(),
            ],
            1e-300,
            3,
        )
        .unwrap();
        match project(&set, &v(&[0.95, 5.0])) {
            Err(Error::DykstraNotConverged {
                iterations, last, ..
            }) => {
                assert_eq!(iterations, 3);
                assert_eq!(last.dim(), 2);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_sets_rejected() {
        let err = ConvexSet::new_box(v(&[1.0]), v(&[0.0])).unwrap_err();
        assert!(err.to_string().contains("lo <= hi"));
        assert!(ConvexSet::new_ball(v(&[0.0]), 0.0).is_err());
        assert!(ConvexSet::new_halfspace(v(&[0.0, 0.0]), 1.0).is_err());
        assert!(ConvexSet::new_intersection(vec![]).is_err());
        assert!(ConvexSet::new_intersection(vec![unit_box(1), unit_box(2)]).is_err());
    }

    #[test]
    fn moving_set_examples() {
        let base = ConvexSet::new_box(v(&[0.0]), v(&[1.0])).unwrap();
        let k = FeasibleMap::moving(base, DenseMatrix::diagonal(&[0.5]), v(&[0.0])).unwrap();
        let p = project_feasible_map(&k, &v(&[1.0]), &v(&[2.0])).unwrap();
        assert!((p[0] - 1.5).abs() < 1e-15);

        let ball = ConvexSet::new_ball(Vector::zeros(2), 1.0).unwrap();
        let k = FeasibleMap::moving(ball, DenseMatrix::scaled_identity(2, 0.1), Vector::zeros(2))
            .unwrap();
        let p = project_feasible_map(&k, &v(&[10.0, 0.0]), &v(&[10.0, 0.0])).unwrap();
        assert!(p.distance(&v(&[2.0, 0.0])) < 1e-14);
    }

    #[test]
    fn lambda_certificate_examples() {
        assert_eq!(lambda_certificate(&FeasibleMap::constant(unit_box(2))), 0.0);
        let k = FeasibleMap::moving(unit_box(2), DenseMatrix::scaled_identity(2, 0.2), Vector::zeros(2))
            .unwrap();
        assert!((lambda_certificate(&k) - 0.2).abs() < 1e-14);
        assert!(FeasibleMap::moving_with_lambda(
            unit_box(2),
            DenseMatrix::scaled_identity(2, 0.2),
            Vector::zeros(2),
            0.1
        )
        .is_err());
    }

    #[test]
    fn translate_matches_shifted_projection() {
        let h = ConvexSet::new_halfspace(v(&[1.0, 2.0]), 0.5).unwrap();
        let c = v(&[0.3, -0.7]);
        let z = v(&[2.0, 1.0]);
        let direct = translate(&h, &c).project(&z).unwrap();
        let shifted = &c + &h.project(&(&z - &c)).unwrap();
        assert!(direct.distance(&shifted) < 1e-14);
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0..5.0f64, n)
    }

    proptest! {
        #[test]
        fn ball_projection_is_idempotent_and_nonexpansive(
            z1 in arb_vec(3), z2 in arb_vec(3), r in 0.1..3.0f64
        ) {
            let ball = ConvexSet::new_ball(v(&[0.5, -0.5, 1.0]), r).unwrap();
            let (z1, z2) = (v(&z1), v(&z2));
            let p1 = ball.project(&z1).unwrap();
            let p2 = ball.project(&z2).unwrap();
            prop_assert!(ball.project(&p1).unwrap().distance(&p1) <= 1e-12);
            prop_assert!(p1.distance(&p2) <= z1.distance(&z2) + 1e-12);
        }

        #[test]
        fn two_box_dykstra_matches_box_intersection(z in arb_vec(3)) {
            let a = ConvexSet::new_box(v(&[-1.0, -2.0, 0.0]), v(&[1.0, 0.5, 2.0])).unwrap();
            let b = ConvexSet::new_box(v(&[0.0, -1.0, -1.0]), v(&[2.0, 1.0, 1.0])).unwrap();
            let direct = ConvexSet::new_box(v(&[0.0, -1.0, 0.0]), v(&[1.0, 0.5, 1.0])).unwrap();
            let z = v(&z);
            let d = ConvexSet::new_intersection(vec![a, b]).unwrap().project(&z).unwrap();
            prop_assert!(d.distance(&direct.project(&z).unwrap()) <= 1e-8);
        }

        #[test]
        fn halfspace_projection_is_feasible(z in arb_vec(2), n in arb_vec(2), off in -2.0..2.0f64) {
            prop_assume!(n[0].abs() + n[1].abs() > 1e-3);
            let h = ConvexSet::new_halfspace(v(&n), off).unwrap();
            let p = h.project(&v(&z)).unwrap();
            prop_assert!(h.violation(&p) <= 1e-12);
        }
    }
}
