//! Dense vectors, row-major matrices and the affine operator `A(x) = Mx + q`.
//!
//! Arithmetic operators (`+`, `-`, scalar `*`) panic on dimension mismatch;
//! the checked entry points ([`inner_product`], [`apply_operator`]) return
//! [`Error::DimensionMismatch`] instead. Problem construction validates every
//! dimension up front, so solver inner loops use the unchecked forms.

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real vector of fixed dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    /// Builds a vector, rejecting NaN and infinite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(index) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Vector(entries))
    }

    /// Wraps entries without the finiteness check. Used for solver
    /// intermediates, which are screened for divergence separately.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn filled(n: usize, value: f64) -> Self {
        Vector(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in distance");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `a·x + b·y`.
    pub fn combine(a: f64, x: &Vector, b: f64, y: &Vector) -> Vector {
        assert_eq!(x.dim(), y.dim(), "dimension mismatch in combine");
        Vector(x.0.iter().zip(&y.0).map(|(xi, yi)| a * xi + b * yi).collect())
    }

    /// `self + a·x`.
    pub fn add_scaled(&self, a: f64, x: &Vector) -> Vector {
        assert_eq!(self.dim(), x.dim(), "dimension mismatch in add_scaled");
        Vector(self.0.iter().zip(&x.0).map(|(s, xi)| s + a * xi).collect())
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|v| a * v).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in zip_map");
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl From<Vec<f64>> for Vector {
    /// Unchecked conversion; prefer [`Vector::new`] for external data.
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

/// Euclidean inner product with a dimension check.
pub fn inner_product(x: &Vector, y: &Vector) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(x.dot(y))
}

pub fn norm(x: &Vector) -> f64 {
    x.norm()
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::RaggedRows {
                    row,
                    expected: cols,
                    found: r.len(),
                });
            }
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = s;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `(M + Mᵀ)/2`.
    pub fn symmetric_part(&self) -> DenseMatrix {
        assert!(self.is_square());
        let n = self.rows;
        let mut s = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s.data[i * n + j] = 0.5 * (self.get(i, j) + self.get(j, i));
            }
        }
        s
    }

    /// Matrix-vector product. Panics on dimension mismatch.
    pub fn mul_vec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.dim(), "dimension mismatch in mul_vec");
        Vector::from_raw(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
///
/// Only the upper triangle is trusted; the input is symmetrized first.
pub fn symmetric_eigenvalues(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.symmetric_part().data;
    let frob: f64 = m.iter().map(|v| v * v).sum();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q] * m[p * n + q];
            }
        }
        if off == 0.0 || off <= 1e-32 * frob {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Largest singular value `σ_max(M)`, via the eigenvalues of `MᵀM`.
pub fn spectral_norm(m: &DenseMatrix) -> f64 {
    if m.is_zero() {
        return 0.0;
    }
    let gram = m.transpose().matmul(m);
    let eig = symmetric_eigenvalues(&gram).expect("Gram matrix is square");
    eig.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Strong-monotonicity and Lipschitz constants of `x ↦ Mx + q`:
/// `mu = λ_min((M+Mᵀ)/2)`, `lip = σ_max(M)`.
pub fn certify_mu_lip(m: &DenseMatrix) -> Result<(f64, f64)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let mu = symmetric_eigenvalues(&m.symmetric_part())?[0];
    if mu <= 0.0 {
        return Err(Error::NotStronglyMonotone { mu });
    }
    let lip = spectral_norm(m).max(mu);
    Ok((mu, lip))
}

/// Affine operator `A(x) = Mx + q` with stored monotonicity/Lipschitz certificates.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineOperator {
    matrix: DenseMatrix,
    offset: Vector,
    mu: f64,
    lip: f64,
}

impl AffineOperator {
    /// Builds the operator and certifies `mu`, `lip` from `matrix`.
    pub fn new(matrix: DenseMatrix, offset: Vector) -> Result<Self> {
        let (mu, lip) = certify_mu_lip(&matrix)?;
        Self::with_constants(matrix, offset, mu, lip)
    }

    /// Builds the operator with caller-supplied constants, which must be
    /// valid certificates for `matrix` (to 1e-9).
    pub fn with_constants(matrix: DenseMatrix, offset: Vector, mu: f64, lip: f64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        if matrix.rows != offset.dim() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows,
                found: offset.dim(),
            });
        }
        if !(mu > 0.0) {
            return Err(Error::NotStronglyMonotone { mu });
        }
        if mu > lip {
            return Err(Error::InvalidParameter(format!(
                "mu = {mu} exceeds lip = {lip}"
            )));
        }
        let (true_mu, _) = certify_mu_lip(&matrix)?;
        let sigma = spectral_norm(&matrix);
        if mu > true_mu + 1e-9 || lip < sigma - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "constants (mu={mu}, lip={lip}) are not valid certificates (lambda_min={true_mu}, sigma_max={sigma})"
            )));
        }
        Ok(AffineOperator {
            matrix,
            offset,
            mu,
            lip,
        })
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lip(&self) -> f64 {
        self.lip
    }

    /// `Mx + q`. Panics on dimension mismatch.
    pub fn apply(&self, x: &Vector) -> Vector {
        let mut y = self.matrix.mul_vec(x);
        for (yi, qi) in y.0.iter_mut().zip(self.offset.iter()) {
            *yi += qi;
        }
        y
    }
}

/// Checked evaluation of `A(x)`.
pub fn apply_operator(op: &AffineOperator, x: &Vector) -> Result<Vector> {
    if x.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: x.dim(),
        });
    }
    Ok(op.apply(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(inner_product(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(inner_product(&v(&[1.0, 2.0]), &v(&[1.0, 2.0])).unwrap(), 5.0);
        assert_eq!(inner_product(&v(&[3.0, 4.0]), &v(&[1.0, 1.0])).unwrap(), 7.0);
        assert!(matches!(
            inner_product(&v(&[1.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&v(&[0.0, 0.0])), 0.0);
        assert_eq!(norm(&v(&[3.0, 4.0])), 5.0);
        assert_eq!(norm(&v(&[1.0, 1.0, 1.0, 1.0])), 2.0);
    }

    #[test]
    fn vector_rejects_non_finite() {
        assert_eq!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn apply_operator_examples() {
        let id = AffineOperator::new(DenseMatrix::identity(2), Vector::zeros(2)).unwrap();
        assert_eq!(apply_operator(&id, &v(&[2.0, 3.0])).unwrap(), v(&[2.0, 3.0]));

        let d = AffineOperator::new(DenseMatrix::diagonal(&[1.0, 2.0]), v(&[1.0, 0.0])).unwrap();
        assert_eq!(apply_operator(&d, &v(&[1.0, 1.0])).unwrap(), v(&[2.0, 2.0]));

        assert!(apply_operator(&d, &v(&[1.0])).is_err());
    }

    #[test]
    fn constant_operator_evaluates_to_offset() {
        // M = 0 is not strongly monotone, so bypass certification via the raw product.
        let m = DenseMatrix::zeros(1, 1);
        let y = &m.mul_vec(&v(&[7.0])) + &v(&[5.0]);
        assert_eq!(y, v(&[5.0]));
        assert!(matches!(
            AffineOperator::new(m, v(&[5.0])),
            Err(Error::NotStronglyMonotone { .. })
        ));
    }

    #[test]
    fn certify_examples() {
        let (mu, lip) = certify_mu_lip(&DenseMatrix::identity(2)).unwrap();
        assert!((mu - 1.0).abs() < 1e-14 && (lip - 1.0).abs() < 1e-14);

        let (mu, lip) = certify_mu_lip(&DenseMatrix::diagonal(&[1.0, 2.0])).unwrap();
        assert!((mu - 1.0).abs() < 1e-14 && (lip - 2.0).abs() < 1e-14);

        let m = DenseMatrix::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap();
        let (mu, lip) = certify_mu_lip(&m).unwrap();
        assert!((mu - 1.0).abs() < 1e-14);
        assert!((lip - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn certify_errors() {
        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(certify_mu_lip(&rect), Err(Error::NotSquare { .. })));
        let skew = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        assert!(matches!(
            certify_mu_lip(&skew),
            Err(Error::NotStronglyMonotone { .. })
        ));
    }

    #[test]
    fn with_constants_rejects_invalid_certificates() {
        let m = DenseMatrix::diagonal(&[1.0, 3.0]);
        assert!(AffineOperator::with_constants(m.clone(), Vector::zeros(2), 0.5, 4.0).is_ok());
        assert!(AffineOperator::with_constants(m.clone(), Vector::zeros(2), 1.5, 4.0).is_err());
        assert!(AffineOperator::with_constants(m, Vector::zeros(2), 1.0, 2.0).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(
            err,
            Error::RaggedRows {
                row: 1,
                expected: 2,
                found: 1
            }
        );
    }
}
