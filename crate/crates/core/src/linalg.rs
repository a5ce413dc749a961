//! Symmetric matrix analysis: spectral functions, operator norms and the
//! Löwner order.
//!
//! Everything here goes through a symmetric eigendecomposition. The matrices
//! involved are covariances, Hessians and transport-map matrices of small
//! dimension, so exactness matters more than asymptotic cost.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance below which negative eigenvalues are treated as
/// round-off and clamped to zero.
pub const DEFAULT_CLAMP_TOL: f64 = 1e-10;

/// A real symmetric `dim x dim` matrix.
///
/// Construction symmetrizes its input, so `get(i, j) == get(j, i)` holds
/// bit-for-bit.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymMatrix {
    /// Wraps a square matrix, replacing it with `(m + mᵀ) / 2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: DMatrix<f64>) -> Self {
        let d = m.nrows();
        let mut out = m;
        for i in 0..d {
            for j in (i + 1)..d {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Self { inner: out }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::NotSquare {
                rows: d,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        Self {
            inner: DMatrix::identity(dim, dim) * scale,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(diag)),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.inner[(i, j)] == 0.0))
    }

    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.inner.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Spectrum { values, vectors }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.is_diagonal() {
            let mut v: Vec<f64> = self.inner.diagonal().iter().copied().collect();
            v.sort_by(f64::total_cmp);
            return v;
        }
        self.spectrum().values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("dim >= 1")
    }

    /// Applies `f` to the spectrum: `V diag(f(λ)) Vᵀ`.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        if self.is_diagonal() {
            let diag: Vec<f64> = self.inner.diagonal().iter().map(|&v| f(v)).collect();
            return Self::from_diagonal(&diag);
        }
        let Spectrum { values, vectors } = self.spectrum();
        let mapped = DVector::from_iterator(values.len(), values.iter().map(|&v| f(v)));
        let m = &vectors * DMatrix::from_diagonal(&mapped) * vectors.transpose();
        Self::symmetrized(m)
    }

    /// Inverse of a strictly positive definite matrix.
    pub fn inverse_pd(&self) -> Result<SymMatrix> {
        self.require_pd()?;
        Ok(self.spectral_map(|v| 1.0 / v))
    }

    /// `m^{-1/2}` of a strictly positive definite matrix.
    pub fn inv_sqrt_pd(&self) -> Result<SymMatrix> {
        self.require_pd()?;
        Ok(self.spectral_map(|v| 1.0 / v.sqrt()))
    }

    pub fn require_pd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min > 0.0 {
            Ok(())
        } else {
            Err(Error::NotPsd {
                min_eigenvalue: min,
                threshold: 0.0,
            })
        }
    }

    /// `c · self · cᵀ`, symmetrized.
    pub fn congruence(&self, c: &SymMatrix) -> Result<SymMatrix> {
        self.check_dim(c)?;
        Ok(Self::symmetrized(&c.inner * &self.inner * c.inner.transpose()))
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn determinant(&self) -> f64 {
        self.eigenvalues().iter().product()
    }

    /// Hilbert–Schmidt (Frobenius) norm.
    pub fn hs_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.inner[(i, j)] * x[j]).sum())
            .collect()
    }

    /// `xᵀ M x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Plain matrix product (generally not symmetric).
    pub fn matmul(&self, other: &SymMatrix) -> DMatrix<f64> {
        &self.inner * &other.inner
    }

    pub fn check_dim(&self, other: &SymMatrix) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            })
        }
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("SymMatrix").field(&self.to_rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

impl Add for &SymMatrix {
    type Output = SymMatrix;

    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        SymMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &SymMatrix {
    type Output = SymMatrix;

    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch");
        SymMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;

    fn mul(self, rhs: f64) -> SymMatrix {
        SymMatrix {
            inner: &self.inner * rhs,
        }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;

    fn neg(self) -> SymMatrix {
        SymMatrix { inner: -&self.inner }
    }
}

/// Principal square root of a (near-)PSD matrix.
///
/// Eigenvalues in `[-clamp_tol·‖m‖_op, 0)` are clamped to zero before
/// rooting; anything more negative is rejected.
pub fn sym_sqrt(m: &SymMatrix, clamp_tol: f64) -> Result<SymMatrix> {
    let values = m.eigenvalues();
    let norm = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let threshold = clamp_tol * norm;
    if values[0] < -threshold {
        return Err(Error::NotPsd {
            min_eigenvalue: values[0],
            threshold: -threshold,
        });
    }
    Ok(m.spectral_map(|v| v.max(0.0).sqrt()))
}

/// Operator (spectral) norm: the largest absolute eigenvalue.
pub fn op_norm(m: &SymMatrix) -> f64 {
    m.eigenvalues().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// `a ≼ b` in the Löwner order, up to `tol`: `λ_min(b - a) ≥ -tol`.
pub fn loewner_leq(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    a.check_dim(b)?;
    Ok((b - a).min_eigenvalue() >= -tol)
}
