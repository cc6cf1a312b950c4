use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix, column-major.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex Hermitian matrix.
///
/// Only the upper triangle of the source is read on construction; the lower
/// triangle is written as its conjugate mirror and the diagonal is made real,
/// so `a[(i, j)] == a[(j, i)].conj()` holds bit-exactly for every value of
/// this type.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    inner: CMatrix,
}

impl HermitianMatrix {
    /// Build from the upper triangle (diagonal included) of a square matrix.
    pub fn from_upper(m: &CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::invalid("Hermitian matrix must have dimension >= 1"));
        }
        Ok(Self::mirror(m.clone()))
    }

    /// Build from a function evaluated on the upper triangle `i <= j` only.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("Hermitian matrix must have dimension >= 1"));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            for i in 0..=j {
                m[(i, j)] = f(i, j);
            }
        }
        Ok(Self::mirror(m))
    }

    pub(crate) fn mirror(mut m: CMatrix) -> Self {
        let n = m.nrows();
        for j in 0..n {
            m[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
            for i in 0..j {
                m[(j, i)] = m[(i, j)].conj();
            }
        }
        Self { inner: m }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "Hermitian matrix must have dimension >= 1");
        Self {
            inner: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "Hermitian matrix must have dimension >= 1");
        Self {
            inner: CMatrix::zeros(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_upper_fn(diag.len(), |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `A A^H` for any rectangular `A`.
    pub fn gram(a: &CMatrix) -> Result<Self> {
        Self::from_upper(&(a * a.adjoint()))
    }

    /// `U diag(values) U^H`.
    pub fn from_spectrum(eigenvectors: &CMatrix, values: &[f64]) -> Result<Self> {
        if eigenvectors.ncols() != values.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} eigenvector columns for {} eigenvalues",
                eigenvectors.ncols(),
                values.len()
            )));
        }
        let mut scaled = eigenvectors.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Self::from_upper(&(scaled * eigenvectors.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> CMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.inner[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_identity(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| {
            (0..n).all(|i| {
                let want = if i == j { 1.0 } else { 0.0 };
                self.inner[(i, j)] == Complex64::new(want, 0.0)
            })
        })
    }

    /// Largest `|a_ij - conj(a_ji)|`; zero for every value of this type.
    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::mirror(self.inner.map(|z| z * factor))
    }

    /// `alpha * self + beta * other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot combine {}x{} with {}x{}",
                self.dim(),
                self.dim(),
                other.dim(),
                other.dim()
            )));
        }
        Ok(Self::mirror(self.inner.map(|z| z * alpha) + other.inner.map(|z| z * beta)))
    }

    /// `B A B` for Hermitian `B`, which is again Hermitian.
    pub fn congruence(&self, b: &Self) -> Result<Self> {
        if self.dim() != b.dim() {
            return Err(Error::DimensionMismatch(format!(
                "congruence of {}x{} by {}x{}",
                self.dim(),
                self.dim(),
                b.dim(),
                b.dim()
            )));
        }
        Self::from_upper(&(&b.inner * &self.inner * &b.inner))
    }
}

/// `tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lower_triangle_is_ignored() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = c(1.0, 0.3);
        m[(0, 1)] = c(2.0, -1.0);
        m[(1, 0)] = c(99.0, 99.0);
        m[(1, 1)] = c(3.0, 0.0);
        let h = HermitianMatrix::from_upper(&m).unwrap();
        assert_eq!(h.get(1, 0), c(2.0, 1.0));
        assert_eq!(h.get(0, 0), c(1.0, 0.0));
        assert_eq!(h.max_asymmetry(), 0.0);
    }

    #[test]
    fn rejects_non_square_and_empty() {
        assert!(HermitianMatrix::from_upper(&CMatrix::zeros(2, 3)).is_err());
        assert!(HermitianMatrix::from_upper(&CMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn gram_is_exactly_hermitian() {
        let a = CMatrix::from_fn(3, 5, |i, j| c((i * 7 + j) as f64 * 0.31, (i as f64 - j as f64) * 0.17));
        let g = HermitianMatrix::gram(&a).unwrap();
        assert_eq!(g.max_asymmetry(), 0.0);
        assert_eq!(g.dim(), 3);
    }

    #[test]
    fn trace_of_product_matches_dense() {
        let a = CMatrix::from_fn(3, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| c((i * j) as f64, 0.25));
        let want = (&a * &b).trace();
        assert!((trace_of_product(&a, &b) - want).norm() < 1e-12);
    }
}
