use nalgebra::Cholesky;
use num_complex::Complex64;

use super::hermitian::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

// nalgebra accepts numerically singular inputs, so pivots are also checked
// against the diagonal scale.
fn cholesky(a: &HermitianMatrix) -> Result<Cholesky<Complex64, nalgebra::Dyn>> {
    let chol = Cholesky::new(a.as_matrix().clone()).ok_or(Error::NotPositiveDefinite)?;
    let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = a.dim() as f64 * f64::EPSILON * scale;
    let l = chol.l_dirty();
    for i in 0..a.dim() {
        let pivot = l[(i, i)].re;
        if !(pivot.is_finite() && pivot * pivot > floor) {
            return Err(Error::NotPositiveDefinite);
        }
    }
    Ok(chol)
}

/// Natural log-determinant of a Hermitian positive definite matrix via its
/// Cholesky factor.
pub fn log_det_hpd(a: &HermitianMatrix) -> Result<f64> {
    let chol = cholesky(a)?;
    let l = chol.l_dirty();
    let acc: f64 = (0..a.dim()).map(|i| l[(i, i)].re.ln()).sum();
    Ok(2.0 * acc)
}

/// Inverse of a Hermitian positive definite matrix.
pub fn inverse_hpd(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix::mirror(cholesky(a)?.inverse()))
}

/// Inverse of a general square complex matrix by partial-pivot LU. Only the
/// complex-`z` resolvent needs this, where the system matrix is not Hermitian.
pub(crate) fn inverse_general(a: &CMatrix) -> Result<CMatrix> {
    a.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::invalid("singular resolvent matrix"))
}
