use num_complex::Complex64;

use super::hermitian::{CMatrix, HermitianMatrix};
use crate::error::{Error, Result};

/// Sweep budget of the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 30;
/// Stop once the off-diagonal Frobenius norm falls below this fraction of `||A||_F`.
pub const JACOBI_RELATIVE_THRESHOLD: f64 = 1e-13;
/// Eigenvalues in `[-PSD_TOLERANCE * ||A||, 0)` are treated as round-off and clamped to zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Spectral decomposition `A = U diag(eigenvalues) U^H`, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectrum(&self.eigenvectors, &self.eigenvalues)
            .expect("eigenvector and eigenvalue counts agree by construction")
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Eigenvalues with the PSD round-off clamp applied.
    ///
    /// Fails if any eigenvalue lies below `-PSD_TOLERANCE * ||A||_2`.
    pub fn clamped_eigenvalues(&self) -> Result<Vec<f64>> {
        let tolerance = PSD_TOLERANCE * self.spectral_norm();
        let min = self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -tolerance {
            return Err(Error::NotNonnegativeDefinite {
                min_eigenvalue: min,
                tolerance,
            });
        }
        Ok(self.eigenvalues.iter().map(|&v| v.max(0.0)).collect())
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi diagonalization of a complex Hermitian matrix.
pub fn hermitian_eig(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    let mut m = a.as_matrix().clone();
    let mut v = CMatrix::identity(n, n);
    let threshold = JACOBI_RELATIVE_THRESHOLD * a.frobenius_norm();

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&m);
    while off > threshold {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&m);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].re.total_cmp(&m[(i, i)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

// Annihilates m[p][q] with the unitary J = D G D^H, where D rephases the pair
// to a real off-diagonal entry and G is the classical real Jacobi rotation.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    let tau = (aqq - app) / (2.0 * magnitude);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let s_fwd = phase * s; // J[p][q]
    let s_bwd = phase.conj() * s; // -J[q][p]

    let n = m.nrows();
    // columns: M <- M J
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * s_bwd;
        m[(k, q)] = mkp * s_fwd + mkq * c;
    }
    // rows: M <- J^H M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * s_fwd;
        m[(q, k)] = mpk * s_bwd + mqk * c;
    }
    m[(p, p)] = Complex64::new(app - t * magnitude, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * magnitude, 0.0);
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s_bwd;
        v[(k, q)] = vkp * s_fwd + vkq * c;
    }
}

/// Eigenvalues only, sorted descending, via Householder tridiagonalization
/// and implicit QR. Used on the Monte Carlo hot path where eigenvectors are
/// not needed; independent of [`hermitian_eig`].
pub fn hermitian_eigenvalues(a: &HermitianMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = a.as_matrix().clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

/// Hermitian nonnegative square root.
pub fn hermitian_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.is_identity() {
        return Ok(a.clone());
    }
    let eig = hermitian_eig(a)?;
    let roots: Vec<f64> = eig.clamped_eigenvalues()?.into_iter().map(f64::sqrt).collect();
    HermitianMatrix::from_spectrum(&eig.eigenvectors, &roots)
}
