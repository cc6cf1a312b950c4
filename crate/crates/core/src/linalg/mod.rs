//! Dense complex Hermitian linear algebra and seeded Gaussian sampling.
//!
//! Storage and BLAS-like products come from `nalgebra`; the eigensolver used
//! for decompositions with eigenvectors is a cyclic Jacobi method written
//! here. All values are immutable after construction.

mod eig;
mod factor;
mod hermitian;
mod random;

pub use eig::{
    hermitian_eig, hermitian_eigenvalues, hermitian_sqrt, EigenDecomposition, JACOBI_MAX_SWEEPS,
    JACOBI_RELATIVE_THRESHOLD, PSD_TOLERANCE,
};
pub use factor::{inverse_hpd, log_det_hpd};
pub(crate) use factor::inverse_general;
pub use hermitian::{trace_of_product, CMatrix, HermitianMatrix};
pub use random::{sample_complex_gaussian, stream_rng, ComplexGaussianMatrix};

/// Pairwise (cascade) summation; the reduction tree depends only on the
/// slice length, so the result is independent of how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
    }
}
