use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::hermitian::CMatrix;
use crate::error::{Error, Result};

/// Matrix of independent circularly-symmetric complex Gaussian entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGaussianMatrix {
    pub variance: f64,
    pub entries: CMatrix,
}

impl ComplexGaussianMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }
}

/// The generator behind every random draw: ChaCha8 keyed by `seed`, with an
/// independent keystream per `stream`. Any `(seed, stream)` pair can be
/// regenerated without touching the others.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples a `rows x cols` matrix whose entries have independent real and
/// imaginary parts, each `N(0, variance / 2)`, so that `E|x|^2 = variance`.
///
/// Entries are drawn in row-major order from [`stream_rng`]`(seed, stream)`.
pub fn sample_complex_gaussian(
    rows: usize,
    cols: usize,
    variance: f64,
    seed: u64,
    stream: u64,
) -> Result<ComplexGaussianMatrix> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::invalid(format!("variance must be positive, got {variance}")));
    }
    let scale = (variance / 2.0).sqrt();
    let mut rng = stream_rng(seed, stream);
    let mut entries = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            entries[(i, j)] = Complex64::new(scale * re, scale * im);
        }
    }
    Ok(ComplexGaussianMatrix { variance, entries })
}
