#![allow(dead_code)]

use kronmac::linalg::{CMatrix, HermitianMatrix};
use kronmac::{CorrelationMatrix, PrecoderSet, Side, SystemConfig, UserLink};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Random `G G^H + ridge I` rescaled to unit diagonal.
pub fn random_correlation(n: usize, rank: usize, ridge: f64, side: Side, rng: &mut ChaCha8Rng) -> CorrelationMatrix {
    let g = gaussian_matrix(n, rank, rng);
    let mut a = &g * g.adjoint();
    for i in 0..n {
        a[(i, i)] += ridge;
    }
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].re.sqrt()).collect();
    let m = HermitianMatrix::from_upper_fn(n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { a[(i, j)] / (d[i] * d[j]) })
        .unwrap();
    CorrelationMatrix::new(m, side).unwrap()
}

pub struct SystemShape {
    pub max_users: usize,
    pub max_rx: usize,
    pub max_tx: usize,
    /// Full-rank transmit correlations.
    pub invertible_t: bool,
}

pub fn random_system(shape: &SystemShape, rng: &mut ChaCha8Rng) -> SystemConfig {
    let k = rng.random_range(1..=shape.max_users);
    let n_rx = rng.random_range(1..=shape.max_rx);
    let mut users = Vec::with_capacity(k);
    for _ in 0..k {
        let n_tx = rng.random_range(1..=shape.max_tx);
        let r_rank = rng.random_range(1..=n_rx);
        let receive = if rng.random_bool(0.2) {
            CorrelationMatrix::identity(n_rx, Side::Receive)
        } else {
            random_correlation(n_rx, r_rank, 0.0, Side::Receive, rng)
        };
        let transmit = if shape.invertible_t {
            random_correlation(n_tx, n_tx, 0.05, Side::Transmit, rng)
        } else {
            let rank = rng.random_range(1..=n_tx);
            random_correlation(n_tx, rank, 0.0, Side::Transmit, rng)
        };
        let budget = 0.5 + rng.random::<f64>();
        users.push(UserLink::new(receive, transmit, budget).unwrap());
    }
    let sigma2 = 10f64.powf(rng.random_range(-1.5..0.7));
    SystemConfig::new(users, sigma2).unwrap()
}

/// Random nonnegative definite precoders, each spending a random fraction of
/// its budget.
pub fn random_precoders(cfg: &SystemConfig, rng: &mut ChaCha8Rng) -> PrecoderSet {
    let matrices = cfg
        .users()
        .iter()
        .map(|u| {
            let n = u.n_tx();
            let g = gaussian_matrix(n, rng.random_range(1..=n), rng);
            let p = HermitianMatrix::gram(&g).unwrap();
            let target = u.budget * rng.random_range(0.3..1.0) * n as f64;
            p.scaled(target / p.trace())
        })
        .collect();
    PrecoderSet::new(matrices, cfg.budgets()).unwrap()
}

pub fn iid(n_rx: usize, n_tx: usize, sigma2: f64) -> SystemConfig {
    let link = UserLink::new(
        CorrelationMatrix::identity(n_rx, Side::Receive),
        CorrelationMatrix::identity(n_tx, Side::Transmit),
        1.0,
    )
    .unwrap();
    SystemConfig::new(vec![link], sigma2).unwrap()
}

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// `2 ln((1 + sqrt 5)/2) - (sqrt 5 - 1)^2 / 4`
pub fn mp_shannon() -> f64 {
    let s5 = 5f64.sqrt();
    2.0 * ((1.0 + s5) / 2.0).ln() - (s5 - 1.0).powi(2) / 4.0
}
