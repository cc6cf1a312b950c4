//! Monte Carlo reference for the deterministic equivalents.
//!
//! Trial `t` of user `k` draws `X_k` from stream `(t << 16) | k` of the seeded
//! generator, so any realization can be regenerated on its own and the result
//! does not depend on how trials are scheduled across threads.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::det_equiv::shannon_de;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, hermitian_sqrt, log_det_hpd, pairwise_sum, sample_complex_gaussian, CMatrix,
    HermitianMatrix,
};
use crate::system::{PrecoderSet, SystemConfig, UserSubset};

const STREAM_BITS: u32 = 16;

pub fn stream_index(trial: u64, user: usize) -> u64 {
    (trial << STREAM_BITS) | user as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `H_k = R_k^{1/2} X_k T_k^{1/2}`, one `N x n_k` matrix per user.
    pub h: Vec<CMatrix>,
    pub trial: u64,
    pub seed: u64,
}

/// Draws channel realizations for one configuration, with the correlation
/// square roots computed once.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    n_rx: usize,
    n_tx: Vec<usize>,
    receive_roots: Vec<Option<CMatrix>>,
    transmit_roots: Vec<Option<CMatrix>>,
}

fn root_unless_identity(m: &HermitianMatrix) -> Result<Option<CMatrix>> {
    if m.is_identity() {
        Ok(None)
    } else {
        Ok(Some(hermitian_sqrt(m)?.into_matrix()))
    }
}

impl ChannelSampler {
    pub fn new(cfg: &SystemConfig) -> Result<Self> {
        let mut receive_roots = Vec::with_capacity(cfg.n_users());
        let mut transmit_roots = Vec::with_capacity(cfg.n_users());
        for user in cfg.users() {
            receive_roots.push(root_unless_identity(user.receive.matrix())?);
            transmit_roots.push(root_unless_identity(user.transmit.matrix())?);
        }
        Ok(Self {
            n_rx: cfg.n_rx(),
            n_tx: (0..cfg.n_users()).map(|k| cfg.n_tx(k)).collect(),
            receive_roots,
            transmit_roots,
        })
    }

    pub fn sample(&self, trial: u64, seed: u64) -> Result<ChannelRealization> {
        if trial >> (64 - STREAM_BITS) != 0 {
            return Err(Error::invalid(format!("trial index {trial} is too large")));
        }
        let mut h = Vec::with_capacity(self.n_tx.len());
        for (k, &n) in self.n_tx.iter().enumerate() {
            let x = sample_complex_gaussian(self.n_rx, n, 1.0 / n as f64, seed, stream_index(trial, k))?.entries;
            let left = match &self.receive_roots[k] {
                Some(r) => r * x,
                None => x,
            };
            h.push(match &self.transmit_roots[k] {
                Some(t) => left * t,
                None => left,
            });
        }
        Ok(ChannelRealization { h, trial, seed })
    }
}

pub fn sample_channel(cfg: &SystemConfig, trial: u64, seed: u64) -> Result<ChannelRealization> {
    ChannelSampler::new(cfg)?.sample(trial, seed)
}

// sum over the subset of H_i P_i H_i^H
fn gram_sum(real: &ChannelRealization, precoders: Option<&PrecoderSet>, subset: UserSubset) -> Result<CMatrix> {
    let n = real.h.first().map_or(0, |h| h.nrows());
    let mut acc = CMatrix::zeros(n, n);
    for k in subset.members() {
        let h = real
            .h
            .get(k)
            .ok_or_else(|| Error::invalid(format!("subset {subset} exceeds {} users", real.h.len())))?;
        match precoders.map(|p| p.matrix(k)) {
            Some(p) if !p.is_identity() => {
                if p.dim() != h.ncols() {
                    return Err(Error::DimensionMismatch(format!("precoder of user {} does not fit H", k + 1)));
                }
                acc += h * p.as_matrix() * h.adjoint();
            }
            _ => acc += h * h.adjoint(),
        }
    }
    Ok(acc)
}

/// `(1/N) log det(I + sigma^-2 sum_{i in S} H_i P_i H_i^H)` in nats, with
/// `P_i = I` when no precoders are given.
pub fn empirical_mutual_info(
    real: &ChannelRealization,
    precoders: Option<&PrecoderSet>,
    sigma2: f64,
    subset: UserSubset,
) -> Result<f64> {
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid(format!("noise power must be positive, got {sigma2}")));
    }
    if let Some(p) = precoders {
        if p.len() != real.h.len() {
            return Err(Error::DimensionMismatch("one precoder per user expected".into()));
        }
    }
    let mut m = gram_sum(real, precoders, subset)? / Complex64::new(sigma2, 0.0);
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    Ok(log_det_hpd(&HermitianMatrix::mirror(m))? / n as f64)
}

/// Empirical bound on `sum_{i in S} R_i` for every nonempty subset.
pub fn empirical_rate_region(
    real: &ChannelRealization,
    precoders: Option<&PrecoderSet>,
    sigma2: f64,
) -> Result<BTreeMap<UserSubset, f64>> {
    UserSubset::enumerate(real.h.len())
        .map(|s| Ok((s, empirical_mutual_info(real, precoders, sigma2, s)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloReport {
    pub trials: usize,
    /// Mean mutual information, nats per receive antenna.
    pub mean: f64,
    pub std_error: f64,
    pub det_equiv: f64,
    pub rel_gap: f64,
}

impl MonteCarloReport {
    fn from_samples(samples: &[f64], det_equiv: f64) -> Self {
        let (mean, std_error) = mean_and_std_error(samples);
        Self {
            trials: samples.len(),
            mean,
            std_error,
            det_equiv,
            rel_gap: relative_gap(mean, det_equiv),
        }
    }

    /// Distance between the estimate and the equivalent in standard errors.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.det_equiv).abs() / self.std_error
    }
}

pub fn relative_gap(estimate: f64, reference: f64) -> f64 {
    (estimate - reference).abs() / reference.abs().max(1e-300)
}

/// Sample mean and `sample_std / sqrt(n)`, both reduced pairwise.
pub fn mean_and_std_error(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = pairwise_sum(samples) / n;
    let squares: Vec<f64> = samples.iter().map(|v| (v - mean).powi(2)).collect();
    let variance = pairwise_sum(&squares) / (n - 1.0);
    (mean, (variance / n).sqrt())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 2 {
        return Err(Error::invalid(format!("at least 2 trials are required, got {trials}")));
    }
    Ok(())
}

/// Per-trial mutual information over `trials` independent realizations.
pub fn mutual_info_samples(
    cfg: &SystemConfig,
    precoders: Option<&PrecoderSet>,
    subset: UserSubset,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    cfg.check_subset(subset)?;
    if let Some(p) = precoders {
        p.check_against(cfg)?;
    }
    let sampler = ChannelSampler::new(cfg)?;
    (0..trials as u64)
        .into_par_iter()
        .map(|t| empirical_mutual_info(&sampler.sample(t, seed)?, precoders, cfg.sigma2(), subset))
        .collect()
}

/// Ergodic mutual information of `subset` at the configured noise power,
/// against its deterministic equivalent.
pub fn ergodic_estimate(
    cfg: &SystemConfig,
    precoders: Option<&PrecoderSet>,
    subset: UserSubset,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    check_trials(trials)?;
    let samples = mutual_info_samples(cfg, precoders, subset, trials, seed)?;
    let sub_p = precoders.map(|p| p.restrict(subset)).transpose()?;
    let de = shannon_de(&cfg.restrict(subset)?, cfg.sigma2(), sub_p.as_ref())?;
    Ok(MonteCarloReport::from_samples(&samples, de.value))
}

/// `(1/N) tr(B_N - z I)^-1` for each trial, from the eigenvalues of
/// `B_N = sum_k H_k H_k^H + S`.
pub fn stieltjes_samples(cfg: &SystemConfig, trials: usize, z: Complex64, seed: u64) -> Result<Vec<Complex64>> {
    if !(z.re.is_finite() && z.im.is_finite()) || (z.im == 0.0 && z.re >= 0.0) {
        return Err(Error::invalid(format!("evaluation point {z} lies on the nonnegative real axis")));
    }
    let sampler = ChannelSampler::new(cfg)?;
    let all = cfg.all_users();
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut b = gram_sum(&sampler.sample(t, seed)?, None, all)?;
            if let Some(s) = cfg.interference() {
                b += s.as_matrix();
            }
            let eigenvalues = hermitian_eigenvalues(&HermitianMatrix::mirror(b));
            let n = eigenvalues.len() as f64;
            let sum: Complex64 = eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum();
            Ok(sum / n)
        })
        .collect()
}

pub fn empirical_stieltjes(cfg: &SystemConfig, trials: usize, z: Complex64, seed: u64) -> Result<Complex64> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let samples = stieltjes_samples(cfg, trials, z, seed)?;
    let re: Vec<f64> = samples.iter().map(|v| v.re).collect();
    let im: Vec<f64> = samples.iter().map(|v| v.im).collect();
    let n = trials as f64;
    Ok(Complex64::new(pairwise_sum(&re) / n, pairwise_sum(&im) / n))
}
