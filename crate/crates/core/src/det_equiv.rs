//! Deterministic equivalents of the Stieltjes and Shannon transforms of
//! `B_N = sum_k R_k^{1/2} X_k T_k X_k^H R_k^{1/2} + S`.
//!
//! Everything hinges on the coupled scalars `e_k(z)`:
//!
//! ```text
//! e_k = (1/N) tr R_k (S + sum_j a_j R_j - z I)^-1
//! a_j = (1/n_j) tr T_j (I + c_j e_j T_j)^-1,      delta_j = a_j / (-z)
//! ```
//!
//! solved by plain Picard iteration from `e_k = -1/z`. When precoders are
//! supplied, `T_j` is replaced by `T_j^{1/2} P_j T_j^{1/2}`. Only the
//! eigenvalues of that matrix enter `a_j`, so each user's effective transmit
//! spectrum is computed once per solve.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, hermitian_sqrt, inverse_general, inverse_hpd, log_det_hpd, trace_of_product, CMatrix,
    HermitianMatrix, PSD_TOLERANCE,
};
use crate::quadrature::integrate_fallible;
use crate::system::{PrecoderSet, SystemConfig, UserSubset};

/// Default absolute tolerance on `max_k |e_k^n - e_k^{n-1}|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

impl FixedPointOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub z: Complex64,
    pub e: Vec<Complex64>,
    pub delta: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
}

impl FixedPointSolution {
    pub fn e_real(&self) -> Vec<f64> {
        self.e.iter().map(|v| v.re).collect()
    }

    pub fn delta_real(&self) -> Vec<f64> {
        self.delta.iter().map(|v| v.re).collect()
    }
}

/// Eigenvalues (clamped nonnegative) of each user's effective transmit
/// covariance `T_k` or `T_k^{1/2} P_k T_k^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitSpectra(pub Vec<Vec<f64>>);

impl TransmitSpectra {
    pub fn of(cfg: &SystemConfig, precoders: Option<&PrecoderSet>) -> Result<Self> {
        if let Some(p) = precoders {
            p.check_against(cfg)?;
        }
        let mut spectra = Vec::with_capacity(cfg.n_users());
        for (k, user) in cfg.users().iter().enumerate() {
            let t = user.transmit.matrix();
            let effective = match precoders {
                None => t.clone(),
                Some(p) if t.is_identity() => p.matrix(k).clone(),
                Some(p) => p.matrix(k).congruence(&hermitian_sqrt(t)?)?,
            };
            // round-off is relative to the factors, not to the possibly tiny product
            let scale = match precoders {
                Some(p) => t.frobenius_norm() * p.matrix(k).frobenius_norm(),
                None => t.frobenius_norm(),
            };
            let eigenvalues = hermitian_eig(&effective)?.eigenvalues;
            let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min < -PSD_TOLERANCE * scale {
                return Err(Error::NotNonnegativeDefinite {
                    min_eigenvalue: min,
                    tolerance: PSD_TOLERANCE * scale,
                });
            }
            spectra.push(eigenvalues.into_iter().map(|v| v.max(0.0)).collect());
        }
        Ok(Self(spectra))
    }

    pub fn user(&self, k: usize) -> &[f64] {
        &self.0[k]
    }
}

/// `(1/n) sum_i s_i / (1 + c e s_i)`.
fn transmit_coupling<T>(spectrum: &[f64], c: f64, e: T) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<f64, Output = T> + std::ops::Div<T, Output = T>,
    T: std::iter::Sum<T> + From<f64>,
{
    let n = spectrum.len() as f64;
    let sum: T = spectrum
        .iter()
        .map(|&s| T::from(s) / (e * (c * s) + 1.0))
        .sum();
    sum * (1.0 / n)
}

fn check_z(z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::invalid("evaluation point must be finite"));
    }
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::invalid(format!(
            "evaluation point {z} lies on the nonnegative real axis"
        )));
    }
    Ok(())
}

// S + sum_j coeff_j R_j + shift I, Hermitian when everything is real.
fn resolvent_system_real(cfg: &SystemConfig, coeffs: &[f64], shift: f64) -> HermitianMatrix {
    let n = cfg.n_rx();
    let mut m = match cfg.interference() {
        Some(s) => s.as_matrix().clone(),
        None => CMatrix::zeros(n, n),
    };
    for (user, &a) in cfg.users().iter().zip(coeffs) {
        if a != 0.0 {
            m += user.receive.matrix().as_matrix() * Complex64::new(a, 0.0);
        }
    }
    for i in 0..n {
        m[(i, i)] += shift;
    }
    HermitianMatrix::mirror(m)
}

fn resolvent_system_complex(cfg: &SystemConfig, coeffs: &[Complex64], z: Complex64) -> CMatrix {
    let n = cfg.n_rx();
    let mut m = match cfg.interference() {
        Some(s) => s.as_matrix().clone(),
        None => CMatrix::zeros(n, n),
    };
    for (user, &a) in cfg.users().iter().zip(coeffs) {
        m += user.receive.matrix().as_matrix() * a;
    }
    for i in 0..n {
        m[(i, i)] -= z;
    }
    m
}

fn receive_traces(cfg: &SystemConfig, inverse: &CMatrix) -> Vec<Complex64> {
    let n = cfg.n_rx() as f64;
    cfg.users()
        .iter()
        .map(|u| {
            let r = u.receive.matrix();
            let tr = if r.is_identity() {
                inverse.trace()
            } else {
                trace_of_product(r.as_matrix(), inverse)
            };
            tr / n
        })
        .collect()
}

/// Solves the fixed point for precomputed transmit spectra. `init` overrides
/// the starting point `e_k = -1/z`.
pub fn solve_with_spectra(
    cfg: &SystemConfig,
    spectra: &TransmitSpectra,
    z: Complex64,
    opts: &FixedPointOptions,
    init: Option<&[Complex64]>,
) -> Result<FixedPointSolution> {
    check_z(z)?;
    if spectra.0.len() != cfg.n_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} transmit spectra for {} users",
            spectra.0.len(),
            cfg.n_users()
        )));
    }
    if let Some(init) = init {
        if init.len() != cfg.n_users() {
            return Err(Error::DimensionMismatch("initial point has wrong length".into()));
        }
    }
    if z.im == 0.0 {
        solve_real(cfg, spectra, -z.re, opts, init)
    } else {
        solve_complex(cfg, spectra, z, opts, init)
    }
}

fn solve_real(
    cfg: &SystemConfig,
    spectra: &TransmitSpectra,
    x: f64,
    opts: &FixedPointOptions,
    init: Option<&[Complex64]>,
) -> Result<FixedPointSolution> {
    let k_users = cfg.n_users();
    let mut e: Vec<f64> = match init {
        Some(v) => v.iter().map(|z| z.re).collect(),
        None => vec![1.0 / x; k_users],
    };
    let couplings = |e: &[f64]| -> Vec<f64> {
        (0..k_users)
            .map(|k| transmit_coupling(spectra.user(k), cfg.ratio(k), e[k]))
            .collect()
    };

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while residual > opts.tolerance {
        if iterations == opts.max_iterations || residual.is_nan() {
            return Err(Error::FixedPointNoConvergence {
                iterations,
                residual,
            });
        }
        let system = resolvent_system_real(cfg, &couplings(&e), x);
        let inverse = inverse_hpd(&system)?;
        let next: Vec<f64> = receive_traces(cfg, inverse.as_matrix()).iter().map(|t| t.re).collect();
        residual = next
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if next.iter().any(|v| !v.is_finite()) {
            residual = f64::NAN;
        }
        e = next;
        iterations += 1;
    }

    let delta = couplings(&e).into_iter().map(|a| Complex64::new(a / x, 0.0)).collect();
    Ok(FixedPointSolution {
        z: Complex64::new(-x, 0.0),
        e: e.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        delta,
        iterations,
        residual,
    })
}

fn solve_complex(
    cfg: &SystemConfig,
    spectra: &TransmitSpectra,
    z: Complex64,
    opts: &FixedPointOptions,
    init: Option<&[Complex64]>,
) -> Result<FixedPointSolution> {
    let k_users = cfg.n_users();
    let mut e: Vec<Complex64> = match init {
        Some(v) => v.to_vec(),
        None => vec![-1.0 / z; k_users],
    };
    let couplings = |e: &[Complex64]| -> Vec<Complex64> {
        (0..k_users)
            .map(|k| transmit_coupling(spectra.user(k), cfg.ratio(k), e[k]))
            .collect()
    };

    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    while residual > opts.tolerance {
        if iterations == opts.max_iterations || residual.is_nan() {
            return Err(Error::FixedPointNoConvergence {
                iterations,
                residual,
            });
        }
        let system = resolvent_system_complex(cfg, &couplings(&e), z);
        let inverse = inverse_general(&system)?;
        let next = receive_traces(cfg, &inverse);
        residual = next
            .iter()
            .zip(&e)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        e = next;
        iterations += 1;
    }

    let delta = couplings(&e).into_iter().map(|a| a / (-z)).collect();
    Ok(FixedPointSolution {
        z,
        e,
        delta,
        iterations,
        residual,
    })
}

/// Solves for `e_k(z)`, `delta_k(z)` with the default tolerance.
pub fn solve_fixed_point(
    cfg: &SystemConfig,
    z: Complex64,
    precoders: Option<&PrecoderSet>,
) -> Result<FixedPointSolution> {
    solve_fixed_point_with(cfg, z, precoders, &FixedPointOptions::default(), None)
}

pub fn solve_fixed_point_with(
    cfg: &SystemConfig,
    z: Complex64,
    precoders: Option<&PrecoderSet>,
    opts: &FixedPointOptions,
    init: Option<&[Complex64]>,
) -> Result<FixedPointSolution> {
    let spectra = TransmitSpectra::of(cfg, precoders)?;
    solve_with_spectra(cfg, &spectra, z, opts, init)
}

/// Deterministic equivalent `m°(z) = (1/N) tr (S + sum_k a_k R_k - z I)^-1`
/// of the Stieltjes transform, from a converged solution at `z`.
pub fn stieltjes_de(cfg: &SystemConfig, z: Complex64, sol: &FixedPointSolution) -> Result<Complex64> {
    check_z(z)?;
    if sol.z != z || sol.delta.len() != cfg.n_users() {
        return Err(Error::invalid("fixed-point solution does not belong to this evaluation point"));
    }
    let coeffs: Vec<Complex64> = sol.delta.iter().map(|d| d * (-z)).collect();
    let n = cfg.n_rx() as f64;
    if z.im == 0.0 && coeffs.iter().all(|a| a.im == 0.0) {
        let real: Vec<f64> = coeffs.iter().map(|a| a.re).collect();
        let inverse = inverse_hpd(&resolvent_system_real(cfg, &real, -z.re))?;
        Ok(Complex64::new(inverse.trace() / n, 0.0))
    } else {
        let inverse = inverse_general(&resolvent_system_complex(cfg, &coeffs, z))?;
        Ok(inverse.trace() / n)
    }
}

/// Deterministic equivalent of the Shannon transform in nats per receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ShannonValue {
    pub x: f64,
    pub value: f64,
    /// `sum_k (1/N) log det(I + c_k e_k T_k)`
    pub logdet_transmit: f64,
    /// `(1/N) log det(I + sum_k delta_k R_k)`
    pub logdet_receive: f64,
    /// `x sum_k delta_k e_k`
    pub coupling: f64,
    pub solution: FixedPointSolution,
}

pub fn shannon_de(cfg: &SystemConfig, x: f64, precoders: Option<&PrecoderSet>) -> Result<ShannonValue> {
    shannon_de_with(cfg, x, precoders, &FixedPointOptions::default())
}

pub fn shannon_de_with(
    cfg: &SystemConfig,
    x: f64,
    precoders: Option<&PrecoderSet>,
    opts: &FixedPointOptions,
) -> Result<ShannonValue> {
    let spectra = TransmitSpectra::of(cfg, precoders)?;
    shannon_with_spectra(cfg, &spectra, x, opts, None)
}

pub fn shannon_with_spectra(
    cfg: &SystemConfig,
    spectra: &TransmitSpectra,
    x: f64,
    opts: &FixedPointOptions,
    init: Option<&[Complex64]>,
) -> Result<ShannonValue> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::invalid(format!("noise power must be positive, got {x}")));
    }
    if cfg.interference().is_some() {
        return Err(Error::invalid("the Shannon transform equivalent requires S = 0"));
    }
    let sol = solve_with_spectra(cfg, spectra, Complex64::new(-x, 0.0), opts, init)?;
    shannon_from_solution(cfg, spectra, sol)
}

/// Assembles the Shannon-transform equivalent from a converged solution at
/// `z = -x` for the same spectra.
pub fn shannon_from_solution(
    cfg: &SystemConfig,
    spectra: &TransmitSpectra,
    sol: FixedPointSolution,
) -> Result<ShannonValue> {
    let x = -sol.z.re;
    if sol.z.im != 0.0 || !(x > 0.0) || sol.e.len() != cfg.n_users() {
        return Err(Error::invalid("solution is not at a negative real point of this system"));
    }
    if cfg.interference().is_some() {
        return Err(Error::invalid("the Shannon transform equivalent requires S = 0"));
    }
    let n = cfg.n_rx() as f64;
    let e = sol.e_real();
    let delta = sol.delta_real();

    let logdet_transmit = (0..cfg.n_users())
        .map(|k| {
            let ce = cfg.ratio(k) * e[k];
            spectra.user(k).iter().map(|&s| (ce * s).ln_1p()).sum::<f64>()
        })
        .sum::<f64>()
        / n;
    let receive = resolvent_system_real(cfg, &delta, 1.0);
    let logdet_receive = log_det_hpd(&receive)? / n;
    let coupling = x * e.iter().zip(&delta).map(|(a, b)| a * b).sum::<f64>();

    Ok(ShannonValue {
        x,
        value: logdet_transmit + logdet_receive - coupling,
        logdet_transmit,
        logdet_receive,
        coupling,
        solution: sol,
    })
}

/// Quadrature tolerance of [`shannon_integral_check`].
pub const INTEGRAL_TOLERANCE: f64 = 1e-8;

/// Evaluates `int_x^inf (1/w - m°(-w)) dw` numerically as an independent
/// route to the Shannon-transform equivalent (no precoders, `S = 0`).
///
/// The range `[x, upper]` is integrated in `u = ln w`. Beyond `upper` the
/// integrand behaves like `C / w^2`; `C` is read off at `w = upper` and the
/// tail `C / upper` is added.
pub fn shannon_integral_check(cfg: &SystemConfig, x: f64, upper: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite() && upper.is_finite()) {
        return Err(Error::invalid("integration bounds must be positive and finite"));
    }
    if upper < x {
        return Err(Error::invalid("upper integration bound lies below x"));
    }
    if upper == x {
        return Ok(0.0);
    }
    let spectra = TransmitSpectra::of(cfg, None)?;
    // 1 - w m°(-w) = w (1/w - m°(-w)), the integrand in log scale
    let scaled_gap = |w: f64| -> Result<f64> {
        let z = Complex64::new(-w, 0.0);
        let opts = FixedPointOptions::with_tolerance(1e-13 / w);
        let sol = solve_with_spectra(cfg, &spectra, z, &opts, None)?;
        Ok(1.0 - w * stieltjes_de(cfg, z, &sol)?.re)
    };
    let body = integrate_fallible(|u: f64| scaled_gap(u.exp()), x.ln(), upper.ln(), INTEGRAL_TOLERANCE)??;
    let tail = scaled_gap(upper)?;
    Ok(body.value + tail)
}

/// Deterministic-equivalent bound on `sum_{i in S} R_i` for every nonempty
/// user subset `S`, at noise power `sigma^2` of the configuration.
pub fn rate_region_constraints(cfg: &SystemConfig, precoders: &PrecoderSet) -> Result<BTreeMap<UserSubset, f64>> {
    precoders.check_against(cfg)?;
    let mut out = BTreeMap::new();
    for subset in UserSubset::enumerate(cfg.n_users()) {
        let sub_cfg = cfg.restrict(subset)?;
        let sub_p = precoders.restrict(subset)?;
        out.insert(subset, shannon_de(&sub_cfg, cfg.sigma2(), Some(&sub_p))?.value);
    }
    Ok(out)
}
