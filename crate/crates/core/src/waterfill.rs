//! Sum-rate maximizing precoders by iterative water-filling on the
//! deterministic equivalent, plus a concavity probe along precoder segments.
//!
//! The optimal `P_k` share the eigenvectors of `T_k`, so only the powers on
//! each eigenmode are iterated. Given `e_k`, the powers solve
//! `p_i = (mu - 1/(c_k e_k t_i))^+` with `mu` set by the power budget; the
//! `e_k` are then recomputed at the new powers and the two steps alternate.
//!
//! Undamped alternation can settle into a two-cycle. When the power change
//! stops shrinking the update is relaxed, `p <- p + omega (target - p)`,
//! halving `omega` down to [`MIN_DAMPING`]. Fixed points are unchanged.

use num_complex::Complex64;

use crate::det_equiv::{
    shannon_from_solution, shannon_with_spectra, solve_with_spectra, FixedPointOptions, TransmitSpectra,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix};
use crate::system::{PrecoderSet, SystemConfig, UserSubset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaterfillOptions {
    /// Stop when `max |target - p|` over all modes falls to this value.
    pub eta: f64,
    pub max_outer_iterations: usize,
    pub inner: FixedPointOptions,
}

impl Default for WaterfillOptions {
    fn default() -> Self {
        Self {
            eta: 1e-8,
            max_outer_iterations: 1000,
            inner: FixedPointOptions::with_tolerance(1e-12),
        }
    }
}

/// Eigenvalues at or below this fraction of the largest get no power.
pub const RANK_THRESHOLD: f64 = 1e-12;
/// Iterations without a tenfold drop in the power change before damping.
pub const STALL_WINDOW: usize = 25;
pub const MIN_DAMPING: f64 = 1.0 / 16.0;
/// Objective decreases larger than this count as ascent violations.
pub const ASCENT_SLACK: f64 = 1e-9;

/// Water-filling over one user's eigenmodes.
///
/// Returns powers `max(mu - 1/(c e t_i), 0)` whose mean equals `budget`, and
/// the water level `mu`. The level is solved exactly from the sorted floors.
pub fn waterfill_step(t_eigs: &[f64], c: f64, e: f64, budget: f64) -> Result<(Vec<f64>, f64)> {
    if t_eigs.is_empty() {
        return Err(Error::invalid("no eigenmodes to fill"));
    }
    if t_eigs.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("eigenmodes must be positive; rank-reduce first"));
    }
    if !(c > 0.0 && e > 0.0 && budget > 0.0) || !(c * e).is_finite() || !budget.is_finite() {
        return Err(Error::invalid(format!(
            "water-filling needs positive c, e and budget, got c={c} e={e} budget={budget}"
        )));
    }
    let floors: Vec<f64> = t_eigs.iter().map(|&t| 1.0 / (c * e * t)).collect();
    let mut sorted = floors.clone();
    sorted.sort_by(f64::total_cmp);

    let total = budget * t_eigs.len() as f64;
    let mut prefix = 0.0;
    let mut mu = sorted[0] + total;
    for (m, &floor) in sorted.iter().enumerate() {
        prefix += floor;
        let level = (total + prefix) / (m + 1) as f64;
        if level > floor {
            mu = level;
        } else {
            break;
        }
    }
    let powers = floors.iter().map(|f| (mu - f).max(0.0)).collect();
    Ok((powers, mu))
}

#[derive(Debug, Clone)]
struct UserModes {
    eigenvectors: crate::linalg::CMatrix,
    eigenvalues: Vec<f64>,
    active: usize,
    mode_budget: f64,
}

impl UserModes {
    fn fill(&self, c: f64, e: f64) -> Result<(Vec<f64>, f64)> {
        let (mut powers, mu) = waterfill_step(&self.eigenvalues[..self.active], c, e, self.mode_budget)?;
        powers.resize(self.eigenvalues.len(), 0.0);
        Ok((powers, mu))
    }
}

#[derive(Debug, Clone)]
pub struct WaterfillResult {
    pub subset: UserSubset,
    /// Precoders for all users of the configuration. Users outside the subset
    /// keep uniform precoders.
    pub precoders: PrecoderSet,
    /// Per subset user, powers on the eigenmodes of `T_k` in descending
    /// eigenvalue order.
    pub powers: Vec<Vec<f64>>,
    /// The iterate preceding `powers`.
    pub previous_powers: Vec<Vec<f64>>,
    /// `e_k(-sigma^2)` at the returned precoders, in subset order.
    pub e_final: Vec<f64>,
    pub water_levels: Vec<f64>,
    /// Sum rate equivalent in nats per receive antenna.
    pub objective: f64,
    pub outer_iterations: usize,
    /// `max |p - WF(e_final)|` over all modes.
    pub kkt_residual: f64,
    pub converged: bool,
    pub ascent_violations: usize,
    pub objective_trace: Vec<f64>,
    pub final_damping: f64,
}

type Powers = Vec<Vec<f64>>;

fn to_spectra(modes: &[UserModes], powers: &[Vec<f64>]) -> TransmitSpectra {
    TransmitSpectra(
        modes
            .iter()
            .zip(powers)
            .map(|(m, p)| m.eigenvalues.iter().zip(p).map(|(t, p)| t * p).collect())
            .collect(),
    )
}

fn max_change(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn iterative_waterfill(cfg: &SystemConfig, subset: UserSubset) -> Result<WaterfillResult> {
    iterative_waterfill_with(cfg, subset, &WaterfillOptions::default())
}

pub fn iterative_waterfill_with(
    cfg: &SystemConfig,
    subset: UserSubset,
    opts: &WaterfillOptions,
) -> Result<WaterfillResult> {
    if cfg.interference().is_some() {
        return Err(Error::invalid("water-filling needs S = 0"));
    }
    if !(opts.eta > 0.0) || opts.max_outer_iterations == 0 {
        return Err(Error::invalid("eta and the outer iteration budget must be positive"));
    }
    let sub = cfg.restrict(subset)?;
    let x = sub.sigma2();
    let ratios: Vec<f64> = (0..sub.n_users()).map(|k| sub.ratio(k)).collect();

    let mut modes = Vec::with_capacity(sub.n_users());
    for (k, user) in sub.users().iter().enumerate() {
        let dec = hermitian_eig(user.transmit.matrix())?;
        let eigenvalues = dec.clamped_eigenvalues()?;
        let top = eigenvalues[0];
        let active = eigenvalues.iter().filter(|&&t| t > RANK_THRESHOLD * top).count();
        if top <= 0.0 || active == 0 {
            return Err(Error::invalid(format!("transmit correlation of user {} is zero", k + 1)));
        }
        if !(user.budget > 0.0) {
            return Err(Error::invalid(format!("budget of user {} must be positive", k + 1)));
        }
        let n = eigenvalues.len();
        modes.push(UserModes {
            eigenvectors: dec.eigenvectors,
            mode_budget: user.budget * n as f64 / active as f64,
            eigenvalues,
            active,
        });
    }

    let fill_all = |e: &[f64]| -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let mut powers = Vec::with_capacity(modes.len());
        let mut levels = Vec::with_capacity(modes.len());
        for (k, m) in modes.iter().enumerate() {
            let (p, mu) = m.fill(ratios[k], e[k])?;
            powers.push(p);
            levels.push(mu);
        }
        Ok((powers, levels))
    };

    let mut powers: Vec<Vec<f64>> = modes
        .iter()
        .zip(sub.users())
        .map(|(m, u)| {
            let mut p = vec![u.budget; m.active];
            p.resize(m.eigenvalues.len(), 0.0);
            p
        })
        .collect();
    let mut previous = powers.clone();
    let mut warm: Option<Vec<Complex64>> = None;
    let mut trace = Vec::new();
    let mut ascent_violations = 0;
    let mut omega = 1.0;
    let mut stall_reference = f64::INFINITY;
    let mut stall_count = 0;
    let mut best: Option<(f64, Powers, Powers)> = None;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_outer_iterations {
        let spectra = to_spectra(&modes, &powers);
        let value = shannon_with_spectra(&sub, &spectra, x, &opts.inner, warm.as_deref())?;
        if let Some(&last) = trace.last() {
            if value.value < last - ASCENT_SLACK {
                ascent_violations += 1;
                log::debug!("objective decreased from {last} to {} at iteration {iterations}", value.value);
            }
        }
        trace.push(value.value);
        if best.as_ref().is_none_or(|b| value.value > b.0) {
            best = Some((value.value, powers.clone(), previous.clone()));
        }
        let e = value.solution.e_real();
        warm = Some(value.solution.e.clone());

        let (target, _) = fill_all(&e)?;
        let change = max_change(&target, &powers);
        iterations += 1;
        if change <= opts.eta {
            previous = std::mem::replace(&mut powers, target);
            converged = true;
            break;
        }
        if change < stall_reference / 10.0 {
            stall_reference = change;
            stall_count = 0;
        } else {
            stall_count += 1;
            if stall_count >= STALL_WINDOW && omega > MIN_DAMPING {
                omega = (omega / 2.0).max(MIN_DAMPING);
                stall_reference = change;
                stall_count = 0;
                log::debug!("water-filling stalled, damping set to {omega}");
            }
        }
        let next = powers
            .iter()
            .zip(&target)
            .map(|(p, t)| p.iter().zip(t).map(|(a, b)| a + omega * (b - a)).collect())
            .collect();
        previous = std::mem::replace(&mut powers, next);
    }

    if !converged {
        log::warn!(
            "iterative water-filling did not converge in {} iterations; returning the best iterate",
            opts.max_outer_iterations
        );
        let (_, p, prev) = best.expect("at least one iterate");
        powers = p;
        previous = prev;
    }

    let spectra = to_spectra(&modes, &powers);
    let z = Complex64::new(-x, 0.0);
    let sol = solve_with_spectra(&sub, &spectra, z, &opts.inner, warm.as_deref())?;
    let e_final = sol.e_real();
    let value = shannon_from_solution(&sub, &spectra, sol)?;
    let (check, water_levels) = fill_all(&e_final)?;
    let kkt_residual = max_change(&check, &powers);

    let mut matrices: Vec<HermitianMatrix> = PrecoderSet::uniform(cfg).matrices().to_vec();
    for ((k, m), p) in subset.members().zip(&modes).zip(&powers) {
        matrices[k] = HermitianMatrix::from_spectrum(&m.eigenvectors, p)?;
    }
    let precoders = PrecoderSet::new(matrices, cfg.budgets())?;

    Ok(WaterfillResult {
        subset,
        precoders,
        powers,
        previous_powers: previous,
        e_final,
        water_levels,
        objective: value.value,
        outer_iterations: iterations,
        kkt_residual,
        converged,
        ascent_violations,
        objective_trace: trace,
        final_damping: omega,
    })
}

/// Values of `phi(lambda) = V°(lambda P_a + (1 - lambda) P_b)` on a uniform
/// grid and their second differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub lambdas: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub second_differences: Vec<Vec<f64>>,
    pub max_second_difference: f64,
}

impl ConcavityReport {
    pub fn strictly_concave(&self) -> bool {
        self.max_second_difference < 0.0
    }
}

/// Evaluates `V°` along each segment at `grid + 1` equispaced points.
pub fn concavity_probe(
    cfg: &SystemConfig,
    pairs: &[(PrecoderSet, PrecoderSet)],
    grid: usize,
) -> Result<ConcavityReport> {
    if grid < 2 {
        return Err(Error::invalid("concavity probe needs at least 2 grid intervals"));
    }
    let lambdas: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    // V° is stationary in (e, delta), so the default tolerance leaves
    // second-difference noise at the round-off level
    let opts = FixedPointOptions::default();
    let mut values = Vec::with_capacity(pairs.len());
    let mut second_differences = Vec::with_capacity(pairs.len());
    let mut max_second_difference = f64::NEG_INFINITY;
    for (a, b) in pairs {
        let phi = lambdas
            .iter()
            .map(|&l| {
                let p = match l {
                    0.0 => b.clone(),
                    1.0 => a.clone(),
                    _ => PrecoderSet::mix(a, b, l)?,
                };
                let spectra = TransmitSpectra::of(cfg, Some(&p))?;
                Ok(shannon_with_spectra(cfg, &spectra, cfg.sigma2(), &opts, None)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let d2: Vec<f64> = phi.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
        max_second_difference = d2.iter().copied().fold(max_second_difference, f64::max);
        values.push(phi);
        second_differences.push(d2);
    }
    Ok(ConcavityReport {
        lambdas,
        values,
        second_differences,
        max_second_difference,
    })
}
