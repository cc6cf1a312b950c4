//! Multi-user uplink configuration: dimensions, correlations, noise, budgets
//! and transmit covariances.

use std::fmt;

use crate::correlation::{CorrelationMatrix, Side};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix};

/// Largest number of users for which subsets are enumerated.
pub const MAX_USERS: usize = 16;

/// One transmitter and its Kronecker channel statistics.
#[derive(Debug, Clone)]
pub struct UserLink {
    /// Receive correlation `R_k` (dimension `N`).
    pub receive: CorrelationMatrix,
    /// Transmit correlation `T_k` (dimension `n_k`).
    pub transmit: CorrelationMatrix,
    /// Per-antenna average power budget `P_k`.
    pub budget: f64,
}

impl UserLink {
    pub fn new(receive: CorrelationMatrix, transmit: CorrelationMatrix, budget: f64) -> Result<Self> {
        if receive.side() != Side::Receive || transmit.side() != Side::Transmit {
            return Err(Error::invalid("user link needs a receive and a transmit correlation"));
        }
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::invalid(format!("power budget must be positive, got {budget}")));
        }
        Ok(Self {
            receive,
            transmit,
            budget,
        })
    }

    pub fn n_tx(&self) -> usize {
        self.transmit.dim()
    }
}

#[derive(Debug, Clone)]
pub struct SystemConfig {
    n_rx: usize,
    users: Vec<UserLink>,
    interference: Option<HermitianMatrix>,
    sigma2: f64,
}

impl SystemConfig {
    pub fn new(users: Vec<UserLink>, sigma2: f64) -> Result<Self> {
        let first = users
            .first()
            .ok_or_else(|| Error::invalid("at least one user is required"))?;
        let n_rx = first.receive.dim();
        if let Some(k) = users.iter().position(|u| u.receive.dim() != n_rx) {
            return Err(Error::DimensionMismatch(format!(
                "user {} has receive correlation of dimension {}, expected {n_rx}",
                k + 1,
                users[k].receive.dim()
            )));
        }
        if users.len() > MAX_USERS {
            return Err(Error::invalid(format!("at most {MAX_USERS} users are supported")));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("noise power must be positive, got {sigma2}")));
        }
        Ok(Self {
            n_rx,
            users,
            interference: None,
            sigma2,
        })
    }

    /// Adds the Hermitian nonnegative matrix `S` to the model.
    pub fn with_interference(mut self, s: HermitianMatrix) -> Result<Self> {
        if s.dim() != self.n_rx {
            return Err(Error::DimensionMismatch(format!(
                "S has dimension {}, expected {}",
                s.dim(),
                self.n_rx
            )));
        }
        hermitian_eig(&s)?.clamped_eigenvalues()?;
        self.interference = Some(s);
        Ok(self)
    }

    pub fn with_sigma2(mut self, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("noise power must be positive, got {sigma2}")));
        }
        self.sigma2 = sigma2;
        Ok(self)
    }

    /// Sets `sigma^2 = 10^(-snr_db / 10)`, the convention for unit budgets.
    pub fn with_snr_db(self, snr_db: f64) -> Result<Self> {
        self.with_sigma2(sigma2_from_snr_db(snr_db))
    }

    pub fn with_budgets(mut self, budgets: &[f64]) -> Result<Self> {
        if budgets.len() != self.users.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} budgets for {} users",
                budgets.len(),
                self.users.len()
            )));
        }
        for (u, &b) in self.users.iter_mut().zip(budgets) {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("power budget must be positive, got {b}")));
            }
            u.budget = b;
        }
        Ok(self)
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }

    pub fn n_tx(&self, k: usize) -> usize {
        self.users[k].n_tx()
    }

    /// `c_k = N / n_k`.
    pub fn ratio(&self, k: usize) -> f64 {
        self.n_rx as f64 / self.n_tx(k) as f64
    }

    pub fn users(&self) -> &[UserLink] {
        &self.users
    }

    pub fn user(&self, k: usize) -> &UserLink {
        &self.users[k]
    }

    pub fn interference(&self) -> Option<&HermitianMatrix> {
        self.interference.as_ref()
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn budgets(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.budget).collect()
    }

    pub fn all_users(&self) -> UserSubset {
        UserSubset::all(self.n_users())
    }

    /// The configuration seen by the users of `subset` alone.
    pub fn restrict(&self, subset: UserSubset) -> Result<Self> {
        self.check_subset(subset)?;
        Ok(Self {
            n_rx: self.n_rx,
            users: subset.members().map(|k| self.users[k].clone()).collect(),
            interference: self.interference.clone(),
            sigma2: self.sigma2,
        })
    }

    pub fn check_subset(&self, subset: UserSubset) -> Result<()> {
        if subset.is_empty() {
            return Err(Error::invalid("user subset must be nonempty"));
        }
        if subset.max_member().is_some_and(|k| k >= self.n_users()) {
            return Err(Error::invalid(format!(
                "subset {subset} references users beyond K = {}",
                self.n_users()
            )));
        }
        Ok(())
    }
}

pub fn sigma2_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// A nonempty set of users, stored as a bit mask (bit `k` = user `k`, zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserSubset(u32);

impl UserSubset {
    pub fn from_mask(mask: u32) -> Self {
        Self(mask)
    }

    pub fn all(k: usize) -> Self {
        assert!(k <= MAX_USERS);
        Self(((1u64 << k) - 1) as u32)
    }

    pub fn single(k: usize) -> Self {
        assert!(k < MAX_USERS);
        Self(1 << k)
    }

    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &k in members {
            if k >= MAX_USERS {
                return Err(Error::invalid(format!("user index {k} out of range")));
            }
            mask |= 1 << k;
        }
        Ok(Self(mask))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, k: usize) -> bool {
        k < 32 && self.0 & (1 << k) != 0
    }

    pub fn insert(self, k: usize) -> Self {
        Self(self.0 | (1 << k))
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&k| self.0 & (1 << k) != 0)
    }

    fn max_member(self) -> Option<usize> {
        self.members().last()
    }

    /// Every nonempty subset of `{0, .., k-1}` in increasing mask order.
    pub fn enumerate(k: usize) -> impl Iterator<Item = Self> {
        assert!(k <= MAX_USERS);
        (1u32..(1u32 << k)).map(Self)
    }
}

impl fmt::Display for UserSubset {
    /// One-based user labels joined by `+`, e.g. `1+2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labels: Vec<String> = self.members().map(|k| (k + 1).to_string()).collect();
        write!(f, "{}", labels.join("+"))
    }
}

/// Per-user transmit covariances `P_k` with their average-power budgets.
#[derive(Debug, Clone)]
pub struct PrecoderSet {
    matrices: Vec<HermitianMatrix>,
    budgets: Vec<f64>,
}

/// Slack allowed on `(1/n_k) tr P_k <= P_k`.
pub const BUDGET_SLACK: f64 = 1e-12;

impl PrecoderSet {
    pub fn new(matrices: Vec<HermitianMatrix>, budgets: Vec<f64>) -> Result<Self> {
        if matrices.len() != budgets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} precoders for {} budgets",
                matrices.len(),
                budgets.len()
            )));
        }
        for (k, (p, &b)) in matrices.iter().zip(&budgets).enumerate() {
            hermitian_eig(p)?.clamped_eigenvalues().map_err(|_| {
                Error::invalid(format!("precoder of user {} is not nonnegative definite", k + 1))
            })?;
            let mean_power = p.trace() / p.dim() as f64;
            if mean_power > b + BUDGET_SLACK {
                return Err(Error::invalid(format!(
                    "precoder of user {} uses power {mean_power} above budget {b}",
                    k + 1
                )));
            }
        }
        Ok(Self { matrices, budgets })
    }

    /// `P_k = P_k I`: every antenna at its full budget.
    pub fn uniform(cfg: &SystemConfig) -> Self {
        Self {
            matrices: cfg
                .users()
                .iter()
                .map(|u| HermitianMatrix::identity(u.n_tx()).scaled(u.budget))
                .collect(),
            budgets: cfg.budgets(),
        }
    }

    pub fn zeros(cfg: &SystemConfig) -> Self {
        Self {
            matrices: cfg.users().iter().map(|u| HermitianMatrix::zeros(u.n_tx())).collect(),
            budgets: cfg.budgets(),
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[HermitianMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, k: usize) -> &HermitianMatrix {
        &self.matrices[k]
    }

    pub fn budgets(&self) -> &[f64] {
        &self.budgets
    }

    /// `(1/n_k) tr P_k` per user.
    pub fn mean_powers(&self) -> Vec<f64> {
        self.matrices.iter().map(|p| p.trace() / p.dim() as f64).collect()
    }

    pub fn restrict(&self, subset: UserSubset) -> Result<Self> {
        if subset.members().any(|k| k >= self.len()) {
            return Err(Error::invalid(format!("subset {subset} exceeds {} precoders", self.len())));
        }
        Ok(Self {
            matrices: subset.members().map(|k| self.matrices[k].clone()).collect(),
            budgets: subset.members().map(|k| self.budgets[k]).collect(),
        })
    }

    /// `lambda * a + (1 - lambda) * b`, user by user.
    pub fn mix(a: &Self, b: &Self, lambda: f64) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch("precoder sets differ in size".into()));
        }
        let matrices = a
            .matrices
            .iter()
            .zip(&b.matrices)
            .map(|(pa, pb)| pa.combine(lambda, pb, 1.0 - lambda))
            .collect::<Result<Vec<_>>>()?;
        let budgets = a.budgets.iter().zip(&b.budgets).map(|(x, y)| x.max(*y)).collect();
        Ok(Self { matrices, budgets })
    }

    pub(crate) fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        if self.len() != cfg.n_users() {
            return Err(Error::DimensionMismatch(format!(
                "{} precoders for {} users",
                self.len(),
                cfg.n_users()
            )));
        }
        for k in 0..self.len() {
            if self.matrices[k].dim() != cfg.n_tx(k) {
                return Err(Error::DimensionMismatch(format!(
                    "precoder of user {} has dimension {}, expected {}",
                    k + 1,
                    self.matrices[k].dim(),
                    cfg.n_tx(k)
                )));
            }
        }
        Ok(())
    }
}
