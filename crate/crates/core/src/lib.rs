//! Deterministic equivalents for Kronecker-correlated MIMO multiple-access
//! channels: fixed-point solver, Shannon-transform equivalents, iterative
//! water-filling and a Monte Carlo harness to check them against simulation.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod det_equiv;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod monte_carlo;
pub mod quadrature;
pub mod selftest;
pub mod system;
pub mod waterfill;

pub use correlation::{
    grid_array, jakes_correlation, scenario_two_user, AngularSpread, AntennaArray, ArrayGeometry, CorrelationMatrix,
    Side,
};
pub use det_equiv::{
    rate_region_constraints, shannon_de, shannon_integral_check, solve_fixed_point, stieltjes_de, FixedPointOptions,
    FixedPointSolution, ShannonValue,
};
pub use error::{Error, Result};
pub use system::{sigma2_from_snr_db, PrecoderSet, SystemConfig, UserLink, UserSubset};
pub use waterfill::{
    concavity_probe, iterative_waterfill, iterative_waterfill_with, waterfill_step, ConcavityReport, WaterfillOptions,
    WaterfillResult,
};
pub use monte_carlo::{
    empirical_mutual_info, empirical_rate_region, empirical_stieltjes, ergodic_estimate, sample_channel,
    ChannelRealization, ChannelSampler, MonteCarloReport,
};
