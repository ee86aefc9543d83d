//! Performance models for linearly precoded multi-user massive MIMO downlink
//! under channel non-reciprocity (NRC) and imperfect CSI.
//!
//! The crate has two independent engines that predict the same quantities:
//!
//! - [`analytic`] evaluates the closed-form SINR, capacity lower bound and
//!   spectral efficiency for zero-forcing and maximum-ratio precoding, plus
//!   the asymptotic, comparison and degradation expressions built on them.
//! - [`montecarlo`] samples channels, MMSE estimation errors and NRC matrices,
//!   precodes, and measures the per-antenna SINR empirically.
//!
//! Everything here is `no_std` (with `alloc`). Parallel drivers, sweeps and
//! file formats live in the companion `nrcsim` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod units;

pub use error::ModelError;
pub use model::{
    nrc_aggregates, validate_config, CouplingRule, NrcAggregates, NrcStats, PrecoderKind,
    SystemConfig,
};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
