//! Closed-form downlink performance under NRC and imperfect CSI.
//!
//! Per UE antenna `m`, the SINR is
//!
//! ```text
//! SINR_m = P · τ_u ρ_u ρ_d / (I_RC + I_NRC,m)
//! ```
//!
//! with `P = (N − M_tot)/M_tot`, `I_RC = ρ_d + τ_u ρ_u + 1` for ZF and
//! `P = N/M_tot`, `I_RC = (ρ_d + 1)(τ_u ρ_u + 1)` for MRT. `I_NRC,m` is the
//! extra interference caused by the NRC matrices; it depends on the NRC
//! statistics only through [`NrcAggregates`].

mod asymptotic;
mod search;
mod terms;

use alloc::vec::Vec;

use crate::model::{nrc_aggregates, NrcAggregates, NrcStats, PrecoderKind, SystemConfig};

pub use asymptotic::{
    alpha_ratio_high_snr, asymptotic_sinr, degradation_alpha, saturation_spectral_efficiency,
    sinr_ratio_zf_mrt, HighSnrSensitivity, Saturation,
};
pub use search::{
    k_opt_search, max_tolerable_nrc, max_tolerable_nrc_with, KOptimum, SearchError,
    DEFAULT_LEVEL_CEILING, DEFAULT_LEVEL_TOLERANCE,
};
pub use terms::{
    interference_breakdown, interference_terms, InterferenceBreakdown, InterferenceTerms,
};

/// Closed-form evaluation of one configuration and precoder.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticResult {
    pub precoder: PrecoderKind,
    /// Per-antenna SINR, linear.
    pub sinr: Vec<f64>,
    pub i_rc: f64,
    pub i_nrc: Vec<f64>,
    /// Capacity lower bound summed over antennas, bits/s/Hz.
    pub rate: f64,
    /// `(1 − τ_u/T) · rate`, bits/s/Hz.
    pub spectral_efficiency: f64,
}

/// Transmit power normalizer `β = 1/sqrt(E[Tr(UᴴU)])`.
pub fn beta(cfg: &SystemConfig, kind: PrecoderKind) -> f64 {
    let n = cfg.n_bs() as f64;
    let m = cfg.m_tot() as f64;
    let x = cfg.pilot_gain();
    match kind {
        PrecoderKind::Zf => libm::sqrt((n - m) * x / (m * (x + 1.0))),
        PrecoderKind::Mrt => libm::sqrt((x + 1.0) / (n * m * x)),
    }
}

/// Interference-plus-noise power of the reciprocal channel.
pub fn i_rc(cfg: &SystemConfig, kind: PrecoderKind) -> f64 {
    let x = cfg.pilot_gain();
    let rho_d = cfg.rho_d();
    match kind {
        PrecoderKind::Zf => rho_d + x + 1.0,
        PrecoderKind::Mrt => (rho_d + 1.0) * (x + 1.0),
    }
}

fn sinr_prefactor(cfg: &SystemConfig, kind: PrecoderKind) -> f64 {
    let n = cfg.n_bs() as f64;
    let m = cfg.m_tot() as f64;
    match kind {
        PrecoderKind::Zf => (n - m) / m,
        PrecoderKind::Mrt => n / m,
    }
}

/// NRC-induced interference for ZF at antenna `m`.
pub fn i_nrc_zf(cfg: &SystemConfig, aggr: &NrcAggregates, m: usize) -> f64 {
    i_nrc(cfg, aggr, m, PrecoderKind::Zf)
}

/// NRC-induced interference for MRT at antenna `m`.
pub fn i_nrc_mrt(cfg: &SystemConfig, aggr: &NrcAggregates, m: usize) -> f64 {
    i_nrc(cfg, aggr, m, PrecoderKind::Mrt)
}

/// NRC-induced interference at antenna `m`.
///
/// The two precoders differ only in the UE-side bracket; the BS-side terms
/// are shared.
pub fn i_nrc(cfg: &SystemConfig, aggr: &NrcAggregates, m: usize, kind: PrecoderKind) -> f64 {
    let n = cfg.n_bs() as f64;
    let mt = cfg.m_tot() as f64;
    let x = cfg.pilot_gain();
    let tr_a = aggr.tr_ra[m];
    // Variance held by the off-diagonal entries of row m of A′.
    let row_off = tr_a - aggr.sigma2_a_mm;

    let ue_side = match kind {
        PrecoderKind::Zf => (1.0 + (n - mt) / mt * x) * tr_a + x / mt * row_off,
        PrecoderKind::Mrt => (1.0 + (n + mt) / mt * x) * tr_a - x / mt * row_off,
    };
    let bs_diag = x / (n * mt) * (1.0 + tr_a) * aggr.sum_rc_d;
    let bs_all =
        ((x + 1.0) / n * (1.0 + tr_a) - x / (n * mt) * row_off) * (aggr.tr_rc_d + aggr.tr_rc_od);
    cfg.rho_d() * (ue_side + bs_diag + bs_all)
}

pub(crate) fn sinr_with(
    cfg: &SystemConfig,
    aggr: &NrcAggregates,
    m: usize,
    kind: PrecoderKind,
) -> f64 {
    let signal = sinr_prefactor(cfg, kind) * cfg.pilot_gain() * cfg.rho_d();
    signal / (i_rc(cfg, kind) + i_nrc(cfg, aggr, m, kind))
}

/// SINR at UE antenna `m`.
pub fn sinr(cfg: &SystemConfig, nrc: &NrcStats, m: usize, kind: PrecoderKind) -> f64 {
    sinr_with(cfg, &nrc_aggregates(cfg, nrc), m, kind)
}

/// `Σ log2(1 + SINR_m)`.
pub fn rate_from_sinrs(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|&s| libm::log2(1.0 + s)).sum()
}

/// Evaluates every antenna of `cfg`.
pub fn evaluate(cfg: &SystemConfig, nrc: &NrcStats, kind: PrecoderKind) -> AnalyticResult {
    let aggr = nrc_aggregates(cfg, nrc);
    let i_rc = i_rc(cfg, kind);
    let i_nrc: Vec<f64> = (0..cfg.m_tot())
        .map(|m| i_nrc(cfg, &aggr, m, kind))
        .collect();
    let signal = sinr_prefactor(cfg, kind) * cfg.pilot_gain() * cfg.rho_d();
    let sinr: Vec<f64> = i_nrc.iter().map(|&i| signal / (i_rc + i)).collect();
    let rate = rate_from_sinrs(&sinr);
    AnalyticResult {
        precoder: kind,
        spectral_efficiency: cfg.data_fraction() * rate,
        sinr,
        i_rc,
        i_nrc,
        rate,
    }
}

/// Capacity lower bound, bits/s/Hz.
pub fn sum_rate(cfg: &SystemConfig, nrc: &NrcStats, kind: PrecoderKind) -> f64 {
    evaluate(cfg, nrc, kind).rate
}

/// Spectral efficiency including pilot overhead, bits/s/Hz.
pub fn spectral_efficiency(cfg: &SystemConfig, nrc: &NrcStats, kind: PrecoderKind) -> f64 {
    evaluate(cfg, nrc, kind).spectral_efficiency
}
