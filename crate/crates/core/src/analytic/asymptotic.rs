//! Large-N saturation, ZF/MRT comparison and NRC degradation metrics.

use crate::model::{nrc_aggregates, NrcStats, PrecoderKind, SystemConfig};

use super::{i_nrc, sinr_with};

/// Large-N limit of the SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Saturation {
    Finite(f64),
    /// Reciprocal channel: the SINR grows without bound in N.
    Unbounded,
}

impl Saturation {
    pub fn finite(self) -> Option<f64> {
        match self {
            Saturation::Finite(v) => Some(v),
            Saturation::Unbounded => None,
        }
    }
}

/// Common large-N SINR limit of ZF and MRT at antenna `m`.
///
/// There is no precoder argument: both precoders saturate at the same level.
pub fn asymptotic_sinr(cfg: &SystemConfig, nrc: &NrcStats, m: usize) -> Saturation {
    let aggr = nrc_aggregates(cfg, nrc);
    let tr_a = aggr.tr_ra[m];
    let x = cfg.pilot_gain();
    let mt = cfg.m_tot() as f64;
    let t_d = 1.0 + tr_a;
    let t_od = mt * (x + 1.0) / x * (1.0 + tr_a) - tr_a + aggr.sigma2_a_mm;
    let denom = tr_a + t_d * nrc.delta2_c_d() + t_od * nrc.sigma2_c_od();
    if denom > 0.0 {
        Saturation::Finite(1.0 / denom)
    } else {
        Saturation::Unbounded
    }
}

/// Spectral efficiency obtained by plugging the saturated SINRs into the rate.
pub fn saturation_spectral_efficiency(cfg: &SystemConfig, nrc: &NrcStats) -> Saturation {
    let mut rate = 0.0;
    for m in 0..cfg.m_tot() {
        match asymptotic_sinr(cfg, nrc, m) {
            Saturation::Finite(s) => rate += libm::log2(1.0 + s),
            Saturation::Unbounded => return Saturation::Unbounded,
        }
    }
    Saturation::Finite(cfg.data_fraction() * rate)
}

/// `Tr(R_a′m) − (Tr(R_a′m) − σ²_a′mm)/M_tot`, the UE-side quantity by which
/// MRT's NRC interference exceeds ZF's (per unit of `2 ρ_d τ_u ρ_u`).
fn ue_side_gap(tr_a: f64, sigma2_a_mm: f64, m_tot: f64) -> f64 {
    tr_a - (tr_a - sigma2_a_mm) / m_tot
}

/// `SINR_ZF / SINR_MRT` from its expansion in `SINR_ZF`, the UE-side NRC
/// statistics and `I_NRC,ZF`.
pub fn sinr_ratio_zf_mrt(cfg: &SystemConfig, nrc: &NrcStats, m: usize) -> f64 {
    let aggr = nrc_aggregates(cfg, nrc);
    let n = cfg.n_bs() as f64;
    let mt = cfg.m_tot() as f64;
    let x = cfg.pilot_gain();
    let rho_d = cfg.rho_d();
    let sinr_zf = sinr_with(cfg, &aggr, m, PrecoderKind::Zf);
    let i_zf = i_nrc(cfg, &aggr, m, PrecoderKind::Zf);
    let gap = ue_side_gap(aggr.tr_ra[m], aggr.sigma2_a_mm, mt);
    1.0 + mt / n * (sinr_zf - 1.0)
        + (1.0 - mt / n) * 2.0 * rho_d * x * gap / (rho_d + x + 1.0 + i_zf)
}

/// Relative SINR loss against the reciprocal channel, `(SINR_RC − SINR_NRC)/SINR_RC`.
pub fn degradation_alpha(cfg: &SystemConfig, nrc: &NrcStats, m: usize, kind: PrecoderKind) -> f64 {
    let reciprocal = sinr_with(cfg, &nrc_aggregates(cfg, &NrcStats::ZERO), m, kind);
    let impaired = sinr_with(cfg, &nrc_aggregates(cfg, nrc), m, kind);
    (reciprocal - impaired) / reciprocal
}

/// High-SNR comparison of ZF and MRT degradation at one antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighSnrSensitivity {
    /// `lim_{ρ_d→∞} α_ZF / α_MRT`.
    pub ratio: f64,
    /// `I_NRC,ZF/ρ_d > 2·(UE-side gap)`, equivalent to `ratio > 1`.
    pub zf_more_sensitive: bool,
    /// The sufficient pilot-SNR condition `ρ_u > 1/(N − M_tot)`.
    pub pilot_condition: bool,
}

/// `None` for the reciprocal channel, where both degradations vanish and the
/// ratio is 0/0.
pub fn alpha_ratio_high_snr(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    m: usize,
) -> Option<HighSnrSensitivity> {
    let aggr = nrc_aggregates(cfg, nrc);
    let mt = cfg.m_tot() as f64;
    let x = cfg.pilot_gain();
    // I_NRC is proportional to ρ_d, so this ratio does not depend on ρ_d.
    let j = i_nrc(cfg, &aggr, m, PrecoderKind::Zf) / cfg.rho_d();
    let gap = ue_side_gap(aggr.tr_ra[m], aggr.sigma2_a_mm, mt);
    let i0 = (2.0 * x * gap + j + 1.0) * j;
    let num = i0 + x * j;
    let den = i0 + 2.0 * x * gap;
    if den == 0.0 {
        return None;
    }
    Some(HighSnrSensitivity {
        ratio: num / den,
        zf_more_sensitive: j > 2.0 * gap,
        pilot_condition: cfg.rho_u() > 1.0 / (cfg.n_bs() - cfg.m_tot()) as f64,
    })
}
