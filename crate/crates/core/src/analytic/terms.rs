//! Per-term SI/ISI variances of the effective gain, assembled term by term.
//!
//! These are an independent route to the SINR closed forms: summing the
//! terms and normalizing by the useful power must give back [`super::sinr`].

use crate::model::{nrc_aggregates, NrcStats, PrecoderKind, SystemConfig};

use super::beta;

/// Useful power and interference variances at one UE antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceBreakdown {
    pub useful_power: f64,
    pub var_si: f64,
    pub var_isi: f64,
    /// Always 1: noise power is the SNR reference.
    pub noise_power: f64,
}

impl InterferenceBreakdown {
    pub fn sinr(&self) -> f64 {
        self.useful_power / (self.var_si + self.var_isi + self.noise_power)
    }
}

/// Individual variance terms before the common `ρ_d β²` scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterferenceTerms {
    Zf {
        si: [f64; 3],
        isi: [f64; 3],
    },
    Mrt {
        si_t11: f64,
        si_t12: f64,
        si_t2: f64,
        si_t3: f64,
        isi_t1: f64,
        isi_t2: f64,
    },
}

impl InterferenceTerms {
    pub fn si_sum(&self) -> f64 {
        match *self {
            InterferenceTerms::Zf { si, .. } => si.iter().sum(),
            InterferenceTerms::Mrt {
                si_t11,
                si_t12,
                si_t2,
                si_t3,
                ..
            } => si_t11 + si_t12 + si_t2 + si_t3,
        }
    }

    pub fn isi_sum(&self) -> f64 {
        match *self {
            InterferenceTerms::Zf { isi, .. } => isi.iter().sum(),
            InterferenceTerms::Mrt { isi_t1, isi_t2, .. } => isi_t1 + isi_t2,
        }
    }
}

pub fn interference_terms(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    m: usize,
    kind: PrecoderKind,
) -> InterferenceTerms {
    let aggr = nrc_aggregates(cfg, nrc);
    let n = cfg.n_bs() as f64;
    let mt = cfg.m_tot() as f64;
    let x = cfg.pilot_gain();
    let ta = aggr.tr_ra[m];
    let s = aggr.sigma2_a_mm;
    let d = aggr.tr_rc_d;
    let o = aggr.tr_rc_od;
    let sum_d = aggr.sum_rc_d;
    match kind {
        PrecoderKind::Zf => {
            let b2 = beta(cfg, kind) * beta(cfg, kind);
            let t3 = (1.0 + ta) * (n + d + o) / (n * mt * b2 * (x + 1.0));
            InterferenceTerms::Zf {
                si: [
                    s + (ta - s) / (n - mt),
                    ((1.0 + s) * sum_d + (1.0 + ta) * (d + o)) / (n * (n - mt)),
                    t3,
                ],
                isi: [
                    ta - s,
                    (((1.0 + s) + (mt - 2.0) * (1.0 + ta)) * (d + o) + (ta - s) * sum_d)
                        / (n * (n - mt)),
                    (mt - 1.0) * t3,
                ],
            }
        }
        PrecoderKind::Mrt => {
            let g = x / (x + 1.0);
            let g2 = g * g;
            let t3 = x / ((x + 1.0) * (x + 1.0)) * (1.0 + ta) * (n + d + o);
            InterferenceTerms::Mrt {
                si_t11: n * (1.0 + s * (n + 1.0)) * g2,
                si_t12: n * (ta - s) * g2,
                si_t2: g2 * ((1.0 + s) * sum_d + (1.0 + ta) * (d + o)),
                si_t3: t3,
                isi_t1: g2
                    * (((mt - 2.0) * (1.0 + ta) + (1.0 + s)) * (n + d + o)
                        + (ta - s) * (n * n + sum_d)),
                isi_t2: (mt - 1.0) * t3,
            }
        }
    }
}

/// Useful power and SI/ISI variances at antenna `m` from the per-term closed forms.
pub fn interference_breakdown(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    m: usize,
    kind: PrecoderKind,
) -> InterferenceBreakdown {
    let terms = interference_terms(cfg, nrc, m, kind);
    let b2 = beta(cfg, kind) * beta(cfg, kind);
    let scale = cfg.rho_d() * b2;
    let mean_gain = match kind {
        PrecoderKind::Zf => 1.0,
        PrecoderKind::Mrt => {
            let x = cfg.pilot_gain();
            cfg.n_bs() as f64 * x / (x + 1.0)
        }
    };
    InterferenceBreakdown {
        useful_power: scale * mean_gain * mean_gain,
        var_si: scale * terms.si_sum(),
        var_isi: scale * terms.isi_sum(),
        noise_power: 1.0,
    }
}
