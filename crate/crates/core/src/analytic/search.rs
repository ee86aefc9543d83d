//! User-count optimization and the inverse problem of tolerable NRC.

use core::fmt;

use alloc::vec;

use crate::error::ModelError;
use crate::model::{nrc_aggregates, CouplingRule, NrcStats, PrecoderKind, SystemConfig};

use super::{evaluate, sinr_with};

/// Upper end of the NRC level bracket (0 dB).
pub const DEFAULT_LEVEL_CEILING: f64 = 1.0;
/// Relative width at which the level bisection stops.
pub const DEFAULT_LEVEL_TOLERANCE: f64 = 1e-6;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOptimum {
    pub k: usize,
    pub spectral_efficiency: f64,
}

/// Number of single-antenna UEs maximizing the spectral efficiency.
///
/// Each candidate `K` is evaluated with `τ_u = K`, which changes both the
/// estimation quality and the pilot overhead. `K` ranges over
/// `1..=min(N − 1, T)`; ties go to the smaller `K`. Only `n_bs`, `rho_u` and
/// `coherence_symbols` are taken from `template`.
pub fn k_opt_search(
    template: &SystemConfig,
    nrc: &NrcStats,
    kind: PrecoderKind,
    rho_d: f64,
) -> Result<KOptimum, ModelError> {
    let n = template.n_bs();
    let k_max = (n.saturating_sub(1)).min(template.coherence_symbols());
    if k_max == 0 {
        return Err(ModelError::Dimension { n_bs: n, m_tot: 1 });
    }
    let mut best: Option<KOptimum> = None;
    for k in 1..=k_max {
        let cfg = SystemConfig::new(
            n,
            vec![1; k],
            k,
            template.rho_u(),
            rho_d,
            template.coherence_symbols(),
        )?;
        let se = evaluate(&cfg, nrc, kind).spectral_efficiency;
        if best.map_or(true, |b| se > b.spectral_efficiency) {
            best = Some(KOptimum {
                k,
                spectral_efficiency: se,
            });
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchError {
    /// The target exceeds the reciprocal-channel SINR.
    Infeasible {
        target: f64,
        ceiling: f64,
    },
    Model(ModelError),
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::Infeasible { target, ceiling } => write!(
                f,
                "target SINR {target} exceeds the reciprocal-channel SINR {ceiling}"
            ),
            SearchError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SearchError {}

impl From<ModelError> for SearchError {
    fn from(e: ModelError) -> Self {
        SearchError::Model(e)
    }
}

/// Largest NRC level whose worst-antenna SINR still reaches `target` (linear).
pub fn max_tolerable_nrc(
    cfg: &SystemConfig,
    target: f64,
    kind: PrecoderKind,
    coupling: &CouplingRule,
) -> Result<f64, SearchError> {
    max_tolerable_nrc_with(
        cfg,
        target,
        kind,
        coupling,
        DEFAULT_LEVEL_CEILING,
        DEFAULT_LEVEL_TOLERANCE,
    )
}

/// [`max_tolerable_nrc`] with an explicit bracket `[0, ceiling]` and tolerance.
pub fn max_tolerable_nrc_with(
    cfg: &SystemConfig,
    target: f64,
    kind: PrecoderKind,
    coupling: &CouplingRule,
    ceiling: f64,
    rel_tol: f64,
) -> Result<f64, SearchError> {
    coupling.validate()?;
    if !(ceiling.is_finite() && ceiling > 0.0) {
        return Err(ModelError::Range {
            field: "ceiling",
            reason: "must be a finite, positive level",
        }
        .into());
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(ModelError::Range {
            field: "rel_tol",
            reason: "must lie in (0, 1)",
        }
        .into());
    }
    let worst = |level: f64| -> Result<f64, ModelError> {
        let aggr = nrc_aggregates(cfg, &coupling.stats(level)?);
        Ok((0..cfg.m_tot())
            .map(|m| sinr_with(cfg, &aggr, m, kind))
            .fold(f64::INFINITY, f64::min))
    };

    let reciprocal = worst(0.0)?;
    if target <= 0.0 || worst(ceiling)? >= target {
        return Ok(ceiling);
    }
    if target > reciprocal {
        return Err(SearchError::Infeasible {
            target,
            ceiling: reciprocal,
        });
    }
    if target == reciprocal {
        return Ok(0.0);
    }

    // Invariant: worst(lo) >= target > worst(hi).
    let (mut lo, mut hi) = (0.0, ceiling);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if worst(mid)? >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
