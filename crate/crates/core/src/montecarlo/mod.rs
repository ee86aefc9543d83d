//! Link-level Monte Carlo simulator, the reference for the closed forms.
//!
//! A [`McJob`] turns a realization index into a [`RealizationRecord`] using
//! only its own random stream, and [`McJob::reduce`] folds records in index
//! order. Any scheduler that evaluates every index and hands the records
//! back in order therefore gets bit-identical estimates.

mod precoding;
mod sampling;

use core::fmt;

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::ModelError;
use crate::model::{validate_config, NrcStats, PrecoderKind, SystemConfig};

pub use crate::analytic::beta;
pub use precoding::{effective_gains, precode, SingularChannel, SINGULAR_PIVOT};
pub use sampling::{
    derive_seed, sample_channel, sample_nrc, substream, ChannelRealization, NrcRealization,
};

use sampling::{BOOTSTRAP_STREAM, FROZEN_NRC_STREAM};

/// Bootstrap resamples behind each confidence half-width.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Consecutive singular ZF draws tolerated within one realization.
pub const MAX_SINGULAR_RETRIES: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum McError {
    InsufficientRealizations { requested: usize },
    SingularChannel { realization: u64 },
    Model(ModelError),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::InsufficientRealizations { requested } => {
                write!(f, "at least 2 realizations are needed, got {requested}")
            }
            McError::SingularChannel { realization } => write!(
                f,
                "realization {realization}: channel estimate stayed rank deficient after {MAX_SINGULAR_RETRIES} redraws"
            ),
            McError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for McError {}

impl From<ModelError> for McError {
    fn from(e: ModelError) -> Self {
        McError::Model(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McOptions {
    /// Hold a single NRC draw fixed across all realizations instead of
    /// redrawing it with each channel.
    pub freeze_nrc: bool,
}

/// What one realization contributes to the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    /// `γ_mm` per antenna.
    pub diagonal: Vec<Complex64>,
    /// `Σ_{i≠m} |γ_mi|²` per antenna.
    pub leakage: Vec<f64>,
    /// ZF draws rejected as singular before this one was accepted.
    pub singular_resamples: u32,
}

impl RealizationRecord {
    pub fn from_gains(gamma: &crate::linalg::CMatrix, singular_resamples: u32) -> Self {
        let m = gamma.rows();
        let diagonal = (0..m).map(|i| gamma[(i, i)]).collect();
        let leakage = (0..m)
            .map(|i| {
                gamma
                    .row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, g)| g.norm_sqr())
                    .sum()
            })
            .collect();
        RealizationRecord {
            diagonal,
            leakage,
            singular_resamples,
        }
    }
}

/// Empirical per-antenna powers and SINR.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub useful_power: Vec<f64>,
    pub var_si: Vec<f64>,
    pub var_isi: Vec<f64>,
    pub sinr: Vec<f64>,
    /// Bootstrap 95 % half-width of the SINR.
    pub ci_halfwidth: Vec<f64>,
    pub n_realizations: usize,
    pub seed: u64,
    pub singular_resamples: u64,
}

/// A fully specified estimation job.
#[derive(Debug, Clone)]
pub struct McJob {
    cfg: SystemConfig,
    nrc: NrcStats,
    kind: PrecoderKind,
    seed: u64,
    beta: f64,
    frozen: Option<NrcRealization>,
}

impl McJob {
    pub fn new(
        cfg: &SystemConfig,
        nrc: &NrcStats,
        kind: PrecoderKind,
        seed: u64,
        options: McOptions,
    ) -> Result<Self, McError> {
        validate_config(cfg)?;
        let frozen = options
            .freeze_nrc
            .then(|| sample_nrc(cfg, nrc, &mut substream(seed, FROZEN_NRC_STREAM)));
        Ok(McJob {
            cfg: cfg.clone(),
            nrc: *nrc,
            kind,
            seed,
            beta: beta(cfg, kind),
            frozen,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws realization `index` from its own stream.
    ///
    /// A singular ZF estimate is redrawn from the same stream, so the
    /// outcome still depends on `index` only.
    pub fn realization(&self, index: u64) -> Result<RealizationRecord, McError> {
        let mut rng = substream(self.seed, index);
        let mut rejected = 0;
        let (chan, u) = loop {
            let chan = sample_channel(&self.cfg, &mut rng);
            match precode(&chan.g_hat, self.kind) {
                Ok(u) => break (chan, u),
                Err(SingularChannel) if rejected < MAX_SINGULAR_RETRIES => rejected += 1,
                Err(SingularChannel) => {
                    return Err(McError::SingularChannel { realization: index })
                }
            }
        };
        let gamma = match &self.frozen {
            Some(nrc) => effective_gains(&chan, nrc, &u, self.beta),
            None => {
                let nrc = sample_nrc(&self.cfg, &self.nrc, &mut rng);
                effective_gains(&chan, &nrc, &u, self.beta)
            }
        };
        Ok(RealizationRecord::from_gains(&gamma, rejected))
    }

    /// Folds records, taken in realization order, into the estimate.
    pub fn reduce(&self, records: &[RealizationRecord]) -> Result<McEstimate, McError> {
        let n = records.len();
        if n < 2 {
            return Err(McError::InsufficientRealizations { requested: n });
        }
        let rho_d = self.cfg.rho_d();
        let all: Vec<usize> = (0..n).collect();
        let m_tot = self.cfg.m_tot();
        let mut est = McEstimate {
            useful_power: Vec::with_capacity(m_tot),
            var_si: Vec::with_capacity(m_tot),
            var_isi: Vec::with_capacity(m_tot),
            sinr: Vec::with_capacity(m_tot),
            ci_halfwidth: vec![0.0; m_tot],
            n_realizations: n,
            seed: self.seed,
            singular_resamples: records.iter().map(|r| r.singular_resamples as u64).sum(),
        };
        for m in 0..m_tot {
            let p = antenna_powers(records, &all, m, rho_d);
            est.useful_power.push(p.useful);
            est.var_si.push(p.var_si);
            est.var_isi.push(p.var_isi);
            est.sinr.push(p.sinr());
        }

        let mut rng = substream(self.seed, BOOTSTRAP_STREAM);
        let mut draws: Vec<Vec<f64>> = vec![Vec::with_capacity(BOOTSTRAP_RESAMPLES); m_tot];
        let mut idx = vec![0usize; n];
        for _ in 0..BOOTSTRAP_RESAMPLES {
            for i in idx.iter_mut() {
                *i = rng.random_range(0..n);
            }
            for (m, d) in draws.iter_mut().enumerate() {
                d.push(antenna_powers(records, &idx, m, rho_d).sinr());
            }
        }
        for (m, mut d) in draws.into_iter().enumerate() {
            d.sort_by(f64::total_cmp);
            let lo = d[quantile_index(d.len(), 0.025)];
            let hi = d[quantile_index(d.len(), 0.975)];
            est.ci_halfwidth[m] = 0.5 * (hi - lo);
        }
        Ok(est)
    }
}

fn quantile_index(len: usize, q: f64) -> usize {
    let pos = libm::round(q * (len - 1) as f64) as usize;
    pos.min(len - 1)
}

struct Powers {
    useful: f64,
    var_si: f64,
    var_isi: f64,
}

impl Powers {
    fn sinr(&self) -> f64 {
        self.useful / (self.var_si + self.var_isi + 1.0)
    }
}

fn antenna_powers(records: &[RealizationRecord], idx: &[usize], m: usize, rho_d: f64) -> Powers {
    let n = idx.len() as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut leak = 0.0;
    for &i in idx {
        sum += records[i].diagonal[m];
        leak += records[i].leakage[m];
    }
    let mean = sum / n;
    let mut ss = 0.0;
    for &i in idx {
        ss += (records[i].diagonal[m] - mean).norm_sqr();
    }
    Powers {
        useful: rho_d * mean.norm_sqr(),
        var_si: rho_d * ss / (n - 1.0),
        var_isi: rho_d * leak / n,
    }
}

fn run_serial(job: &McJob, n: usize) -> Result<McEstimate, McError> {
    if n < 2 {
        return Err(McError::InsufficientRealizations { requested: n });
    }
    let records = (0..n as u64)
        .map(|i| job.realization(i))
        .collect::<Result<Vec<_>, _>>()?;
    job.reduce(&records)
}

/// Empirical per-antenna SINR over `n_realizations` draws.
pub fn estimate_sinr(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    kind: PrecoderKind,
    n_realizations: usize,
    seed: u64,
) -> Result<McEstimate, McError> {
    estimate_sinr_with(cfg, nrc, kind, n_realizations, seed, McOptions::default())
}

pub fn estimate_sinr_with(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    kind: PrecoderKind,
    n_realizations: usize,
    seed: u64,
    options: McOptions,
) -> Result<McEstimate, McError> {
    run_serial(&McJob::new(cfg, nrc, kind, seed, options)?, n_realizations)
}

/// Per-antenna `(var_si, var_isi)` split of [`estimate_sinr`].
pub fn interference_decomposition(
    cfg: &SystemConfig,
    nrc: &NrcStats,
    kind: PrecoderKind,
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>, McError> {
    let est = estimate_sinr(cfg, nrc, kind, n_realizations, seed)?;
    Ok(est.var_si.into_iter().zip(est.var_isi).collect())
}
