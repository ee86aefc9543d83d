//! Figure-class sweeps pairing the analytic and Monte Carlo engines.

use std::fmt;
use std::str::FromStr;

use nrcsim_core::analytic::{self, k_opt_search, max_tolerable_nrc, SearchError};
use nrcsim_core::montecarlo::{derive_seed, McError, McJob, McOptions};
use nrcsim_core::units::{db_to_linear, linear_to_db};
use nrcsim_core::{CouplingRule, ModelError, NrcStats, PrecoderKind, SystemConfig};
use thiserror::Error;

use crate::driver::Driver;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Engine {
    Analytic,
    Mc,
}

impl Engine {
    pub const ALL: [Engine; 2] = [Engine::Analytic, Engine::Mc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Mc => "mc",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "mc" => Ok(Engine::Mc),
            _ => Err(format!(
                "unknown engine `{s}` (expected `analytic` or `mc`)"
            )),
        }
    }
}

/// One NRC statistic, or σ²_c′d and δ²_c′d moved together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NrcParam {
    SigmaAD,
    SigmaAOd,
    SigmaCD,
    DeltaCD,
    SigmaCOd,
    /// σ²_c′d = δ²_c′d = level.
    CdJoint,
}

impl NrcParam {
    pub const ALL: [NrcParam; 6] = [
        NrcParam::SigmaAD,
        NrcParam::SigmaAOd,
        NrcParam::SigmaCD,
        NrcParam::DeltaCD,
        NrcParam::SigmaCOd,
        NrcParam::CdJoint,
    ];

    /// The four single-parameter groups of the sensitivity study.
    pub const SENSITIVITY_GROUPS: [NrcParam; 4] = [
        NrcParam::SigmaCOd,
        NrcParam::SigmaAD,
        NrcParam::CdJoint,
        NrcParam::SigmaCD,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NrcParam::SigmaAD => "sigma2_a_d",
            NrcParam::SigmaAOd => "sigma2_a_od",
            NrcParam::SigmaCD => "sigma2_c_d",
            NrcParam::DeltaCD => "delta2_c_d",
            NrcParam::SigmaCOd => "sigma2_c_od",
            NrcParam::CdJoint => "sigma2_c_d+delta2_c_d",
        }
    }

    /// `base` with this parameter set to `level` (linear).
    pub fn apply(&self, base: &NrcStats, level: f64) -> Result<NrcStats, ModelError> {
        let [a_d, a_od, c_d, d_c_d, c_od] = base.to_array();
        match self {
            NrcParam::SigmaAD => NrcStats::new(level, a_od, c_d, d_c_d, c_od),
            NrcParam::SigmaAOd => NrcStats::new(a_d, level, c_d, d_c_d, c_od),
            NrcParam::SigmaCD => NrcStats::new(a_d, a_od, level, d_c_d, c_od),
            NrcParam::DeltaCD => NrcStats::new(a_d, a_od, c_d, level, c_od),
            NrcParam::SigmaCOd => NrcStats::new(a_d, a_od, c_d, d_c_d, level),
            NrcParam::CdJoint => NrcStats::new(a_d, a_od, level, level, c_od),
        }
    }
}

impl FromStr for NrcParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NrcParam::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown NRC parameter `{s}`"))
    }
}

/// Swept quantity. Grid values are in dB for SNRs and NRC statistics, plain
/// counts otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    RhoDDb,
    NBs,
    /// Scalar NRC level mapped through the sweep's [`CouplingRule`].
    NrcLevelDb,
    /// Number of single-antenna UEs `K`, with `τ_u = K`.
    KUsers,
    /// Antennas per UE at fixed `M_tot`.
    PerUeAntennas,
    SingleNrcParam(NrcParam),
}

impl SweepVariable {
    pub fn name(&self) -> String {
        match self {
            SweepVariable::RhoDDb => "rho_d_db".into(),
            SweepVariable::NBs => "n_bs".into(),
            SweepVariable::NrcLevelDb => "nrc_level_db".into(),
            SweepVariable::KUsers => "k_users".into(),
            SweepVariable::PerUeAntennas => "per_ue_antennas".into(),
            SweepVariable::SingleNrcParam(p) => format!("single_nrc_param:{}", p.as_str()),
        }
    }

    /// Label of the CSV `variable` column.
    pub fn column_label(&self) -> String {
        match self {
            SweepVariable::SingleNrcParam(p) => format!("{}_db", p.as_str()),
            other => other.name(),
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(p) = s.strip_prefix("single_nrc_param:") {
            return Ok(SweepVariable::SingleNrcParam(p.parse()?));
        }
        match s {
            "rho_d_db" => Ok(SweepVariable::RhoDDb),
            "n_bs" => Ok(SweepVariable::NBs),
            "nrc_level_db" => Ok(SweepVariable::NrcLevelDb),
            "k_users" => Ok(SweepVariable::KUsers),
            "per_ue_antennas" => Ok(SweepVariable::PerUeAntennas),
            _ => Err(format!(
                "unknown sweep variable `{s}` (expected rho_d_db, n_bs, nrc_level_db, k_users, per_ue_antennas or single_nrc_param:<name>)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SystemConfig,
    pub nrc_base: NrcStats,
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub coupling: CouplingRule,
    pub precoders: Vec<PrecoderKind>,
    pub engines: Vec<Engine>,
    pub mc_realizations: usize,
    pub seed: u64,
    pub freeze_nrc: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error("grid point {variable} = {value}: {source}")]
    Point {
        variable: String,
        value: f64,
        source: ModelError,
    },
    #[error("grid point {variable} = {value}: Monte Carlo failed: {source}")]
    Mc {
        variable: String,
        value: f64,
        source: McError,
    },
}

impl SweepError {
    /// True for errors caused by the inputs rather than by the run.
    pub fn is_validation(&self) -> bool {
        match self {
            SweepError::Spec(_) | SweepError::Point { .. } => true,
            SweepError::Mc { source, .. } => matches!(
                source,
                McError::Model(_) | McError::InsufficientRealizations { .. }
            ),
        }
    }
}

fn as_count(variable: SweepVariable, value: f64) -> Result<usize, SweepError> {
    if value.is_finite() && value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(SweepError::Spec(format!(
            "{variable} grid value {value} is not a positive integer"
        )))
    }
}

impl SweepSpec {
    /// Configuration and NRC statistics at one grid value.
    pub fn point(&self, value: f64) -> Result<(SystemConfig, NrcStats), SweepError> {
        let var = self.variable;
        let at = |source| SweepError::Point {
            variable: var.name(),
            value,
            source,
        };
        let base = &self.base;
        match var {
            SweepVariable::RhoDDb => Ok((
                base.with_rho_d(db_to_linear(value)).map_err(at)?,
                self.nrc_base,
            )),
            SweepVariable::NBs => Ok((
                base.with_n_bs(as_count(var, value)?).map_err(at)?,
                self.nrc_base,
            )),
            SweepVariable::NrcLevelDb => Ok((
                base.clone(),
                self.coupling.stats(db_to_linear(value)).map_err(at)?,
            )),
            SweepVariable::KUsers => {
                let k = as_count(var, value)?;
                Ok((
                    base.with_ue_antennas(vec![1; k], k).map_err(at)?,
                    self.nrc_base,
                ))
            }
            SweepVariable::PerUeAntennas => {
                let per_ue = as_count(var, value)?;
                let m_tot = base.m_tot();
                if m_tot % per_ue != 0 {
                    return Err(SweepError::Spec(format!(
                        "per_ue_antennas = {per_ue} does not divide M_tot = {m_tot}"
                    )));
                }
                Ok((
                    base.with_ue_antennas(vec![per_ue; m_tot / per_ue], base.tau_u())
                        .map_err(at)?,
                    self.nrc_base,
                ))
            }
            SweepVariable::SingleNrcParam(p) => Ok((
                base.clone(),
                p.apply(&self.nrc_base, db_to_linear(value)).map_err(at)?,
            )),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if self.grid.is_empty() {
            return Err(SweepError::Spec("grid is empty".into()));
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return Err(SweepError::Spec("grid values must be finite".into()));
        }
        let increasing = self.grid.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.grid.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(SweepError::Spec("grid must be strictly monotone".into()));
        }
        if self.precoders.is_empty() || self.engines.is_empty() {
            return Err(SweepError::Spec(
                "at least one precoder and one engine are required".into(),
            ));
        }
        if self.engines.contains(&Engine::Mc) && self.mc_realizations < 2 {
            return Err(SweepError::Spec(format!(
                "Monte Carlo needs at least 2 realizations, got {}",
                self.mc_realizations
            )));
        }
        self.coupling
            .validate()
            .map_err(|e| SweepError::Spec(e.to_string()))?;
        for &v in &self.grid {
            self.point(v)?;
        }
        Ok(())
    }

    fn precoders(&self) -> Vec<PrecoderKind> {
        dedup(&self.precoders)
    }

    fn engines(&self) -> Vec<Engine> {
        dedup(&self.engines)
    }
}

fn dedup<T: Copy + PartialEq>(xs: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowTag {
    /// 0-based UE antenna index.
    Antenna(usize),
    /// Per-antenna means (SINR averaged in dB).
    Mean,
    /// Sum rate and spectral efficiency.
    Sum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: String,
    pub value: f64,
    pub precoder: PrecoderKind,
    pub engine: Engine,
    pub tag: RowTag,
    pub sinr_db: Option<f64>,
    pub rate: f64,
    pub spectral_efficiency: f64,
    pub alpha: Option<f64>,
    pub ci_halfwidth: Option<f64>,
}

/// Per-antenna outcome of one engine at one grid point.
struct PointResult {
    sinr: Vec<f64>,
    alpha: Vec<f64>,
    ci: Option<Vec<f64>>,
}

fn analytic_point(cfg: &SystemConfig, nrc: &NrcStats, kind: PrecoderKind) -> PointResult {
    let r = analytic::evaluate(cfg, nrc, kind);
    let alpha = (0..cfg.m_tot())
        .map(|m| analytic::degradation_alpha(cfg, nrc, m, kind))
        .collect();
    PointResult {
        sinr: r.sinr,
        alpha,
        ci: None,
    }
}

fn mc_point(
    driver: &Driver,
    spec: &SweepSpec,
    cfg: &SystemConfig,
    nrc: &NrcStats,
    kind: PrecoderKind,
    seed: u64,
) -> Result<PointResult, McError> {
    let options = McOptions {
        freeze_nrc: spec.freeze_nrc,
    };
    let n = spec.mc_realizations;
    let est = driver.estimate(&McJob::new(cfg, nrc, kind, seed, options)?, n)?;
    // α against a reciprocal run on the same channel draws.
    let reciprocal = if nrc.is_zero() {
        est.sinr.clone()
    } else {
        let job = McJob::new(cfg, &NrcStats::ZERO, kind, seed, options)?;
        driver.estimate(&job, n)?.sinr
    };
    let alpha = reciprocal
        .iter()
        .zip(&est.sinr)
        .map(|(r, s)| (r - s) / r)
        .collect();
    Ok(PointResult {
        sinr: est.sinr,
        alpha,
        ci: Some(est.ci_halfwidth),
    })
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

fn push_rows(
    rows: &mut Vec<SweepRow>,
    label: &str,
    value: f64,
    cfg: &SystemConfig,
    kind: PrecoderKind,
    engine: Engine,
    res: &PointResult,
) {
    let frac = cfg.data_fraction();
    let rates: Vec<f64> = res.sinr.iter().map(|s| (1.0 + s).log2()).collect();
    let row = |tag, sinr_db, rate: f64, alpha, ci| SweepRow {
        variable: label.to_string(),
        value,
        precoder: kind,
        engine,
        tag,
        sinr_db,
        rate,
        spectral_efficiency: frac * rate,
        alpha,
        ci_halfwidth: ci,
    };
    for m in 0..res.sinr.len() {
        rows.push(row(
            RowTag::Antenna(m),
            Some(linear_to_db(res.sinr[m])),
            rates[m],
            Some(res.alpha[m]),
            res.ci.as_ref().map(|c| c[m]),
        ));
    }
    rows.push(row(
        RowTag::Mean,
        Some(mean(res.sinr.iter().map(|&s| linear_to_db(s)))),
        mean(rates.iter().copied()),
        Some(mean(res.alpha.iter().copied())),
        res.ci.as_ref().map(|c| mean(c.iter().copied())),
    ));
    rows.push(row(RowTag::Sum, None, rates.iter().sum(), None, None));
}

/// Rows for every grid point, precoder, engine and antenna, in that order.
///
/// Monte Carlo grid point `i` runs under seed `derive_seed(spec.seed, i)`
/// for every precoder, so both precoders see the same channel draws.
pub fn run_sweep(spec: &SweepSpec, driver: &Driver) -> Result<Vec<SweepRow>, SweepError> {
    spec.validate()?;
    let label = spec.variable.column_label();
    let mut rows = Vec::new();
    for (i, &value) in spec.grid.iter().enumerate() {
        let (cfg, nrc) = spec.point(value)?;
        let seed = derive_seed(spec.seed, i as u64);
        for kind in spec.precoders() {
            for engine in spec.engines() {
                let res = match engine {
                    Engine::Analytic => analytic_point(&cfg, &nrc, kind),
                    Engine::Mc => {
                        mc_point(driver, spec, &cfg, &nrc, kind, seed).map_err(|source| {
                            SweepError::Mc {
                                variable: spec.variable.name(),
                                value,
                                source,
                            }
                        })?
                    }
                };
                push_rows(&mut rows, &label, value, &cfg, kind, engine, &res);
            }
        }
    }
    Ok(rows)
}

/// One sweep per sensitivity group, each with every other NRC statistic zero.
pub fn run_single_param_sensitivity(
    spec: &SweepSpec,
    driver: &Driver,
) -> Result<Vec<SweepRow>, SweepError> {
    let mut rows = Vec::new();
    for group in NrcParam::SENSITIVITY_GROUPS {
        let sub = SweepSpec {
            nrc_base: NrcStats::ZERO,
            variable: SweepVariable::SingleNrcParam(group),
            ..spec.clone()
        };
        rows.extend(run_sweep(&sub, driver)?);
    }
    Ok(rows)
}

/// DL SNRs of the user-count study, dB.
pub const KOPT_RHO_D_DB: [f64; 2] = [0.0, 20.0];

#[derive(Debug, Clone, PartialEq)]
pub struct KOptRow {
    /// `None` for the reciprocal reference.
    pub nrc_level_db: Option<f64>,
    pub rho_d_db: f64,
    pub precoder: PrecoderKind,
    pub k_opt: usize,
    pub spectral_efficiency: f64,
}

/// Optimal single-antenna user count over the NRC-level grid of `spec`,
/// preceded by the reciprocal channel, at each SNR of [`KOPT_RHO_D_DB`].
pub fn run_kopt_study(spec: &SweepSpec) -> Result<Vec<KOptRow>, SweepError> {
    spec.coupling
        .validate()
        .map_err(|e| SweepError::Spec(e.to_string()))?;
    let mut rows = Vec::new();
    for rho_d_db in KOPT_RHO_D_DB {
        let levels = std::iter::once(None).chain(spec.grid.iter().map(|&l| Some(l)));
        for level in levels {
            let nrc =
                match level {
                    None => NrcStats::ZERO,
                    Some(db) => spec.coupling.stats(db_to_linear(db)).map_err(|source| {
                        SweepError::Point {
                            variable: "nrc_level_db".into(),
                            value: db,
                            source,
                        }
                    })?,
                };
            for kind in spec.precoders() {
                let best = k_opt_search(&spec.base, &nrc, kind, db_to_linear(rho_d_db)).map_err(
                    |source| SweepError::Point {
                        variable: "rho_d_db".into(),
                        value: rho_d_db,
                        source,
                    },
                )?;
                rows.push(KOptRow {
                    nrc_level_db: level,
                    rho_d_db,
                    precoder: kind,
                    k_opt: best.k,
                    spectral_efficiency: best.spectral_efficiency,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxNrcRow {
    pub target_sinr_db: f64,
    pub precoder: PrecoderKind,
    pub rho_d_db: f64,
    /// `None` when the target exceeds the reciprocal SINR.
    pub max_level_db: Option<f64>,
}

/// Largest tolerable NRC level per target SINR, at the base configuration.
pub fn run_max_nrc_study(
    spec: &SweepSpec,
    targets_db: &[f64],
) -> Result<Vec<MaxNrcRow>, SweepError> {
    let rho_d_db = linear_to_db(spec.base.rho_d());
    let mut rows = Vec::new();
    for &target in targets_db {
        for kind in spec.precoders() {
            let level =
                match max_tolerable_nrc(&spec.base, db_to_linear(target), kind, &spec.coupling) {
                    Ok(l) => Some(linear_to_db(l)),
                    Err(SearchError::Infeasible { .. }) => None,
                    Err(SearchError::Model(source)) => {
                        return Err(SweepError::Point {
                            variable: "target_sinr_db".into(),
                            value: target,
                            source,
                        })
                    }
                };
            rows.push(MaxNrcRow {
                target_sinr_db: target,
                precoder: kind,
                rho_d_db,
                max_level_db: level,
            });
        }
    }
    Ok(rows)
}

/// Large-N reference of one antenna row or aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationRef {
    /// `None` when the SINR grows without bound.
    pub sinr_db: Option<f64>,
    pub spectral_efficiency: Option<f64>,
}

/// Saturation references aligned with `rows` (same length and order).
pub fn saturation_refs(
    spec: &SweepSpec,
    rows: &[SweepRow],
) -> Result<Vec<SaturationRef>, SweepError> {
    use nrcsim_core::analytic::asymptotic_sinr;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let (cfg, nrc) = spec.point(row.value)?;
        let per_antenna: Vec<Option<f64>> = (0..cfg.m_tot())
            .map(|m| asymptotic_sinr(&cfg, &nrc, m).finite())
            .collect();
        let frac = cfg.data_fraction();
        let se = |s: Option<f64>| s.map(|s| frac * (1.0 + s).log2());
        let r = match row.tag {
            RowTag::Antenna(m) => SaturationRef {
                sinr_db: per_antenna[m].map(linear_to_db),
                spectral_efficiency: se(per_antenna[m]),
            },
            RowTag::Mean => {
                let all: Option<Vec<f64>> = per_antenna.iter().copied().collect();
                SaturationRef {
                    sinr_db: all
                        .as_ref()
                        .map(|v| mean(v.iter().map(|&s| linear_to_db(s)))),
                    spectral_efficiency: all
                        .map(|v| mean(v.iter().map(|&s| frac * (1.0 + s).log2()))),
                }
            }
            RowTag::Sum => SaturationRef {
                sinr_db: None,
                spectral_efficiency: analytic::saturation_spectral_efficiency(&cfg, &nrc).finite(),
            },
        };
        out.push(r);
    }
    Ok(out)
}

/// Largest per-antenna `|SINR_mc − SINR_analytic|` in dB over matching rows.
pub fn max_deviation_db(rows: &[SweepRow]) -> Option<(f64, usize)> {
    let mut worst: Option<f64> = None;
    let mut count = 0;
    for a in rows.iter().filter(|r| r.engine == Engine::Analytic) {
        let RowTag::Antenna(_) = a.tag else { continue };
        let Some(mc) = rows.iter().find(|r| {
            r.engine == Engine::Mc
                && r.tag == a.tag
                && r.precoder == a.precoder
                && r.value == a.value
                && r.variable == a.variable
        }) else {
            continue;
        };
        let (Some(x), Some(y)) = (a.sinr_db, mc.sinr_db) else {
            continue;
        };
        let d = (x - y).abs();
        worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        count += 1;
    }
    worst.map(|w| (w, count))
}

/// The criterion NRC set: diagonal variances −20 dB, off-diagonal and
/// cross-correlation −30 dB, no UE-side coupling.
pub fn reference_nrc() -> NrcStats {
    NrcStats::new(
        db_to_linear(-20.0),
        0.0,
        db_to_linear(-20.0),
        db_to_linear(-30.0),
        db_to_linear(-30.0),
    )
    .expect("valid constant statistics")
}

/// NRC-level grid used when a study is not given one: −40..−10 dB in 5 dB steps.
pub fn default_level_grid() -> Vec<f64> {
    (0..=6).map(|i| -40.0 + 5.0 * i as f64).collect()
}

/// Baseline sweep over `ρ_d ∈ {−10, 0, 10, 20, 30}` dB.
pub fn default_spec() -> SweepSpec {
    SweepSpec {
        base: SystemConfig::baseline(),
        nrc_base: reference_nrc(),
        variable: SweepVariable::RhoDDb,
        grid: vec![-10.0, 0.0, 10.0, 20.0, 30.0],
        coupling: CouplingRule::default(),
        precoders: PrecoderKind::ALL.to_vec(),
        engines: vec![Engine::Analytic],
        mc_realizations: 1000,
        seed: 1,
        freeze_nrc: false,
    }
}
