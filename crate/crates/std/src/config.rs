//! JSON run configuration.
//!
//! SNRs and NRC statistics are given in dB under `_db` field names; linear
//! spellings such as `rho_d` are unknown fields and rejected. An NRC field
//! must be present, and `null` sets that statistic to exactly zero.

use std::path::Path;

use nrcsim_core::units::db_to_linear;
use nrcsim_core::{CouplingRule, ModelError, NrcStats, PrecoderKind, SystemConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{default_spec, Engine, SweepError, SweepSpec, SweepVariable};

/// Name accepted in place of a path for the built-in baseline.
pub const BASELINE_PRESET: &str = "baseline";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    pub nrc: NrcSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_bs: usize,
    /// Antenna count of each UE.
    pub ue_antennas: Vec<usize>,
    pub tau_u: usize,
    pub rho_u_db: f64,
    pub rho_d_db: f64,
    pub coherence_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NrcSection {
    #[serde(deserialize_with = "Option::deserialize")]
    pub sigma2_a_d_db: Option<f64>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub sigma2_a_od_db: Option<f64>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub sigma2_c_d_db: Option<f64>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub delta2_c_d_db: Option<f64>,
    #[serde(deserialize_with = "Option::deserialize")]
    pub sigma2_c_od_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub variable: String,
    pub grid: Vec<f64>,
    pub precoders: Vec<String>,
    pub engines: Vec<String>,
    pub realizations: usize,
    pub seed: u64,
    pub freeze_nrc: bool,
    pub coupling: CouplingSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub diag_offset_db: f64,
    pub offdiag_offset_db: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        let c = CouplingRule::default();
        CouplingSection {
            diag_offset_db: c.diag_offset_db,
            offdiag_offset_db: c.offdiag_offset_db,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = default_spec();
        SweepSection {
            variable: d.variable.name(),
            grid: d.grid,
            precoders: d.precoders.iter().map(|p| p.as_str().to_string()).collect(),
            engines: d.engines.iter().map(|e| e.as_str().to_string()).collect(),
            realizations: d.mc_realizations,
            seed: d.seed,
            freeze_nrc: d.freeze_nrc,
            coupling: CouplingSection::default(),
        }
    }
}

impl ConfigFile {
    /// N = 100, 20 single-antenna UEs, τ_u = 20, ρ_u = 0 dB, ρ_d = 20 dB,
    /// T = 196, with the reference NRC set.
    pub fn baseline() -> Self {
        ConfigFile {
            system: SystemSection {
                n_bs: 100,
                ue_antennas: vec![1; 20],
                tau_u: 20,
                rho_u_db: 0.0,
                rho_d_db: 20.0,
                coherence_symbols: 196,
            },
            nrc: NrcSection {
                sigma2_a_d_db: Some(-20.0),
                sigma2_a_od_db: None,
                sigma2_c_d_db: Some(-20.0),
                delta2_c_d_db: Some(-30.0),
                sigma2_c_od_db: Some(-30.0),
            },
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invalid configuration: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

/// Validated objects built from a [`ConfigFile`], with every dB value
/// converted to linear.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub file: ConfigFile,
    pub system: SystemConfig,
    pub nrc: NrcStats,
    pub sweep: SweepSpec,
}

fn nrc_linear(db: Option<f64>) -> f64 {
    db.map_or(0.0, db_to_linear)
}

fn field_error(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

pub fn resolve(file: ConfigFile) -> Result<Resolved, ConfigError> {
    let s = &file.system;
    for (field, v) in [
        ("system.rho_u_db", s.rho_u_db),
        ("system.rho_d_db", s.rho_d_db),
    ] {
        if !v.is_finite() {
            return Err(field_error(field, "must be a finite dB value"));
        }
    }
    let system = SystemConfig::new(
        s.n_bs,
        s.ue_antennas.clone(),
        s.tau_u,
        db_to_linear(s.rho_u_db),
        db_to_linear(s.rho_d_db),
        s.coherence_symbols,
    )?;

    let n = &file.nrc;
    let named = [
        ("nrc.sigma2_a_d_db", n.sigma2_a_d_db),
        ("nrc.sigma2_a_od_db", n.sigma2_a_od_db),
        ("nrc.sigma2_c_d_db", n.sigma2_c_d_db),
        ("nrc.delta2_c_d_db", n.delta2_c_d_db),
        ("nrc.sigma2_c_od_db", n.sigma2_c_od_db),
    ];
    for (field, v) in named {
        if v.is_some_and(|v| !v.is_finite()) {
            return Err(field_error(field, "must be a finite dB value or null"));
        }
    }
    let nrc = NrcStats::new(
        nrc_linear(n.sigma2_a_d_db),
        nrc_linear(n.sigma2_a_od_db),
        nrc_linear(n.sigma2_c_d_db),
        nrc_linear(n.delta2_c_d_db),
        nrc_linear(n.sigma2_c_od_db),
    )?;

    let w = &file.sweep;
    let variable: SweepVariable = w
        .variable
        .parse()
        .map_err(|e| field_error("sweep.variable", e))?;
    let precoders = w
        .precoders
        .iter()
        .map(|p| p.parse::<PrecoderKind>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| field_error("sweep.precoders", e.to_string()))?;
    let engines = w
        .engines
        .iter()
        .map(|e| e.parse::<Engine>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| field_error("sweep.engines", e))?;
    let sweep = SweepSpec {
        base: system.clone(),
        nrc_base: nrc,
        variable,
        grid: w.grid.clone(),
        coupling: CouplingRule {
            diag_offset_db: w.coupling.diag_offset_db,
            offdiag_offset_db: w.coupling.offdiag_offset_db,
        },
        precoders,
        engines,
        mc_realizations: w.realizations,
        seed: w.seed,
        freeze_nrc: w.freeze_nrc,
    };
    sweep.validate()?;
    Ok(Resolved {
        file,
        system,
        nrc,
        sweep,
    })
}

pub fn parse_config_str(text: &str) -> Result<ConfigFile, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Reads `path` (or the [`BASELINE_PRESET`] when no such file exists).
pub fn load_config_file(path: &Path) -> Result<ConfigFile, ConfigError> {
    if path.as_os_str() == BASELINE_PRESET && !path.exists() {
        return Ok(ConfigFile::baseline());
    }
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config(path: &Path) -> Result<Resolved, ConfigError> {
    resolve(load_config_file(path)?)
}

pub fn emit_config(file: &ConfigFile) -> String {
    let mut s = serde_json::to_string_pretty(file).expect("config serializes");
    s.push('\n');
    s
}
