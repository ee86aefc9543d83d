//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::experiments::{KOptRow, MaxNrcRow, RowTag, SaturationRef, SweepRow};

pub const SWEEP_HEADER: &str =
    "variable,value,precoder,engine,antenna,sinr_db,rate_bps_hz,se_bps_hz,alpha,ci_halfwidth";
pub const SATURATION_COLUMNS: &str = "saturation_sinr_db,saturation_se_bps_hz";
pub const KOPT_HEADER: &str = "nrc_level_db,rho_d_db,precoder,k_opt,se_bps_hz";
pub const MAX_NRC_HEADER: &str = "target_sinr_db,precoder,rho_d_db,max_level_db,feasible";

/// Shortest round-trip scientific notation.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn tag(t: RowTag) -> String {
    match t {
        RowTag::Antenna(m) => (m + 1).to_string(),
        RowTag::Mean => "mean".into(),
        RowTag::Sum => "sum".into(),
    }
}

fn sweep_fields(r: &SweepRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.variable,
        num(r.value),
        r.precoder,
        r.engine,
        tag(r.tag),
        opt(r.sinr_db),
        num(r.rate),
        num(r.spectral_efficiency),
        opt(r.alpha),
        opt(r.ci_halfwidth),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&sweep_fields(r));
        out.push('\n');
    }
    out
}

/// Sweep table with the large-N reference appended to every row.
pub fn asymptote_csv(rows: &[SweepRow], refs: &[SaturationRef]) -> String {
    assert_eq!(rows.len(), refs.len());
    let mut out = format!("{SWEEP_HEADER},{SATURATION_COLUMNS}\n");
    for (r, s) in rows.iter().zip(refs) {
        let _ = writeln!(
            out,
            "{},{},{}",
            sweep_fields(r),
            opt(s.sinr_db),
            opt(s.spectral_efficiency)
        );
    }
    out
}

pub fn kopt_csv(rows: &[KOptRow]) -> String {
    let mut out = format!("{KOPT_HEADER}\n");
    for r in rows {
        let level = r.nrc_level_db.map_or_else(|| num(f64::NEG_INFINITY), num);
        let _ = writeln!(
            out,
            "{level},{},{},{},{}",
            num(r.rho_d_db),
            r.precoder,
            r.k_opt,
            num(r.spectral_efficiency)
        );
    }
    out
}

pub fn max_nrc_csv(rows: &[MaxNrcRow]) -> String {
    let mut out = format!("{MAX_NRC_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(r.target_sinr_db),
            r.precoder,
            num(r.rho_d_db),
            opt(r.max_level_db),
            r.max_level_db.is_some()
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineVersions {
    pub nrcsim: String,
    pub nrcsim_core: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputChecksum {
    pub path: String,
    pub sha256: String,
}

/// Provenance record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigFile,
    pub seed: u64,
    pub engine_versions: EngineVersions,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn new(command: &str, config: &ConfigFile, wall_clock_seconds: f64) -> Self {
        let version = env!("CARGO_PKG_VERSION").to_string();
        RunManifest {
            tool: "nrcsim".into(),
            version: version.clone(),
            command: command.into(),
            seed: config.sweep.seed,
            config: config.clone(),
            engine_versions: EngineVersions {
                nrcsim: version,
                nrcsim_core: nrcsim_core::VERSION.into(),
            },
            wall_clock_seconds,
            outputs: Vec::new(),
        }
    }
}

/// `out.csv` → `out.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Writes `contents` to `path` and its manifest next to it.
pub fn write_with_manifest(
    path: &Path,
    contents: &str,
    mut manifest: RunManifest,
) -> io::Result<PathBuf> {
    std::fs::write(path, contents)?;
    manifest.outputs.push(OutputChecksum {
        path: path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        ),
        sha256: sha256_hex(contents.as_bytes()),
    });
    let mpath = manifest_path(path);
    let mut json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    json.push('\n');
    std::fs::write(&mpath, json)?;
    Ok(mpath)
}
