//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid configuration, 3 runtime failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{error::ErrorKind, Parser, Subcommand};
use nrcsim_core::analytic;
use nrcsim_core::units::linear_to_db;

use crate::config::{load_config_file, resolve, ConfigError, ConfigFile, Resolved};
use crate::driver::{resolve_threads, Driver};
use crate::experiments::{
    default_level_grid, max_deviation_db, run_kopt_study, run_max_nrc_study,
    run_single_param_sensitivity, run_sweep, saturation_refs, Engine, SweepError, SweepVariable,
};
use crate::output::{
    asymptote_csv, kopt_csv, max_nrc_csv, sweep_csv, write_with_manifest, RunManifest,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// BS antenna counts of the default saturation sweep.
pub const DEFAULT_N_GRID: [f64; 7] = [100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0];
/// Target SINRs of the default tolerable-NRC study, dB.
pub const DEFAULT_TARGETS_DB: [f64; 6] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0];

#[derive(Debug, Parser)]
#[command(
    name = "nrcsim",
    version,
    about = "Massive MIMO downlink SINR and spectral efficiency under channel non-reciprocity"
)]
pub struct Cli {
    /// Config file, or `baseline` for the built-in defaults.
    #[arg(long, global = true, default_value = "baseline")]
    pub config: PathBuf,
    /// Output CSV. A `.manifest.json` is written next to it. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed. Each grid point gets its own derived stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo realizations per grid point.
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    /// Worker threads, 0 = all cores. Falls back to NRCSIM_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Draw the NRC matrices once and keep them for every realization.
    #[arg(long, global = true)]
    pub freeze_nrc: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form sweep.
    Analytic,
    /// Monte Carlo sweep.
    Mc,
    /// Both engines, plus the largest per-antenna SINR deviation.
    Compare,
    /// One NRC statistic at a time, all others zero.
    Sensitivity,
    /// Optimal number of single-antenna users over the NRC-level grid.
    Kopt,
    /// Largest NRC level meeting a target SINR.
    MaxNrc {
        /// Target SINR in dB; repeat or separate with commas.
        #[arg(
            long = "target-sinr-db",
            value_delimiter = ',',
            allow_negative_numbers = true
        )]
        target_sinr_db: Vec<f64>,
    },
    /// BS antenna sweep with the large-N saturation reference.
    Asymptote,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analytic => "analytic",
            Command::Mc => "mc",
            Command::Compare => "compare",
            Command::Sensitivity => "sensitivity",
            Command::Kopt => "kopt",
            Command::MaxNrc { .. } => "max-nrc",
            Command::Asymptote => "asymptote",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Sweep(s) => s.into(),
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn uses_nrc_levels(variable: &str) -> bool {
    matches!(
        variable.parse::<SweepVariable>(),
        Ok(SweepVariable::NrcLevelDb | SweepVariable::SingleNrcParam(_))
    )
}

/// Applies command-line overrides and the subcommand's sweep shape.
fn prepare(cli: &Cli, mut file: ConfigFile) -> ConfigFile {
    let sweep = &mut file.sweep;
    if let Some(seed) = cli.seed {
        sweep.seed = seed;
    }
    if let Some(n) = cli.realizations {
        sweep.realizations = n;
    }
    sweep.freeze_nrc |= cli.freeze_nrc;
    let engines = |e: &[Engine]| e.iter().map(|e| e.as_str().to_string()).collect();
    match cli.command {
        Command::Analytic => sweep.engines = engines(&[Engine::Analytic]),
        Command::Mc => sweep.engines = engines(&[Engine::Mc]),
        Command::Compare => sweep.engines = engines(&Engine::ALL),
        Command::Sensitivity | Command::Kopt => {
            if !uses_nrc_levels(&sweep.variable) {
                sweep.variable = SweepVariable::NrcLevelDb.name();
                sweep.grid = default_level_grid();
            }
        }
        Command::Asymptote => {
            if sweep.variable != SweepVariable::NBs.name() {
                sweep.variable = SweepVariable::NBs.name();
                sweep.grid = DEFAULT_N_GRID.to_vec();
            }
        }
        Command::MaxNrc { .. } => {}
    }
    file
}

struct Outcome {
    csv: String,
    summary: Vec<String>,
}

fn execute(cli: &Cli, resolved: &Resolved, driver: &Driver) -> Result<Outcome, Failure> {
    let spec = &resolved.sweep;
    let mut summary = Vec::new();
    let csv = match &cli.command {
        Command::Analytic | Command::Mc => sweep_csv(&run_sweep(spec, driver)?),
        Command::Compare => {
            let rows = run_sweep(spec, driver)?;
            match max_deviation_db(&rows) {
                Some((dev, count)) => summary.push(format!(
                    "max |ΔSINR| = {dev:.4} dB over {count} antenna points"
                )),
                None => summary.push("max |ΔSINR| = n/a (no matching rows)".into()),
            }
            sweep_csv(&rows)
        }
        Command::Sensitivity => sweep_csv(&run_single_param_sensitivity(spec, driver)?),
        Command::Kopt => kopt_csv(&run_kopt_study(spec)?),
        Command::MaxNrc { target_sinr_db } => {
            let targets = if target_sinr_db.is_empty() {
                DEFAULT_TARGETS_DB.to_vec()
            } else {
                target_sinr_db.clone()
            };
            if let Some(bad) = targets.iter().find(|t| !t.is_finite()) {
                return Err(Failure::Validation(format!(
                    "target SINR {bad} dB is not finite"
                )));
            }
            let rows = run_max_nrc_study(spec, &targets)?;
            for r in &rows {
                summary.push(match r.max_level_db {
                    Some(level) => format!(
                        "{}: target {} dB at rho_d {} dB -> max NRC level {level:.2} dB",
                        r.precoder, r.target_sinr_db, r.rho_d_db
                    ),
                    None => {
                        let ceiling = analytic::sinr(&spec.base, &nrcsim_core::NrcStats::ZERO, 0, r.precoder);
                        format!(
                            "{}: target {} dB at rho_d {} dB -> infeasible (reciprocal SINR {:.2} dB)",
                            r.precoder,
                            r.target_sinr_db,
                            r.rho_d_db,
                            linear_to_db(ceiling)
                        )
                    }
                });
            }
            max_nrc_csv(&rows)
        }
        Command::Asymptote => {
            let rows = run_sweep(spec, driver)?;
            let refs = saturation_refs(spec, &rows)?;
            asymptote_csv(&rows, &refs)
        }
    };
    Ok(Outcome { csv, summary })
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };

    let started = Instant::now();
    let resolved = match load_config_file(&cli.config)
        .map(|f| prepare(&cli, f))
        .and_then(resolve)
    {
        Ok(r) => r,
        Err(e) => return report(stderr, e.into()),
    };
    let driver = match Driver::new(resolve_threads(cli.threads)) {
        Ok(d) => d,
        Err(e) => return report(stderr, Failure::Runtime(format!("thread pool: {e}"))),
    };
    let outcome = match execute(&cli, &resolved, &driver) {
        Ok(o) => o,
        Err(f) => return report(stderr, f),
    };

    // The CSV owns stdout when no file is given, so summaries move to stderr.
    let summary_sink: &mut dyn Write = match &cli.out {
        Some(path) => {
            let manifest = RunManifest::new(
                cli.command.name(),
                &resolved.file,
                started.elapsed().as_secs_f64(),
            );
            if let Err(e) = write_with_manifest(path, &outcome.csv, manifest) {
                return report(
                    stderr,
                    Failure::Runtime(format!("cannot write {}: {e}", path.display())),
                );
            }
            stdout
        }
        None => {
            if let Err(e) = stdout.write_all(outcome.csv.as_bytes()) {
                return report(
                    stderr,
                    Failure::Runtime(format!("cannot write output: {e}")),
                );
            }
            stderr
        }
    };
    for line in &outcome.summary {
        let _ = writeln!(summary_sink, "{line}");
    }
    EXIT_OK
}

fn report(stderr: &mut dyn Write, failure: Failure) -> i32 {
    match failure {
        Failure::Validation(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_VALIDATION
        }
        Failure::Runtime(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("nrcsim").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_capture(&[]).0, EXIT_USAGE);
        assert_eq!(run_capture(&["analytic", "--seed", "x"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_is_success() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("max-nrc"));
    }

    #[test]
    fn missing_config_is_validation() {
        let (code, _, err) = run_capture(&["analytic", "--config", "/nonexistent/cfg.json"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("cannot read config"));
    }

    #[test]
    fn too_few_realizations_is_validation() {
        assert_eq!(
            run_capture(&["mc", "--realizations", "1"]).0,
            EXIT_VALIDATION
        );
    }

    #[test]
    fn analytic_to_stdout() {
        let (code, out, _) = run_capture(&["analytic"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with(crate::output::SWEEP_HEADER));
        assert_eq!(out.lines().count(), 1 + 5 * 2 * 22);
    }

    #[test]
    fn max_nrc_prints_level() {
        let (code, _, err) = run_capture(&["max-nrc", "--target-sinr-db", "15"]);
        assert_eq!(code, EXIT_OK);
        assert!(
            err.contains("zf: target 15 dB at rho_d 20 dB -> max NRC level -23.87 dB"),
            "{err}"
        );
    }

    #[test]
    fn freeze_flag_reaches_the_spec() {
        let cli = Cli::try_parse_from(["nrcsim", "mc", "--freeze-nrc", "--seed", "9"]).unwrap();
        let file = prepare(&cli, ConfigFile::baseline());
        assert!(file.sweep.freeze_nrc);
        assert_eq!(file.sweep.seed, 9);
        assert_eq!(file.sweep.engines, vec!["mc".to_string()]);
    }

    #[test]
    fn out_writes_csv_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("sweep.csv");
        let (code, out, _) = run_capture(&["analytic", "--out", csv.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert!(!out.contains(crate::output::SWEEP_HEADER));
        let bytes = std::fs::read(&csv).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(crate::output::manifest_path(&csv)).unwrap())
                .unwrap();
        assert_eq!(
            manifest["outputs"][0]["sha256"],
            crate::output::sha256_hex(&bytes)
        );
        assert_eq!(manifest["seed"], 1);
    }

    #[test]
    fn inconsistent_nrc_is_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut file = ConfigFile::baseline();
        file.nrc.delta2_c_d_db = Some(-10.0);
        std::fs::write(&path, crate::config::emit_config(&file)).unwrap();
        let (code, _, err) = run_capture(&["analytic", "--config", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_VALIDATION, "{err}");
    }

    #[test]
    fn asymptote_adds_saturation_columns() {
        let (code, out, _) = run_capture(&["asymptote"]);
        assert_eq!(code, EXIT_OK);
        assert!(out
            .lines()
            .next()
            .unwrap()
            .ends_with(crate::output::SATURATION_COLUMNS));
    }
}
