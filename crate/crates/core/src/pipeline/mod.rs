//! End-to-end runs: ingestion, per-date calibration, pricing and reports.
//!
//! Every command writes into one output directory holding `manifest.txt`
//! (the effective configuration), `per_date.csv` and the aggregate tables.

pub mod config;
pub mod price;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::calibration::objective::{calibrate_options, calibrate_term, derive_seed, CalibrationOptions, CalibrationResult, Objective, DEFAULT_TERM_STARTS};
use crate::calibration::registry::lookup;
use crate::calibration::stats::ErrorModelParams;
use crate::error::{Error, Result};
use crate::market::{read_snapshots, synthesize_snapshot, write_snapshot, BootstrapOptions, IngestOptions, MarketSnapshot, OutlierPolicy, SynthConfig};

pub use config::RunConfig;
pub use price::{price_instrument, Instrument, PriceReport, PriceRequest, Strike};
pub use report::{write_report, DateRow};

/// Default random starts for option calibrations.
pub const DEFAULT_OPTION_STARTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub models: Vec<String>,
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: RunConfig, config_path: Option<PathBuf>) -> Result<Self> {
        let out_dir = config
            .out
            .clone()
            .ok_or_else(|| Error::Parse("no output directory given (`out` / --out)".into()))?;
        Ok(Self {
            command: command.to_string(),
            config_path,
            inputs: config.data.clone(),
            out_dir,
            seed: config.seed,
            models: config.models.clone(),
            config,
        })
    }

    /// Inputs exist, models resolve and the output directory is writable.
    pub fn validate(&self, needs_inputs: bool) -> Result<()> {
        if needs_inputs && self.inputs.is_empty() {
            return Err(Error::Ingestion("no input data given (`data` / --config)".into()));
        }
        if let Some(missing) = self.inputs.iter().find(|p| !p.exists()) {
            return Err(Error::Ingestion(format!("input {} does not exist", missing.display())));
        }
        for m in &self.models {
            lookup(m)?;
        }
        fs::create_dir_all(&self.out_dir)?;
        let probe = self.out_dir.join(".write-test");
        fs::write(&probe, b"")?;
        fs::remove_file(probe)?;
        Ok(())
    }

    fn ingest_options(&self) -> IngestOptions {
        let c = &self.config;
        IngestOptions {
            caplet_accrual: c.caplet_accrual,
            swaption_frequency: c.swaption_frequency,
            bootstrap: BootstrapOptions {
                swap_frequency: c.swap_frequency,
            },
            outliers: c.outliers.map(|k| OutlierPolicy {
                window: c.outlier_window,
                iqr_multiple: k,
            }),
        }
    }

    pub fn load_snapshots(&self) -> Result<Vec<MarketSnapshot>> {
        let opts = self.ingest_options();
        let mut snaps = Vec::new();
        for p in &self.inputs {
            snaps.extend(read_snapshots(p, &opts)?);
        }
        snaps.sort_by(|a, b| a.date.cmp(&b.date));
        if let Some(w) = snaps.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(Error::Ingestion(format!("snapshot date {} appears twice", w[0].date)));
        }
        if snaps.is_empty() {
            return Err(Error::Ingestion("no snapshots found".into()));
        }
        Ok(snaps)
    }

    fn calibration_options(&self, model: &str, n_starts: usize, seed: u64) -> Result<CalibrationOptions> {
        let c = &self.config;
        let mut o = CalibrationOptions::new(n_starts, seed);
        o.local.max_evals = c.max_evals;
        o.error_model = ErrorModelParams {
            sigma0_scale: c.sigma0_scale,
            sigma_d: c.sigma_d,
            sigma_inf: c.sigma_inf,
        };
        o.bounds = lookup(model)?.chaos_bounds(c.b_bounds, c.c_bounds).transpose()?;
        Ok(o)
    }

    fn write_manifest(&self) -> Result<()> {
        let mut cfg = self.config.clone();
        cfg.command = Some(self.command.clone());
        fs::write(self.out_dir.join("manifest.txt"), cfg.render())?;
        Ok(())
    }
}

/// Outcome of one model on one date.
pub type Cell = (String, String, Result<CalibrationResult>);

fn run_grid(
    manifest: &RunManifest,
    snaps: &[MarketSnapshot],
    models: &[String],
    n_starts: usize,
    f: impl Fn(&str, &MarketSnapshot, &CalibrationOptions) -> Result<CalibrationResult> + Sync,
) -> Result<Vec<Cell>> {
    let jobs: Vec<(usize, usize)> = (0..snaps.len())
        .flat_map(|d| (0..models.len()).map(move |m| (d, m)))
        .collect();
    jobs.par_iter()
        .map(|&(d, m)| {
            let seed = derive_seed(manifest.seed, &[d as u64, m as u64]);
            let opts = manifest.calibration_options(&models[m], n_starts, seed)?;
            let r = f(&models[m], &snaps[d], &opts);
            if let Err(e) = &r {
                log::error!("{} {}: {e}", snaps[d].date, models[m]);
            }
            Ok((snaps[d].date.clone(), models[m].clone(), r))
        })
        .collect()
}

fn fail_if_any(cells: &[Cell]) -> Result<()> {
    let failed: Vec<(&str, &str, &Error)> = cells
        .iter()
        .filter_map(|(d, m, r)| r.as_ref().err().map(|e| (d.as_str(), m.as_str(), e)))
        .collect();
    let Some(&(_, _, first)) = failed.first() else { return Ok(()) };
    let msg = failed
        .iter()
        .map(|(d, m, e)| format!("{d}/{m}: {e}"))
        .collect::<Vec<_>>()
        .join("; ");
    let msg = format!("{} calibration(s) failed: {msg}", failed.len());
    Err(match first.exit_code() {
        2 => Error::Parse(msg),
        3 => Error::Ingestion(msg),
        4 => Error::Optimization(msg),
        _ => Error::Domain(msg),
    })
}

/// Term-structure calibration of every model on every date.
pub fn cmd_calibrate_term(manifest: &RunManifest) -> Result<Vec<Cell>> {
    manifest.validate(true)?;
    let snaps = manifest.load_snapshots()?;
    if let Some(s) = snaps.iter().find(|s| s.bonds.is_empty()) {
        return Err(Error::Ingestion(format!("{}: no bond quotes", s.date)));
    }
    let mut models = manifest.models.clone();
    if models.is_empty() {
        return Err(Error::Parse("no models given (`models` / --models)".into()));
    }
    let baseline = lookup(&manifest.config.baseline)?.id.to_string();
    if !models.iter().any(|m| lookup(m).is_ok_and(|d| d.id == baseline)) {
        models.insert(0, baseline.clone());
    }
    let n_starts = manifest.config.starts.unwrap_or(DEFAULT_TERM_STARTS);
    let cells = run_grid(manifest, &snaps, &models, n_starts, calibrate_term)?;
    manifest.write_manifest()?;
    report::write_term_outputs(&manifest.out_dir, &cells, &models, &baseline, manifest.config.dm_lag)?;
    fail_if_any(&cells)?;
    Ok(cells)
}

/// Option calibration under TotalE1, TotalE2 or TotalE3 with the held-out
/// class reported as a forecast.
pub fn cmd_calibrate_options(manifest: &RunManifest, objective: Objective) -> Result<Vec<Cell>> {
    if objective == Objective::Term {
        return Err(Error::Parse("option calibration needs objective cpl, swp or joint".into()));
    }
    manifest.validate(true)?;
    let snaps = manifest.load_snapshots()?;
    let models = manifest.models.clone();
    if models.is_empty() {
        return Err(Error::Parse("no models given (`models` / --models)".into()));
    }
    let n_starts = manifest.config.starts.unwrap_or(DEFAULT_OPTION_STARTS);
    let cells = run_grid(manifest, &snaps, &models, n_starts, |m, s, o| {
        calibrate_options(m, s, objective, o)
    })?;
    manifest.write_manifest()?;
    report::write_option_outputs(&manifest.out_dir, &cells, &models, objective)?;
    fail_if_any(&cells)?;
    Ok(cells)
}

/// Synthetic snapshots from `generator` at `params`, one per date, each with
/// its own noise seed. Returns the snapshot directories.
pub fn cmd_synth(manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    manifest.validate(false)?;
    let c = &manifest.config;
    let gen_id = c
        .generator
        .as_deref()
        .or(manifest.models.first().map(String::as_str))
        .ok_or_else(|| Error::Parse("synth needs a generator model (`generator` / --models)".into()))?;
    let def = lookup(gen_id)?;
    let objective = if def.param_count(Objective::Joint) == c.params.len() {
        Objective::Joint
    } else {
        Objective::YieldCaplet
    };
    let model = def.build(&c.params, objective, 40.0)?;
    let mut dirs = Vec::new();
    for i in 0..c.dates.max(1) {
        let cfg = SynthConfig {
            date: synthetic_date(i),
            caplet_accrual: c.caplet_accrual,
            swaption_frequency: c.swaption_frequency,
            noise: c.noise,
            seed: derive_seed(c.seed, &[i as u64]),
            ..SynthConfig::default()
        };
        dirs.push(write_snapshot(&manifest.out_dir, &synthesize_snapshot(&model, &cfg)?)?);
    }
    let mut cfg = c.clone();
    cfg.command = Some(manifest.command.clone());
    cfg.generator = Some(def.id.to_string());
    fs::write(manifest.out_dir.join("generator.txt"), cfg.render())?;
    Ok(dirs)
}

/// Weekly ISO dates from Friday 2000-01-07.
pub fn synthetic_date(week: usize) -> String {
    let start = chrono::NaiveDate::from_ymd_opt(2000, 1, 7).expect("valid date");
    (start + chrono::Days::new(7 * week as u64)).format("%Y-%m-%d").to_string()
}

/// Aggregates a finished run directory into `report.csv`.
pub fn cmd_report(run_dir: &Path) -> Result<PathBuf> {
    write_report(run_dir)
}
