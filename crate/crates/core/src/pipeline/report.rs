//! Run artifacts: per-date rows, aggregate tables and the long-format report.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Cell;
use crate::calibration::objective::{CalibrationResult, Objective};
use crate::calibration::registry::lookup;
use crate::calibration::stats::{dm_statistic, msrf};
use crate::error::{Error, Result};

pub const PER_DATE: &str = "per_date.csv";
pub const SUMMARY: &str = "summary.csv";
pub const MSRF: &str = "msrf.csv";
pub const REPORT: &str = "report.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DateRow {
    pub date: String,
    pub model: String,
    pub family: String,
    pub objective: String,
    pub n_params: usize,
    pub status: String,
    pub total: Option<f64>,
    pub neg_loglik: Option<f64>,
    pub yield_e: Option<f64>,
    pub cpl_e: Option<f64>,
    pub swp_e: Option<f64>,
    pub rss: Option<f64>,
    pub n_obs: Option<usize>,
    pub aic: Option<f64>,
    pub seed: Option<u64>,
    pub best_start: Option<usize>,
    pub n_starts: Option<usize>,
    pub params: String,
}

impl DateRow {
    fn from_cell(date: &str, model: &str, objective: Objective, r: &Result<CalibrationResult>) -> Result<Self> {
        let def = lookup(model)?;
        let mut row = DateRow {
            date: date.to_string(),
            model: def.id.to_string(),
            family: def.label().to_string(),
            objective: objective.label().to_string(),
            n_params: def.param_count(objective),
            status: "ok".into(),
            total: None,
            neg_loglik: None,
            yield_e: None,
            cpl_e: None,
            swp_e: None,
            rss: None,
            n_obs: None,
            aic: None,
            seed: None,
            best_start: None,
            n_starts: None,
            params: String::new(),
        };
        match r {
            Ok(c) => {
                row.total = Some(c.objective_value);
                row.neg_loglik = c.loglik.map(|l| -l);
                row.yield_e = Some(c.errors.yield_e());
                row.cpl_e = c.errors.cpl_e();
                row.swp_e = c.errors.swp_e();
                row.rss = Some(c.rss);
                row.n_obs = Some(c.n);
                row.aic = Some(c.aic.value);
                row.seed = Some(c.seed);
                row.best_start = Some(c.best_start);
                row.n_starts = Some(c.n_starts);
                row.params = c.theta.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            }
            Err(e) => row.status = format!("failed: {e}"),
        }
        Ok(row)
    }

    fn ok(&self) -> bool {
        self.status == "ok"
    }
}

fn write_rows(path: &Path, rows: &[DateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn pct(x: Option<f64>) -> String {
    x.map_or("-".into(), |v| format!("{:.4}", 100.0 * v))
}

fn mean(xs: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = xs.collect::<Option<Vec<f64>>>()?;
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

fn rows_of(cells: &[Cell], objective: Objective) -> Result<Vec<DateRow>> {
    cells
        .iter()
        .map(|(d, m, r)| DateRow::from_cell(d, m, objective, r))
        .collect()
}

fn by_model<'a>(rows: &'a [DateRow], model: &str) -> Vec<&'a DateRow> {
    rows.iter().filter(|r| r.model == model).collect()
}

/// AIC selection frequencies over the dates where every model succeeded.
fn write_msrf(out: &Path, rows: &[DateRow], models: &[String]) -> Result<()> {
    if models.len() < 2 {
        return Ok(());
    }
    let dates: BTreeSet<&str> = rows.iter().map(|r| r.date.as_str()).collect();
    let usable: Vec<&str> = dates
        .into_iter()
        .filter(|d| models.iter().all(|m| rows.iter().any(|r| &r.date == d && &r.model == m && r.ok())))
        .collect();
    if usable.is_empty() {
        log::warn!("no date where every model calibrated; MSRF skipped");
        return Ok(());
    }
    let aics: Vec<Vec<f64>> = models
        .iter()
        .map(|m| {
            usable
                .iter()
                .map(|d| {
                    rows.iter()
                        .find(|r| &r.date == d && &r.model == m)
                        .and_then(|r| r.aic)
                        .unwrap_or(f64::INFINITY)
                })
                .collect()
        })
        .collect();
    let freq = msrf(&aics)?;
    let n = usable.len();
    let table: Vec<Vec<String>> = models
        .iter()
        .zip(&freq)
        .map(|(m, f)| vec![m.clone(), format!("{}", (f * n as f64).round()), n.to_string(), format!("{f:.6}")])
        .collect();
    write_table(&out.join(MSRF), &["model", "wins", "dates", "frequency"], &table)
}

pub(super) fn write_term_outputs(out: &Path, cells: &[Cell], models: &[String], baseline: &str, lag: usize) -> Result<()> {
    let models: Vec<String> = models.iter().map(|m| Ok(lookup(m)?.id.to_string())).collect::<Result<_>>()?;
    let rows = rows_of(cells, Objective::Term)?;
    write_rows(&out.join(PER_DATE), &rows)?;
    let base_rows = by_model(&rows, baseline);
    let mut table = Vec::new();
    for m in &models {
        let def = lookup(m)?;
        let mine = by_model(&rows, m);
        let dm = if m == baseline {
            "-".to_string()
        } else {
            let pairs: Vec<(f64, f64)> = mine
                .iter()
                .filter_map(|r| {
                    let b = base_rows.iter().find(|b| b.date == r.date)?;
                    Some((r.yield_e?.powi(2), b.yield_e?.powi(2)))
                })
                .collect();
            let (lm, lb): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            match dm_statistic(&lm, &lb, lag) {
                Ok(v) => format!("{v:.4}"),
                Err(e) => {
                    log::info!("DM for {m} vs {baseline} not reported: {e}");
                    "-".into()
                }
            }
        };
        let ok: Vec<&&DateRow> = mine.iter().filter(|r| r.ok()).collect();
        table.push(vec![
            m.clone(),
            def.label().to_string(),
            def.param_count(Objective::Term).to_string(),
            mean(ok.iter().map(|r| r.neg_loglik)).map_or("-".into(), |v| format!("{v:.4}")),
            pct(mean(ok.iter().map(|r| r.yield_e))),
            dm,
        ]);
    }
    write_table(&out.join(SUMMARY), &["model", "type", "N", "neg_loglik", "rmspe_pct", "dm"], &table)?;
    write_msrf(out, &rows, &models)
}

pub(super) fn write_option_outputs(out: &Path, cells: &[Cell], models: &[String], objective: Objective) -> Result<()> {
    let models: Vec<String> = models.iter().map(|m| Ok(lookup(m)?.id.to_string())).collect::<Result<_>>()?;
    let rows = rows_of(cells, objective)?;
    write_rows(&out.join(PER_DATE), &rows)?;
    let mut table = Vec::new();
    for m in &models {
        let def = lookup(m)?;
        let ok: Vec<&DateRow> = by_model(&rows, m).into_iter().filter(|r| r.ok()).collect();
        table.push(vec![
            m.clone(),
            def.label().to_string(),
            def.param_count(objective).to_string(),
            pct(mean(ok.iter().map(|r| r.total))),
            pct(mean(ok.iter().map(|r| r.yield_e))),
            pct(mean(ok.iter().map(|r| r.cpl_e))),
            pct(mean(ok.iter().map(|r| r.swp_e))),
        ]);
    }
    let total = format!("{}_pct", objective.total_label().to_ascii_lowercase());
    write_table(
        &out.join(SUMMARY),
        &["model", "type", "N", &total, "yld_e_pct", "cpl_e_pct", "swp_e_pct"],
        &table,
    )?;
    write_msrf(out, &rows, &models)
}

#[derive(Debug, Serialize)]
struct LongRow<'a> {
    date: &'a str,
    model: &'a str,
    objective: &'a str,
    metric: &'a str,
    value: String,
}

/// Long-format `(date, model, objective, metric, value)` rows of a run,
/// sorted by date. Failed or missing calibrations appear as `status` rows.
pub fn write_report(run_dir: &Path) -> Result<PathBuf> {
    let path = run_dir.join(PER_DATE);
    if !path.exists() {
        return Err(Error::Ingestion(format!("{} holds no {PER_DATE}; nothing to report", run_dir.display())));
    }
    let mut rdr = csv::Reader::from_path(&path)?;
    let rows: Vec<DateRow> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Ingestion(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        return Err(Error::Ingestion(format!("{} is empty", path.display())));
    }
    let dates: BTreeSet<&str> = rows.iter().map(|r| r.date.as_str()).collect();
    let models: BTreeSet<(&str, &str)> = rows.iter().map(|r| (r.model.as_str(), r.objective.as_str())).collect();
    let mut out: BTreeMap<(&str, &str, &str, &str), String> = BTreeMap::new();
    for r in &rows {
        let key = |metric| (r.date.as_str(), r.model.as_str(), r.objective.as_str(), metric);
        if !r.ok() {
            log::warn!("{} {}: {}", r.date, r.model, r.status);
            out.insert(key("status"), r.status.clone());
            continue;
        }
        for (metric, v) in [
            ("total", r.total),
            ("neg_loglik", r.neg_loglik),
            ("yield_e", r.yield_e),
            ("cpl_e", r.cpl_e),
            ("swp_e", r.swp_e),
            ("aic", r.aic),
        ] {
            if let Some(v) = v {
                out.insert(key(metric), v.to_string());
            }
        }
    }
    let mut partial = false;
    for d in &dates {
        for (m, o) in &models {
            if !rows.iter().any(|r| r.date == *d && r.model == *m && r.objective == *o) {
                partial = true;
                out.insert((d, m, o, "status"), "missing".into());
            }
        }
    }
    if partial || rows.iter().any(|r| !r.ok()) {
        log::warn!("{} is a partial run", run_dir.display());
    }
    let report = run_dir.join(REPORT);
    let mut w = csv::Writer::from_path(&report)?;
    for ((date, model, objective, metric), value) in out {
        w.serialize(LongRow {
            date,
            model,
            objective,
            metric,
            value,
        })?;
    }
    w.flush()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_run_dir_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(write_report(tmp.path()), Err(Error::Ingestion(_))));
    }
}
