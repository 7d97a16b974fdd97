//! CSV snapshot directories.
//!
//! A snapshot is a directory named after its ISO date holding any of
//! `bonds.csv`, `yields.csv`, `curve.csv`, `caplets.csv`, `caps.csv` and
//! `swaptions.csv`. Maturities are year fractions; rates and vols decimals.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::curve::{bootstrap_curve, BootstrapOptions, CurveInstrument, InstrumentKind};
use super::outliers::{flag_outliers, OutlierPolicy};
use super::strip::{strip_caplet_vols, CapVol};
use super::{price_to_yield, BondQuote, CapletQuote, MarketSnapshot, SwaptionQuote};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct BondRow {
    maturity_years: f64,
    clean_price: f64,
    duration_years: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct YieldRow {
    maturity_years: f64,
    zero_yield: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    kind: String,
    start: f64,
    end: f64,
    rate: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct CapletRow {
    maturity_years: f64,
    atm_vol: f64,
    #[serde(default)]
    accrual_years: Option<f64>,
    #[serde(default)]
    atm_strike: Option<f64>,
    #[serde(default)]
    excluded: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CapRow {
    maturity_years: f64,
    atm_vol: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SwaptionRow {
    expiry_years: f64,
    tenor_years: f64,
    atm_vol: f64,
    #[serde(default)]
    atm_strike: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestOptions {
    pub caplet_accrual: f64,
    pub swaption_frequency: u32,
    pub bootstrap: BootstrapOptions,
    /// `None` keeps every quote.
    pub outliers: Option<OutlierPolicy>,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            caplet_accrual: 0.25,
            swaption_frequency: 2,
            bootstrap: BootstrapOptions::default(),
            outliers: Some(OutlierPolicy::default()),
        }
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Option<Vec<T>>> {
    if !path.exists() {
        return Ok(None);
    }
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        out.push(row.map_err(|e| Error::Ingestion(format!("{}: record {}: {e}", path.display(), i + 1)))?);
    }
    Ok(Some(out))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn drop_flagged<T>(items: Vec<T>, key: impl Fn(&T) -> f64, policy: Option<&OutlierPolicy>, what: &str, date: &str) -> Vec<T> {
    let Some(policy) = policy else { return items };
    let values: Vec<f64> = items.iter().map(&key).collect();
    let flags = flag_outliers(&values, policy);
    items
        .into_iter()
        .zip(flags)
        .filter_map(|(item, bad)| {
            if bad {
                log::warn!("{date}: dropping outlying {what} quote {}", key(&item));
                None
            } else {
                Some(item)
            }
        })
        .collect()
}

fn ingestion(path: &Path, e: Error) -> Error {
    match e {
        Error::Ingestion(_) | Error::Stripping { .. } => e,
        other => Error::Ingestion(format!("{}: {other}", path.display())),
    }
}

/// Reads one snapshot directory.
pub fn read_snapshot(dir: &Path, opts: &IngestOptions) -> Result<MarketSnapshot> {
    if !dir.is_dir() {
        return Err(Error::Ingestion(format!("snapshot directory {} does not exist", dir.display())));
    }
    let date = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut snap = MarketSnapshot::empty(date.clone());
    snap.swaption_frequency = opts.swaption_frequency;
    let policy = opts.outliers.as_ref();

    if let Some(rows) = read_rows::<BondRow>(&dir.join("bonds.csv"))? {
        let bonds = rows
            .into_iter()
            .map(|r| BondQuote::new(r.maturity_years, r.clean_price, r.duration_years))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| ingestion(&dir.join("bonds.csv"), e))?;
        snap.bonds = drop_flagged(bonds, |b| -b.price.ln() / b.maturity, policy, "bond yield", &date);
    }

    let curve_path = dir.join("curve.csv");
    let bootstrapped = match read_rows::<CurveRow>(&curve_path)? {
        Some(rows) => {
            let mut by_kind: [Vec<CurveInstrument>; 3] = Default::default();
            for r in rows {
                let kind: InstrumentKind = r.kind.parse()?;
                let inst = CurveInstrument {
                    kind,
                    start: r.start,
                    end: r.end,
                    rate: r.rate,
                };
                by_kind[kind as usize].push(inst);
            }
            Some(bootstrap_curve(&by_kind[0], &by_kind[1], &by_kind[2], &opts.bootstrap)?)
        }
        None => None,
    };

    if let Some(rows) = read_rows::<YieldRow>(&dir.join("yields.csv"))? {
        let ys: Vec<(f64, f64)> = rows.into_iter().map(|r| (r.maturity_years, r.zero_yield)).collect();
        snap.yields = drop_flagged(ys, |y| y.1, policy, "zero yield", &date);
    } else if let Some(c) = &bootstrapped {
        snap.yields = c.pillars().map(|(t, p)| (t, -p.ln() / t)).collect();
    } else {
        snap.yields = snap
            .bonds
            .iter()
            .map(|b| Ok((b.maturity, price_to_yield(b)?)))
            .collect::<Result<_>>()?;
    }

    if let Some(rows) = read_rows::<CapletRow>(&dir.join("caplets.csv"))? {
        let caplets: Vec<CapletQuote> = rows
            .into_iter()
            .map(|r| CapletQuote {
                maturity: r.maturity_years,
                accrual: r.accrual_years.unwrap_or(opts.caplet_accrual),
                vol: r.atm_vol,
                strike: r.atm_strike,
                excluded: r.excluded.unwrap_or(false),
            })
            .collect();
        snap.caplets = drop_flagged(caplets, |c| c.vol, policy, "caplet vol", &date);
    } else if let Some(rows) = read_rows::<CapRow>(&dir.join("caps.csv"))? {
        let caps: Vec<CapVol> = rows
            .into_iter()
            .map(|r| CapVol {
                maturity: r.maturity_years,
                vol: r.atm_vol,
            })
            .collect();
        let caps = drop_flagged(caps, |c| c.vol, policy, "cap vol", &date);
        let stripped = match &bootstrapped {
            Some(c) => strip_caplet_vols(&caps, c, opts.caplet_accrual)?,
            None => strip_caplet_vols(&caps, &snap.curve()?, opts.caplet_accrual)?,
        };
        snap.caplets = stripped
            .into_iter()
            .map(|s| CapletQuote {
                maturity: s.maturity,
                accrual: s.maturity - s.fixing,
                vol: s.vol,
                strike: None,
                excluded: s.excluded_from_calibration,
            })
            .collect();
    }

    if let Some(rows) = read_rows::<SwaptionRow>(&dir.join("swaptions.csv"))? {
        let all: Vec<SwaptionQuote> = rows
            .into_iter()
            .map(|r| SwaptionQuote {
                expiry: r.expiry_years,
                tenor: r.tenor_years,
                vol: r.atm_vol,
                strike: r.atm_strike,
            })
            .collect();
        // screened along each expiry row
        let mut kept = Vec::with_capacity(all.len());
        let mut rest = all.as_slice();
        while let Some(first) = rest.first() {
            let len = rest.iter().take_while(|s| s.expiry == first.expiry).count();
            kept.extend(drop_flagged(rest[..len].to_vec(), |s| s.vol, policy, "swaption vol", &date));
            rest = &rest[len..];
        }
        snap.swaptions = kept;
    }

    snap.validate()?;
    Ok(snap)
}

/// Every snapshot directory below `root`, sorted by name. `root` itself is
/// read when it holds snapshot files directly.
pub fn read_snapshots(root: &Path, opts: &IngestOptions) -> Result<Vec<MarketSnapshot>> {
    if !root.is_dir() {
        return Err(Error::Ingestion(format!("data directory {} does not exist", root.display())));
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Ok(vec![read_snapshot(root, opts)?]);
    }
    dirs.iter().map(|d| read_snapshot(d, opts)).collect()
}

/// Writes `snap` under `root/<date>` and returns that directory.
pub fn write_snapshot(root: &Path, snap: &MarketSnapshot) -> Result<PathBuf> {
    let dir = root.join(&snap.date);
    fs::create_dir_all(&dir)?;
    write_rows(
        &dir.join("bonds.csv"),
        snap.bonds.iter().map(|b| BondRow {
            maturity_years: b.maturity,
            clean_price: b.price,
            duration_years: b.duration,
        }),
    )?;
    write_rows(
        &dir.join("yields.csv"),
        snap.yields.iter().map(|&(t, y)| YieldRow {
            maturity_years: t,
            zero_yield: y,
        }),
    )?;
    if !snap.caplets.is_empty() {
        write_rows(
            &dir.join("caplets.csv"),
            snap.caplets.iter().map(|c| CapletRow {
                maturity_years: c.maturity,
                atm_vol: c.vol,
                accrual_years: Some(c.accrual),
                atm_strike: c.strike,
                excluded: Some(c.excluded),
            }),
        )?;
    }
    if !snap.swaptions.is_empty() {
        write_rows(
            &dir.join("swaptions.csv"),
            snap.swaptions.iter().map(|s| SwaptionRow {
                expiry_years: s.expiry,
                tenor_years: s.tenor,
                atm_vol: s.vol,
                atm_strike: s.strike,
            }),
        )?;
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::SvenssonParams;
    use crate::market::synth::{synthesize_snapshot, SynthConfig};
    use crate::model::Model;

    #[test]
    fn snapshot_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let model = Model::HullWhite(
            crate::benchmarks::HullWhiteParams::new(0.1, 0.01, SvenssonParams::new(0.05, -0.01, 0.01, 0.0, 0.5, 1.0).unwrap())
                .unwrap(),
        );
        let snap = synthesize_snapshot(&model, &SynthConfig::default()).unwrap();
        let dir = write_snapshot(tmp.path(), &snap).unwrap();
        let opts = IngestOptions {
            outliers: None,
            ..Default::default()
        };
        let back = read_snapshot(&dir, &opts).unwrap();
        assert_eq!(back, snap);
        assert_eq!(read_snapshots(tmp.path(), &opts).unwrap(), vec![snap]);
    }

    #[test]
    fn malformed_row_names_the_file() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("2001-01-05");
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("bonds.csv"), "maturity_years,clean_price,duration_years\n1.0,abc,1.0\n").unwrap();
        match read_snapshot(&dir, &IngestOptions::default()) {
            Err(Error::Ingestion(msg)) => assert!(msg.contains("bonds.csv"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn caps_are_stripped_on_ingestion() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("2001-01-05");
        fs::create_dir_all(&dir).unwrap();
        fs::write(
            dir.join("curve.csv"),
            "kind,start,end,rate\ndeposit,0,0.25,0.04\ndeposit,0,0.5,0.041\nswap,0,1,0.042\nswap,0,2,0.043\nswap,0,3,0.044\n",
        )
        .unwrap();
        fs::write(dir.join("caps.csv"), "maturity_years,atm_vol\n1,0.2\n2,0.2\n3,0.2\n").unwrap();
        let snap = read_snapshot(&dir, &IngestOptions::default()).unwrap();
        assert_eq!(snap.yields.len(), 5);
        assert_eq!(snap.caplets.len(), 11);
        assert!(snap.caplets[0].excluded && snap.caplets[1].excluded && !snap.caplets[2].excluded);
    }
}
