//! `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::calibration::objective::Objective;
use crate::calibration::registry::{B_RANGE, C_RANGE};
use crate::calibration::stats::DEFAULT_DM_LAG;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<String>,
    /// Snapshot directories, or directories of them.
    pub data: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub models: Vec<String>,
    pub objective: Option<Objective>,
    pub starts: Option<usize>,
    pub seed: u64,
    pub baseline: String,
    pub b_bounds: (f64, f64),
    pub c_bounds: (f64, f64),
    pub max_evals: usize,
    pub caplet_accrual: f64,
    pub swaption_frequency: u32,
    pub swap_frequency: u32,
    /// IQR multiple for outlier screening; `None` disables it.
    pub outliers: Option<f64>,
    pub outlier_window: usize,
    pub dm_lag: usize,
    pub sigma0_scale: f64,
    pub sigma_d: f64,
    pub sigma_inf: f64,
    /// Generator for `synth`.
    pub generator: Option<String>,
    pub params: Vec<f64>,
    pub noise: f64,
    pub dates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            data: Vec::new(),
            out: None,
            models: Vec::new(),
            objective: None,
            starts: None,
            seed: 0,
            baseline: "Sv".into(),
            b_bounds: B_RANGE,
            c_bounds: C_RANGE,
            max_evals: 4000,
            caplet_accrual: 0.25,
            swaption_frequency: 2,
            swap_frequency: 1,
            outliers: Some(5.0),
            outlier_window: 7,
            dm_lag: DEFAULT_DM_LAG,
            sigma0_scale: 3200.0,
            sigma_d: 0.0005,
            sigma_inf: 0.001,
            generator: None,
            params: Vec::new(),
            noise: 0.0,
            dates: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{key}`: cannot parse `{v}`")))
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn pair(key: &str, v: &str) -> Result<(f64, f64)> {
    let xs: Vec<f64> = list(v).map(|s| parse(key, s)).collect::<Result<_>>()?;
    match xs[..] {
        [lo, hi] if lo < hi => Ok((lo, hi)),
        _ => Err(Error::Parse(format!("`{key}` needs `lower, upper` with lower < upper"))),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        // relative paths are taken from the config file's directory
        if let Some(base) = path.parent() {
            for d in cfg.data.iter_mut().filter(|d| d.is_relative()) {
                *d = base.join(&*d);
            }
            if let Some(o) = cfg.out.as_mut().filter(|o| o.is_relative()) {
                *o = base.join(&*o);
            }
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "command" => self.command = Some(v.to_string()),
            "data" => self.data = list(v).map(PathBuf::from).collect(),
            "out" => self.out = Some(PathBuf::from(v)),
            "models" => self.models = list(v).map(String::from).collect(),
            "objective" => self.objective = Some(v.parse()?),
            "starts" => self.starts = Some(parse(key, v)?),
            "seed" => self.seed = parse(key, v)?,
            "baseline" => self.baseline = v.to_string(),
            "b_bounds" => self.b_bounds = pair(key, v)?,
            "c_bounds" => self.c_bounds = pair(key, v)?,
            "max_evals" => self.max_evals = parse(key, v)?,
            "caplet_accrual" => self.caplet_accrual = parse(key, v)?,
            "swaption_frequency" => self.swaption_frequency = parse(key, v)?,
            "swap_frequency" => self.swap_frequency = parse(key, v)?,
            "outliers" => {
                self.outliers = match v {
                    "off" | "none" | "0" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            "outlier_window" => self.outlier_window = parse(key, v)?,
            "dm_lag" => self.dm_lag = parse(key, v)?,
            "sigma0_scale" => self.sigma0_scale = parse(key, v)?,
            "sigma_d" => self.sigma_d = parse(key, v)?,
            "sigma_inf" => self.sigma_inf = parse(key, v)?,
            "generator" => self.generator = Some(v.to_string()),
            "params" => self.params = list(v).map(|s| parse(key, s)).collect::<Result<_>>()?,
            "noise" => self.noise = parse(key, v)?,
            "dates" => self.dates = parse(key, v)?,
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn render(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        if let Some(c) = &self.command {
            kv.insert("command", c.clone());
        }
        if !self.data.is_empty() {
            let d: Vec<String> = self.data.iter().map(|p| p.display().to_string()).collect();
            kv.insert("data", d.join(", "));
        }
        if let Some(o) = &self.out {
            kv.insert("out", o.display().to_string());
        }
        if !self.models.is_empty() {
            kv.insert("models", self.models.join(", "));
        }
        if let Some(o) = self.objective {
            kv.insert("objective", o.label().into());
        }
        if let Some(s) = self.starts {
            kv.insert("starts", s.to_string());
        }
        kv.insert("seed", self.seed.to_string());
        kv.insert("baseline", self.baseline.clone());
        kv.insert("b_bounds", join(&[self.b_bounds.0, self.b_bounds.1]));
        kv.insert("c_bounds", join(&[self.c_bounds.0, self.c_bounds.1]));
        kv.insert("max_evals", self.max_evals.to_string());
        kv.insert("caplet_accrual", self.caplet_accrual.to_string());
        kv.insert("swaption_frequency", self.swaption_frequency.to_string());
        kv.insert("swap_frequency", self.swap_frequency.to_string());
        kv.insert("outliers", self.outliers.map_or("off".into(), |x| x.to_string()));
        kv.insert("outlier_window", self.outlier_window.to_string());
        kv.insert("dm_lag", self.dm_lag.to_string());
        kv.insert("sigma0_scale", self.sigma0_scale.to_string());
        kv.insert("sigma_d", self.sigma_d.to_string());
        kv.insert("sigma_inf", self.sigma_inf.to_string());
        if let Some(g) = &self.generator {
            kv.insert("generator", g.clone());
        }
        if !self.params.is_empty() {
            kv.insert("params", join(&self.params));
        }
        kv.insert("noise", self.noise.to_string());
        kv.insert("dates", self.dates.to_string());
        let mut out = String::new();
        for (k, v) in kv {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
