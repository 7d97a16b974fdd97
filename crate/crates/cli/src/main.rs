use std::path::PathBuf;
use std::process::ExitCode;

use chaos_rates::calibration::Objective;
use chaos_rates::pipeline::{
    cmd_calibrate_options, cmd_calibrate_term, cmd_report, cmd_synth, price_instrument, Instrument,
    PriceRequest, RunConfig, RunManifest, Strike,
};
use chaos_rates::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "chaosrate", version, about = "Chaos interest-rate models: calibration, pricing and reports")]
struct Cli {
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Key-value run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Snapshot directories (comma separated); overrides `data`.
    #[arg(long)]
    data: Option<String>,
    /// Model ids, comma separated.
    #[arg(long)]
    models: Option<String>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit discount curves to bond prices by maximum likelihood.
    CalibrateTerm {
        #[command(flatten)]
        run: RunArgs,
        /// Reference model of the DM column.
        #[arg(long)]
        baseline: Option<String>,
    },
    /// Fit yields plus caplets, swaptions or both.
    CalibrateOptions {
        #[command(flatten)]
        run: RunArgs,
        /// cpl, swp or joint.
        #[arg(long)]
        objective: Option<String>,
    },
    /// Price one instrument and print JSON.
    Price(PriceArgs),
    /// Aggregate a finished run into report.csv.
    Report {
        /// Run directory (defaults to --out).
        dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write synthetic snapshots generated by a model.
    Synth {
        #[command(flatten)]
        run: RunArgs,
        /// Generator parameters, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        params: Option<String>,
        /// Multiplicative Gaussian noise level.
        #[arg(long)]
        noise: Option<f64>,
        /// Number of weekly snapshots.
        #[arg(long)]
        dates: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Caplet,
    Swaption,
    BondPut,
}

#[derive(Args)]
struct PriceArgs {
    #[arg(long, visible_alias = "models")]
    model: String,
    #[arg(long, allow_hyphen_values = true)]
    params: String,
    #[arg(long, value_enum)]
    instrument: Kind,
    #[arg(long)]
    expiry: f64,
    /// Payment date (caplet) or bond maturity (put).
    #[arg(long)]
    maturity: Option<f64>,
    /// Swap length in years.
    #[arg(long)]
    tenor: Option<f64>,
    /// Fixed-leg payments per year.
    #[arg(long, default_value_t = 2)]
    frequency: u32,
    /// Number or `atm`.
    #[arg(long, default_value = "atm")]
    strike: String,
    #[arg(long, default_value_t = 1.0)]
    notional: f64,
}

fn load_config(run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &run.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &run.data {
        cfg.set("data", d)?;
    }
    if let Some(m) = &run.models {
        cfg.set("models", m)?;
    }
    if let Some(s) = run.starts {
        cfg.starts = Some(s);
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(o) = &run.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn parse_params(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad parameter `{x}`")))
        })
        .collect()
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Parse(format!("--{flag} is required for this instrument")))
}

fn price(a: &PriceArgs) -> Result<()> {
    let instrument = match a.instrument {
        Kind::Caplet => Instrument::Caplet {
            expiry: a.expiry,
            maturity: need(a.maturity, "maturity")?,
        },
        Kind::BondPut => Instrument::BondPut {
            expiry: a.expiry,
            maturity: need(a.maturity, "maturity")?,
        },
        Kind::Swaption => Instrument::Swaption {
            expiry: a.expiry,
            tenor: need(a.tenor, "tenor")?,
            frequency: a.frequency,
        },
    };
    let report = price_instrument(&PriceRequest {
        model: a.model.clone(),
        params: parse_params(&a.params)?,
        instrument,
        strike: a.strike.parse::<Strike>()?,
        notional: a.notional,
    })?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    println!("{json}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CalibrateTerm { run, baseline } => {
            let mut cfg = load_config(&run)?;
            if let Some(b) = baseline {
                cfg.baseline = b;
            }
            let m = RunManifest::new("calibrate-term", cfg, run.config.clone())?;
            cmd_calibrate_term(&m)?;
            println!("{}", m.out_dir.display());
        }
        Command::CalibrateOptions { run, objective } => {
            let mut cfg = load_config(&run)?;
            if let Some(o) = objective {
                cfg.set("objective", &o)?;
            }
            let objective: Objective = cfg
                .objective
                .ok_or_else(|| Error::Parse("no objective given (`objective` / --objective)".into()))?;
            let m = RunManifest::new("calibrate-options", cfg, run.config.clone())?;
            cmd_calibrate_options(&m, objective)?;
            println!("{}", m.out_dir.display());
        }
        Command::Price(a) => price(&a)?,
        Command::Report { dir, out } => {
            let dir = dir
                .or(out)
                .ok_or_else(|| Error::Parse("report needs a run directory".into()))?;
            println!("{}", cmd_report(&dir)?.display());
        }
        Command::Synth { run, params, noise, dates } => {
            let mut cfg = load_config(&run)?;
            if let Some(p) = params {
                cfg.set("params", &p)?;
            }
            if let Some(n) = noise {
                cfg.noise = n;
            }
            if let Some(d) = dates {
                cfg.dates = d;
            }
            let m = RunManifest::new("synth", cfg, run.config.clone())?;
            for d in cmd_synth(&m)? {
                println!("{}", d.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
