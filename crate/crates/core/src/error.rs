use thiserror::Error;

/// Which side of the no-arbitrage band an option price fell outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceBound {
    Lower,
    Upper,
}

impl std::fmt::Display for PriceBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PriceBound::Lower => f.write_str("lower (intrinsic)"),
            PriceBound::Upper => f.write_str("upper (forward annuity)"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid model specification: {0}")]
    Specification(String),
    #[error("degenerate model: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("price {price} violates the {bound} bound {limit}")]
    Inversion {
        price: f64,
        bound: PriceBound,
        limit: f64,
    },
    #[error("stripping failed at maturity {maturity}: {reason}")]
    Stripping { maturity: f64, reason: String },
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("optimization failed: {0}")]
    Optimization(String),
    #[error("unknown model id `{0}`")]
    UnknownModel(String),
    #[error("statistic undefined: {0}")]
    UndefinedStatistic(String),
    #[error("parameter rejected: {0}")]
    ParameterRejected(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl Error {
    /// Process exit status for command-line use: 2 usage, 3 ingestion,
    /// 4 optimization, 5 pricing and model errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::UnknownModel(_) => 2,
            Error::Ingestion(_) | Error::Io(_) | Error::Csv(_) | Error::Stripping { .. } => 3,
            Error::Optimization(_) => 4,
            _ => 5,
        }
    }
}
