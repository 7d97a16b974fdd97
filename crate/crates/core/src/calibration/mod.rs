//! Model calibration and comparison statistics.

pub mod optimize;
pub mod stats;
pub mod registry;
pub mod objective;

pub use objective::{
    calibrate_options, calibrate_term, derive_seed, evaluate, CalibrationOptions, CalibrationResult, ClassErrors,
    ClassFit, Objective, OptionData,
};
pub use optimize::{multistart_optimize, Bounds, LocalOptions, MultistartOptions, MultistartResult};
pub use registry::{lookup, registry, Family, ModelDef};
pub use stats::{
    aic, cairns_loglik, cairns_loglik_extended, dm_statistic, msrf, nu_squared, rmspe, total_e1, total_e2, total_e3, Aic,
    ErrorModelParams, DEFAULT_DM_LAG,
};
