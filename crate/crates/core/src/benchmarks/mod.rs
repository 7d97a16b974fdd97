//! Comparison models: Hull-White, rational lognormal and the lognormal
//! forward LIBOR model, each with a Svensson initial curve.

pub mod hull_white;
pub mod lfm;
pub mod ratlog;
pub mod svensson;

pub use hull_white::HullWhiteParams;
pub use lfm::{sc_correlation, sc_correlation_at, LfmParams};
pub use ratlog::RatLogParams;
pub use svensson::SvenssonParams;
