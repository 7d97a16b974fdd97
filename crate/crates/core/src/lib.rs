//! Wiener-chaos interest-rate models.
//!
//! Exponential-polynomial coefficient functions, closed-form bond and option
//! prices for chaos models of orders one to three, the Hull-White, rational
//! lognormal and LIBOR market benchmarks, and the calibration and
//! model-comparison machinery that runs over file-based market snapshots.

pub mod benchmarks;
pub mod calibration;
pub mod chaos;
pub mod error;
pub mod expoly;
pub mod market;
pub mod model;
pub mod normal;
pub mod pipeline;
pub mod poly;
pub mod pricing;

pub use chaos::{ChaosOrder, ChaosSpec, ZCoeffs};
pub use error::{Error, PriceBound, Result};
pub use expoly::{ExpPoly, Term};
pub use model::Model;
pub use poly::PayoffPoly;
