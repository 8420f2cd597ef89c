//! Decline curve analysis for gas wells.
//!
//! Fits Arps exponential, harmonic and hyperbolic declines to a production
//! history, projects each fit down to an abandonment rate, and reports the
//! remaining volume, remaining life and estimated ultimate recovery (EUR).
//!
//! The decline math is generic over [`Scalar`] (`f32` or `f64`) and lives in
//! [`arps`], [`fitting`] and [`forecasting`]. The crate root re-exports the
//! `f64` instantiations under the same names, which is what ingestion,
//! reporting and the `dca` binary use.
//!
//! ```
//! use dca_core::{DeclineParameters, RateInterval};
//!
//! let decline = DeclineParameters::exponential(11.339, 0.0134).unwrap();
//! let interval = RateInterval::new(2.6755, 0.03).unwrap();
//! let remaining = decline.cumulative_between(&interval);
//! assert!((remaining - 197.4).abs() < 0.1);
//! ```

// `!(x > 0)` is used on purpose: unlike `x <= 0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arps;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod forecasting;
pub mod ingest_report;
pub mod scalar;

pub use arps::{nominal_decline_from_semilog_slope, DeclineKind};
pub use error::{DcaError, Result};
pub use fitting::{fit_exponential, fit_harmonic, fit_hyperbolic, goodness, smooth, SmoothingSpec};
pub use forecasting::{compare_models, eur, forecast, life_accuracy};
pub use ingest_report::{parse_history, running_cumulative, PlotKind, WellInput};
pub use scalar::Scalar;

pub type DeclineParameters = arps::DeclineParameters<f64>;
pub type RateInterval = arps::RateInterval<f64>;
pub type ProductionRecord = fitting::ProductionRecord<f64>;
pub type ProductionHistory = fitting::ProductionHistory<f64>;
pub type FitResult = fitting::FitResult<f64>;
pub type FitOptions = fitting::FitOptions<f64>;
pub type Goodness = fitting::Goodness<f64>;
pub type ForecastSpec = forecasting::ForecastSpec<f64>;
pub type Forecast = forecasting::Forecast<f64>;
pub type AnalysisReport = forecasting::AnalysisReport<f64>;
