//! Time-series econometrics toolkit.
//!
//! The pipeline runs daily CSV ingestion and calendar alignment
//! ([`series`]), GARCH volatility extraction ([`volatility`]), unit-root and
//! whiteness diagnostics ([`diagnostics`]), VAR estimation ([`var`]) and
//! recursively identified impulse responses with Monte Carlo bands
//! ([`irf`]). [`study`] strings them together into a reproducible report.

pub mod diagnostics;
pub mod error;
pub mod irf;
pub mod linalg;
pub mod optimize;
pub mod rng;
pub mod series;
pub mod stats;
pub mod study;
pub mod var;
pub mod volatility;

pub use error::{Error, Result};
