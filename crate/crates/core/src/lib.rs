//! Convert bookmaker odds into outcome probabilities and evaluate them.
//!
//! - [`odds`]: five odds-only conversions of a single market.
//! - [`glm`]: models fitted on historical odds and results.
//! - [`stats`]: log-loss, bootstrap and Poisson tests, correlation.
//! - [`data`]: football-data style CSV ingestion.
//! - [`cli`]: the `oddsprob` command-line pipeline.

pub mod cli;
pub mod data;
pub mod glm;
pub mod odds;
pub mod stats;
