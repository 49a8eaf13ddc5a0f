//! Odds-only conversion of a single market's decimal odds into implied
//! probabilities.
//!
//! Every converter is a pure function of a validated [`MarketOdds`]. The
//! output is always a [`ProbabilityVector`] whose entries lie in `(0, 1)` and
//! sum to the market's number of successful outcomes.

mod epc;
mod market;
mod power;
mod shin;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use epc::convert_oo_epc;
pub use market::{InverseOdds, MarketOdds, MIN_DECIMAL_ODDS};
pub use power::{convert_power, power_exponent, POWER_BRACKET};
pub use shin::{
    convert_shin_analytical, convert_shin_numerical, convert_shin_numerical_with, shin_fixed_point_map,
    shin_probabilities, ShinOptions, ShinSolver, DEFAULT_SHIN_DELTA, SHIN_MAX_ITERATIONS,
};

/// Absolute tolerance on `sum(probs) == t` accepted by [`ProbabilityVector::new`].
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OddsError {
    #[error("market needs at least two outcomes, got {0}")]
    TooFewOutcomes(usize),
    #[error("odds[{index}] = {value} is not a finite decimal price above {min}", min = MIN_DECIMAL_ODDS)]
    InvalidOdds { index: usize, value: f64 },
    #[error("number of successful outcomes must satisfy 1 <= t < k (t = {successes}, k = {outcomes})")]
    InvalidSuccesses { successes: usize, outcomes: usize },
    #[error("{method} requires exactly one successful outcome, got t = {successes}")]
    UnsupportedMarket { method: Method, successes: usize },
    #[error("Shin fixed point did not converge after {iterations} iterations (last z = {last_z})")]
    NoConvergence { iterations: usize, last_z: f64 },
    #[error("power exponent root not bracketed in [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },
    #[error("converted probabilities violate the simplex contract: {0}")]
    InvalidProbabilities(String),
}

/// Identifier of the method that produced a probability vector.
///
/// The first five variants are the odds-only conversions; the rest are the
/// fitted model families in [`crate::glm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Multiplicative,
    ShinNumerical,
    ShinAnalytical,
    Power,
    OoEpc,
    FlGlm,
    FlGlmTwoBeta,
    MultinomialLogistic,
    OrderedLogistic,
}

impl Method {
    pub const ODDS_ONLY: [Method; 5] = [
        Method::Multiplicative,
        Method::ShinNumerical,
        Method::ShinAnalytical,
        Method::Power,
        Method::OoEpc,
    ];

    pub const FITTED: [Method; 4] = [
        Method::MultinomialLogistic,
        Method::OrderedLogistic,
        Method::FlGlm,
        Method::FlGlmTwoBeta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Multiplicative => "multiplicative",
            Method::ShinNumerical => "shin_numerical",
            Method::ShinAnalytical => "shin_analytical",
            Method::Power => "power",
            Method::OoEpc => "oo_epc",
            Method::FlGlm => "fl_glm",
            Method::FlGlmTwoBeta => "fl_glm_two_beta",
            Method::MultinomialLogistic => "multinomial_logistic",
            Method::OrderedLogistic => "ordered_logistic",
        }
    }

    pub fn is_odds_only(self) -> bool {
        Self::ODDS_ONLY.contains(&self)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ODDS_ONLY
            .iter()
            .chain(Self::FITTED.iter())
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method '{s}'"))
    }
}

/// Solver state reported alongside a conversion.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Diagnostics {
    #[default]
    None,
    ShinNumerical {
        z: f64,
        iterations: usize,
        solver: ShinSolver,
        /// `sum(probs) - 1` before the final renormalisation.
        residual: f64,
    },
    ShinAnalytical {
        z: Vec<f64>,
    },
    Power {
        exponent: f64,
    },
    OoEpc {
        z: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
    method: Method,
    fallback_used: bool,
    diagnostics: Diagnostics,
}

impl ProbabilityVector {
    /// Validates the simplex contract: entries in `(0, 1)` summing to
    /// `successes` within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>, successes: usize, method: Method) -> Result<Self, OddsError> {
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p > 0.0 && **p < 1.0))
        {
            return Err(OddsError::InvalidProbabilities(format!(
                "{method}: probs[{i}] = {p} outside (0, 1)"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - successes as f64).abs() > SUM_TOLERANCE {
            return Err(OddsError::InvalidProbabilities(format!(
                "{method}: probabilities sum to {total}, expected {successes}"
            )));
        }
        Ok(Self {
            probs,
            method,
            fallback_used: false,
            diagnostics: Diagnostics::None,
        })
    }

    pub(crate) fn with_diagnostics(mut self, diagnostics: Diagnostics) -> Self {
        self.diagnostics = diagnostics;
        self
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// True when the requested method could not be applied and the output
    /// came from multiplicative conversion instead.
    pub fn fallback_used(&self) -> bool {
        self.fallback_used
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Normalises the inverse odds so they sum to `t`.
pub fn convert_multiplicative(market: &MarketOdds) -> Result<ProbabilityVector, OddsError> {
    let inverse = market.inverse();
    let probs = inverse
        .values
        .iter()
        .map(|q| q / inverse.per_target_booksum)
        .collect();
    ProbabilityVector::new(probs, market.successes(), Method::Multiplicative)
}

/// Dispatches to one of the five odds-only converters with default settings.
pub fn convert(market: &MarketOdds, method: Method) -> Result<ProbabilityVector, OddsError> {
    match method {
        Method::Multiplicative => convert_multiplicative(market),
        Method::ShinNumerical => convert_shin_numerical(market, DEFAULT_SHIN_DELTA),
        Method::ShinAnalytical => convert_shin_analytical(market),
        Method::Power => convert_power(market),
        Method::OoEpc => convert_oo_epc(market),
        other => Err(OddsError::InvalidProbabilities(format!(
            "{other} is a fitted model, not an odds-only conversion"
        ))),
    }
}

/// Payout ratio between two books implied by their log-loss difference `v`.
pub fn payout_ratio_from_logloss_diff(v: f64) -> f64 {
    (-v).exp()
}

/// Shared fallback for converters whose own formula breaks down.
pub(crate) fn multiplicative_fallback(
    market: &MarketOdds,
    method: Method,
    diagnostics: Diagnostics,
) -> Result<ProbabilityVector, OddsError> {
    let base = convert_multiplicative(market)?;
    Ok(ProbabilityVector {
        method,
        fallback_used: true,
        diagnostics,
        ..base
    })
}
