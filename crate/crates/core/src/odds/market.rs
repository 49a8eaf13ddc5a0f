use super::OddsError;

/// Smallest decimal price accepted. Odds of exactly 1.0 would imply a
/// certain outcome and a zero standard error.
pub const MIN_DECIMAL_ODDS: f64 = 1.0 + 1e-9;

/// Decimal odds for `k` mutually exclusive outcomes, `t` of which succeed.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketOdds {
    odds: Vec<f64>,
    successes: usize,
}

impl MarketOdds {
    pub fn new(odds: Vec<f64>, successes: usize) -> Result<Self, OddsError> {
        if odds.len() < 2 {
            return Err(OddsError::TooFewOutcomes(odds.len()));
        }
        if let Some((index, &value)) = odds
            .iter()
            .enumerate()
            .find(|(_, x)| !(x.is_finite() && **x >= MIN_DECIMAL_ODDS))
        {
            return Err(OddsError::InvalidOdds { index, value });
        }
        if successes == 0 || successes >= odds.len() {
            return Err(OddsError::InvalidSuccesses {
                successes,
                outcomes: odds.len(),
            });
        }
        Ok(Self { odds, successes })
    }

    /// A single-winner market.
    pub fn single(odds: Vec<f64>) -> Result<Self, OddsError> {
        Self::new(odds, 1)
    }

    pub fn odds(&self) -> &[f64] {
        &self.odds
    }

    pub fn successes(&self) -> usize {
        self.successes
    }

    pub fn outcomes(&self) -> usize {
        self.odds.len()
    }

    pub fn inverse(&self) -> InverseOdds {
        let values: Vec<f64> = self.odds.iter().map(|x| 1.0 / x).collect();
        let raw_booksum = values.iter().sum::<f64>();
        InverseOdds {
            per_target_booksum: raw_booksum / self.successes as f64,
            raw_booksum,
            values,
        }
    }
}

/// Raw implied probabilities `1 / odds` and their totals.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseOdds {
    pub values: Vec<f64>,
    /// Plain sum of the inverse odds.
    pub raw_booksum: f64,
    /// `raw_booksum / t`.
    pub per_target_booksum: f64,
}
