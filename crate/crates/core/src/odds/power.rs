use super::{Diagnostics, MarketOdds, Method, OddsError, ProbabilityVector};

/// Search interval for the exponent solving `sum_i q_i^beta = t`.
pub const POWER_BRACKET: (f64, f64) = (1e-3, 100.0);

const EXPONENT_TOLERANCE: f64 = 1e-12;

/// Exponent `beta` with `sum_i q_i^beta = t`, found by bisection.
///
/// `sum_i q_i^beta` is strictly decreasing in `beta` for inverse odds in
/// `(0, 1)`, so the root is unique when bracketed. Handles both overround
/// (`beta > 1`) and underround (`beta < 1`) markets.
pub fn power_exponent(market: &MarketOdds) -> Result<f64, OddsError> {
    let inverse = market.inverse();
    let t = market.successes() as f64;
    let excess = |beta: f64| inverse.values.iter().map(|q| q.powf(beta)).sum::<f64>() - t;

    let (mut lo, mut hi) = POWER_BRACKET;
    if excess(lo) < 0.0 || excess(hi) > 0.0 {
        return Err(OddsError::RootNotBracketed { lo, hi });
    }
    while hi - lo > EXPONENT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn convert_power(market: &MarketOdds) -> Result<ProbabilityVector, OddsError> {
    let exponent = power_exponent(market)?;
    let inverse = market.inverse();
    let raw: Vec<f64> = inverse.values.iter().map(|q| q.powf(exponent)).collect();
    // The bisection leaves a residual of order 1e-12 in the sum.
    let scale = market.successes() as f64 / raw.iter().sum::<f64>();
    let probs = raw.iter().map(|p| p * scale).collect();
    Ok(ProbabilityVector::new(probs, market.successes(), Method::Power)?
        .with_diagnostics(Diagnostics::Power { exponent }))
}
