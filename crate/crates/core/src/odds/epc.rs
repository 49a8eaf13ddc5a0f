use super::{multiplicative_fallback, Diagnostics, MarketOdds, Method, OddsError, ProbabilityVector};

/// Equal-profitability-confidence conversion.
///
/// Each inverse odd `q_i` is reduced by the same number `z` of standard
/// errors `sigma_i = sqrt(q_i (1 - q_i) / q_i) = sqrt(1 - q_i)`, with `z`
/// chosen so the result sums to `t`. When some `q_i - z sigma_i` would not be
/// positive the market falls back to multiplicative conversion.
pub fn convert_oo_epc(market: &MarketOdds) -> Result<ProbabilityVector, OddsError> {
    let inverse = market.inverse();
    let q = &inverse.values;
    // Sample size proportional to q_i cancels the q_i in the numerator.
    let sigma: Vec<f64> = q.iter().map(|&qi| (qi * (1.0 - qi) / qi).sqrt()).collect();
    let z = (inverse.raw_booksum - market.successes() as f64) / sigma.iter().sum::<f64>();
    let diagnostics = Diagnostics::OoEpc { z };

    if q.iter().zip(&sigma).all(|(qi, si)| z < qi / si) {
        let probs = q.iter().zip(&sigma).map(|(qi, si)| qi - z * si).collect();
        // Underround multi-winner markets can push an entry to 1 or above.
        if let Ok(pv) = ProbabilityVector::new(probs, market.successes(), Method::OoEpc) {
            return Ok(pv.with_diagnostics(diagnostics));
        }
    }
    multiplicative_fallback(market, Method::OoEpc, diagnostics)
}
