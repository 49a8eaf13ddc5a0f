//! Shin-model conversions.
//!
//! Both variants share the per-outcome closed form
//! `p_i = (sqrt(z^2 + 4 (1 - z) q_i^2 / s) - z) / (2 (1 - z))`
//! where `q` are the inverse odds, `s` their plain sum, and `z` the insider
//! proportion. The numerical variant solves for a single `z` making the
//! probabilities sum to one; the analytical variant uses a per-outcome `z_i`.

use super::{multiplicative_fallback, Diagnostics, MarketOdds, Method, OddsError, ProbabilityVector};

pub const DEFAULT_SHIN_DELTA: f64 = 1e-12;
pub const SHIN_MAX_ITERATIONS: usize = 10_000;

/// `|c_i^2 - 1|` at or below this marks the analytical variant degenerate.
const COMPLEMENT_DEGENERACY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShinSolver {
    /// The fixed-point recurrence `z <- (sum_i sqrt(...) - 2) / (k - 2)`.
    Recurrence,
    /// Bracketed bisection on `sum_i p_i(z) - 1`.
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShinOptions {
    pub delta: f64,
    pub max_iterations: usize,
    /// Solve by bisection when the recurrence fails to settle within
    /// `max_iterations`. Two-outcome markets always use bisection.
    pub bracket_fallback: bool,
}

impl Default for ShinOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_SHIN_DELTA,
            max_iterations: SHIN_MAX_ITERATIONS,
            bracket_fallback: true,
        }
    }
}

/// Closed-form Shin probabilities for a shared insider proportion `z < 1`.
pub fn shin_probabilities(inverse: &[f64], booksum: f64, z: f64) -> Vec<f64> {
    inverse.iter().map(|&q| shin_probability(q, booksum, z)).collect()
}

fn shin_probability(q: f64, booksum: f64, z: f64) -> f64 {
    ((z * z + 4.0 * (1.0 - z) * q * q / booksum).sqrt() - z) / (2.0 * (1.0 - z))
}

/// One step of the fixed-point recurrence. Undefined for two outcomes.
pub fn shin_fixed_point_map(inverse: &[f64], booksum: f64, z: f64) -> f64 {
    let k = inverse.len() as f64;
    let root_sum: f64 = inverse
        .iter()
        .map(|&q| (z * z + 4.0 * (1.0 - z) * q * q / booksum).sqrt())
        .sum();
    (root_sum - 2.0) / (k - 2.0)
}

pub fn convert_shin_numerical(market: &MarketOdds, delta: f64) -> Result<ProbabilityVector, OddsError> {
    convert_shin_numerical_with(
        market,
        ShinOptions {
            delta,
            ..ShinOptions::default()
        },
    )
}

pub fn convert_shin_numerical_with(
    market: &MarketOdds,
    options: ShinOptions,
) -> Result<ProbabilityVector, OddsError> {
    if market.successes() != 1 {
        return Err(OddsError::UnsupportedMarket {
            method: Method::ShinNumerical,
            successes: market.successes(),
        });
    }
    let inverse = market.inverse();
    let (q, s) = (&inverse.values, inverse.raw_booksum);

    let (z, iterations, solver) = if q.len() == 2 {
        let (z, iterations) = bisect_insider_share(q, s);
        (z, iterations, ShinSolver::Bisection)
    } else {
        match iterate_recurrence(q, s, options.delta, options.max_iterations) {
            Ok((z, iterations)) => (z, iterations, ShinSolver::Recurrence),
            Err(_) if options.bracket_fallback => {
                let (z, iterations) = bisect_insider_share(q, s);
                (z, options.max_iterations + iterations, ShinSolver::Bisection)
            }
            Err(last_z) => {
                return Err(OddsError::NoConvergence {
                    iterations: options.max_iterations,
                    last_z,
                })
            }
        }
    };

    let raw = shin_probabilities(q, s, z);
    let total: f64 = raw.iter().sum();
    let probs = raw.iter().map(|p| p / total).collect();
    Ok(ProbabilityVector::new(probs, 1, Method::ShinNumerical)?.with_diagnostics(
        Diagnostics::ShinNumerical {
            z,
            iterations,
            solver,
            residual: total - 1.0,
        },
    ))
}

/// Runs the recurrence from `z = 0`. On failure returns the last iterate.
fn iterate_recurrence(q: &[f64], s: f64, delta: f64, max_iterations: usize) -> Result<(f64, usize), f64> {
    let mut z = 0.0;
    for iteration in 1..=max_iterations {
        let next = shin_fixed_point_map(q, s, z);
        if !next.is_finite() || next >= 1.0 {
            return Err(z);
        }
        if (next - z).abs() <= delta {
            return Ok((next, iteration));
        }
        z = next;
    }
    Err(z)
}

/// Root of `sum_i p_i(z) - 1` on `z < 1`.
///
/// The sum is `sqrt(s)` at `z = 0`, tends to `sum q_i^2 / s < 1` as `z -> 1`
/// and to `k` as `z -> -inf`, so the root is positive for overround markets
/// and negative for underround ones.
fn bisect_insider_share(q: &[f64], s: f64) -> (f64, usize) {
    let excess = |z: f64| shin_probabilities(q, s, z).iter().sum::<f64>() - 1.0;
    let at_zero = excess(0.0);
    if at_zero == 0.0 {
        return (0.0, 0);
    }
    let (mut lo, mut hi) = if at_zero > 0.0 {
        let mut gap = 0.5;
        while excess(1.0 - gap) > 0.0 && gap > 1e-15 {
            gap *= 0.5;
        }
        (0.0, 1.0 - gap)
    } else {
        let mut lo = -1.0;
        while excess(lo) < 0.0 && lo > -1e12 {
            lo *= 2.0;
        }
        (lo, 0.0)
    };
    let mut iterations = 0;
    while iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    (0.5 * (lo + hi), iterations)
}

/// Per-outcome insider shares `z_i = (s - 1)(c_i^2 - s) / (s (c_i^2 - 1))`
/// with complement `c_i = q_i - (s - q_i)`. Degenerate markets (`c_i^2 = 1`,
/// `z_i >= 1`, negative discriminant or a non-positive output) fall back to
/// multiplicative conversion.
pub fn convert_shin_analytical(market: &MarketOdds) -> Result<ProbabilityVector, OddsError> {
    let inverse = market.inverse();
    let (q, s) = (&inverse.values, inverse.raw_booksum);
    let t = market.successes() as f64;

    let mut shares = Vec::with_capacity(q.len());
    let mut raw = Vec::with_capacity(q.len());
    let mut degenerate = false;
    for &qi in q {
        let c = qi - (s - qi);
        let c2 = c * c;
        if (c2 - 1.0).abs() <= COMPLEMENT_DEGENERACY {
            degenerate = true;
            break;
        }
        let z = (s - 1.0) * (c2 - s) / (s * (c2 - 1.0));
        let discriminant = z * z + 4.0 * (1.0 - z) * qi * qi / s;
        if !z.is_finite() || z >= 1.0 || discriminant < 0.0 {
            degenerate = true;
            break;
        }
        let p = (discriminant.sqrt() - z) / (2.0 * (1.0 - z));
        if !(p.is_finite() && p > 0.0) {
            degenerate = true;
            break;
        }
        shares.push(z);
        raw.push(p);
    }

    if !degenerate {
        let normaliser = raw.iter().sum::<f64>() / t;
        let probs = raw.iter().map(|p| p / normaliser).collect();
        if let Ok(pv) = ProbabilityVector::new(probs, market.successes(), Method::ShinAnalytical) {
            return Ok(pv.with_diagnostics(Diagnostics::ShinAnalytical { z: shares }));
        }
    }
    multiplicative_fallback(market, Method::ShinAnalytical, Diagnostics::ShinAnalytical { z: shares })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odds::convert_multiplicative;

    fn market(odds: &[f64]) -> MarketOdds {
        MarketOdds::single(odds.to_vec()).unwrap()
    }

    fn shin_z(pv: &ProbabilityVector) -> f64 {
        match pv.diagnostics() {
            Diagnostics::ShinNumerical { z, .. } => *z,
            other => panic!("unexpected diagnostics {other:?}"),
        }
    }

    #[test]
    fn numerical_fair_two_way_has_zero_insiders() {
        let pv = convert_shin_numerical(&market(&[2.0, 2.0]), DEFAULT_SHIN_DELTA).unwrap();
        assert_eq!(pv.probs(), &[0.5, 0.5]);
        assert_eq!(shin_z(&pv), 0.0);
    }

    #[test]
    fn numerical_rejects_multiple_winners() {
        let m = MarketOdds::new(vec![2.0, 2.0, 2.0, 2.0], 2).unwrap();
        assert!(matches!(
            convert_shin_numerical(&m, DEFAULT_SHIN_DELTA),
            Err(OddsError::UnsupportedMarket { successes: 2, .. })
        ));
    }

    #[test]
    fn numerical_favours_favourite() {
        let m = market(&[1.5, 4.0, 7.0]);
        let pv = convert_shin_numerical(&m, DEFAULT_SHIN_DELTA).unwrap();
        let mult = convert_multiplicative(&m).unwrap();
        assert!(shin_z(&pv) > 0.0);
        assert!(pv.probs()[0] > mult.probs()[0]);
        assert!(matches!(
            pv.diagnostics(),
            Diagnostics::ShinNumerical { solver: ShinSolver::Recurrence, .. }
        ));
    }

    #[test]
    fn recurrence_converged_z_is_a_fixed_point() {
        let m = market(&[1.9, 3.6, 4.2, 9.0]);
        let pv = convert_shin_numerical(&m, DEFAULT_SHIN_DELTA).unwrap();
        let inv = m.inverse();
        let z = shin_z(&pv);
        assert!((shin_fixed_point_map(&inv.values, inv.raw_booksum, z) - z).abs() <= DEFAULT_SHIN_DELTA);
    }

    #[test]
    fn underround_three_way_needs_bracketing() {
        // Booksum below one: the recurrence oscillates with slope close to -1.
        let m = market(&[2.2, 3.5, 4.4]);
        let strict = ShinOptions {
            bracket_fallback: false,
            ..ShinOptions::default()
        };
        assert!(matches!(
            convert_shin_numerical_with(&m, strict),
            Err(OddsError::NoConvergence { .. })
        ));
        let pv = convert_shin_numerical(&m, DEFAULT_SHIN_DELTA).unwrap();
        assert!(shin_z(&pv) < 0.0);
        assert!((pv.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytical_fair_market_is_identity() {
        let pv = convert_shin_analytical(&market(&[3.0, 3.0, 3.0])).unwrap();
        for p in pv.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        match pv.diagnostics() {
            Diagnostics::ShinAnalytical { z } => assert!(z.iter().all(|z| z.abs() < 1e-15)),
            other => panic!("unexpected diagnostics {other:?}"),
        }
        assert!(!pv.fallback_used());
    }

    #[test]
    fn analytical_two_way_shifts_towards_favourite() {
        let m = market(&[1.8, 2.1]);
        let pv = convert_shin_analytical(&m).unwrap();
        let mult = convert_multiplicative(&m).unwrap();
        assert!((pv.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pv.probs()[0] > mult.probs()[0]);
    }

    #[test]
    fn analytical_degenerate_complement_falls_back() {
        // Longshot with q close to (s - 1) / 2: c^2 -> 1 from below, z >> 1.
        let m = market(&[1.5385, 2.5063, 19.6]);
        let pv = convert_shin_analytical(&m).unwrap();
        assert!(pv.fallback_used());
        assert_eq!(pv.probs(), convert_multiplicative(&m).unwrap().probs());
    }
}
