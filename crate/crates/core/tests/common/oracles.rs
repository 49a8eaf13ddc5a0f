//! Random markets and straightforward re-derivations of each conversion,
//! written without reference to the library's solvers.

use oddsprob::odds::MarketOdds;
use rand::Rng;

/// A market built from true probabilities (each at most 0.95) scaled by a
/// margin in [-0.05, 0.12] with a little per-outcome noise. Both over- and
/// underround books occur. Odds stay inside (1.01, 100).
pub fn random_market<R: Rng>(rng: &mut R, successes: usize) -> MarketOdds {
    loop {
        let k = rng.random_range((successes + 1).max(2)..=5);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| successes as f64 * w / total).collect();
        if probs.iter().any(|p| *p > 0.95) {
            continue;
        }
        let margin = rng.random_range(-0.05..0.12);
        let odds: Vec<f64> = probs
            .iter()
            .map(|p| 1.0 / (p * (1.0 + margin) * (1.0 + rng.random_range(-0.01..0.01))))
            .collect();
        if odds.iter().all(|o| *o > 1.01 && *o < 100.0) {
            return MarketOdds::new(odds, successes).unwrap();
        }
    }
}

/// Odds `1 / (p_i * booksum / t)` for probabilities summing to `t`.
pub fn market_with_booksum<R: Rng>(rng: &mut R, successes: usize, per_target_booksum: f64) -> (MarketOdds, Vec<f64>) {
    loop {
        let k = rng.random_range((successes + 1).max(2)..=5);
        let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| successes as f64 * w / total).collect();
        if probs.iter().any(|p| *p > 0.95) {
            continue;
        }
        let odds: Vec<f64> = probs.iter().map(|p| 1.0 / (p * per_target_booksum)).collect();
        if odds.iter().all(|o| *o > 1.01 && *o < 100.0) {
            let market = MarketOdds::new(odds, successes).unwrap();
            let inverse = market.inverse().values;
            return (market, inverse);
        }
    }
}

fn inverse_and_sum(market: &MarketOdds) -> (Vec<f64>, f64) {
    let q: Vec<f64> = market.odds().iter().map(|o| 1.0 / o).collect();
    let s = q.iter().sum();
    (q, s)
}

pub fn multiplicative(market: &MarketOdds) -> Vec<f64> {
    let (q, s) = inverse_and_sum(market);
    let t = market.successes() as f64;
    q.iter().map(|x| x * t / s).collect()
}

fn shin_sum(q: &[f64], s: f64, z: f64) -> f64 {
    q.iter()
        .map(|x| ((z * z + 4.0 * (1.0 - z) * x * x / s).sqrt() - z) / (2.0 * (1.0 - z)))
        .sum()
}

/// Bisection for the insider share `z` with `sum_i p_i(z) = 1`. The sum falls
/// as `z` grows, is `sqrt(s)` at zero and tends to `sum q^2 / s < 1` as `z`
/// approaches one.
pub fn shin_numerical(market: &MarketOdds) -> Vec<f64> {
    let (q, s) = inverse_and_sum(market);
    let (mut lo, mut hi) = if s >= 1.0 { (0.0, 1.0 - 1e-12) } else { (-1.0, 0.0) };
    while shin_sum(&q, s, lo) < 1.0 {
        lo *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if shin_sum(&q, s, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let raw: Vec<f64> = q
        .iter()
        .map(|x| ((z * z + 4.0 * (1.0 - z) * x * x / s).sqrt() - z) / (2.0 * (1.0 - z)))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|p| p / total).collect()
}

/// Per-outcome insider shares, evaluated one line at a time. Returns `None`
/// where the closed form breaks down (the library then uses multiplicative).
pub fn shin_analytical(market: &MarketOdds) -> Option<Vec<f64>> {
    let (q, s) = inverse_and_sum(market);
    let t = market.successes() as f64;
    let mut raw = Vec::new();
    for &qi in &q {
        let others = s - qi;
        let c = qi - others;
        let c_squared = c * c;
        if (c_squared - 1.0).abs() <= 1e-12 {
            return None;
        }
        let numerator = (s - 1.0) * (c_squared - s);
        let denominator = s * (c_squared - 1.0);
        let z = numerator / denominator;
        if z >= 1.0 {
            return None;
        }
        let inside = z * z + 4.0 * (1.0 - z) * qi * qi / s;
        if inside < 0.0 {
            return None;
        }
        let p = (inside.sqrt() - z) / (2.0 * (1.0 - z));
        if p <= 0.0 {
            return None;
        }
        raw.push(p);
    }
    let total: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|p| t * p / total).collect();
    probs.iter().all(|p| *p > 0.0 && *p < 1.0).then_some(probs)
}

/// Exponent with `sum q^beta = t` by bisection over a wide bracket.
pub fn power_exponent(market: &MarketOdds) -> f64 {
    let (q, _) = inverse_and_sum(market);
    let t = market.successes() as f64;
    let (mut lo, mut hi) = (1e-6, 1e3);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if q.iter().map(|x| x.powf(mid)).sum::<f64>() > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn power(market: &MarketOdds) -> Vec<f64> {
    let (q, _) = inverse_and_sum(market);
    let beta = power_exponent(market);
    let raw: Vec<f64> = q.iter().map(|x| x.powf(beta)).collect();
    let total: f64 = raw.iter().sum();
    let t = market.successes() as f64;
    raw.iter().map(|p| t * p / total).collect()
}

/// `p_i = q_i - z sqrt(1 - q_i)` with `z = (s - t) / sum sqrt(1 - q_i)`;
/// `None` when some output leaves (0, 1).
pub fn oo_epc(market: &MarketOdds) -> Option<Vec<f64>> {
    let (q, s) = inverse_and_sum(market);
    let t = market.successes() as f64;
    let mut sigma_total = 0.0;
    for x in &q {
        sigma_total += (1.0 - x).sqrt();
    }
    let z = (s - t) / sigma_total;
    let mut probs = Vec::new();
    for x in &q {
        let p = x - z * (1.0 - x).sqrt();
        if !(p > 0.0 && p < 1.0) {
            return None;
        }
        probs.push(p);
    }
    Some(probs)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
