//! Paired bootstrap on per-match loss differences.
//!
//! Resample `r` draws its indices from a ChaCha8 stream `r` keyed by the
//! seed, so the result does not depend on how resamples are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{LossSeries, StatsError, TestResult};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

/// Two-tailed test of `mean(a - b) = 0`.
///
/// The p-value is `2 * min(P*[mean <= 0], P*[mean >= 0])` over bootstrap
/// resamples of the paired differences, clamped to 1.
pub fn bootstrap_paired_test(
    a: &LossSeries,
    b: &LossSeries,
    resamples: usize,
    seed: u64,
) -> Result<TestResult, StatsError> {
    Ok(bootstrap_paired_tests(a, &[b], resamples, seed)?.remove(0))
}

/// Tests `reference` against each of `others`, reusing every resample's
/// indices across all comparisons.
pub fn bootstrap_paired_tests(
    reference: &LossSeries,
    others: &[&LossSeries],
    resamples: usize,
    seed: u64,
) -> Result<Vec<TestResult>, StatsError> {
    let n = reference.len();
    if n < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: n });
    }
    if resamples == 0 {
        return Err(StatsError::InvalidInput("resample count must be positive".into()));
    }
    let differences: Vec<Vec<f64>> = others
        .iter()
        .map(|other| {
            if other.len() != n {
                return Err(StatsError::ShapeMismatch(format!(
                    "paired series have lengths {n} and {}",
                    other.len()
                )));
            }
            Ok(reference
                .per_match_loss
                .iter()
                .zip(&other.per_match_loss)
                .map(|(x, y)| x - y)
                .collect())
        })
        .collect::<Result<_, _>>()?;
    if differences.is_empty() {
        return Ok(Vec::new());
    }

    let m = differences.len();
    // counts[j] = (resampled means <= 0, resampled means >= 0)
    let counts = (0..resamples as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r);
            let mut sums = vec![0.0; m];
            for _ in 0..n {
                let i = rng.random_range(0..n);
                for (s, d) in sums.iter_mut().zip(&differences) {
                    *s += d[i];
                }
            }
            sums.into_iter().map(|s| ((s <= 0.0) as u64, (s >= 0.0) as u64)).collect::<Vec<_>>()
        })
        .reduce(
            || vec![(0, 0); m],
            |mut acc, part| {
                for (a, p) in acc.iter_mut().zip(part) {
                    a.0 += p.0;
                    a.1 += p.1;
                }
                acc
            },
        );

    Ok(differences
        .iter()
        .zip(counts)
        .map(|(d, (below, above))| {
            let mean = d.iter().sum::<f64>() / n as f64;
            let tail = below.min(above) as f64 / resamples as f64;
            TestResult::new(mean, 2.0 * tail)
        })
        .collect())
}
