mod common;

use common::oracles::{self, max_abs_diff};
use oddsprob::odds::{convert, convert_multiplicative, convert_oo_epc, convert_power, MarketOdds, Method};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn odds_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1.02f64..50.0, 2..=6)
}

proptest! {
    #[test]
    fn every_method_returns_a_valid_vector(odds in odds_strategy()) {
        let market = MarketOdds::single(odds).unwrap();
        for method in Method::ODDS_ONLY {
            let pv = convert(&market, method).unwrap();
            prop_assert!((pv.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-9, "{}", method);
            prop_assert!(pv.probs().iter().all(|p| *p > 0.0 && *p < 1.0), "{} {:?}", method, pv.probs());
        }
    }

    #[test]
    fn relabelling_outcomes_relabels_probabilities(odds in odds_strategy()) {
        let market = MarketOdds::single(odds.clone()).unwrap();
        let reversed = MarketOdds::single(odds.into_iter().rev().collect()).unwrap();
        for method in Method::ODDS_ONLY {
            let a = convert(&market, method).unwrap().into_probs();
            let mut b = convert(&reversed, method).unwrap().into_probs();
            b.reverse();
            prop_assert!(max_abs_diff(&a, &b) <= 1e-10, "{}: {:?} vs {:?}", method, a, b);
        }
    }

    #[test]
    fn overround_moves_probability_towards_the_favourite(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let market = oracles::random_market(&mut rng, 1);
        prop_assume!(market.inverse().raw_booksum > 1.0 + 1e-6);
        let q = market.inverse().values;
        let fav = (0..q.len()).max_by(|a, b| q[*a].total_cmp(&q[*b])).unwrap();
        let long = (0..q.len()).min_by(|a, b| q[*a].total_cmp(&q[*b])).unwrap();
        let mult = convert_multiplicative(&market).unwrap().into_probs();
        // Single-parameter methods only: per-outcome insider shares can move
        // the favourite either way.
        for method in [Method::ShinNumerical, Method::Power, Method::OoEpc] {
            let p = convert(&market, method).unwrap().into_probs();
            prop_assert!(p[fav] >= mult[fav] - 1e-12, "{} favourite", method);
            prop_assert!(p[long] <= mult[long] + 1e-12, "{} longshot", method);
        }
    }
}

#[test]
fn multi_winner_markets_match_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..500 {
        let market = oracles::random_market(&mut rng, 2 + i % 2);
        let power = convert_power(&market).unwrap();
        assert!(max_abs_diff(power.probs(), &oracles::power(&market)) <= 1e-8);
        let epc = convert_oo_epc(&market).unwrap();
        let expected = oracles::oo_epc(&market).unwrap_or_else(|| oracles::multiplicative(&market));
        assert!(max_abs_diff(epc.probs(), &expected) <= 1e-12, "{:?}", market.odds());
    }
}

#[test]
fn shin_agrees_with_bisection_for_underround_books() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut seen = 0;
    while seen < 200 {
        let market = oracles::random_market(&mut rng, 1);
        if market.inverse().raw_booksum >= 1.0 {
            continue;
        }
        seen += 1;
        let pv = convert(&market, Method::ShinNumerical).unwrap();
        assert!(max_abs_diff(pv.probs(), &oracles::shin_numerical(&market)) <= 1e-8, "{:?}", market.odds());
    }
}
