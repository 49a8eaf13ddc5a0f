//! Synthetic football-data style fixtures shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use oddsprob::data::{write_football_csv, BookmakerId, FullTimeResult, MatchRecord};
use oddsprob::glm::TrainingSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Matches whose odds come from known probabilities with a
/// bookmaker-specific margin. Bookmakers are occasionally missing.
pub fn synthetic_records(seed: u64, matches: usize) -> Vec<MatchRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = NaiveDate::from_ymd_opt(2020, 8, 1).unwrap();
    (0..matches)
        .map(|i| {
            let strength: f64 = rng.random_range(-1.5..1.5);
            let draw = 0.22 + 0.08 * rng.random::<f64>();
            let home = (1.0 - draw) / (1.0 + (-strength).exp());
            let probs = [home, draw, 1.0 - draw - home];
            let u: f64 = rng.random();
            let result = if u < probs[0] {
                FullTimeResult::Home
            } else if u < probs[0] + probs[1] {
                FullTimeResult::Draw
            } else {
                FullTimeResult::Away
            };
            let mut odds_by_bookmaker = BTreeMap::new();
            for (b, bookmaker) in BookmakerId::ALL.into_iter().enumerate() {
                if rng.random::<f64>() < 0.05 {
                    continue;
                }
                let margin = 1.02 + 0.01 * b as f64;
                let triple = probs.map(|p| {
                    let noisy = p * (1.0 + 0.03 * (rng.random::<f64>() - 0.5));
                    ((1.0 / (noisy.powf(0.95) * margin)) * 100.0).round() / 100.0
                });
                if triple.iter().all(|o| *o > 1.01) {
                    odds_by_bookmaker.insert(bookmaker, triple);
                }
            }
            MatchRecord {
                division: "E0".into(),
                date: start + chrono::Days::new(i as u64 / 5),
                home_team: format!("Team {}", i % 20),
                away_team: format!("Team {}", (i + 7) % 20),
                full_time_result: result,
                odds_by_bookmaker,
            }
        })
        .collect()
}

/// Writes one CSV per season plus a manifest; returns the manifest path.
pub fn write_fixture(dir: &Path, seasons: usize, matches_per_season: usize) -> PathBuf {
    let mut manifest = String::new();
    for s in 0..seasons {
        let label = format!("{}-{:02}", 2015 + s, (16 + s) % 100);
        let name = format!("season_{s}.csv");
        std::fs::write(
            dir.join(&name),
            write_football_csv(&synthetic_records(100 + s as u64, matches_per_season)),
        )
        .unwrap();
        manifest.push_str(&format!("{name} {label}\n"));
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest).unwrap();
    path
}

/// Three-way rows (home, draw, away) whose outcomes are drawn from
/// `q_j^beta_j / sum_l q_l^beta_l`, with `beta_draw` on the middle column.
pub fn power_law_training_set(seed: u64, rows: usize, beta_decisive: f64, beta_draw: f64) -> TrainingSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inverse = Vec::with_capacity(rows);
    let mut outcomes = Vec::with_capacity(rows);
    while inverse.len() < rows {
        let strength: f64 = rng.random_range(-2.0..2.0);
        let draw = 0.2 + 0.1 * rng.random::<f64>();
        let home = (1.0 - draw) / (1.0 + (-strength).exp());
        let margin = rng.random_range(1.02..1.08);
        let q = [home * margin, draw * margin, (1.0 - draw - home) * margin];
        if q.iter().any(|v| !(*v > 0.01 && *v < 0.99)) {
            continue;
        }
        let raw = [q[0].powf(beta_decisive), q[1].powf(beta_draw), q[2].powf(beta_decisive)];
        let total: f64 = raw.iter().sum();
        let u = rng.random::<f64>() * total;
        let winner = if u < raw[0] {
            0
        } else if u < raw[0] + raw[1] {
            1
        } else {
            2
        };
        let mut y = vec![0.0; 3];
        y[winner] = 1.0;
        inverse.push(q.to_vec());
        outcomes.push(y);
    }
    TrainingSet::new(inverse, outcomes, Some(1)).unwrap()
}
