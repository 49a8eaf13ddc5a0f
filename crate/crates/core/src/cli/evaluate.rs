//! The evaluation pipeline behind `evaluate`, `draws` and `correlate`.

use rayon::prelude::*;

use super::report::{fmt_loss, fmt_p, fmt_param, yes_no, Table};
use super::CliError;
use crate::data::{extract_markets, group_by_season_bookmaker, BookmakerId, Corpus, MarketSet, DRAW_COLUMN};
use crate::glm::{self, FittedModel, ModelParameters, TrainingSet};
use crate::odds::{convert, MarketOdds, Method, ProbabilityVector};
use crate::stats::{
    bootstrap_paired_tests, expected_draws, log_loss, pearson_correlation, poisson_two_tailed_test, Direction,
    LossSeries, TestResult,
};

pub const MAX_FOLDS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Protocol {
    /// Fit and score on the same matches.
    InSample,
    /// Hold out seasons in up to ten folds.
    Kfold,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::InSample => "in-sample",
            Protocol::Kfold => "kfold",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub bookmakers: Vec<BookmakerId>,
    pub methods: Vec<Method>,
    pub resamples: usize,
    pub seed: u64,
    pub protocol: Protocol,
    pub all_pairs: bool,
    /// Skip the bootstrap comparisons (used by `draws`).
    pub significance: bool,
}

#[derive(Debug, Clone)]
pub struct MethodScore {
    pub method: Method,
    pub losses: LossSeries,
    pub mean_log_loss: f64,
    pub fallbacks: usize,
    pub expected_draws: f64,
    pub draw_test: TestResult,
}

/// `result.statistic` is `mean(loss(first) - loss(second))`.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub first: Method,
    pub second: Method,
    pub result: TestResult,
}

#[derive(Debug, Clone)]
pub struct BookmakerEval {
    pub bookmaker: BookmakerId,
    pub markets: usize,
    pub excluded: usize,
    pub actual_draws: u64,
    pub scores: Vec<MethodScore>,
    pub comparisons: Vec<Comparison>,
    /// Models fitted on every market of the bookmaker.
    pub fits: Vec<FittedModel>,
}

impl BookmakerEval {
    pub fn score(&self, method: Method) -> Option<&MethodScore> {
        self.scores.iter().find(|s| s.method == method)
    }

    pub fn fit(&self, method: Method) -> Option<&FittedModel> {
        self.fits.iter().find(|f| f.kind() == method)
    }
}

fn numerical(context: impl std::fmt::Display, err: impl std::fmt::Display) -> CliError {
    CliError::Numerical(format!("{context}: {err}"))
}

fn convert_all(markets: &[MarketOdds], method: Method) -> Result<Vec<ProbabilityVector>, CliError> {
    markets
        .iter()
        .enumerate()
        .map(|(i, m)| convert(m, method).map_err(|e| numerical(format!("{method} on market {i}"), e)))
        .collect()
}

fn training_set(set: &MarketSet, rows: &[usize]) -> Result<TrainingSet, CliError> {
    TrainingSet::from_markets(
        rows.iter().map(|&i| (&set.markets[i], set.outcomes[i].as_slice())),
        Some(DRAW_COLUMN),
    )
    .map_err(|e| numerical("training set", e))
}

fn predict_all(model: &FittedModel, markets: &[MarketOdds]) -> Result<Vec<ProbabilityVector>, CliError> {
    markets
        .iter()
        .map(|m| model.predict(m).map_err(|e| numerical(model.kind(), e)))
        .collect()
}

/// Season-blocked folds: seasons in sorted order are dealt round-robin.
pub fn season_folds(seasons: &[&str]) -> Result<Vec<Vec<usize>>, CliError> {
    let mut distinct: Vec<&str> = seasons.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(CliError::Usage(
            "k-fold evaluation needs markets from at least two seasons".into(),
        ));
    }
    let folds = distinct.len().min(MAX_FOLDS);
    let mut out = vec![Vec::new(); folds];
    for (i, season) in seasons.iter().enumerate() {
        let position = distinct.binary_search(season).expect("season listed");
        out[position % folds].push(i);
    }
    Ok(out)
}

fn fitted_predictions(
    method: Method,
    set: &MarketSet,
    seasons: &[&str],
    protocol: Protocol,
) -> Result<(FittedModel, Vec<ProbabilityVector>), CliError> {
    let all: Vec<usize> = (0..set.len()).collect();
    let full = glm::fit(method, &training_set(set, &all)?).map_err(|e| numerical(method, e))?;
    let predictions = match protocol {
        Protocol::InSample => predict_all(&full, &set.markets)?,
        Protocol::Kfold => {
            let mut predictions: Vec<Option<ProbabilityVector>> = vec![None; set.len()];
            for held_out in season_folds(seasons)? {
                let mut in_fold = vec![false; set.len()];
                held_out.iter().for_each(|&i| in_fold[i] = true);
                let train: Vec<usize> = all.iter().copied().filter(|&i| !in_fold[i]).collect();
                let model = glm::fit(method, &training_set(set, &train)?).map_err(|e| numerical(method, e))?;
                for i in held_out {
                    predictions[i] = Some(model.predict(&set.markets[i]).map_err(|e| numerical(method, e))?);
                }
            }
            predictions.into_iter().map(|p| p.expect("every market is in one fold")).collect()
        }
    };
    Ok((full, predictions))
}

fn score(
    method: Method,
    predictions: &[ProbabilityVector],
    set: &MarketSet,
    bookmaker: BookmakerId,
) -> Result<MethodScore, CliError> {
    let losses = log_loss(predictions, &set.outcomes)
        .map_err(|e| numerical(method, e))?
        .tagged(method.as_str(), bookmaker.as_str());
    let expected = expected_draws(predictions, DRAW_COLUMN).map_err(|e| numerical(method, e))?;
    let draw_test = poisson_two_tailed_test(expected, set.actual_draws()).map_err(|e| numerical(method, e))?;
    Ok(MethodScore {
        method,
        mean_log_loss: losses.mean(),
        losses,
        fallbacks: predictions.iter().filter(|p| p.fallback_used()).count(),
        expected_draws: expected,
        draw_test,
    })
}

/// Tests each method in `family` against `reference`, or every pair when
/// `all_pairs` is set.
fn compare(
    scores: &[MethodScore],
    family: &[Method],
    reference: Method,
    config: &EvalConfig,
) -> Result<Vec<Comparison>, CliError> {
    let members: Vec<&MethodScore> = scores.iter().filter(|s| family.contains(&s.method)).collect();
    let firsts: Vec<&MethodScore> = if config.all_pairs {
        members.clone()
    } else {
        members.iter().copied().filter(|s| s.method == reference).collect()
    };
    let mut out = Vec::new();
    for (n, first) in firsts.iter().enumerate() {
        let seconds: Vec<&MethodScore> = if config.all_pairs {
            members.iter().skip(n + 1).copied().collect()
        } else {
            members.iter().copied().filter(|s| s.method != reference).collect()
        };
        if seconds.is_empty() {
            continue;
        }
        let others: Vec<&LossSeries> = seconds.iter().map(|s| &s.losses).collect();
        let results = bootstrap_paired_tests(&first.losses, &others, config.resamples, config.seed)
            .map_err(|e| numerical("bootstrap", e))?;
        out.extend(seconds.iter().zip(results).map(|(second, result)| Comparison {
            first: first.method,
            second: second.method,
            result,
        }));
    }
    Ok(out)
}

pub fn evaluate_bookmaker(corpus: &Corpus, bookmaker: BookmakerId, config: &EvalConfig) -> Result<BookmakerEval, CliError> {
    let set = extract_markets(corpus, bookmaker);
    let seasons: Vec<&str> = set.record_index.iter().map(|&i| corpus.season_of(i)).collect();

    let cells: Vec<Result<(MethodScore, Option<FittedModel>), CliError>> = config
        .methods
        .par_iter()
        .map(|&method| {
            if method.is_odds_only() {
                let predictions = convert_all(&set.markets, method)?;
                Ok((score(method, &predictions, &set, bookmaker)?, None))
            } else {
                let (model, predictions) = fitted_predictions(method, &set, &seasons, config.protocol)?;
                Ok((score(method, &predictions, &set, bookmaker)?, Some(model)))
            }
        })
        .collect();
    let mut scores = Vec::new();
    let mut fits = Vec::new();
    for cell in cells {
        let (score, fit) = cell?;
        scores.push(score);
        fits.extend(fit);
    }

    let comparisons = if config.significance {
        let mut c = compare(&scores, &Method::ODDS_ONLY, Method::OoEpc, config)?;
        c.extend(compare(&scores, &Method::FITTED, Method::FlGlm, config)?);
        c
    } else {
        Vec::new()
    };

    Ok(BookmakerEval {
        bookmaker,
        markets: set.len(),
        excluded: set.excluded,
        actual_draws: set.actual_draws(),
        scores,
        comparisons,
        fits,
    })
}

/// Evaluates every configured bookmaker that has at least one market.
pub fn evaluate(corpus: &Corpus, config: &EvalConfig) -> Result<Vec<BookmakerEval>, CliError> {
    if config.methods.is_empty() {
        return Err(CliError::Usage("no methods selected".into()));
    }
    let mut out = Vec::new();
    for &bookmaker in &config.bookmakers {
        if extract_markets(corpus, bookmaker).is_empty() {
            continue;
        }
        out.push(evaluate_bookmaker(corpus, bookmaker, config)?);
    }
    if out.is_empty() {
        return Err(CliError::Data("no markets for the selected bookmakers".into()));
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CorrelationPoint {
    pub season: String,
    pub markets: usize,
    pub mean_booksum: f64,
    pub mean_log_loss: f64,
}

#[derive(Debug, Clone)]
pub struct CorrelationRow {
    /// `None` pools every bookmaker.
    pub bookmaker: Option<BookmakerId>,
    pub points: Vec<CorrelationPoint>,
    /// Absent with fewer than three points or no variation.
    pub result: Option<TestResult>,
}

/// Mean log-loss against mean booksum, one point per (bookmaker, season).
pub fn booksum_correlation(
    corpus: &Corpus,
    bookmakers: &[BookmakerId],
    method: Method,
) -> Result<Vec<CorrelationRow>, CliError> {
    if !method.is_odds_only() {
        return Err(CliError::Usage(format!("{method} is not an odds-only method")));
    }
    let mut rows: Vec<CorrelationRow> = Vec::new();
    for ((bookmaker, season), set) in group_by_season_bookmaker(corpus) {
        if !bookmakers.contains(&bookmaker) {
            continue;
        }
        let predictions = convert_all(&set.markets, method)?;
        let losses = log_loss(&predictions, &set.outcomes).map_err(|e| numerical(method, e))?;
        let booksum: f64 = set.markets.iter().map(|m| m.inverse().raw_booksum).sum::<f64>() / set.len() as f64;
        let point = CorrelationPoint {
            season,
            markets: set.len(),
            mean_booksum: booksum,
            mean_log_loss: losses.mean(),
        };
        match rows.last_mut() {
            Some(row) if row.bookmaker == Some(bookmaker) => row.points.push(point),
            _ => rows.push(CorrelationRow {
                bookmaker: Some(bookmaker),
                points: vec![point],
                result: None,
            }),
        }
    }
    let pooled: Vec<CorrelationPoint> = rows.iter().flat_map(|r| r.points.clone()).collect();
    rows.push(CorrelationRow {
        bookmaker: None,
        points: pooled,
        result: None,
    });
    for row in &mut rows {
        let x: Vec<f64> = row.points.iter().map(|p| p.mean_booksum).collect();
        let y: Vec<f64> = row.points.iter().map(|p| p.mean_log_loss).collect();
        row.result = pearson_correlation(&x, &y).ok();
    }
    Ok(rows)
}

fn verdict(c: &Comparison) -> String {
    match (c.result.significant_at_005, c.result.direction) {
        (true, Direction::Negative) => format!("{} better", c.first),
        (true, Direction::Positive) => format!("{} better", c.second),
        _ => "tie".to_string(),
    }
}

/// Mean log-loss per method with its test against the family reference.
pub fn scores_table(name: &str, eval: &BookmakerEval, family: &[Method], reference: Method) -> Table {
    let mut t = Table::new(
        format!("{name}_{}", eval.bookmaker),
        &["method", "mean_log_loss", "markets", "fallbacks", "vs", "diff", "p_value", "verdict"],
    );
    for s in eval.scores.iter().filter(|s| family.contains(&s.method)) {
        let test = eval
            .comparisons
            .iter()
            .find(|c| c.first == reference && c.second == s.method);
        let (vs, diff, p, v) = match test {
            Some(c) => (
                reference.to_string(),
                fmt_loss(-c.result.statistic),
                fmt_p(c.result.p_value),
                verdict(c),
            ),
            None => ("-".into(), "-".into(), "-".into(), "-".into()),
        };
        t.push(vec![
            s.method.to_string(),
            fmt_loss(s.mean_log_loss),
            s.losses.len().to_string(),
            s.fallbacks.to_string(),
            vs,
            diff,
            p,
            v,
        ]);
    }
    t
}

pub fn pairs_table(name: &str, eval: &BookmakerEval, family: &[Method]) -> Table {
    let mut t = Table::new(
        format!("{name}_pairs_{}", eval.bookmaker),
        &["first", "second", "diff", "p_value", "verdict"],
    );
    for c in eval.comparisons.iter().filter(|c| family.contains(&c.first)) {
        t.push(vec![
            c.first.to_string(),
            c.second.to_string(),
            fmt_loss(c.result.statistic),
            fmt_p(c.result.p_value),
            verdict(c),
        ]);
    }
    t
}

pub fn draws_table(eval: &BookmakerEval) -> Table {
    let mut t = Table::new(
        format!("draws_{}", eval.bookmaker),
        &["method", "expected", "actual", "difference", "p_value", "significant", "model"],
    );
    for s in &eval.scores {
        let side = match s.draw_test.direction {
            Direction::Positive => "under",
            Direction::Negative => "over",
            Direction::Zero => "exact",
        };
        t.push(vec![
            s.method.to_string(),
            format!("{:.1}", s.expected_draws),
            eval.actual_draws.to_string(),
            format!("{:.1}", eval.actual_draws as f64 - s.expected_draws),
            fmt_p(s.draw_test.p_value),
            yes_no(s.draw_test.significant_at_005),
            side.to_string(),
        ]);
    }
    t
}

pub fn parameters_table(fits: &[FittedModel], bookmaker: BookmakerId) -> Table {
    let mut t = Table::new(format!("parameters_{bookmaker}"), &["method", "parameter", "value"]);
    for fit in fits {
        let method = fit.kind().to_string();
        let mut row = |name: String, value: String| t.push(vec![method.clone(), name, value]);
        match &fit.parameters {
            ModelParameters::FlGlm { beta } => row("beta".into(), fmt_param(*beta)),
            ModelParameters::FlGlmTwoBeta {
                beta_decisive,
                beta_draw,
                ..
            } => {
                row("beta_decisive".into(), fmt_param(*beta_decisive));
                row("beta_draw".into(), fmt_param(*beta_draw));
            }
            ModelParameters::MultinomialLogistic { coefficients, .. } => {
                for (class, coef) in coefficients.iter().enumerate().skip(1) {
                    row(format!("class{class}_intercept"), fmt_param(coef[0]));
                    for (j, w) in coef[1..].iter().enumerate() {
                        row(format!("class{class}_w{j}"), fmt_param(*w));
                    }
                }
            }
            ModelParameters::OrderedLogistic {
                coefficients,
                thresholds,
            } => {
                for (j, w) in coefficients.iter().enumerate() {
                    row(format!("w{j}"), fmt_param(*w));
                }
                for (j, th) in thresholds.iter().enumerate() {
                    row(format!("threshold{j}"), fmt_param(*th));
                }
            }
        }
        if let Some(m) = fit.mean_normaliser {
            row("mean_normaliser".into(), fmt_param(m));
        }
        row("log_likelihood".into(), format!("{:.3}", fit.log_likelihood));
        row("iterations".into(), fit.metadata.iterations.to_string());
    }
    t
}

pub fn correlation_table(rows: &[CorrelationRow], method: Method) -> Table {
    let mut t = Table::new(
        "correlation_all",
        &["bookmaker", "method", "seasons", "r", "p_value", "significant"],
    );
    for row in rows {
        let name = row.bookmaker.map_or("all".to_string(), |b| b.to_string());
        let (r, p, sig) = match row.result {
            Some(res) => (format!("{:.4}", res.statistic), fmt_p(res.p_value), yes_no(res.significant_at_005)),
            None => ("-".into(), "-".into(), "-".into()),
        };
        t.push(vec![name, method.to_string(), row.points.len().to_string(), r, p, sig]);
    }
    t
}

pub fn correlation_points_table(rows: &[CorrelationRow]) -> Table {
    let mut t = Table::new(
        "correlation_points_all",
        &["bookmaker", "season", "markets", "mean_booksum", "mean_log_loss"],
    );
    for row in rows.iter().filter(|r| r.bookmaker.is_some()) {
        let name = row.bookmaker.map(|b| b.to_string()).unwrap_or_default();
        for p in &row.points {
            t.push(vec![
                name.clone(),
                p.season.clone(),
                p.markets.to_string(),
                format!("{:.6}", p.mean_booksum),
                fmt_loss(p.mean_log_loss),
            ]);
        }
    }
    t
}
