//! Football match results with bookmaker odds, as published in
//! football-data.co.uk style season CSVs.

mod fetch;
mod manifest;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use chrono::NaiveDate;
use thiserror::Error;

use crate::odds::MarketOdds;

pub use fetch::{expand_url_template, season_code, DEFAULT_URL_TEMPLATE};
#[cfg(feature = "fetch")]
pub use fetch::fetch_seasons;
pub use manifest::{load_corpus, read_manifest, ManifestEntry};
pub use parse::{parse_corpus_file, parse_date, parse_football_csv, write_corpus_file, write_football_csv};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("empty file")]
    Empty,
    #[error("missing required columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<DataError>,
    },
    #[error("download failed: {0}")]
    Fetch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BookmakerId {
    Bet365,
    BetWin,
    Interwetten,
    Pinnacle,
    WilliamHill,
}

impl BookmakerId {
    pub const ALL: [BookmakerId; 5] = [
        BookmakerId::Bet365,
        BookmakerId::BetWin,
        BookmakerId::Interwetten,
        BookmakerId::Pinnacle,
        BookmakerId::WilliamHill,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BookmakerId::Bet365 => "bet365",
            BookmakerId::BetWin => "betwin",
            BookmakerId::Interwetten => "interwetten",
            BookmakerId::Pinnacle => "pinnacle",
            BookmakerId::WilliamHill => "william_hill",
        }
    }

    /// Column prefixes, preferred first. `B365` + `H`/`D`/`A` and so on.
    pub fn column_prefixes(self) -> &'static [&'static str] {
        match self {
            BookmakerId::Bet365 => &["B365"],
            BookmakerId::BetWin => &["BW"],
            BookmakerId::Interwetten => &["IW"],
            BookmakerId::Pinnacle => &["PS", "P"],
            BookmakerId::WilliamHill => &["WH"],
        }
    }
}

impl fmt::Display for BookmakerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BookmakerId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        Self::ALL
            .into_iter()
            .find(|b| b.as_str() == key || b.column_prefixes().iter().any(|p| p.eq_ignore_ascii_case(&key)))
            .ok_or_else(|| {
                let known: Vec<_> = Self::ALL.iter().map(|b| b.as_str()).collect();
                format!("unknown bookmaker `{s}` (expected one of {})", known.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FullTimeResult {
    Home,
    Draw,
    Away,
}

impl FullTimeResult {
    pub fn from_code(code: &str) -> Option<Self> {
        match code.trim() {
            "H" => Some(Self::Home),
            "D" => Some(Self::Draw),
            "A" => Some(Self::Away),
            _ => None,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Self::Home => "H",
            Self::Draw => "D",
            Self::Away => "A",
        }
    }

    /// Column in (home, draw, away) order.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn one_hot(self) -> Vec<f64> {
        let mut y = vec![0.0; 3];
        y[self.index()] = 1.0;
        y
    }
}

/// Column of the draw in (home, draw, away) markets.
pub const DRAW_COLUMN: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct MatchRecord {
    pub division: String,
    pub date: NaiveDate,
    pub home_team: String,
    pub away_team: String,
    pub full_time_result: FullTimeResult,
    /// (home, draw, away) decimal odds, only for bookmakers with a complete
    /// valid triple.
    pub odds_by_bookmaker: BTreeMap<BookmakerId, [f64; 3]>,
}

/// Where a slice of the corpus came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SourceFile {
    pub path: String,
    pub season: String,
    pub rows: usize,
    pub records: usize,
    pub skipped_rows: usize,
    pub invalid_odds_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    records: Vec<MatchRecord>,
    seasons: Vec<String>,
    provenance: Vec<SourceFile>,
}

impl Corpus {
    pub(crate) fn from_parts(records: Vec<MatchRecord>, seasons: Vec<String>, provenance: Vec<SourceFile>) -> Self {
        debug_assert_eq!(records.len(), seasons.len());
        Self {
            records,
            seasons,
            provenance,
        }
    }

    pub fn records(&self) -> &[MatchRecord] {
        &self.records
    }

    pub fn season_of(&self, index: usize) -> &str {
        &self.seasons[index]
    }

    pub fn provenance(&self) -> &[SourceFile] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends another corpus, keeping record order.
    pub fn extend(&mut self, other: Corpus) {
        self.records.extend(other.records);
        self.seasons.extend(other.seasons);
        self.provenance.extend(other.provenance);
    }

    pub fn seasons(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = self.seasons.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    /// Keeps only records whose season satisfies `keep`.
    pub fn filter_seasons(&self, keep: impl Fn(&str) -> bool) -> Corpus {
        let (records, seasons) = self
            .records
            .iter()
            .zip(&self.seasons)
            .filter(|(_, s)| keep(s))
            .map(|(r, s)| (r.clone(), s.clone()))
            .unzip();
        Corpus {
            records,
            seasons,
            provenance: self.provenance.iter().filter(|p| keep(&p.season)).cloned().collect(),
        }
    }
}

/// Three-way markets of one bookmaker with their results.
#[derive(Debug, Clone, Default)]
pub struct MarketSet {
    pub markets: Vec<MarketOdds>,
    pub outcomes: Vec<Vec<f64>>,
    /// Index into the corpus of each market's record.
    pub record_index: Vec<usize>,
    /// Records without this bookmaker's odds.
    pub excluded: usize,
}

impl MarketSet {
    pub fn len(&self) -> usize {
        self.markets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markets.is_empty()
    }

    pub fn actual_draws(&self) -> u64 {
        self.outcomes.iter().filter(|y| y[DRAW_COLUMN] == 1.0).count() as u64
    }
}

pub fn extract_markets(corpus: &Corpus, bookmaker: BookmakerId) -> MarketSet {
    let mut set = MarketSet::default();
    for (i, record) in corpus.records.iter().enumerate() {
        let market = record
            .odds_by_bookmaker
            .get(&bookmaker)
            .and_then(|odds| MarketOdds::single(odds.to_vec()).ok());
        match market {
            Some(m) => {
                set.markets.push(m);
                set.outcomes.push(record.full_time_result.one_hot());
                set.record_index.push(i);
            }
            None => set.excluded += 1,
        }
    }
    set
}

/// Markets per (bookmaker, season); empty groups are left out.
pub fn group_by_season_bookmaker(corpus: &Corpus) -> BTreeMap<(BookmakerId, String), MarketSet> {
    let mut groups: BTreeMap<(BookmakerId, String), MarketSet> = BTreeMap::new();
    for bookmaker in BookmakerId::ALL {
        let all = extract_markets(corpus, bookmaker);
        for ((market, outcome), index) in all.markets.into_iter().zip(all.outcomes).zip(all.record_index) {
            let group = groups
                .entry((bookmaker, corpus.seasons[index].clone()))
                .or_default();
            group.markets.push(market);
            group.outcomes.push(outcome);
            group.record_index.push(index);
        }
    }
    groups
}
