use std::borrow::Cow;
use std::collections::BTreeMap;

use chrono::{Datelike, NaiveDate};

use super::{BookmakerId, Corpus, DataError, FullTimeResult, MatchRecord, SourceFile};
use crate::odds::MIN_DECIMAL_ODDS;

const SEASON_COLUMN: &str = "Season";
const OUTCOME_SUFFIXES: [&str; 3] = ["H", "D", "A"];

/// Parses `dd/mm/yyyy` or `dd/mm/yy`; two-digit years from 90 up are 19xx.
pub fn parse_date(raw: &str) -> Option<NaiveDate> {
    let mut parts = raw.trim().split('/');
    let day: u32 = parts.next()?.trim().parse().ok()?;
    let month: u32 = parts.next()?.trim().parse().ok()?;
    let year_raw = parts.next()?.trim();
    if parts.next().is_some() {
        return None;
    }
    let mut year: i32 = year_raw.parse().ok()?;
    match year_raw.len() {
        2 => year += if year >= 90 { 1900 } else { 2000 },
        4 => {}
        _ => return None,
    }
    NaiveDate::from_ymd_opt(year, month, day)
}

fn decode(content: &[u8]) -> Cow<'_, str> {
    let content = content.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(content);
    match std::str::from_utf8(content) {
        Ok(s) => Cow::Borrowed(s),
        // Latin-1 maps each byte to the code point of the same value.
        Err(_) => Cow::Owned(content.iter().map(|b| *b as char).collect()),
    }
}

fn parse_odds_cell(raw: Option<&str>) -> Result<Option<f64>, ()> {
    let raw = raw.map(str::trim).unwrap_or("");
    if raw.is_empty() {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= MIN_DECIMAL_ODDS => Ok(Some(v)),
        _ => Err(()),
    }
}

struct Columns {
    season: Option<usize>,
    division: usize,
    date: usize,
    home: usize,
    away: usize,
    result: usize,
    odds: Vec<(BookmakerId, Vec<[usize; 3]>)>,
}

impl Columns {
    fn locate(headers: &csv::StringRecord, need_season: bool) -> Result<Self, DataError> {
        let names: Vec<&str> = headers.iter().map(|h| h.trim().trim_start_matches('\u{feff}')).collect();
        let find = |candidates: &[&str]| names.iter().position(|n| candidates.contains(n));
        let mut missing = Vec::new();
        let mut require = |label: &str, candidates: &[&str]| {
            find(candidates).unwrap_or_else(|| {
                missing.push(label.to_string());
                usize::MAX
            })
        };
        let season = need_season.then(|| require(SEASON_COLUMN, &[SEASON_COLUMN]));
        let division = require("Div", &["Div"]);
        let date = require("Date", &["Date"]);
        let home = require("HomeTeam", &["HomeTeam", "HT"]);
        let away = require("AwayTeam", &["AwayTeam", "AT"]);
        let result = require("FTR", &["FTR", "Res"]);
        if !missing.is_empty() {
            return Err(DataError::MissingColumns(missing));
        }
        let odds = BookmakerId::ALL
            .into_iter()
            .map(|bookmaker| {
                let sets = bookmaker
                    .column_prefixes()
                    .iter()
                    .filter_map(|prefix| {
                        let idx: Vec<usize> = OUTCOME_SUFFIXES
                            .iter()
                            .filter_map(|s| find(&[format!("{prefix}{s}").as_str()]))
                            .collect();
                        <[usize; 3]>::try_from(idx).ok()
                    })
                    .collect();
                (bookmaker, sets)
            })
            .collect();
        Ok(Self {
            season,
            division,
            date,
            home,
            away,
            result,
            odds,
        })
    }
}

enum SeasonSource<'a> {
    Fixed(&'a str),
    Column,
}

fn parse_table(content: &[u8], season_source: SeasonSource<'_>) -> Result<(Corpus, Vec<SourceFile>), DataError> {
    let text = decode(content);
    if text.trim().is_empty() {
        return Err(DataError::Empty);
    }
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let columns = Columns::locate(reader.headers()?, matches!(season_source, SeasonSource::Column))?;

    let mut records = Vec::new();
    let mut seasons = Vec::new();
    let mut stats: BTreeMap<String, SourceFile> = BTreeMap::new();
    let mut order = Vec::new();
    for row in reader.records() {
        let row = row?;
        let cell = |i: usize| row.get(i).map(str::trim).unwrap_or("");
        let season = match season_source {
            SeasonSource::Fixed(label) => label.to_string(),
            SeasonSource::Column => cell(columns.season.unwrap_or(usize::MAX)).to_string(),
        };
        let entry = stats.entry(season.clone()).or_insert_with(|| {
            order.push(season.clone());
            SourceFile {
                season: season.clone(),
                ..Default::default()
            }
        });
        entry.rows += 1;

        let result = FullTimeResult::from_code(cell(columns.result));
        let date = parse_date(cell(columns.date));
        let (Some(full_time_result), Some(date)) = (result, date) else {
            entry.skipped_rows += 1;
            continue;
        };

        let mut odds_by_bookmaker = BTreeMap::new();
        for (bookmaker, sets) in &columns.odds {
            let mut chosen = None;
            for set in sets {
                let cells: Vec<_> = set.iter().map(|i| parse_odds_cell(row.get(*i))).collect();
                entry.invalid_odds_cells += cells.iter().filter(|c| c.is_err()).count();
                if chosen.is_none() {
                    if let [Ok(Some(h)), Ok(Some(d)), Ok(Some(a))] = cells[..] {
                        chosen = Some([h, d, a]);
                    }
                }
            }
            if let Some(triple) = chosen {
                odds_by_bookmaker.insert(*bookmaker, triple);
            }
        }
        entry.records += 1;
        records.push(MatchRecord {
            division: cell(columns.division).to_string(),
            date,
            home_team: cell(columns.home).to_string(),
            away_team: cell(columns.away).to_string(),
            full_time_result,
            odds_by_bookmaker,
        });
        seasons.push(season);
    }
    let provenance: Vec<SourceFile> = order.into_iter().filter_map(|s| stats.remove(&s)).collect();
    Ok((Corpus::from_parts(records, seasons, Vec::new()), provenance))
}

/// Parses one season file. Every record gets `season` as its label.
///
/// Rows with an unknown result code or an unreadable date are skipped and
/// counted; a bookmaker's triple is kept only when all three cells are valid
/// decimal odds.
pub fn parse_football_csv(content: &[u8], season: &str) -> Result<Corpus, DataError> {
    let (corpus, mut provenance) = parse_table(content, SeasonSource::Fixed(season))?;
    let source = provenance.pop().unwrap_or_else(|| SourceFile {
        season: season.to_string(),
        ..Default::default()
    });
    Ok(Corpus::from_parts(corpus.records, corpus.seasons, vec![source]))
}

/// Parses a normalised corpus file, which carries a leading `Season` column.
pub fn parse_corpus_file(content: &[u8]) -> Result<Corpus, DataError> {
    let (corpus, provenance) = parse_table(content, SeasonSource::Column)?;
    Ok(Corpus::from_parts(corpus.records, corpus.seasons, provenance))
}

fn header(with_season: bool) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    if with_season {
        cols.push(SEASON_COLUMN.into());
    }
    cols.extend(["Div", "Date", "HomeTeam", "AwayTeam", "FTR"].map(String::from));
    for bookmaker in BookmakerId::ALL {
        let prefix = bookmaker.column_prefixes()[0];
        cols.extend(OUTCOME_SUFFIXES.iter().map(|s| format!("{prefix}{s}")));
    }
    cols
}

fn write_rows<'a>(
    rows: impl Iterator<Item = (Option<&'a str>, &'a MatchRecord)>,
    with_season: bool,
) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header(with_season)).expect("writing to memory");
    for (season, record) in rows {
        let mut fields: Vec<String> = Vec::with_capacity(21);
        if let Some(s) = season {
            fields.push(s.to_string());
        }
        let d = record.date;
        fields.push(record.division.clone());
        fields.push(format!("{:02}/{:02}/{:04}", d.day(), d.month(), d.year()));
        fields.push(record.home_team.clone());
        fields.push(record.away_team.clone());
        fields.push(record.full_time_result.code().to_string());
        for bookmaker in BookmakerId::ALL {
            match record.odds_by_bookmaker.get(&bookmaker) {
                Some(triple) => fields.extend(triple.iter().map(f64::to_string)),
                None => fields.extend(std::iter::repeat_n(String::new(), 3)),
            }
        }
        writer.write_record(&fields).expect("writing to memory");
    }
    writer.into_inner().expect("writing to memory")
}

/// Serialises records in the source layout with four-digit years.
pub fn write_football_csv(records: &[MatchRecord]) -> Vec<u8> {
    write_rows(records.iter().map(|r| (None, r)), false)
}

pub fn write_corpus_file(corpus: &Corpus) -> Vec<u8> {
    write_rows(
        corpus
            .records()
            .iter()
            .enumerate()
            .map(|(i, r)| (Some(corpus.season_of(i)), r)),
        true,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "Div,Date,Time,HomeTeam,AwayTeam,FTHG,FTAG,FTR,B365H,B365D,B365A,BWH,BWD,BWA,PSH,PSD,PSA";

    #[test]
    fn dates_in_both_year_forms() {
        assert_eq!(parse_date("11/08/23"), NaiveDate::from_ymd_opt(2023, 8, 11));
        assert_eq!(parse_date("11/08/2023"), NaiveDate::from_ymd_opt(2023, 8, 11));
        assert_eq!(parse_date("20/08/94"), NaiveDate::from_ymd_opt(1994, 8, 20));
        assert_eq!(parse_date("31/02/23"), None);
        assert_eq!(parse_date("2023-08-11"), None);
        assert_eq!(parse_date("11/08/123"), None);
    }

    #[test]
    fn happy_path_two_rows() {
        let csv = format!(
            "{HEADER}\nE0,11/08/2023,20:00,Burnley,Man City,0,3,A,8.0,5.5,1.33,7.5,5.25,1.36,8.4,5.7,1.37\n\
             E0,12/08/2023,12:30,Arsenal,Nott'm Forest,2,1,H,1.18,7.0,15.0,1.2,6.75,13.0,1.2,7.5,16.0\n"
        );
        let corpus = parse_football_csv(csv.as_bytes(), "2023-24").unwrap();
        assert_eq!(corpus.len(), 2);
        assert!(corpus
            .records()
            .iter()
            .all(|r| r.odds_by_bookmaker.contains_key(&BookmakerId::Bet365)));
        assert_eq!(corpus.records()[0].full_time_result, FullTimeResult::Away);
        assert_eq!(corpus.season_of(1), "2023-24");
        assert_eq!(corpus.provenance()[0].rows, 2);
    }

    #[test]
    fn blank_cell_drops_only_that_bookmaker() {
        let csv = format!("{HEADER}\nE0,11/08/23,20:00,A,B,1,1,D,2.5,,3.0,2.4,3.2,3.1,2.6,3.3,3.2\n");
        let corpus = parse_football_csv(csv.as_bytes(), "s").unwrap();
        let odds = &corpus.records()[0].odds_by_bookmaker;
        assert!(!odds.contains_key(&BookmakerId::Bet365));
        assert_eq!(odds.get(&BookmakerId::BetWin), Some(&[2.4, 3.2, 3.1]));
        assert_eq!(odds.get(&BookmakerId::Pinnacle), Some(&[2.6, 3.3, 3.2]));
        assert_eq!(corpus.provenance()[0].invalid_odds_cells, 0);
    }

    #[test]
    fn bad_results_and_odds_are_counted() {
        let csv = format!(
            "{HEADER}\nE0,11/08/23,20:00,A,B,1,1,X,2.5,3.0,3.0,,,,,,\n\
             E0,11/08/23,20:00,A,B,1,1,H,0,3.0,abc,2.4,3.2,3.1,1.0,3.3,3.2\n,,,,,,,,,,,,,,,,\n"
        );
        let corpus = parse_football_csv(csv.as_bytes(), "s").unwrap();
        assert_eq!(corpus.len(), 1);
        let source = &corpus.provenance()[0];
        assert_eq!((source.rows, source.skipped_rows, source.invalid_odds_cells), (3, 2, 3));
        let odds = &corpus.records()[0].odds_by_bookmaker;
        assert_eq!(odds.keys().copied().collect::<Vec<_>>(), vec![BookmakerId::BetWin]);
    }

    #[test]
    fn pinnacle_legacy_columns() {
        let csv = "Div,Date,HomeTeam,AwayTeam,FTR,PH,PD,PA\nE0,18/08/12,Arsenal,Sunderland,D,1.4,5.0,10.0\n";
        let corpus = parse_football_csv(csv.as_bytes(), "2012-13").unwrap();
        assert_eq!(
            corpus.records()[0].odds_by_bookmaker.get(&BookmakerId::Pinnacle),
            Some(&[1.4, 5.0, 10.0])
        );
    }

    #[test]
    fn latin1_and_bom() {
        let mut bytes = b"\xEF\xBB\xBFDiv,Date,HomeTeam,AwayTeam,FTR\n".to_vec();
        bytes.extend(b"SP1,01/09/23,Legan\xE9s,Alav\xE9s,H\n");
        let corpus = parse_football_csv(&bytes, "s").unwrap();
        assert_eq!(corpus.records()[0].home_team, "Leganés");
    }

    #[test]
    fn format_errors() {
        assert!(matches!(parse_football_csv(b"", "s"), Err(DataError::Empty)));
        match parse_football_csv(b"Div,Date,HomeTeam\n", "s") {
            Err(DataError::MissingColumns(cols)) => assert_eq!(cols, vec!["AwayTeam", "FTR"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn corpus_file_keeps_seasons() {
        let csv = format!("{HEADER}\nE0,11/08/2023,20:00,A,B,0,3,A,8.0,5.5,1.33,,,,8.4,5.7,1.37\n");
        let mut corpus = parse_football_csv(csv.as_bytes(), "2023-24").unwrap();
        corpus.extend(parse_football_csv(csv.as_bytes(), "2022-23").unwrap());
        let back = parse_corpus_file(&write_corpus_file(&corpus)).unwrap();
        assert_eq!(back.records(), corpus.records());
        assert_eq!((back.season_of(0), back.season_of(1)), ("2023-24", "2022-23"));
        assert_eq!(back.provenance().len(), 2);
    }
}
