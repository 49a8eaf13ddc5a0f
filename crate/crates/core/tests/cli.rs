mod common;

use std::path::Path;
use std::process::{Command, Output};

fn oddsprob(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oddsprob"))
        .args(args)
        .env_remove("ODDSPROB_SEED")
        .output()
        .expect("binary runs")
}

fn text(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn ingest(dir: &Path, seasons: usize, matches: usize) -> String {
    let manifest = common::write_fixture(dir, seasons, matches);
    let corpus = dir.join("corpus.csv");
    let out = oddsprob(&["ingest", "--manifest", manifest.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    corpus.to_str().unwrap().to_string()
}

#[test]
fn ingest_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = common::write_fixture(dir.path(), 2, 30);
    let corpus = dir.path().join("c.csv");
    let out = oddsprob(&["ingest", "--manifest", manifest.to_str().unwrap(), "--corpus", corpus.to_str().unwrap()]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success());
    assert!(stdout.contains("season_0.csv") && stdout.contains("2016-17"), "{stdout}");
    assert!(stdout.contains("60 records written"), "{stdout}");

    std::fs::write(dir.path().join("bad.txt"), "missing.csv 2020-21\n").unwrap();
    let bad = oddsprob(&["ingest", "--manifest", dir.path().join("bad.txt").to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("missing.csv"));
}

#[test]
fn tiny_corpus_evaluation_has_every_block() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 1, 20);
    let reports = dir.path().join("reports");
    let out = oddsprob(&[
        "evaluate", "--corpus", &corpus, "--out", reports.to_str().unwrap(), "--resamples", "500",
        "--bookmakers", "pinnacle,bet365",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for block in ["odds_only", "glm", "parameters", "draws"] {
        for b in ["pinnacle", "bet365"] {
            for ext in ["txt", "csv"] {
                assert!(reports.join(format!("{block}_{b}.{ext}")).exists(), "{block}_{b}.{ext}");
            }
        }
    }
    assert!(reports.join("correlation_all.csv").exists());

    // Every p-value column lies in [0, 1].
    for entry in std::fs::read_dir(&reports).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(&path).unwrap();
        let headers = reader.headers().unwrap().clone();
        if let Some(col) = headers.iter().position(|h| h == "p_value") {
            for row in reader.records() {
                let cell = row.unwrap()[col].to_string();
                if cell != "-" {
                    let p: f64 = cell.parse().unwrap();
                    assert!((0.0..=1.0).contains(&p), "{}: {p}", path.display());
                }
            }
        }
    }
    let odds_only = text(&reports.join("odds_only_pinnacle.txt"));
    assert!(odds_only.contains("# seed = 42") && odds_only.contains("# config_sha256 = "), "{odds_only}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 3, 40);
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = oddsprob(&[
            "evaluate", "--corpus", &corpus, "--out", out_dir.to_str().unwrap(), "--resamples", "300", "--seed", "9",
            "--protocol", "kfold", "--all-pairs",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn single_method_has_no_significance_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 1, 25);
    let reports = dir.path().join("r");
    let out = oddsprob(&[
        "evaluate", "--corpus", &corpus, "--out", reports.to_str().unwrap(), "--methods", "power",
        "--bookmakers", "bet365", "--format", "csv",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = text(&reports.join("odds_only_bet365.csv"));
    assert!(table.contains("power,") && table.contains(",-,-,-,-"), "{table}");
    assert!(!reports.join("glm_bet365.csv").exists());
}

#[test]
fn env_overrides_and_seed_changes_hash() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 1, 20);
    let run = |seed: &str, out: &str| {
        let out_dir = dir.path().join(out);
        let output = Command::new(env!("CARGO_BIN_EXE_oddsprob"))
            .args(["draws", "--corpus", &corpus, "--bookmakers", "pinnacle", "--methods", "multiplicative,oo_epc"])
            .env("ODDSPROB_SEED", seed)
            .env("ODDSPROB_OUT", &out_dir)
            .output()
            .unwrap();
        assert!(output.status.success());
        text(&out_dir.join("draws_pinnacle.txt"))
    };
    let a = run("1", "x");
    let b = run("2", "y");
    assert!(a.contains("# seed = 1") && b.contains("# seed = 2"));
    let hash = |s: &str| s.lines().find(|l| l.starts_with("# config_sha256")).unwrap().to_string();
    assert_ne!(hash(&a), hash(&b));
}

#[test]
fn fit_then_convert_with_saved_model() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 1, 60);
    let models = dir.path().join("models");
    let out = oddsprob(&[
        "fit", "--corpus", &corpus, "--bookmakers", "william_hill", "--methods", "fl_glm", "--out",
        models.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let model = models.join("fl_glm_william_hill.model");
    let converted = oddsprob(&["convert", "--method", "fl_glm", "--model", model.to_str().unwrap(), "--odds", "1.5,4.0,7.0"]);
    assert!(converted.status.success());
    let first = String::from_utf8(converted.stdout).unwrap();
    let probs: Vec<f64> = first.lines().next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((probs.iter().sum::<f64>() - 1.0).abs() < 2e-6);

    let rejected = oddsprob(&["fit", "--corpus", &corpus, "--methods", "power"]);
    assert_eq!(rejected.status.code(), Some(1));
}

#[test]
fn correlate_writes_one_row_per_bookmaker_and_pooled() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = ingest(dir.path(), 4, 30);
    let reports = dir.path().join("c");
    let out = oddsprob(&["correlate", "--corpus", &corpus, "--out", reports.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = text(&reports.join("correlation_all.csv"));
    let rows: Vec<&str> = table.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 6, "{table}");
    assert!(rows[5].starts_with("all,multiplicative,20,"), "{table}");
}
