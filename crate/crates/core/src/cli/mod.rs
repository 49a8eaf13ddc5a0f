//! The `oddsprob` command line.
//!
//! Every flag can also be set through an `ODDSPROB_`-prefixed environment
//! variable, e.g. `ODDSPROB_SEED=7`.

pub mod evaluate;
pub mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::data::{
    extract_markets, load_corpus, parse_corpus_file, write_corpus_file, BookmakerId, Corpus, DataError, DRAW_COLUMN,
};
use crate::glm::{self, FittedModel};
use crate::odds::{convert, Diagnostics, MarketOdds, Method};
use crate::stats::{DEFAULT_RESAMPLES, DEFAULT_SEED};
use evaluate::{
    booksum_correlation, correlation_points_table, correlation_table, draws_table, pairs_table, parameters_table,
    scores_table, EvalConfig, Protocol,
};
use report::{sha256_hex, ReportFormat, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    DataFile(#[from] DataError),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::DataFile(_) | CliError::Data(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "oddsprob", version, about = "Turn bookmaker odds into outcome probabilities and score them")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read the season files in a manifest and write a single corpus file.
    Ingest(IngestArgs),
    /// Convert one market's odds.
    Convert(ConvertArgs),
    /// Fit the model families and save them.
    Fit(FitArgs),
    /// Log-loss, significance, draw counts, correlation and parameters.
    Evaluate(EvalArgs),
    /// Expected against actual draws only.
    Draws(EvalArgs),
    /// Per-season booksum against log-loss only.
    Correlate(EvalArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file written by `ingest`.
    #[arg(long, env = "ODDSPROB_CORPUS", default_value = "corpus.csv")]
    pub corpus: PathBuf,
    /// Read season files from this manifest instead of a corpus file.
    #[arg(long, env = "ODDSPROB_MANIFEST")]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Lines of `<path> <season>`, paths relative to the manifest.
    #[arg(long, env = "ODDSPROB_MANIFEST")]
    pub manifest: PathBuf,
    /// Where to write the corpus file.
    #[arg(long, env = "ODDSPROB_CORPUS", default_value = "corpus.csv")]
    pub corpus: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[arg(long, env = "ODDSPROB_METHOD", default_value = "oo_epc")]
    pub method: Method,
    /// Decimal odds, comma separated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub odds: Vec<f64>,
    /// Number of winning outcomes.
    #[arg(long, short = 't', default_value_t = 1)]
    pub successes: usize,
    /// Model file, required for fitted methods.
    #[arg(long, env = "ODDSPROB_MODEL")]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    #[arg(long, env = "ODDSPROB_BOOKMAKERS", value_delimiter = ',')]
    pub bookmakers: Vec<BookmakerId>,
    #[arg(long, env = "ODDSPROB_METHODS", value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, env = "ODDSPROB_OUT", default_value = "reports")]
    pub out: PathBuf,
    #[arg(long, env = "ODDSPROB_FORMAT", value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: CorpusArgs,
    /// Defaults to all five.
    #[arg(long, env = "ODDSPROB_BOOKMAKERS", value_delimiter = ',')]
    pub bookmakers: Vec<BookmakerId>,
    /// Defaults to every odds-only method and fitted model.
    #[arg(long, env = "ODDSPROB_METHODS", value_delimiter = ',')]
    pub methods: Vec<Method>,
    #[arg(long, env = "ODDSPROB_RESAMPLES", default_value_t = DEFAULT_RESAMPLES)]
    pub resamples: usize,
    #[arg(long, env = "ODDSPROB_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, env = "ODDSPROB_PROTOCOL", value_enum, default_value_t = Protocol::InSample)]
    pub protocol: Protocol,
    #[arg(long, env = "ODDSPROB_OUT", default_value = "reports")]
    pub out: PathBuf,
    /// What to print on stdout; both forms are always written to `--out`.
    #[arg(long, env = "ODDSPROB_FORMAT", value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
    /// Test every pair of methods within a family, not only against the reference.
    #[arg(long, env = "ODDSPROB_ALL_PAIRS")]
    pub all_pairs: bool,
    /// Odds-only method used for the booksum correlation.
    #[arg(long, env = "ODDSPROB_CORRELATION_METHOD", default_value = "multiplicative")]
    pub correlation_method: Method,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn out(stdout: &mut dyn std::io::Write, text: &str) -> Result<(), CliError> {
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
}

pub fn execute(command: Command, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    match command {
        Command::Ingest(args) => ingest(&args, stdout),
        Command::Convert(args) => convert_market(&args, stdout),
        Command::Fit(args) => fit(&args, stdout),
        Command::Evaluate(args) => run_evaluation(&args, Blocks::All, stdout),
        Command::Draws(args) => run_evaluation(&args, Blocks::Draws, stdout),
        Command::Correlate(args) => run_evaluation(&args, Blocks::Correlation, stdout),
    }
}

fn ingest(args: &IngestArgs, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let corpus = load_corpus(&args.manifest)?;
    let mut files = Table::new("ingest", &["file", "season", "rows", "records", "skipped", "invalid_odds"]);
    for f in corpus.provenance() {
        files.push(vec![
            f.path.clone(),
            f.season.clone(),
            f.rows.to_string(),
            f.records.to_string(),
            f.skipped_rows.to_string(),
            f.invalid_odds_cells.to_string(),
        ]);
    }
    out(stdout, &files.to_text(&[]))?;
    out(stdout, "\n")?;
    let mut books = Table::new("markets", &["bookmaker", "markets", "missing"]);
    for b in BookmakerId::ALL {
        let set = extract_markets(&corpus, b);
        books.push(vec![b.to_string(), set.len().to_string(), set.excluded.to_string()]);
    }
    out(stdout, &books.to_text(&[]))?;
    std::fs::write(&args.corpus, write_corpus_file(&corpus))
        .map_err(|e| CliError::Io(format!("{}: {e}", args.corpus.display())))?;
    out(stdout, &format!("\n{} records written to {}\n", corpus.len(), args.corpus.display()))
}

fn convert_market(args: &ConvertArgs, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let market = MarketOdds::new(args.odds.clone(), args.successes).map_err(|e| CliError::Usage(e.to_string()))?;
    let probs = if args.method.is_odds_only() {
        convert(&market, args.method).map_err(|e| match e {
            crate::odds::OddsError::UnsupportedMarket { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        })?
    } else {
        let path = args
            .model
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} needs --model", args.method)))?;
        let model = read_model(path)?;
        if model.kind() != args.method {
            return Err(CliError::Usage(format!("{} holds a {} model", path.display(), model.kind())));
        }
        model.predict(&market).map_err(|e| CliError::Usage(e.to_string()))?
    };
    let line: Vec<String> = probs.probs().iter().map(|p| format!("{p:.6}")).collect();
    out(stdout, &format!("{}\nfallback: {}\n", line.join(","), probs.fallback_used()))?;
    match probs.diagnostics() {
        Diagnostics::ShinNumerical { z, solver, .. } => out(stdout, &format!("z: {z:.9} ({solver:?})\n")),
        Diagnostics::ShinAnalytical { z } => {
            let z: Vec<String> = z.iter().map(|v| format!("{v:.9}")).collect();
            out(stdout, &format!("z: {}\n", z.join(",")))
        }
        Diagnostics::Power { exponent } => out(stdout, &format!("beta: {exponent:.9}\n")),
        Diagnostics::OoEpc { z } => out(stdout, &format!("z: {z:.9}\n")),
        Diagnostics::None => Ok(()),
    }
}

fn read_model(path: &Path) -> Result<FittedModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    FittedModel::from_text(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn load(input: &CorpusArgs) -> Result<(Corpus, String), CliError> {
    match &input.manifest {
        Some(manifest) => {
            let corpus = load_corpus(manifest)?;
            let hash = sha256_hex(&write_corpus_file(&corpus));
            Ok((corpus, hash))
        }
        None => {
            let bytes = std::fs::read(&input.corpus).map_err(|e| {
                CliError::Data(format!("cannot read corpus {}: {e} (run `oddsprob ingest` first)", input.corpus.display()))
            })?;
            let corpus = parse_corpus_file(&bytes).map_err(|e| CliError::Data(format!("{}: {e}", input.corpus.display())))?;
            Ok((corpus, sha256_hex(&bytes)))
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn or_all<T: Copy>(chosen: &[T], all: &[T]) -> Vec<T> {
    if chosen.is_empty() {
        all.to_vec()
    } else {
        chosen.to_vec()
    }
}

type Provenance = Vec<(String, String)>;

fn provenance(config: &[(&str, String)], corpus: &Corpus, corpus_hash: &str) -> Provenance {
    let canonical: String = config.iter().map(|(k, v)| format!("{k}={v}\n")).collect::<String>()
        + &format!("corpus_sha256={corpus_hash}\n");
    let mut p: Provenance = vec![
        ("tool".into(), format!("oddsprob {}", env!("CARGO_PKG_VERSION"))),
        ("config_sha256".into(), sha256_hex(canonical.as_bytes())),
        ("corpus_sha256".into(), corpus_hash.to_string()),
        ("corpus_rows".into(), corpus.len().to_string()),
    ];
    p.extend(config.iter().map(|(k, v)| (k.to_string(), v.clone())));
    p
}

fn with_markets(p: &Provenance, markets: usize) -> Provenance {
    let mut p = p.clone();
    p.push(("markets".into(), markets.to_string()));
    p
}

fn emit(
    table: &Table,
    dir: &Path,
    format: ReportFormat,
    prov: &Provenance,
    stdout: &mut dyn std::io::Write,
) -> Result<(), CliError> {
    table.write(dir, prov)?;
    out(stdout, &format!("[{}]\n", table.name))?;
    out(stdout, &table.render(format, &[]))?;
    out(stdout, "\n")
}

fn fit(args: &FitArgs, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let methods = or_all(&args.methods, &Method::FITTED);
    if let Some(m) = methods.iter().find(|m| m.is_odds_only()) {
        return Err(CliError::Usage(format!("{m} has no parameters to fit")));
    }
    let bookmakers = or_all(&args.bookmakers, &BookmakerId::ALL);
    let (corpus, hash) = load(&args.input)?;
    ensure_dir(&args.out)?;
    let config = vec![
        ("command", "fit".to_string()),
        ("bookmakers", join(&bookmakers)),
        ("methods", join(&methods)),
    ];
    let prov = provenance(&config, &corpus, &hash);
    for bookmaker in bookmakers {
        let set = extract_markets(&corpus, bookmaker);
        if set.is_empty() {
            continue;
        }
        let data = glm::TrainingSet::from_markets(
            set.markets.iter().zip(&set.outcomes).map(|(m, y)| (m, y.as_slice())),
            Some(DRAW_COLUMN),
        )
        .map_err(|e| CliError::Numerical(e.to_string()))?;
        let mut fits = Vec::new();
        for &method in &methods {
            let model = glm::fit(method, &data).map_err(|e| CliError::Numerical(format!("{method} on {bookmaker}: {e}")))?;
            let path = args.out.join(format!("{method}_{bookmaker}.model"));
            std::fs::write(&path, model.to_text()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            fits.push(model);
        }
        emit(&parameters_table(&fits, bookmaker), &args.out, args.format, &with_markets(&prov, set.len()), stdout)?;
    }
    Ok(())
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Blocks {
    All,
    Draws,
    Correlation,
}

fn run_evaluation(args: &EvalArgs, blocks: Blocks, stdout: &mut dyn std::io::Write) -> Result<(), CliError> {
    let all_methods: Vec<Method> = Method::ODDS_ONLY.iter().chain(&Method::FITTED).copied().collect();
    let mut methods = Vec::new();
    for m in or_all(&args.methods, &all_methods) {
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    let bookmakers = or_all(&args.bookmakers, &BookmakerId::ALL);
    if args.resamples == 0 {
        return Err(CliError::Usage("--resamples must be positive".into()));
    }
    if !args.correlation_method.is_odds_only() {
        return Err(CliError::Usage(format!(
            "--correlation-method must be odds-only, got {}",
            args.correlation_method
        )));
    }
    let (corpus, hash) = load(&args.input)?;
    ensure_dir(&args.out)?;

    let command = match blocks {
        Blocks::All => "evaluate",
        Blocks::Draws => "draws",
        Blocks::Correlation => "correlate",
    };
    let config = vec![
        ("command", command.to_string()),
        ("bookmakers", join(&bookmakers)),
        ("methods", join(&methods)),
        ("resamples", args.resamples.to_string()),
        ("seed", args.seed.to_string()),
        ("protocol", args.protocol.as_str().to_string()),
        ("all_pairs", args.all_pairs.to_string()),
        ("correlation_method", args.correlation_method.to_string()),
    ];
    let prov = provenance(&config, &corpus, &hash);

    if blocks != Blocks::Correlation {
        let eval_config = EvalConfig {
            bookmakers: bookmakers.clone(),
            methods: methods.clone(),
            resamples: args.resamples,
            seed: args.seed,
            protocol: args.protocol,
            all_pairs: args.all_pairs,
            significance: blocks == Blocks::All,
        };
        for eval in evaluate::evaluate(&corpus, &eval_config)? {
            let p = with_markets(&prov, eval.markets);
            if blocks == Blocks::All {
                let families = [
                    ("odds_only", &Method::ODDS_ONLY[..], Method::OoEpc),
                    ("glm", &Method::FITTED[..], Method::FlGlm),
                ];
                for (name, family, reference) in families {
                    if !eval.scores.iter().any(|s| family.contains(&s.method)) {
                        continue;
                    }
                    emit(&scores_table(name, &eval, family, reference), &args.out, args.format, &p, stdout)?;
                    if args.all_pairs {
                        emit(&pairs_table(name, &eval, family), &args.out, args.format, &p, stdout)?;
                    }
                }
                if !eval.fits.is_empty() {
                    emit(&parameters_table(&eval.fits, eval.bookmaker), &args.out, args.format, &p, stdout)?;
                }
            }
            emit(&draws_table(&eval), &args.out, args.format, &p, stdout)?;
        }
    }
    if blocks != Blocks::Draws {
        let rows = booksum_correlation(&corpus, &bookmakers, args.correlation_method)?;
        emit(&correlation_table(&rows, args.correlation_method), &args.out, args.format, &prov, stdout)?;
        emit(&correlation_points_table(&rows), &args.out, args.format, &prov, stdout)?;
    }
    Ok(())
}
