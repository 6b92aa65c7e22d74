//! Command-line front end: `mine`, `gen`, `eval` and `stats`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{
    database_stats, delta_l, exact_recall, format_pattern_list, gen_indep, gen_parallel, gen_plant,
    parse_pattern_list, pattern_recall, DatabaseStats, ParallelSpec, PlantSpec, TokenPattern,
};
use crate::pattern::Pattern;
use crate::search::{squish, Miner, Mode, SquishConfig, SquishReport, SquishResult};
use crate::seqdb::{Alphabet, InputFormat, SequenceDatabase};

#[derive(Debug, Parser)]
#[command(
    name = "squish",
    version,
    about = "MDL mining of interleaved serial episodes and choice episodes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mine a pattern set from a sequence database.
    Mine(MineArgs),
    /// Generate a synthetic database and its planted targets.
    Gen(GenArgs),
    /// Score a mined pattern list against targets.
    Eval(EvalArgs),
    /// Print database statistics and the singleton-only length.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum InputKind {
    /// Whitespace-separated tokens, one sequence per line.
    #[default]
    Tokens,
    /// Whitespace-separated non-negative integers, one sequence per line.
    Integers,
}

impl From<InputKind> for InputFormat {
    fn from(k: InputKind) -> Self {
        match k {
            InputKind::Tokens => InputFormat::TokenText,
            InputKind::Integers => InputFormat::IntegerText,
        }
    }
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Database file; `-` reads standard input.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Choicisode)]
    pub mode: Mode,
    /// Wall-clock budget; the best model so far is reported when it expires.
    #[arg(long)]
    pub budget_seconds: Option<f64>,
    /// Accepted for uniformity with `gen`; mining is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = InputKind::Tokens)]
    pub input_format: InputKind,
    /// Also write the pattern list to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print recall against this target list.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    /// Longest pattern considered.
    #[arg(long)]
    pub max_len: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Indep,
    Plant,
    Parallel,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Database file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Planted target list.
    #[arg(long)]
    pub targets: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub alphabet: usize,
    /// Total events of indep and plant databases.
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    /// Number of planted patterns.
    #[arg(long, default_value_t = 10)]
    pub patterns: usize,
    #[arg(long, default_value_t = 5)]
    pub pattern_len: usize,
    #[arg(long, default_value_t = 10)]
    pub occurrences: usize,
    #[arg(long, default_value_t = 0.1)]
    pub gap_probability: f64,
    #[arg(long, default_value_t = 5)]
    pub processes: usize,
    #[arg(long, default_value_t = 500)]
    pub sequences: usize,
    #[arg(long, default_value_t = 100)]
    pub sequence_length: usize,
    /// Parallel with 10k sequences (1M events).
    #[arg(long)]
    pub full: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Mined pattern list.
    pub mined: PathBuf,
    /// Target pattern list.
    pub targets: PathBuf,
    /// Database to report the compression gain of the mined patterns on.
    #[arg(long)]
    pub db: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Mode::Choicisode)]
    pub mode: Mode,
    #[arg(long, value_enum, default_value_t = InputKind::Tokens)]
    pub input_format: InputKind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputKind::Tokens)]
    pub input_format: InputKind,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Runs a parsed command, writing the report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Mine(a) => cmd_mine(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Stats(a) => cmd_stats(&a, out),
    }
}

/// Estimation threads from `SQUISH_THREADS`; 0 or unset means automatic.
pub fn threads_from_env() -> usize {
    std::env::var("SQUISH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn load_db(path: &Path, kind: InputKind) -> Result<SequenceDatabase> {
    if path.as_os_str() == "-" {
        return SequenceDatabase::load(io::stdin().lock(), kind.into());
    }
    let file = fs::File::open(path)?;
    SequenceDatabase::load(BufReader::new(file), kind.into())
}

fn read_text(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRow {
    pub pattern: String,
    pub usage: u64,
    pub gaps: u64,
    pub fills: u64,
    /// Code length of one use of the pattern in the pattern stream.
    pub code_bits: f64,
    /// Length of the pattern under the singleton code.
    pub model_bits: f64,
    /// Used instantiations with their usage.
    pub instances: Vec<(String, u64)>,
}

fn pattern_rows(result: &SquishResult, alphabet: &Alphabet) -> Vec<PatternRow> {
    let total = result.code_table.total_usage() as f64;
    result
        .patterns
        .iter()
        .map(|p| {
            let mut instances: Vec<(String, u64)> = p
                .instances
                .iter()
                .filter(|(_, u)| *u > 0)
                .map(|(inst, u)| {
                    let toks: Vec<&str> = inst.iter().map(|&e| alphabet.token(e).unwrap_or("?")).collect();
                    (toks.join(" "), *u)
                })
                .collect();
            instances.sort();
            PatternRow {
                pattern: p.pattern.display(alphabet),
                usage: p.usage,
                gaps: p.gaps,
                fills: p.fills,
                code_bits: if p.usage > 0 {
                    -(p.usage as f64 / total).log2()
                } else {
                    0.0
                },
                model_bits: p.model_bits,
                instances,
            }
        })
        .collect()
}

/// One line per pattern: the pattern, then tab-separated `key=value` fields.
pub fn format_pattern_rows(rows: &[PatternRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let inst: Vec<String> = r.instances.iter().map(|(i, u)| format!("{i}:{u}")).collect();
        let _ = writeln!(
            out,
            "{}\tusage={}\tgaps={}\tfills={}\tbits={:.3}\tmodel={:.3}\tinstances={}",
            r.pattern,
            r.usage,
            r.gaps,
            r.fills,
            r.code_bits,
            r.model_bits,
            inst.join(",")
        );
    }
    out
}

/// Used instantiations of the mined patterns as token lists.
pub fn mined_token_patterns(result: &SquishResult, alphabet: &Alphabet) -> Vec<TokenPattern> {
    let mut out = Vec::new();
    for p in &result.patterns {
        let mut used: Vec<&Vec<crate::seqdb::EventId>> = p
            .instances
            .iter()
            .filter(|(_, u)| *u > 0)
            .map(|(i, _)| i)
            .collect();
        used.sort();
        for inst in used {
            out.push(
                inst.iter()
                    .map(|&e| alphabet.token(e).unwrap_or("?").to_string())
                    .collect(),
            );
        }
    }
    out
}

#[derive(Debug, Serialize)]
struct MineJson<'a> {
    stats: &'a SquishReport,
    patterns: &'a [PatternRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    recall: Option<Recall>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Recall {
    pattern_recall: f64,
    exact_recall: f64,
}

fn cmd_mine(a: &MineArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(b) = a.budget_seconds {
        if !(b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidArgument(
                "budget must be a non-negative number of seconds".into(),
            ));
        }
    }
    let db = load_db(&a.input, a.input_format)?;
    let targets = match &a.targets {
        Some(p) => Some(parse_pattern_list(&read_text(p)?)?),
        None => None,
    };
    let config = SquishConfig {
        mode: a.mode,
        time_budget: a.budget_seconds.map(Duration::from_secs_f64),
        max_pattern_len: a.max_len,
        threads: threads_from_env(),
        ..Default::default()
    };
    let result = squish(&db, config)?;
    let rows = pattern_rows(&result, db.alphabet());
    if let Some(path) = &a.out {
        fs::write(path, format_pattern_rows(&rows))?;
    }
    let recall = targets.map(|t| {
        let mined = mined_token_patterns(&result, db.alphabet());
        Recall {
            pattern_recall: pattern_recall(&mined, &t),
            exact_recall: exact_recall(&mined, &t),
        }
    });
    let r = &result.report;
    let mut s = String::new();
    match a.format {
        Format::Json => {
            let doc = MineJson {
                stats: r,
                patterns: &rows,
                recall,
            };
            s = serde_json::to_string_pretty(&doc).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            s.push('\n');
        }
        Format::Text => {
            let _ = writeln!(s, "mode\t{}", r.mode.as_str());
            let _ = writeln!(s, "patterns\t{}", r.num_patterns);
            let _ = writeln!(s, "L(D,ST)\t{:.3}", r.standard_bits);
            let _ = writeln!(s, "L(CT,D)\t{:.3}", r.total_bits);
            let _ = writeln!(s, "L(CT)\t{:.3}", r.model_bits);
            let _ = writeln!(s, "L(D|CT)\t{:.3}", r.data_bits);
            let _ = writeln!(s, "delta_L\t{:.3}", r.delta_l);
            let _ = writeln!(s, "elapsed\t{:.3}", r.elapsed_seconds);
            let _ = writeln!(s, "timed_out\t{}", r.timed_out);
            if let Some(rc) = recall {
                let _ = writeln!(s, "pattern_recall\t{:.3}", rc.pattern_recall);
                let _ = writeln!(s, "exact_recall\t{:.3}", rc.exact_recall);
            }
            s.push_str("\n# patterns\n");
            s.push_str(&format_pattern_rows(&rows));
            s.push_str("\n# curve\n");
            for p in &r.curve {
                let _ = writeln!(s, "{:.3}\t{:.3}", p.elapsed_seconds, p.total_bits);
            }
        }
        Format::Tsv => {
            s.push_str("elapsed_seconds\ttotal_bits\n");
            for p in &r.curve {
                let _ = writeln!(s, "{:.6}\t{:.6}", p.elapsed_seconds, p.total_bits);
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let (db, targets) = match a.kind {
        GenKind::Indep => (gen_indep(a.alphabet, a.length, a.seed)?, Vec::new()),
        GenKind::Plant => gen_plant(&PlantSpec {
            alphabet: a.alphabet,
            length: a.length,
            patterns: a.patterns,
            pattern_len: a.pattern_len,
            occurrences: a.occurrences,
            gap_probability: a.gap_probability,
            seed: a.seed,
        })?,
        GenKind::Parallel => {
            let spec = if a.full {
                ParallelSpec::full(a.seed)
            } else {
                ParallelSpec {
                    processes: a.processes,
                    sequences: a.sequences,
                    sequence_length: a.sequence_length,
                    seed: a.seed,
                }
            };
            gen_parallel(&spec)?
        }
    };
    let text = db.to_token_text();
    match &a.out {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    if let Some(p) = &a.targets {
        fs::write(p, format_pattern_list(&targets))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalJson {
    pattern_recall: f64,
    exact_recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_l: Option<f64>,
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let mined_text = read_text(&a.mined)?;
    let mined = parse_pattern_list(&mined_text)?;
    let targets = parse_pattern_list(&read_text(&a.targets)?)?;
    let delta = match &a.db {
        Some(path) => {
            let db = load_db(path, a.input_format)?;
            let mut patterns = Vec::new();
            for (ln, line) in mined_text.lines().enumerate() {
                let body = line.split('\t').next().unwrap_or("").trim();
                if body.is_empty() || body.starts_with('#') {
                    continue;
                }
                let p = Pattern::parse_with(body, |t| {
                    db.alphabet().id(t).ok_or_else(|| Error::Parse {
                        line: ln + 1,
                        column: 1,
                        message: format!("event {t:?} not in database"),
                    })
                })?;
                if p.len() >= 2 {
                    patterns.push(p);
                }
            }
            let config = SquishConfig {
                mode: a.mode,
                ..Default::default()
            };
            let mut miner = Miner::new(&db, config)?;
            miner.set_patterns(&patterns)?;
            Some(delta_l(&db, &miner.lengths()))
        }
        None => None,
    };
    let report = EvalJson {
        pattern_recall: pattern_recall(&mined, &targets),
        exact_recall: exact_recall(&mined, &targets),
        delta_l: delta,
    };
    let mut s = String::new();
    match a.format {
        Format::Json => {
            s = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            s.push('\n');
        }
        Format::Text | Format::Tsv => {
            let _ = writeln!(s, "pattern_recall\t{:.3}", report.pattern_recall);
            let _ = writeln!(s, "exact_recall\t{:.3}", report.exact_recall);
            if let Some(d) = report.delta_l {
                let _ = writeln!(s, "delta_L\t{d:.3}");
            }
        }
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn format_stats(st: &DatabaseStats, format: Format) -> Result<String> {
    Ok(match format {
        Format::Json => {
            let mut s =
                serde_json::to_string_pretty(st).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Text => format!(
            "|Omega|\t{}\n|D|\t{}\n||D||\t{}\nL(D,ST)\t{:.3}\n",
            st.alphabet_size, st.num_sequences, st.total_events, st.standard_bits
        ),
        Format::Tsv => format!(
            "alphabet_size\tnum_sequences\ttotal_events\tstandard_bits\n{}\t{}\t{}\t{:.6}\n",
            st.alphabet_size, st.num_sequences, st.total_events, st.standard_bits
        ),
    })
}

fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let db = load_db(&a.input, a.input_format)?;
    out.write_all(format_stats(&database_stats(&db), a.format)?.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut buf = Vec::new();
        run(cli, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn stats_of_one_event() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("db.txt");
        fs::write(&p, "x\n").unwrap();
        let out = run_args(&["squish", "stats", p.to_str().unwrap()]).unwrap();
        assert_eq!(out.lines().count(), 4);
        assert!(out.starts_with("|Omega|\t1\n|D|\t1\n||D||\t1\n"));
    }

    #[test]
    fn missing_input_is_an_error() {
        assert!(run_args(&["squish", "stats", "/nonexistent/db"]).is_err());
        assert!(run_args(&["squish", "mine", "--mode", "bogus", "x"]).is_err());
    }

    #[test]
    fn pattern_rows_parse_back() {
        let rows = vec![PatternRow {
            pattern: "a [b|c] d".into(),
            usage: 3,
            gaps: 1,
            fills: 6,
            code_bits: 2.0,
            model_bits: 10.0,
            instances: vec![("a b d".into(), 2), ("a c d".into(), 1)],
        }];
        let text = format_pattern_rows(&rows);
        assert!(text.starts_with("a [b|c] d\tusage=3\tgaps=1\tfills=6\t"));
        let parsed = parse_pattern_list(&text).unwrap();
        assert_eq!(parsed.len(), 2);
    }
}
