//! Synthetic benchmark databases and evaluation metrics.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::encoding::{standard_length, LengthBreakdown};
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::seqdb::{Alphabet, SequenceDatabase};

/// A pattern given by its tokens, one per slot.
pub type TokenPattern = Vec<String>;

fn token(n: usize) -> String {
    format!("e{n}")
}

/// One sequence of `length` i.i.d. uniform events over `alphabet` symbols.
pub fn gen_indep(alphabet: usize, length: usize, seed: u64) -> Result<SequenceDatabase> {
    if alphabet == 0 || length == 0 {
        return Err(Error::InvalidArgument(
            "alphabet and length must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq: Vec<String> = (0..length).map(|_| token(rng.gen_range(0..alphabet))).collect();
    SequenceDatabase::from_token_sequences(&[seq])
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantSpec {
    pub alphabet: usize,
    pub length: usize,
    pub patterns: usize,
    pub pattern_len: usize,
    pub occurrences: usize,
    /// Probability that one background event separates two consecutive pattern events.
    pub gap_probability: f64,
    pub seed: u64,
}

impl PlantSpec {
    /// The single-sequence 10k-event setup with `patterns` planted patterns.
    pub fn standard(patterns: usize, seed: u64) -> Self {
        Self {
            alphabet: 1000,
            length: 10_000,
            patterns,
            pattern_len: 5,
            occurrences: 10,
            gap_probability: 0.1,
            seed,
        }
    }
}

/// Plants `patterns` serial patterns over pairwise disjoint events into an
/// otherwise independent sequence of exactly `length` events.
pub fn gen_plant(spec: &PlantSpec) -> Result<(SequenceDatabase, Vec<TokenPattern>)> {
    let PlantSpec {
        alphabet,
        length,
        patterns,
        pattern_len,
        occurrences,
        gap_probability,
        seed,
    } = *spec;
    if alphabet == 0 || pattern_len == 0 || !(0.0..=1.0).contains(&gap_probability) {
        return Err(Error::InvalidArgument("invalid plant specification".into()));
    }
    if patterns * pattern_len > alphabet {
        return Err(Error::InvalidArgument(format!(
            "{patterns} patterns of length {pattern_len} need more than {alphabet} distinct events"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = sample(&mut rng, alphabet, patterns * pattern_len).into_vec();
    let targets: Vec<Vec<usize>> = events.chunks(pattern_len).map(<[usize]>::to_vec).collect();

    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(patterns * occurrences);
    for t in &targets {
        for _ in 0..occurrences {
            let mut block = Vec::with_capacity(2 * pattern_len);
            for (i, &e) in t.iter().enumerate() {
                if i > 0 && rng.gen_bool(gap_probability) {
                    block.push(rng.gen_range(0..alphabet));
                }
                block.push(e);
            }
            blocks.push(block);
        }
    }
    let planted: usize = blocks.iter().map(Vec::len).sum();
    if planted > length {
        return Err(Error::InvalidArgument(format!(
            "{planted} planted events do not fit in {length} events"
        )));
    }
    let background_len = length - planted;
    if blocks.len() > background_len + 1 {
        return Err(Error::InvalidArgument(
            "not enough room for distinct insertion points".into(),
        ));
    }
    let background: Vec<usize> = (0..background_len).map(|_| rng.gen_range(0..alphabet)).collect();
    let mut points = sample(&mut rng, background_len + 1, blocks.len()).into_vec();
    points.sort_unstable();
    // Shuffle which block goes to which point.
    let order = sample(&mut rng, blocks.len(), blocks.len()).into_vec();

    let mut seq = Vec::with_capacity(length);
    let mut next_bg = 0;
    for (k, &p) in points.iter().enumerate() {
        seq.extend(background[next_bg..p].iter().map(|&e| token(e)));
        next_bg = p;
        seq.extend(blocks[order[k]].iter().map(|&e| token(e)));
    }
    seq.extend(background[next_bg..].iter().map(|&e| token(e)));

    let db = SequenceDatabase::from_token_sequences(&[seq])?;
    let targets = targets
        .into_iter()
        .map(|t| t.into_iter().map(token).collect())
        .collect();
    Ok((db, targets))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelSpec {
    pub processes: usize,
    pub sequences: usize,
    pub sequence_length: usize,
    pub seed: u64,
}

impl ParallelSpec {
    /// 5 processes, 500 sequences of 100 events.
    pub fn desk(seed: u64) -> Self {
        Self {
            processes: 5,
            sequences: 500,
            sequence_length: 100,
            seed,
        }
    }

    /// 5 processes, 10k sequences of 100 events.
    pub fn full(seed: u64) -> Self {
        Self {
            sequences: 10_000,
            ..Self::desk(seed)
        }
    }
}

const PROCESS_EVENTS: [char; 5] = ['a', 'b', 'c', 'd', 'e'];

/// Sequences emitted by independent cyclic processes; at each step a
/// uniformly chosen process emits its next event `a_i .. e_i`.
pub fn gen_parallel(spec: &ParallelSpec) -> Result<(SequenceDatabase, Vec<TokenPattern>)> {
    if spec.processes == 0 || spec.sequences == 0 || spec.sequence_length == 0 {
        return Err(Error::InvalidArgument(
            "parallel parameters must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let name = |p: usize, k: usize| format!("{}{}", PROCESS_EVENTS[k], p + 1);
    let mut seqs = Vec::with_capacity(spec.sequences);
    for _ in 0..spec.sequences {
        let mut state = vec![0usize; spec.processes];
        let seq: Vec<String> = (0..spec.sequence_length)
            .map(|_| {
                let p = rng.gen_range(0..spec.processes);
                let k = state[p];
                state[p] = (k + 1) % PROCESS_EVENTS.len();
                name(p, k)
            })
            .collect();
        seqs.push(seq);
    }
    let targets = (0..spec.processes)
        .map(|p| (0..PROCESS_EVENTS.len()).map(|k| name(p, k)).collect())
        .collect();
    Ok((SequenceDatabase::from_token_sequences(&seqs)?, targets))
}

/// Gapless greedy cover of the targets by the mined patterns, longest
/// first and left to right: covered target events over
/// `max(||T||, ||P||)`.
pub fn pattern_recall(mined: &[TokenPattern], targets: &[TokenPattern]) -> f64 {
    let target_mass: usize = targets.iter().map(Vec::len).sum();
    let mined_mass: usize = mined.iter().map(Vec::len).sum();
    let denom = target_mass.max(mined_mass);
    if denom == 0 {
        return 0.0;
    }
    let mut by_len: Vec<&TokenPattern> = mined.iter().collect();
    by_len.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut covered = 0;
    for t in targets {
        let mut used = vec![false; t.len()];
        for p in &by_len {
            if p.is_empty() || p.len() > t.len() {
                continue;
            }
            let mut i = 0;
            while i + p.len() <= t.len() {
                if t[i..i + p.len()] == p[..] && !used[i..i + p.len()].iter().any(|&u| u) {
                    used[i..i + p.len()].iter_mut().for_each(|u| *u = true);
                    i += p.len();
                } else {
                    i += 1;
                }
            }
        }
        covered += used.iter().filter(|&&u| u).count();
    }
    covered as f64 / denom as f64
}

/// Fraction of targets that appear exactly among the mined patterns.
pub fn exact_recall(mined: &[TokenPattern], targets: &[TokenPattern]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    let mined: HashSet<&TokenPattern> = mined.iter().collect();
    targets.iter().filter(|t| mined.contains(t)).count() as f64 / targets.len() as f64
}

/// Compression gain `L(D, ST) - L(D, CT)`.
pub fn delta_l(db: &SequenceDatabase, lengths: &LengthBreakdown) -> f64 {
    standard_length(db) - lengths.total
}

/// Serial instantiations of `p` as token patterns.
pub fn token_instantiations(p: &Pattern, alphabet: &Alphabet) -> Vec<TokenPattern> {
    p.instantiations()
        .into_iter()
        .map(|inst| {
            inst.into_iter()
                .map(|e| alphabet.token(e).unwrap_or("?").to_string())
                .collect()
        })
        .collect()
}

/// Parses one pattern per line. The pattern is the text before the first
/// tab; choice slots `[x|y]` are expanded to all instantiations.
pub fn parse_pattern_list(text: &str) -> Result<Vec<TokenPattern>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('\t').next().unwrap_or("").trim_end_matches('\r');
        if body.trim().is_empty() || body.starts_with('#') {
            continue;
        }
        let mut expanded: Vec<TokenPattern> = vec![Vec::new()];
        let mut column = 1;
        for tok in body.split(' ') {
            if tok.is_empty() {
                column += 1;
                continue;
            }
            let choices: Vec<&str> = match tok.strip_prefix('[') {
                Some(inner) => inner
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse {
                        line: ln + 1,
                        column,
                        message: format!("unterminated choice slot {tok:?}"),
                    })?
                    .split('|')
                    .collect(),
                None => vec![tok],
            };
            if choices.iter().any(|c| c.is_empty()) {
                return Err(Error::Parse {
                    line: ln + 1,
                    column,
                    message: "empty choice".into(),
                });
            }
            expanded = expanded
                .iter()
                .flat_map(|prefix| {
                    choices.iter().map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c.to_string());
                        p
                    })
                })
                .collect();
            column += tok.chars().count() + 1;
        }
        out.extend(expanded);
    }
    Ok(out)
}

/// One pattern per line, tokens separated by spaces.
pub fn format_pattern_list(patterns: &[TokenPattern]) -> String {
    let mut out = String::new();
    for p in patterns {
        let _ = writeln!(out, "{}", p.join(" "));
    }
    out
}

/// Table-style database statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DatabaseStats {
    pub alphabet_size: usize,
    pub num_sequences: usize,
    pub total_events: usize,
    pub standard_bits: f64,
}

pub fn database_stats(db: &SequenceDatabase) -> DatabaseStats {
    DatabaseStats {
        alphabet_size: db.alphabet_size(),
        num_sequences: db.num_sequences(),
        total_events: db.total_events(),
        standard_bits: standard_length(db),
    }
}
