//! Code lengths of the two-part MDL score and a symbolic encoder/decoder for
//! covers.
//!
//! All lengths are in bits. Only lengths are computed; no bit-level output is
//! produced.

mod codec;

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternId};
use crate::seqdb::{EventId, SequenceDatabase};

pub use codec::{decode_streams, encode_cover, CodeStreams, MetaCode, MetaRecord, PatternCode};

/// Normalising constant of the universal integer code.
pub const LOG_STAR_C0: f64 = 2.865064;

/// Initial pseudo-count of the prequential meta-stream code.
pub const PREQUENTIAL_EPSILON: f64 = 0.5;

/// Tolerance used when comparing scores of candidate models.
pub const SCORE_EPSILON: f64 = 1e-9;

/// Rissanen's universal code length for integers `n >= 1`.
pub fn universal_int_length(n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "universal integer code needs n >= 1".into(),
        ));
    }
    let mut bits = LOG_STAR_C0.log2();
    let mut x = (n as f64).log2();
    while x > 0.0 {
        bits += x;
        x = x.log2();
    }
    Ok(bits)
}

/// `L_N(n)` for values that are `>= 1` by construction.
#[inline]
pub(crate) fn lstar(n: u64) -> f64 {
    universal_int_length(n.max(1)).expect("n >= 1")
}

/// `log2 C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::InvalidArgument(format!("binomial with k={k} > n={n}")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k <= 64 {
        let mut acc = 0.0;
        for i in 1..=k {
            acc += ((n - k + i) as f64 / i as f64).log2();
        }
        return Ok(acc);
    }
    let ln = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
    Ok(ln / std::f64::consts::LN_2)
}

#[inline]
fn log_binom(n: u64, k: u64) -> f64 {
    log_binomial(n, k).expect("k <= n")
}

/// Prequential length of one pattern's fill and gap codes.
pub fn prequential_meta_length(fills: u64, gaps: u64) -> f64 {
    let eps = PREQUENTIAL_EPSILON;
    let mut bits = 0.0;
    for i in 1..=fills {
        let i = i as f64;
        bits -= ((eps + i) / (2.0 * eps + i)).log2();
    }
    let f = fills as f64;
    for i in 1..=gaps {
        let i = i as f64;
        bits -= ((eps + i) / (2.0 * eps + f + i)).log2();
    }
    bits
}

/// Closed form of [`prequential_meta_length`] through log-gamma, for use
/// where the counts are large and an O(1) evaluation is needed.
pub(crate) fn prequential_meta_length_fast(fills: u64, gaps: u64) -> f64 {
    let eps = PREQUENTIAL_EPSILON;
    let (f, g) = (fills as f64, gaps as f64);
    let ln = (ln_gamma(2.0 * eps + f + 1.0) - ln_gamma(2.0 * eps + 1.0))
        - (ln_gamma(eps + f + 1.0) - ln_gamma(eps + 1.0))
        + (ln_gamma(2.0 * eps + f + g + 1.0) - ln_gamma(2.0 * eps + f + 1.0))
        - (ln_gamma(eps + g + 1.0) - ln_gamma(eps + 1.0));
    ln / std::f64::consts::LN_2
}

/// Bits needed to distribute `total` usage over `codes` pattern codes, each
/// usage allowed to be zero.
pub fn usage_distribution_length(total: u64, codes: u64) -> f64 {
    if codes == 0 {
        0.0
    } else {
        log_binom(total + codes - 1, codes - 1)
    }
}

/// Standard-table code lengths `L(e | ST) = -log2(supp(e) / ||D||)`.
#[derive(Debug, Clone)]
pub struct StandardTable {
    lengths: Vec<f64>,
}

impl StandardTable {
    pub fn new(db: &SequenceDatabase) -> Self {
        let total = db.total_events() as f64;
        let lengths = db
            .supports()
            .iter()
            .map(|&s| {
                if s == 0 {
                    f64::INFINITY
                } else {
                    -(s as f64 / total).log2()
                }
            })
            .collect();
        Self { lengths }
    }

    pub fn code_length(&self, e: EventId) -> Result<f64> {
        match self.lengths.get(e.index()) {
            Some(l) if l.is_finite() => Ok(*l),
            Some(_) => Err(Error::ZeroSupport(e.0)),
            None => Err(Error::UnknownEvent(e.0)),
        }
    }
}

/// `L(X | ST)`. Serial episodes only pay for their length and events.
pub fn pattern_model_length(x: &Pattern, st: &StandardTable) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::InvalidArgument("pattern needs at least two slots".into()));
    }
    let mut event_bits = 0.0;
    for slot in x.slots() {
        for &e in slot {
            event_bits += st.code_length(e)?;
        }
    }
    Ok(pattern_model_length_parts(
        x.len() as u64,
        x.size() as u64,
        event_bits,
    ))
}

/// `L(X | ST)` from the slot count, the number of events over all slots and
/// the summed standard code lengths of those events.
pub(crate) fn pattern_model_length_parts(len: u64, size: u64, event_bits: f64) -> f64 {
    let mut bits = lstar(len);
    if size > len {
        bits += lstar(size - len + 1) + log_binom(size - 1, len - 1);
    }
    bits + event_bits
}

/// Usage statistics of one non-singleton pattern under a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternUsage {
    pub id: PatternId,
    pub pattern: Pattern,
    /// Usage per concrete instantiation; each has its own pattern code.
    pub instances: BTreeMap<Vec<EventId>, u64>,
    pub gaps: u64,
    pub fills: u64,
}

impl PatternUsage {
    pub fn new(id: PatternId, pattern: Pattern) -> Self {
        Self {
            id,
            pattern,
            instances: BTreeMap::new(),
            gaps: 0,
            fills: 0,
        }
    }

    pub fn usage(&self) -> u64 {
        self.instances.values().sum()
    }
}

/// The code table: singleton usages plus the pattern set with cover statistics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeTable {
    pub singleton_usage: Vec<u64>,
    pub patterns: Vec<PatternUsage>,
}

impl CodeTable {
    /// The standard table: singletons only, usage equal to support.
    pub fn standard(db: &SequenceDatabase) -> Self {
        Self {
            singleton_usage: db.supports().to_vec(),
            patterns: Vec::new(),
        }
    }

    /// `Σ_Y usage(Y)` over singletons and pattern instantiations.
    pub fn total_usage(&self) -> u64 {
        self.singleton_usage.iter().sum::<u64>() + self.pattern_usage()
    }

    /// `usage(P)`.
    pub fn pattern_usage(&self) -> u64 {
        self.patterns.iter().map(PatternUsage::usage).sum()
    }

    /// Number of pattern codes: one per possible instantiation.
    pub fn pattern_codes(&self) -> u64 {
        self.patterns.iter().map(|p| p.pattern.num_instantiations()).sum()
    }

    pub fn index_of(&self, id: PatternId) -> Option<usize> {
        self.patterns.iter().position(|p| p.id == id)
    }

    /// Pattern code length of one instantiation.
    pub fn pattern_code_length(&self, pattern: usize, instance: &[EventId]) -> Result<f64> {
        let usage = self.patterns[pattern]
            .instances
            .get(instance)
            .copied()
            .unwrap_or(0);
        shannon(usage, self.total_usage())
    }

    pub fn singleton_code_length(&self, e: EventId) -> Result<f64> {
        let usage = self
            .singleton_usage
            .get(e.index())
            .copied()
            .ok_or(Error::UnknownEvent(e.0))?;
        shannon(usage, self.total_usage())
    }

    /// Smoothed per-record lengths of the gap and fill codes of a pattern.
    pub fn meta_code_lengths(&self, pattern: usize) -> (f64, f64) {
        let p = &self.patterns[pattern];
        meta_code_lengths(p.gaps, p.fills)
    }
}

pub(crate) fn meta_code_lengths(gaps: u64, fills: u64) -> (f64, f64) {
    let eps = PREQUENTIAL_EPSILON;
    let denom = gaps as f64 + fills as f64 + 2.0 * eps;
    (
        -((gaps as f64 + eps) / denom).log2(),
        -((fills as f64 + eps) / denom).log2(),
    )
}

fn shannon(usage: u64, total: u64) -> Result<f64> {
    if usage == 0 || total == 0 {
        return Err(Error::ZeroUsage);
    }
    Ok(-(usage as f64 / total as f64).log2())
}

/// `u * log2(u)` with `0 log 0 = 0`.
#[inline]
pub(crate) fn xlogx(u: u64) -> f64 {
    if u == 0 {
        0.0
    } else {
        let u = u as f64;
        u * u.log2()
    }
}

/// `L(C_p)`: Shannon-optimal pattern codes over all singleton and
/// instantiation usages.
pub fn pattern_stream_length(ct: &CodeTable) -> f64 {
    let total = ct.total_usage();
    if total == 0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for &u in &ct.singleton_usage {
        sum += xlogx(u);
    }
    for p in &ct.patterns {
        for &u in p.instances.values() {
            sum += xlogx(u);
        }
    }
    (xlogx(total) - sum).max(0.0)
}

/// `L(C_m)`: prequential gap/fill codes, summed per pattern.
pub fn meta_stream_length(ct: &CodeTable) -> f64 {
    ct.patterns
        .iter()
        .map(|p| prequential_meta_length(p.fills, p.gaps))
        .sum()
}

/// `L(CT | D, C)`.
pub fn code_table_length(ct: &CodeTable, db: &SequenceDatabase) -> Result<f64> {
    let st = StandardTable::new(db);
    let mut bits = standard_model_length(db) + lstar(ct.patterns.len() as u64 + 1);
    let usage = ct.pattern_usage();
    bits += lstar(usage + 1) + usage_distribution_length(usage, ct.pattern_codes());
    for p in &ct.patterns {
        bits += pattern_model_length(&p.pattern, &st)?;
    }
    Ok(bits)
}

/// Alphabet size plus singleton supports: `L_N(|Ω|) + log2 C(||D||, |Ω|)`.
pub fn standard_model_length(db: &SequenceDatabase) -> f64 {
    let omega = db.alphabet_size() as u64;
    lstar(omega) + log_binom(db.total_events() as u64, omega)
}

/// `L_N(|D|) + Σ L_N(|S|)`.
pub fn sequence_lengths_length(db: &SequenceDatabase) -> f64 {
    lstar(db.num_sequences() as u64) + db.sequences().iter().map(|s| lstar(s.len() as u64)).sum::<f64>()
}

/// `L(D | CT)` from cover statistics.
pub fn data_length(db: &SequenceDatabase, ct: &CodeTable) -> f64 {
    sequence_lengths_length(db) + pattern_stream_length(ct) + meta_stream_length(ct)
}

/// Components of `L(CT, D)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthBreakdown {
    pub model: f64,
    pub data: f64,
    pub total: f64,
}

/// `L(CT, D) = L(CT | C) + L(D | CT)`.
pub fn total_length(db: &SequenceDatabase, ct: &CodeTable) -> Result<LengthBreakdown> {
    let model = code_table_length(ct, db)?;
    let data = data_length(db, ct);
    Ok(LengthBreakdown {
        model,
        data,
        total: model + data,
    })
}

/// `L(D, ST)`: the singleton-only baseline.
pub fn standard_length(db: &SequenceDatabase) -> f64 {
    total_length(db, &CodeTable::standard(db))
        .expect("standard table is always encodable")
        .total
}
