//! Event-sequence databases: ingestion, the token alphabet, event supports and
//! the inverted index used by window search.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use crate::error::{Error, Result};

/// Dense index of an event in the alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

impl EventId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub type Sequence = Vec<EventId>;

/// Input layout accepted by [`SequenceDatabase::load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// Arbitrary tokens; ids assigned in order of first appearance.
    TokenText,
    /// Base-10 non-negative integers used directly as event ids.
    IntegerText,
}

/// Bidirectional token <-> id map. Ids are dense `0..len`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    ids: HashMap<String, EventId>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `token`, registering it if unseen.
    pub fn intern(&mut self, token: &str) -> EventId {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = EventId(self.tokens.len() as u32);
        self.tokens.push(token.to_owned());
        self.ids.insert(token.to_owned(), id);
        id
    }

    pub fn id(&self, token: &str) -> Option<EventId> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: EventId) -> Option<&str> {
        self.tokens.get(id.index()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// An immutable database of event sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDatabase {
    sequences: Vec<Sequence>,
    alphabet: Alphabet,
    supports: Vec<u64>,
    total_events: usize,
}

impl SequenceDatabase {
    /// Builds a database from already-mapped sequences. Empty sequences are
    /// dropped; every id must be present in `alphabet`.
    pub fn new(sequences: Vec<Sequence>, alphabet: Alphabet) -> Result<Self> {
        let sequences: Vec<Sequence> = sequences.into_iter().filter(|s| !s.is_empty()).collect();
        let mut supports = vec![0u64; alphabet.len()];
        let mut total_events = 0;
        for seq in &sequences {
            total_events += seq.len();
            for &e in seq {
                match supports.get_mut(e.index()) {
                    Some(c) => *c += 1,
                    None => return Err(Error::UnknownEvent(e.0)),
                }
            }
        }
        Ok(Self {
            sequences,
            alphabet,
            supports,
            total_events,
        })
    }

    /// Builds a database from token sequences, assigning ids by first appearance.
    pub fn from_token_sequences<S: AsRef<str>>(sequences: &[Vec<S>]) -> Result<Self> {
        let mut alphabet = Alphabet::new();
        let seqs = sequences
            .iter()
            .map(|s| s.iter().map(|t| alphabet.intern(t.as_ref())).collect())
            .collect();
        let db = Self::new(seqs, alphabet)?;
        if db.sequences.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Ok(db)
    }

    /// Parses one sequence per line; tokens are separated by U+0020.
    pub fn load<R: BufRead>(reader: R, format: InputFormat) -> Result<Self> {
        let mut alphabet = Alphabet::new();
        let mut raw_ids: Vec<Vec<u32>> = Vec::new();
        let mut sequences: Vec<Sequence> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let mut column = 1;
            let mut seq = Vec::new();
            let mut ints = Vec::new();
            for token in line.split(' ') {
                if !token.is_empty() {
                    match format {
                        InputFormat::TokenText => seq.push(alphabet.intern(token)),
                        InputFormat::IntegerText => {
                            let v: u32 = token.parse().map_err(|_| Error::Parse {
                                line: lineno + 1,
                                column,
                                message: format!("expected a non-negative integer, found {token:?}"),
                            })?;
                            ints.push(v);
                        }
                    }
                }
                column += token.len() + 1;
            }
            match format {
                InputFormat::TokenText if !seq.is_empty() => sequences.push(seq),
                InputFormat::IntegerText if !ints.is_empty() => raw_ids.push(ints),
                _ => {}
            }
        }
        if format == InputFormat::IntegerText {
            let max = raw_ids.iter().flatten().copied().max();
            let Some(max) = max else {
                return Err(Error::EmptyDatabase);
            };
            let mut seen = vec![false; max as usize + 1];
            for &v in raw_ids.iter().flatten() {
                seen[v as usize] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidArgument(format!(
                    "integer ids must be dense: id {missing} never occurs but {max} does"
                )));
            }
            for v in 0..=max {
                alphabet.intern(&v.to_string());
            }
            sequences = raw_ids
                .into_iter()
                .map(|s| s.into_iter().map(EventId).collect())
                .collect();
        }
        if sequences.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Self::new(sequences, alphabet)
    }

    pub fn load_str(text: &str, format: InputFormat) -> Result<Self> {
        Self::load(text.as_bytes(), format)
    }

    /// Serialises back to token text, one sequence per line.
    pub fn to_token_text(&self) -> String {
        let mut out = String::with_capacity(self.total_events * 4);
        for seq in &self.sequences {
            for (i, &e) in seq.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(self.alphabet.token(e).unwrap_or("?"));
            }
            out.push('\n');
        }
        out
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.sequences
    }

    pub fn sequence(&self, idx: usize) -> &[EventId] {
        &self.sequences[idx]
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// `|D|`
    pub fn num_sequences(&self) -> usize {
        self.sequences.len()
    }

    /// `||D||`
    pub fn total_events(&self) -> usize {
        self.total_events
    }

    /// `|Ω|`
    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn support(&self, e: EventId) -> Result<u64> {
        self.supports
            .get(e.index())
            .copied()
            .ok_or(Error::UnknownEvent(e.0))
    }

    pub fn supports(&self) -> &[u64] {
        &self.supports
    }

    pub fn sequence_lengths(&self) -> Vec<usize> {
        self.sequences.iter().map(Vec::len).collect()
    }
}

/// Occurrence position of an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub seq: u32,
    pub offset: u32,
}

/// Per-event sorted occurrence lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvertedIndex {
    positions: Vec<Vec<Position>>,
}

impl InvertedIndex {
    pub fn build(db: &SequenceDatabase) -> Self {
        let mut positions: Vec<Vec<Position>> = db
            .supports()
            .iter()
            .map(|&s| Vec::with_capacity(s as usize))
            .collect();
        for (si, seq) in db.sequences().iter().enumerate() {
            for (off, &e) in seq.iter().enumerate() {
                positions[e.index()].push(Position {
                    seq: si as u32,
                    offset: off as u32,
                });
            }
        }
        Self { positions }
    }

    pub fn positions(&self, e: EventId) -> &[Position] {
        self.positions.get(e.index()).map_or(&[], Vec::as_slice)
    }

    /// First offset `>= offset` in sequence `seq` where `e` occurs.
    pub fn next_occurrence(&self, e: EventId, seq: u32, offset: u32) -> Option<u32> {
        let list = self.positions(e);
        let key = Position { seq, offset };
        let i = list.partition_point(|p| *p < key);
        list.get(i).filter(|p| p.seq == seq).map(|p| p.offset)
    }

    /// First offset `>= offset` in `seq` where any of `events` occurs.
    pub fn next_of_any(&self, events: &[EventId], seq: u32, offset: u32) -> Option<u32> {
        events
            .iter()
            .filter_map(|&e| self.next_occurrence(e, seq, offset))
            .min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_counts() {
        let db = SequenceDatabase::load_str("a b a\nc a", InputFormat::TokenText).unwrap();
        assert_eq!(db.num_sequences(), 2);
        assert_eq!(db.total_events(), 5);
        assert_eq!(db.alphabet_size(), 3);
        let a = db.alphabet().id("a").unwrap();
        assert_eq!(a, EventId(0));
        assert_eq!(db.support(a).unwrap(), 3);
    }

    #[test]
    fn empty_input_is_rejected() {
        let err = SequenceDatabase::load_str("", InputFormat::TokenText).unwrap_err();
        assert_eq!(err.to_string(), "empty database");
        let err = SequenceDatabase::load_str("\n\n", InputFormat::IntegerText).unwrap_err();
        assert!(matches!(err, Error::EmptyDatabase));
    }

    #[test]
    fn blank_lines_skipped() {
        let db = SequenceDatabase::load_str("a\n\nb b\n", InputFormat::TokenText).unwrap();
        assert_eq!(db.num_sequences(), 2);
        assert_eq!(db.total_events(), 3);
    }

    #[test]
    fn integer_format_errors_name_position() {
        let err = SequenceDatabase::load_str("0 1\n1 x 0", InputFormat::IntegerText).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 3);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(SequenceDatabase::load_str("0 -1", InputFormat::IntegerText).is_err());
        // not dense
        assert!(SequenceDatabase::load_str("0 2", InputFormat::IntegerText).is_err());
        let db = SequenceDatabase::load_str("2 0 1\n1", InputFormat::IntegerText).unwrap();
        assert_eq!(db.sequence(0), &[EventId(2), EventId(0), EventId(1)]);
        assert_eq!(db.support(EventId(1)).unwrap(), 2);
    }

    #[test]
    fn support_of_absent_and_unknown() {
        let mut alphabet = Alphabet::new();
        let a = alphabet.intern("a");
        let z = alphabet.intern("z");
        let db = SequenceDatabase::new(vec![vec![a, a, a]], alphabet).unwrap();
        assert_eq!(db.support(a).unwrap(), 3);
        assert_eq!(db.support(z).unwrap(), 0);
        assert!(matches!(db.support(EventId(7)), Err(Error::UnknownEvent(7))));
    }

    #[test]
    fn inverted_index_positions() {
        let db = SequenceDatabase::load_str("a b a", InputFormat::TokenText).unwrap();
        let idx = InvertedIndex::build(&db);
        let a = db.alphabet().id("a").unwrap();
        let pos: Vec<(u32, u32)> = idx.positions(a).iter().map(|p| (p.seq, p.offset)).collect();
        assert_eq!(pos, vec![(0, 0), (0, 2)]);
        assert_eq!(idx.next_occurrence(a, 0, 1), Some(2));
        assert_eq!(idx.next_occurrence(a, 0, 3), None);

        let db = SequenceDatabase::load_str("q q q q q q", InputFormat::TokenText).unwrap();
        let idx = InvertedIndex::build(&db);
        assert_eq!(idx.positions(EventId(0)).len(), 6);
    }

    #[test]
    fn round_trip_token_text() {
        let text = "x y z\nz z\ny\n";
        let db = SequenceDatabase::load_str(text, InputFormat::TokenText).unwrap();
        assert_eq!(db.to_token_text(), text);
        let again = SequenceDatabase::load_str(&db.to_token_text(), InputFormat::TokenText).unwrap();
        assert_eq!(again, db);
    }
}
