//! Pattern windows and covers.
//!
//! A cover is a set of selected windows whose matched offsets are pairwise
//! disjoint; every offset not matched by a window is coded as a singleton.
//! Windows may interleave or nest unless the cover runs in disjoint mode.

mod findwin;
mod greedy;
mod order;

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::encoding::{CodeTable, PatternUsage};
use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternId};
use crate::seqdb::{EventId, SequenceDatabase};

pub use findwin::{find_windows, find_windows_with_budget, is_minimal_window, BudgetState};
pub use greedy::{greedy_cover, window_extends, AdmissionOrder, WindowExtend};
pub use order::{candidate_order_cmp, CandidateKey};

/// Whether windows of different patterns may interleave and nest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverMode {
    Disjoint,
    #[default]
    Interleaved,
}

/// One occurrence of a pattern: the matched offsets, one per slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window {
    pub seq: u32,
    pub matched: Vec<u32>,
    pub pattern: PatternId,
}

impl Window {
    pub fn start(&self) -> u32 {
        self.matched[0]
    }

    pub fn end(&self) -> u32 {
        *self.matched.last().expect("window has at least one slot")
    }

    /// Span length `end - start + 1`.
    pub fn span(&self) -> u32 {
        self.end() - self.start() + 1
    }

    /// Offsets inside the span not matched by this window.
    pub fn gaps(&self) -> u32 {
        self.span() - self.matched.len() as u32
    }

    /// Events realised by this window.
    pub fn instance(&self, db: &SequenceDatabase) -> Vec<EventId> {
        let seq = db.sequence(self.seq as usize);
        self.matched.iter().map(|&o| seq[o as usize]).collect()
    }
}

const NONE: u32 = u32::MAX;

/// The non-singleton part of a cover, with per-offset ownership and span
/// depth so that overlap and nesting queries are O(window length).
#[derive(Debug, Clone)]
pub struct SelectedWindows {
    seq_start: Vec<usize>,
    owner: Vec<u32>,
    /// Number of selected spans covering the edge between offset `i` and `i+1`.
    edges: Vec<u32>,
    windows: Vec<Option<Window>>,
    free_slots: Vec<u32>,
    by_pattern: HashMap<PatternId, Vec<u32>>,
}

impl SelectedWindows {
    pub fn new(db: &SequenceDatabase) -> Self {
        let mut seq_start = Vec::with_capacity(db.num_sequences() + 1);
        let mut acc = 0;
        for s in db.sequences() {
            seq_start.push(acc);
            acc += s.len();
        }
        seq_start.push(acc);
        Self {
            seq_start,
            owner: vec![NONE; acc],
            edges: vec![0; acc],
            windows: Vec::new(),
            free_slots: Vec::new(),
            by_pattern: HashMap::new(),
        }
    }

    /// Builds a selection from explicit windows, validating each against the
    /// database and its pattern.
    pub fn from_windows<'a, F>(db: &SequenceDatabase, windows: &[Window], pattern_of: F) -> Result<Self>
    where
        F: Fn(PatternId) -> Option<&'a Pattern>,
    {
        let mut sel = Self::new(db);
        for w in windows {
            let pattern = pattern_of(w.pattern)
                .ok_or_else(|| Error::InvalidCover(format!("unknown pattern {:?}", w.pattern)))?;
            validate_window(db, pattern, w)?;
            sel.insert(w.clone())?;
        }
        Ok(sel)
    }

    #[inline]
    fn flat(&self, seq: u32, offset: u32) -> usize {
        self.seq_start[seq as usize] + offset as usize
    }

    pub fn seq_len(&self, seq: u32) -> u32 {
        (self.seq_start[seq as usize + 1] - self.seq_start[seq as usize]) as u32
    }

    pub fn num_sequences(&self) -> usize {
        self.seq_start.len() - 1
    }

    /// Whether no selected window matches this offset.
    #[inline]
    pub fn is_free(&self, seq: u32, offset: u32) -> bool {
        self.owner[self.flat(seq, offset)] == NONE
    }

    pub fn owner(&self, seq: u32, offset: u32) -> Option<&Window> {
        match self.owner[self.flat(seq, offset)] {
            NONE => None,
            slot => self.windows[slot as usize].as_ref(),
        }
    }

    #[inline]
    fn edge_depth(&self, seq: u32, edge: i64) -> u32 {
        if edge < 0 || edge + 1 >= self.seq_len(seq) as i64 {
            0
        } else {
            self.edges[self.flat(seq, edge as u32)]
        }
    }

    /// Whether `offset` lies within the span of some selected window.
    pub fn in_span(&self, seq: u32, offset: u32) -> bool {
        !self.is_free(seq, offset)
            || self.edge_depth(seq, offset as i64 - 1) > 0
            || self.edge_depth(seq, offset as i64) > 0
    }

    /// Whether `[start, end]` shares no offset with the span of any selected window.
    pub fn span_is_clear(&self, seq: u32, start: u32, end: u32) -> bool {
        (start as i64 - 1..=end as i64).all(|e| self.edge_depth(seq, e) == 0)
            && (start..=end).all(|o| self.is_free(seq, o))
    }

    /// Whether all matched offsets of `w` are free.
    pub fn fits(&self, w: &Window) -> bool {
        w.matched.iter().all(|&o| self.is_free(w.seq, o))
    }

    /// Adds a window; fails if it would overlap a selected window.
    pub fn insert(&mut self, w: Window) -> Result<()> {
        if !self.fits(&w) {
            return Err(Error::InvalidCover(format!(
                "window {:?} in sequence {} overlaps a selected window",
                w.matched, w.seq
            )));
        }
        let slot = match self.free_slots.pop() {
            Some(s) => s,
            None => {
                self.windows.push(None);
                (self.windows.len() - 1) as u32
            }
        };
        for &o in &w.matched {
            let i = self.flat(w.seq, o);
            self.owner[i] = slot;
        }
        for e in w.start()..w.end() {
            let i = self.flat(w.seq, e);
            self.edges[i] += 1;
        }
        self.by_pattern.entry(w.pattern).or_default().push(slot);
        self.windows[slot as usize] = Some(w);
        Ok(())
    }

    fn remove_slot(&mut self, slot: u32) -> Window {
        let w = self.windows[slot as usize].take().expect("live slot");
        for &o in &w.matched {
            let i = self.flat(w.seq, o);
            self.owner[i] = NONE;
        }
        for e in w.start()..w.end() {
            let i = self.flat(w.seq, e);
            self.edges[i] -= 1;
        }
        self.free_slots.push(slot);
        w
    }

    /// Evicts all windows of `pattern`, returning them sorted by position.
    pub fn remove_pattern(&mut self, pattern: PatternId) -> Vec<Window> {
        let slots = self.by_pattern.remove(&pattern).unwrap_or_default();
        let mut out: Vec<Window> = slots.into_iter().map(|s| self.remove_slot(s)).collect();
        out.sort_by_key(|w| (w.seq, w.start()));
        out
    }

    /// Windows of one pattern sorted by `(seq, start)`.
    pub fn windows_of(&self, pattern: PatternId) -> Vec<&Window> {
        let mut out: Vec<&Window> = self
            .by_pattern
            .get(&pattern)
            .map(|slots| {
                slots
                    .iter()
                    .filter_map(|&s| self.windows[s as usize].as_ref())
                    .collect()
            })
            .unwrap_or_default();
        out.sort_by_key(|w| (w.seq, w.start()));
        out
    }

    pub fn usage_of(&self, pattern: PatternId) -> usize {
        self.by_pattern.get(&pattern).map_or(0, Vec::len)
    }

    /// All windows sorted by `(seq, start)`.
    pub fn windows(&self) -> Vec<&Window> {
        let mut out: Vec<&Window> = self.windows.iter().flatten().collect();
        out.sort_by_key(|w| (w.seq, w.start()));
        out
    }

    pub fn len(&self) -> usize {
        self.windows.len() - self.free_slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of offsets matched by some window.
    pub fn covered_events(&self) -> usize {
        self.owner.iter().filter(|&&o| o != NONE).count()
    }

    /// Debug dump: one `W <seq> <pattern-id> <offsets>` line per window.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for w in self.windows() {
            let offs: Vec<String> = w.matched.iter().map(u32::to_string).collect();
            let _ = writeln!(out, "W {} {} {}", w.seq, w.pattern.0, offs.join(","));
        }
        out
    }
}

/// Checks that `w` is a well-formed occurrence of `pattern`.
pub fn validate_window(db: &SequenceDatabase, pattern: &Pattern, w: &Window) -> Result<()> {
    let seq = db
        .sequences()
        .get(w.seq as usize)
        .ok_or_else(|| Error::InvalidCover(format!("sequence {} out of range", w.seq)))?;
    if w.matched.len() != pattern.len() {
        return Err(Error::InvalidCover(format!(
            "window matches {} offsets for a pattern of {} slots",
            w.matched.len(),
            pattern.len()
        )));
    }
    if w.matched.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::InvalidCover("matched offsets not increasing".into()));
    }
    for (i, &o) in w.matched.iter().enumerate() {
        let e = *seq
            .get(o as usize)
            .ok_or_else(|| Error::InvalidCover(format!("offset {o} out of range")))?;
        if !pattern.slot_matches(i, e) {
            return Err(Error::InvalidCover(format!(
                "event at offset {o} does not match slot {i}"
            )));
        }
    }
    Ok(())
}

/// Usage, gap and fill statistics of the code table induced by a selection.
///
/// `patterns` lists the pattern set in code-table order; every selected
/// window must belong to one of them.
pub fn cover_to_stats(
    sel: &SelectedWindows,
    db: &SequenceDatabase,
    patterns: &[(PatternId, &Pattern)],
) -> Result<CodeTable> {
    let mut singleton_usage = db.supports().to_vec();
    let mut index: HashMap<PatternId, usize> = HashMap::with_capacity(patterns.len());
    let mut table: Vec<PatternUsage> = Vec::with_capacity(patterns.len());
    for (i, &(id, p)) in patterns.iter().enumerate() {
        index.insert(id, i);
        table.push(PatternUsage::new(id, p.clone()));
    }
    for w in sel.windows.iter().flatten() {
        let &i = index
            .get(&w.pattern)
            .ok_or_else(|| Error::InvalidCover(format!("window of unlisted pattern {:?}", w.pattern)))?;
        let inst = w.instance(db);
        for e in &inst {
            singleton_usage[e.index()] -= 1;
        }
        let entry = &mut table[i];
        *entry.instances.entry(inst).or_insert(0) += 1;
        entry.gaps += w.gaps() as u64;
        entry.fills += w.matched.len() as u64 - 1;
    }
    Ok(CodeTable {
        singleton_usage,
        patterns: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqdb::InputFormat;

    fn db(text: &str) -> SequenceDatabase {
        SequenceDatabase::load_str(text, InputFormat::TokenText).unwrap()
    }

    fn win(seq: u32, p: u32, m: &[u32]) -> Window {
        Window {
            seq,
            matched: m.to_vec(),
            pattern: PatternId(p),
        }
    }

    #[test]
    fn insert_rejects_overlap() {
        let d = db("a b c d");
        let mut sel = SelectedWindows::new(&d);
        sel.insert(win(0, 0, &[0, 2])).unwrap();
        assert!(sel.insert(win(0, 1, &[2, 3])).is_err());
        sel.insert(win(0, 1, &[1, 3])).unwrap();
        assert!(sel.in_span(0, 1));
        assert!(!sel.span_is_clear(0, 3, 3));
        assert_eq!(sel.covered_events(), 4);
        let removed = sel.remove_pattern(PatternId(0));
        assert_eq!(removed.len(), 1);
        assert!(sel.is_free(0, 0) && sel.is_free(0, 2));
        assert!(!sel.in_span(0, 0));
    }

    #[test]
    fn stats_for_single_window() {
        let d = db("a b c");
        let abc = Pattern::serial(&[EventId(0), EventId(1), EventId(2)]).unwrap();
        let mut sel = SelectedWindows::new(&d);
        sel.insert(win(0, 0, &[0, 1, 2])).unwrap();
        let ct = cover_to_stats(&sel, &d, &[(PatternId(0), &abc)]).unwrap();
        assert_eq!(ct.patterns[0].usage(), 1);
        assert_eq!(ct.patterns[0].fills, 2);
        assert_eq!(ct.patterns[0].gaps, 0);
        assert_eq!(ct.singleton_usage, vec![0, 0, 0]);

        let empty = SelectedWindows::new(&d);
        let ct = cover_to_stats(&empty, &d, &[]).unwrap();
        assert_eq!(ct.singleton_usage, d.supports());
    }

    #[test]
    fn validation() {
        let d = db("a b c");
        let ab = Pattern::serial(&[EventId(0), EventId(1)]).unwrap();
        assert!(validate_window(&d, &ab, &win(0, 0, &[0, 1])).is_ok());
        assert!(validate_window(&d, &ab, &win(0, 0, &[1, 0])).is_err());
        assert!(validate_window(&d, &ab, &win(0, 0, &[0, 2])).is_err());
        assert!(validate_window(&d, &ab, &win(0, 0, &[0, 9])).is_err());
    }

    #[test]
    fn dump_format() {
        let d = db("a b c d");
        let mut sel = SelectedWindows::new(&d);
        sel.insert(win(0, 3, &[1, 3])).unwrap();
        assert_eq!(sel.dump(), "W 0 3 1,3\n");
    }
}
