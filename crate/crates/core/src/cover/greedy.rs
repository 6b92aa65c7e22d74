//! Greedy extension of a selection with the windows of one more pattern.

use super::{CoverMode, SelectedWindows, Window};
use crate::pattern::{Pattern, PatternId};
use crate::seqdb::{InvertedIndex, SequenceDatabase};

/// Order in which mutually overlapping free-standing candidates compete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdmissionOrder {
    /// Decreasing span, earlier start first on ties.
    LongestFirst,
    /// Increasing span, earlier start first on ties. Prefers the window
    /// with fewer gaps when two candidates share events.
    #[default]
    ShortestFirst,
    /// By `(seq, start)`.
    Positional,
}

/// A maximal block of selected windows whose spans overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowExtend {
    pub seq: u32,
    pub start: u32,
    pub end: u32,
}

/// Window extends of a selection, sorted by position.
pub fn window_extends(sel: &SelectedWindows) -> Vec<WindowExtend> {
    let mut out = Vec::new();
    for seq in 0..sel.num_sequences() as u32 {
        let mut open = None;
        for o in 0..sel.seq_len(seq) {
            if !sel.in_span(seq, o) {
                continue;
            }
            let start = *open.get_or_insert(o);
            if sel.edge_depth(seq, o as i64) == 0 {
                out.push(WindowExtend { seq, start, end: o });
                open = None;
            }
        }
    }
    out
}

/// Adds windows of `pattern` to `sel`; returns the number admitted.
///
/// Candidates whose span is clear of all selected spans compete among
/// themselves in `order`. In interleaved mode, candidates reaching into an
/// extend are admitted if their matched offsets are free, and further
/// windows are searched on the fly over free offsets starting inside an
/// extend or at a rejected candidate. Disjoint mode expects minimal
/// candidates and only admits clear ones.
#[allow(clippy::too_many_arguments)]
pub fn greedy_cover(
    sel: &mut SelectedWindows,
    db: &SequenceDatabase,
    index: &InvertedIndex,
    pattern: &Pattern,
    id: PatternId,
    candidates: &[Window],
    mode: CoverMode,
    order: AdmissionOrder,
) -> usize {
    let mut clear: Vec<&Window> = Vec::new();
    let mut touching: Vec<&Window> = Vec::new();
    for w in candidates {
        if sel.span_is_clear(w.seq, w.start(), w.end()) {
            clear.push(w);
        } else {
            touching.push(w);
        }
    }

    let mut seeds: Vec<(u32, u32)> = Vec::new();
    if mode == CoverMode::Interleaved && !sel.is_empty() {
        for &e in pattern.slot(0) {
            for p in index.positions(e) {
                if sel.is_free(p.seq, p.offset) && sel.in_span(p.seq, p.offset) {
                    seeds.push((p.seq, p.offset));
                }
            }
        }
    }

    match order {
        AdmissionOrder::LongestFirst => {
            clear.sort_by_key(|w| (std::cmp::Reverse(w.span()), w.seq, w.start()))
        }
        AdmissionOrder::ShortestFirst => clear.sort_by_key(|w| (w.span(), w.seq, w.start())),
        AdmissionOrder::Positional => clear.sort_by_key(|w| (w.seq, w.start())),
    }

    let mut admitted = 0;
    for w in clear {
        if sel.fits(w) {
            sel.insert(w.clone()).expect("checked fit");
            admitted += 1;
        } else {
            seeds.push((w.seq, w.start()));
        }
    }
    if mode == CoverMode::Disjoint {
        return admitted;
    }

    for w in touching {
        if sel.fits(w) {
            sel.insert(w.clone()).expect("checked fit");
            admitted += 1;
        } else {
            seeds.push((w.seq, w.start()));
        }
    }

    seeds.sort_unstable();
    seeds.dedup();
    for (seq, start) in seeds {
        if !sel.is_free(seq, start) {
            continue;
        }
        if let Some(matched) = search_free_window(db, sel, pattern, seq, start) {
            sel.insert(Window {
                seq,
                matched,
                pattern: id,
            })
            .expect("search only matches free offsets");
            admitted += 1;
        }
    }
    admitted
}

/// Greedy leftmost match of `pattern` from `start` over free offsets, with
/// span at most `2|X| - 1`.
fn search_free_window(
    db: &SequenceDatabase,
    sel: &SelectedWindows,
    pattern: &Pattern,
    seq: u32,
    start: u32,
) -> Option<Vec<u32>> {
    let events = db.sequence(seq as usize);
    if !pattern.slot_matches(0, events[start as usize]) {
        return None;
    }
    let limit = (start as usize + 2 * pattern.len() - 2).min(events.len() - 1) as u32;
    let mut matched = Vec::with_capacity(pattern.len());
    matched.push(start);
    let mut pos = start + 1;
    for i in 1..pattern.len() {
        loop {
            if pos > limit {
                return None;
            }
            if sel.is_free(seq, pos) && pattern.slot_matches(i, events[pos as usize]) {
                matched.push(pos);
                pos += 1;
                break;
            }
            pos += 1;
        }
    }
    Some(matched)
}
