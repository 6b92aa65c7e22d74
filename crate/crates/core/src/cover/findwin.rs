//! Candidate windows of a pattern in the raw database.
//!
//! Every occurrence of a first-slot event starts one greedy leftmost match.
//! Partial matches are advanced in increasing order of their current span so
//! that a shared gap budget can be spent on the cheapest windows first. A
//! window of length `ℓ` completed for pattern `X` credits `2|X| - ℓ - 1` to
//! the budget; a gap at span `L` is tolerated only while
//! `b + 2|X| - L - 1 >= 0`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::Window;
use crate::pattern::{Pattern, PatternId};
use crate::seqdb::InvertedIndex;

/// Gap budget shared by all windows found in one invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BudgetState {
    pub balance: i64,
}

impl BudgetState {
    /// Largest span at which a gap or a completion is still admissible.
    fn allowed_span(&self, pattern_len: usize) -> i64 {
        self.balance + 2 * pattern_len as i64 - 1
    }
}

struct Partial {
    seq: u32,
    matched: Vec<u32>,
    /// Offset where the next slot matches greedily.
    next: u32,
    /// Gaps before `next` have been checked against the budget.
    checked: bool,
}

impl Partial {
    fn start(&self) -> u32 {
        self.matched[0]
    }

    fn last(&self) -> u32 {
        *self.matched.last().expect("non-empty")
    }

    /// Span once `next` is matched.
    fn span_at_next(&self) -> i64 {
        (self.next - self.start() + 1) as i64
    }

    /// Span at the first gap position, if there are gaps before `next`.
    fn first_gap_span(&self) -> Option<i64> {
        (self.next > self.last() + 1).then(|| (self.last() - self.start() + 2) as i64)
    }
}

/// Candidate windows of `pattern`, sorted by `(seq, start)`, with a fresh budget.
pub fn find_windows(index: &InvertedIndex, pattern: &Pattern, id: PatternId) -> Vec<Window> {
    let mut budget = BudgetState::default();
    find_windows_with_budget(index, pattern, id, &mut budget, None)
}

/// As [`find_windows`] with an explicit budget; `max_span` optionally drops
/// partial matches whose span would exceed it.
pub fn find_windows_with_budget(
    index: &InvertedIndex,
    pattern: &Pattern,
    id: PatternId,
    budget: &mut BudgetState,
    max_span: Option<u32>,
) -> Vec<Window> {
    let k = pattern.len();
    let max_span = max_span.map_or(i64::MAX, i64::from);
    let mut out = Vec::new();
    let mut arena: Vec<Partial> = Vec::new();
    // (time, seq, start, arena index)
    let mut heap: BinaryHeap<Reverse<(i64, u32, u32, usize)>> = BinaryHeap::new();

    let mut starts: Vec<(u32, u32)> = pattern
        .slot(0)
        .iter()
        .flat_map(|&e| index.positions(e).iter().map(|p| (p.seq, p.offset)))
        .collect();
    starts.sort_unstable();

    for (seq, start) in starts {
        if k == 1 {
            admit(budget, k, 1, seq, vec![start], id, &mut out);
            continue;
        }
        let Some(next) = index.next_of_any(pattern.slot(1), seq, start + 1) else {
            continue;
        };
        let p = Partial {
            seq,
            matched: vec![start],
            next,
            checked: false,
        };
        schedule(&mut heap, &mut arena, p, budget, k, 0, max_span);
    }

    while let Some(Reverse((time, _, _, slot))) = heap.pop() {
        let mut p = std::mem::replace(
            &mut arena[slot],
            Partial {
                seq: 0,
                matched: Vec::new(),
                next: 0,
                checked: true,
            },
        );
        if !p.checked {
            schedule(&mut heap, &mut arena, p, budget, k, time, max_span);
            continue;
        }
        p.matched.push(p.next);
        if p.matched.len() == k {
            let span = p.span_at_next();
            admit(budget, k, span, p.seq, p.matched, id, &mut out);
            continue;
        }
        let Some(next) = index.next_of_any(pattern.slot(p.matched.len()), p.seq, p.next + 1) else {
            continue;
        };
        p.next = next;
        p.checked = false;
        schedule(&mut heap, &mut arena, p, budget, k, time, max_span);
    }

    out.sort_by_key(|w| (w.seq, w.start()));
    out
}

/// Checks the gaps before `p.next` against the budget at `now` and queues
/// the partial either for its match or for a later re-check.
fn schedule(
    heap: &mut BinaryHeap<Reverse<(i64, u32, u32, usize)>>,
    arena: &mut Vec<Partial>,
    mut p: Partial,
    budget: &BudgetState,
    k: usize,
    now: i64,
    max_span: i64,
) {
    let target = p.span_at_next();
    if target > max_span {
        return;
    }
    let allowed = budget.allowed_span(k);
    let time = match p.first_gap_span() {
        Some(first_gap) if target > allowed => {
            let fail_at = first_gap.max(allowed + 1);
            if fail_at <= now {
                return;
            }
            p.checked = false;
            fail_at
        }
        _ => {
            p.checked = true;
            target
        }
    };
    let key = (time, p.seq, p.start());
    let slot = arena.len();
    arena.push(p);
    heap.push(Reverse((key.0, key.1, key.2, slot)));
}

fn admit(
    budget: &mut BudgetState,
    k: usize,
    span: i64,
    seq: u32,
    matched: Vec<u32>,
    id: PatternId,
    out: &mut Vec<Window>,
) {
    let credit = 2 * k as i64 - span - 1;
    if budget.balance + credit >= 0 {
        budget.balance += credit;
        out.push(Window {
            seq,
            matched,
            pattern: id,
        });
    }
}

/// Whether no occurrence of `pattern` lies strictly inside the span of `w`
/// when starting after `w.start()`. For greedy windows this makes `w` minimal.
pub fn is_minimal_window(index: &InvertedIndex, pattern: &Pattern, w: &Window) -> bool {
    let Some(mut pos) = index.next_of_any(pattern.slot(0), w.seq, w.start() + 1) else {
        return true;
    };
    if pos > w.end() {
        return true;
    }
    for i in 1..pattern.len() {
        match index.next_of_any(pattern.slot(i), w.seq, pos + 1) {
            Some(p) if p <= w.end() => pos = p,
            _ => return true,
        }
    }
    false
}
