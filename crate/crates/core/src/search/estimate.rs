//! Candidate extensions `XY` ranked by an estimated change in total length.
//!
//! Joined windows are enumerated from shortest to longest by a priority
//! queue over the cover elements of `X`. Each anchor is combined with the
//! cover elements that start after it ends, until the next element of `X`.
//! The change in length for the best prefix of joins per `Y` is computed
//! in constant time per join from running usage and gap counts.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rustc_hash::FxHashSet;

use crate::cover::SelectedWindows;
use crate::encoding::{
    lstar, pattern_model_length_parts, prequential_meta_length_fast as meta_length,
    usage_distribution_length, xlogx, CodeTable, StandardTable,
};
use crate::pattern::Pattern;
use crate::seqdb::{EventId, SequenceDatabase};

/// One element of a cover: a window or a singleton code.
#[derive(Debug, Clone)]
struct Element {
    seq: u32,
    start: u32,
    end: u32,
    /// Code-table entry: event id for singletons, `|Ω| + i` for pattern `i`.
    entry: u32,
    /// Pattern-stream code: event id for singletons, or an instance code.
    code: u32,
    gaps: u32,
    gain: f64,
}

/// Per code-table entry quantities needed for constant-time deltas.
#[derive(Debug, Clone)]
struct EntryInfo {
    pattern: Pattern,
    len: u64,
    size: u64,
    event_bits: f64,
    instantiations: u64,
    is_pattern: bool,
    gaps: u64,
    fills: u64,
}

/// Immutable view of a cover prepared for estimation.
#[derive(Debug)]
pub struct CoverSnapshot {
    /// All elements, per sequence in order of `(end, start)`.
    elements: Vec<Element>,
    /// Exclusive end of each sequence's range in `elements`.
    seq_end: Vec<u32>,
    /// Per entry, indices of its elements.
    by_entry: Vec<Vec<u32>>,
    entries: Vec<EntryInfo>,
    code_usage: Vec<u64>,
    total_usage: u64,
    sum_xlogx: f64,
    num_patterns: u64,
    pattern_usage: u64,
    pattern_codes: u64,
}

/// An extension `XY` with its estimated change in total length (negative is better).
#[derive(Debug, Clone, PartialEq)]
pub struct Extension {
    pub pattern: Pattern,
    pub estimated_delta: f64,
    pub joined_windows: u64,
}

impl CoverSnapshot {
    pub fn build(db: &SequenceDatabase, sel: &SelectedWindows, ct: &CodeTable, disjoint: bool) -> Self {
        let alphabet = db.alphabet_size();
        let st = StandardTable::new(db);
        let mut code_usage: Vec<u64> = ct.singleton_usage.clone();
        let mut instance_codes: HashMap<(usize, &[EventId]), u32> = HashMap::new();
        for (i, p) in ct.patterns.iter().enumerate() {
            for (inst, &u) in &p.instances {
                instance_codes.insert((i, inst.as_slice()), code_usage.len() as u32);
                code_usage.push(u);
            }
        }
        let entry_of: HashMap<_, usize> = ct.patterns.iter().enumerate().map(|(i, p)| (p.id, i)).collect();

        let mut elements = Vec::with_capacity(db.total_events());
        let mut seq_end = Vec::with_capacity(db.num_sequences());
        for (si, seq) in db.sequences().iter().enumerate() {
            let si = si as u32;
            for (o, &e) in seq.iter().enumerate() {
                let o = o as u32;
                match sel.owner(si, o) {
                    None => elements.push(Element {
                        seq: si,
                        start: o,
                        end: o,
                        entry: e.0,
                        code: e.0,
                        gaps: 0,
                        gain: 0.0,
                    }),
                    Some(w) if w.end() == o => {
                        let Some(&pi) = entry_of.get(&w.pattern) else {
                            continue;
                        };
                        let inst = w.instance(db);
                        let gain = if disjoint {
                            window_gain(ct, pi, &inst, w.gaps() as u64).unwrap_or(0.0)
                        } else {
                            0.0
                        };
                        elements.push(Element {
                            seq: si,
                            start: w.start(),
                            end: o,
                            entry: (alphabet + pi) as u32,
                            code: instance_codes[&(pi, inst.as_slice())],
                            gaps: w.gaps(),
                            gain,
                        });
                    }
                    Some(_) => {}
                }
            }
            seq_end.push(elements.len() as u32);
        }

        let mut by_entry = vec![Vec::new(); alphabet + ct.patterns.len()];
        for (i, el) in elements.iter().enumerate() {
            by_entry[el.entry as usize].push(i as u32);
        }
        let info = |pattern: Pattern, is_pattern: bool, gaps: u64, fills: u64| {
            let event_bits = pattern
                .slots()
                .iter()
                .flatten()
                .map(|&e| st.code_length(e).unwrap_or(f64::INFINITY))
                .sum();
            EntryInfo {
                len: pattern.len() as u64,
                size: pattern.size() as u64,
                event_bits,
                instantiations: pattern.num_instantiations(),
                pattern,
                is_pattern,
                gaps,
                fills,
            }
        };
        let mut entries: Vec<EntryInfo> = (0..alphabet as u32)
            .map(|e| info(Pattern::singleton(EventId(e)), false, 0, 0))
            .collect();
        entries.extend(
            ct.patterns
                .iter()
                .map(|p| info(p.pattern.clone(), true, p.gaps, p.fills)),
        );

        Self {
            elements,
            seq_end,
            by_entry,
            entries,
            total_usage: code_usage.iter().sum(),
            sum_xlogx: code_usage.iter().map(|&u| xlogx(u)).sum(),
            code_usage,
            num_patterns: ct.patterns.len() as u64,
            pattern_usage: ct.pattern_usage(),
            pattern_codes: ct.pattern_codes(),
        }
    }

    /// Code-table entries with at least one element in the cover.
    pub fn live_entries(&self) -> Vec<u32> {
        (0..self.by_entry.len() as u32)
            .filter(|&i| !self.by_entry[i as usize].is_empty())
            .collect()
    }

    pub fn entry_pattern(&self, entry: u32) -> &Pattern {
        &self.entries[entry as usize].pattern
    }
}

/// Upper bound on the bits saved by coding one window with its pattern
/// rather than with singletons.
pub fn window_gain(ct: &CodeTable, pattern: usize, instance: &[EventId], gaps: u64) -> crate::Result<f64> {
    let (gap_bits, fill_bits) = ct.meta_code_lengths(pattern);
    let mut g = -ct.pattern_code_length(pattern, instance)?;
    g -= gaps as f64 * gap_bits;
    g -= (instance.len() as f64 - 1.0) * fill_bits;
    for &e in instance {
        g += ct.singleton_code_length(e)?;
    }
    Ok(g)
}

struct JoinState {
    y: u32,
    n: u64,
    gaps_v: u64,
    gaps_w: u64,
    gaps_u: u64,
    /// Usage taken from each code of `X` (and of `Y` when `Y = X`).
    x_codes: Vec<(u32, u64)>,
    x_delta: f64,
    y_delta: f64,
    joined: Vec<((u32, u32), u64)>,
    joined_sum: f64,
    penalty: f64,
    best: f64,
    best_n: u64,
    model_bits: f64,
}

fn take_code(snap: &CoverSnapshot, list: &mut Vec<(u32, u64)>, code: u32) -> f64 {
    let u = snap.code_usage[code as usize];
    let r = match list.iter_mut().find(|(c, _)| *c == code) {
        Some((_, r)) => r,
        None => {
            list.push((code, 0));
            &mut list.last_mut().expect("just pushed").1
        }
    };
    let d = xlogx(u - *r - 1) - xlogx(u - *r);
    *r += 1;
    d
}

/// (span, seq, anchor start, anchor ordinal, element index)
type HeapKey = (u32, u32, u32, u32, u32);

/// Extensions of the code-table entry `x` (see [`CoverSnapshot::live_entries`]),
/// best estimate first. Positive estimates are kept.
pub fn estimate(
    snap: &CoverSnapshot,
    x: u32,
    max_len: Option<usize>,
    span_cap: Option<u32>,
) -> Vec<Extension> {
    let xi = &snap.entries[x as usize];
    let anchors = &snap.by_entry[x as usize];
    let mut heap: BinaryHeap<Reverse<HeapKey>> = BinaryHeap::new();
    let mut penalties = vec![0.0f64; anchors.len()];
    let mut anchor_joined: FxHashSet<u64> = FxHashSet::default();
    let mut w_used: FxHashSet<u32> = FxHashSet::default();
    let mut w_taken: Vec<(u32, u64)> = Vec::new();
    let mut state_of: Vec<u32> = vec![u32::MAX; snap.entries.len()];
    let mut states: Vec<JoinState> = Vec::new();

    let push_next = |heap: &mut BinaryHeap<_>, k: u32, from: u32| {
        let v = &snap.elements[anchors[k as usize] as usize];
        let end = snap.seq_end[v.seq as usize];
        let mut pos = from;
        while pos < end && snap.elements[pos as usize].start <= v.end {
            pos += 1;
        }
        if pos < end {
            let span = snap.elements[pos as usize].end - v.start + 1;
            if span_cap.is_none_or(|cap| span <= cap) {
                heap.push(Reverse((span, v.seq, v.start, k, pos)));
            }
        }
    };

    for k in 0..anchors.len() as u32 {
        push_next(&mut heap, k, anchors[k as usize] + 1);
    }

    while let Some(Reverse((span, _, _, k, pos))) = heap.pop() {
        let vi = anchors[k as usize];
        let v = &snap.elements[vi as usize];
        let w = &snap.elements[pos as usize];
        let y = w.entry;
        let yi = &snap.entries[y as usize];
        let fits = max_len.is_none_or(|m| (xi.len + yi.len) as usize <= m);
        let self_join = y == x;
        let free = if self_join {
            !w_used.contains(&vi) && !w_used.contains(&pos)
        } else {
            !w_used.contains(&pos) && !anchor_joined.contains(&(((vi as u64) << 32) | y as u64))
        };
        if fits && free {
            if state_of[y as usize] == u32::MAX {
                state_of[y as usize] = states.len() as u32;
                states.push(JoinState {
                    y,
                    n: 0,
                    gaps_v: 0,
                    gaps_w: 0,
                    gaps_u: 0,
                    x_codes: Vec::new(),
                    x_delta: 0.0,
                    y_delta: 0.0,
                    joined: Vec::new(),
                    joined_sum: 0.0,
                    penalty: 0.0,
                    best: f64::INFINITY,
                    best_n: 0,
                    model_bits: pattern_model_length_parts(
                        xi.len + yi.len,
                        xi.size + yi.size,
                        xi.event_bits + yi.event_bits,
                    ),
                });
            }
            let state = &mut states[state_of[y as usize] as usize];
            w_used.insert(pos);
            if self_join {
                w_used.insert(vi);
            } else {
                anchor_joined.insert(((vi as u64) << 32) | y as u64);
            }
            state.n += 1;
            state.gaps_v += v.gaps as u64;
            state.gaps_w += w.gaps as u64;
            state.gaps_u += span as u64 - xi.len - yi.len;
            state.x_delta += take_code(snap, &mut state.x_codes, v.code);
            if self_join {
                state.x_delta += take_code(snap, &mut state.x_codes, w.code);
            } else {
                state.y_delta += take_code(snap, &mut w_taken, w.code);
            }
            let key = (v.code, w.code);
            let c = match state.joined.iter_mut().find(|(k, _)| *k == key) {
                Some((_, c)) => c,
                None => {
                    state.joined.push((key, 0));
                    &mut state.joined.last_mut().expect("just pushed").1
                }
            };
            state.joined_sum += xlogx(*c + 1) - xlogx(*c);
            *c += 1;
            state.penalty += penalties[k as usize];
            let d = join_delta(snap, xi, yi, self_join, state);
            if d < state.best {
                state.best = d;
                state.best_n = state.n;
            }
        }
        if self_join {
            continue;
        }
        if yi.is_pattern && w.gain > 0.0 {
            penalties[k as usize] += w.gain;
        }
        push_next(&mut heap, k, pos + 1);
    }

    let mut out: Vec<Extension> = states
        .into_iter()
        .map(|s| Extension {
            pattern: xi.pattern.concat(&snap.entries[s.y as usize].pattern),
            estimated_delta: s.best,
            joined_windows: s.best_n,
        })
        .collect();
    out.sort_by(|a, b| {
        a.estimated_delta
            .total_cmp(&b.estimated_delta)
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    out
}

/// Change in total length from replacing the joined pairs so far by `XY`.
fn join_delta(
    snap: &CoverSnapshot,
    xi: &EntryInfo,
    yi: &EntryInfo,
    self_join: bool,
    state: &JoinState,
) -> f64 {
    let n = state.n;
    let xy_len = xi.len + yi.len;

    let old_stream = xlogx(snap.total_usage) - snap.sum_xlogx;
    let new_stream =
        xlogx(snap.total_usage - n) - (snap.sum_xlogx + state.x_delta + state.y_delta + state.joined_sum);
    let mut d = new_stream - old_stream;

    d += meta_length(n * (xy_len - 1), state.gaps_u);
    let x_fills = n * (xi.len - 1);
    let y_fills = n * (yi.len - 1);
    let meta_change = |e: &EntryInfo, gaps: u64, fills: u64| -> f64 {
        meta_length(e.fills - fills, e.gaps - gaps) - meta_length(e.fills, e.gaps)
    };
    if self_join {
        if xi.is_pattern {
            d += meta_change(xi, state.gaps_v + state.gaps_w, x_fills + y_fills);
        }
    } else {
        if xi.is_pattern {
            d += meta_change(xi, state.gaps_v, x_fills);
        }
        if yi.is_pattern {
            d += meta_change(yi, state.gaps_w, y_fills);
        }
    }

    let p = snap.num_patterns;
    d += lstar(p + 2) - lstar(p + 1);
    let mut usage = snap.pattern_usage + n;
    if xi.is_pattern {
        usage -= n;
    }
    if yi.is_pattern {
        usage -= n;
    }
    d += lstar(usage + 1) - lstar(snap.pattern_usage + 1);
    let codes = snap.pattern_codes + xi.instantiations * yi.instantiations;
    d += usage_distribution_length(usage, codes)
        - usage_distribution_length(snap.pattern_usage, snap.pattern_codes);
    d + state.model_bits + state.penalty
}
