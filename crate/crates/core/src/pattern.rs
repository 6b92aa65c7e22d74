//! Serial episodes and choice episodes.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::seqdb::{Alphabet, EventId};

/// Stable handle of a pattern within a registry owned by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId(pub u32);

impl PatternId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered list of non-empty choice sets. A serial episode has exactly one
/// event per slot.
///
/// Slots are kept sorted and duplicate-free, so the derived `Ord` compares
/// slot-wise on sorted event ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    slots: Vec<Vec<EventId>>,
}

impl Pattern {
    pub fn new(slots: Vec<Vec<EventId>>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InvalidArgument("pattern needs at least one slot".into()));
        }
        let mut out = Vec::with_capacity(slots.len());
        for mut slot in slots {
            slot.sort_unstable();
            slot.dedup();
            if slot.is_empty() {
                return Err(Error::InvalidArgument("empty choice set".into()));
            }
            out.push(slot);
        }
        Ok(Self { slots: out })
    }

    pub fn serial(events: &[EventId]) -> Result<Self> {
        Self::new(events.iter().map(|&e| vec![e]).collect())
    }

    pub fn singleton(e: EventId) -> Self {
        Self { slots: vec![vec![e]] }
    }

    pub fn slots(&self) -> &[Vec<EventId>] {
        &self.slots
    }

    pub fn slot(&self, i: usize) -> &[EventId] {
        &self.slots[i]
    }

    /// `|X|`: number of slots.
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `||X||`: total number of events over all choice sets.
    pub fn size(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn is_serial(&self) -> bool {
        self.slots.iter().all(|s| s.len() == 1)
    }

    pub fn is_singleton(&self) -> bool {
        self.slots.len() == 1 && self.slots[0].len() == 1
    }

    /// Number of concrete serial realisations.
    pub fn num_instantiations(&self) -> u64 {
        self.slots
            .iter()
            .fold(1u64, |acc, s| acc.saturating_mul(s.len() as u64))
    }

    #[inline]
    pub fn slot_matches(&self, i: usize, e: EventId) -> bool {
        self.slots[i].binary_search(&e).is_ok()
    }

    /// Slot concatenation `XY`.
    pub fn concat(&self, other: &Pattern) -> Pattern {
        let mut slots = self.slots.clone();
        slots.extend(other.slots.iter().cloned());
        Pattern { slots }
    }

    /// Inserts a single-event slot so that it becomes slot `at`.
    pub fn with_inserted(&self, at: usize, e: EventId) -> Pattern {
        let mut slots = self.slots.clone();
        slots.insert(at, vec![e]);
        Pattern { slots }
    }

    /// Unions slot `at` with `events`.
    pub fn with_extended_slot(&self, at: usize, events: &[EventId]) -> Pattern {
        let mut slots = self.slots.clone();
        slots[at].extend_from_slice(events);
        slots[at].sort_unstable();
        slots[at].dedup();
        Pattern { slots }
    }

    /// Whether `events` is one of this pattern's instantiations.
    pub fn contains_instance(&self, events: &[EventId]) -> bool {
        events.len() == self.len() && events.iter().enumerate().all(|(i, &e)| self.slot_matches(i, e))
    }

    /// All concrete serial realisations, in lexicographic order.
    pub fn instantiations(&self) -> Vec<Vec<EventId>> {
        let mut out: Vec<Vec<EventId>> = vec![Vec::new()];
        for slot in &self.slots {
            let mut next = Vec::with_capacity(out.len() * slot.len());
            for prefix in &out {
                for &e in slot {
                    let mut p = prefix.clone();
                    p.push(e);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    /// Index of the single slot at which `self` and `other` differ, if they
    /// have the same length and differ at exactly one slot.
    pub fn single_difference(&self, other: &Pattern) -> Option<usize> {
        if self.len() != other.len() {
            return None;
        }
        let mut diff = None;
        for (i, (a, b)) in self.slots.iter().zip(&other.slots).enumerate() {
            if a != b {
                if diff.is_some() {
                    return None;
                }
                diff = Some(i);
            }
        }
        diff
    }

    /// Renders slots with their tokens; choice slots as `[e1|e2]`.
    pub fn display(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if slot.len() == 1 {
                out.push_str(alphabet.token(slot[0]).unwrap_or("?"));
            } else {
                out.push('[');
                for (j, &e) in slot.iter().enumerate() {
                    if j > 0 {
                        out.push('|');
                    }
                    out.push_str(alphabet.token(e).unwrap_or("?"));
                }
                out.push(']');
            }
        }
        out
    }

    /// Id-based rendering for debug dumps.
    pub fn display_ids(&self) -> String {
        let mut out = String::new();
        for (i, slot) in self.slots.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if slot.len() == 1 {
                let _ = write!(out, "{}", slot[0]);
            } else {
                let parts: Vec<String> = slot.iter().map(|e| e.to_string()).collect();
                let _ = write!(out, "[{}]", parts.join("|"));
            }
        }
        out
    }

    /// Parses the textual form produced by [`Pattern::display`]. Unknown tokens
    /// are resolved through `resolve`, which may intern or reject them.
    pub fn parse_with<F>(text: &str, mut resolve: F) -> Result<Self>
    where
        F: FnMut(&str) -> Result<EventId>,
    {
        let mut slots = Vec::new();
        for tok in text.split(' ').filter(|t| !t.is_empty()) {
            if let Some(inner) = tok.strip_prefix('[') {
                let inner = inner
                    .strip_suffix(']')
                    .ok_or_else(|| Error::InvalidArgument(format!("unterminated choice slot {tok:?}")))?;
                let slot = inner.split('|').map(&mut resolve).collect::<Result<Vec<_>>>()?;
                slots.push(slot);
            } else {
                slots.push(vec![resolve(tok)?]);
            }
        }
        Self::new(slots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<EventId> {
        v.iter().map(|&i| EventId(i)).collect()
    }

    #[test]
    fn sizes() {
        let p = Pattern::new(vec![ids(&[1, 0]), ids(&[2])]).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.size(), 3);
        assert!(!p.is_serial());
        assert_eq!(p.slot(0), &ids(&[0, 1])[..]);
        assert_eq!(p.num_instantiations(), 2);
        assert_eq!(p.instantiations(), vec![ids(&[0, 2]), ids(&[1, 2])]);
        assert!(p.contains_instance(&ids(&[1, 2])));
        assert!(!p.contains_instance(&ids(&[2, 2])));
    }

    #[test]
    fn invalid() {
        assert!(Pattern::new(vec![]).is_err());
        assert!(Pattern::new(vec![vec![]]).is_err());
        let p = Pattern::new(vec![ids(&[3, 3])]).unwrap();
        assert_eq!(p.size(), 1);
    }

    #[test]
    fn single_difference() {
        let ac = Pattern::serial(&ids(&[0, 2])).unwrap();
        let bc = Pattern::serial(&ids(&[1, 2])).unwrap();
        let bd = Pattern::serial(&ids(&[1, 3])).unwrap();
        assert_eq!(ac.single_difference(&bc), Some(0));
        assert_eq!(ac.single_difference(&bd), None);
        assert_eq!(ac.single_difference(&ac), None);
        let merged = ac.with_extended_slot(0, bc.slot(0));
        assert_eq!(merged.slot(0), &ids(&[0, 1])[..]);
    }

    #[test]
    fn display_and_parse() {
        let mut alphabet = Alphabet::new();
        for t in ["paper", "proposes", "presents", "new"] {
            alphabet.intern(t);
        }
        let p = Pattern::parse_with("paper [proposes|presents] new", |t| {
            alphabet.id(t).ok_or_else(|| Error::InvalidArgument(t.into()))
        })
        .unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.display(&alphabet), "paper [proposes|presents] new");
    }
}
