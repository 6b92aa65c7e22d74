//! Candidate order over patterns.
//!
//! Patterns are covered in order of decreasing length, then decreasing number
//! of candidate windows, then decreasing standard-code length, with the
//! pattern itself as the final tiebreak.

use std::cmp::Ordering;

use crate::pattern::Pattern;

/// Precomputed sort key of one pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateKey {
    pub len: usize,
    pub support: usize,
    pub standard_length: f64,
}

impl CandidateKey {
    pub fn new(pattern: &Pattern, support: usize, standard_length: f64) -> Self {
        Self {
            len: pattern.len(),
            support,
            standard_length,
        }
    }
}

/// Total order on `(key, pattern)` pairs; `Less` means covered first.
pub fn candidate_order_cmp(a: (&CandidateKey, &Pattern), b: (&CandidateKey, &Pattern)) -> Ordering {
    b.0.len
        .cmp(&a.0.len)
        .then_with(|| b.0.support.cmp(&a.0.support))
        .then_with(|| b.0.standard_length.total_cmp(&a.0.standard_length))
        .then_with(|| a.1.cmp(b.1))
}
