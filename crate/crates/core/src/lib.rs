//! Summarising event sequences with serial episodes that may interleave,
//! nest and occur with gaps, and with choice episodes, under a two-part
//! MDL code.

pub mod cli;
pub mod cover;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod pattern;
pub mod search;
pub mod seqdb;

pub use error::{Error, Result};
pub use pattern::{Pattern, PatternId};
pub use seqdb::{Alphabet, EventId, InputFormat, InvertedIndex, SequenceDatabase};
