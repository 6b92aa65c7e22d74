//! Symbolic pattern and meta streams for a cover, and the decoder that
//! reconstructs the database from them.

use std::fmt::Write as _;

use crate::cover::SelectedWindows;
use crate::encoding::CodeTable;
use crate::error::{Error, Result};
use crate::pattern::PatternId;
use crate::seqdb::{EventId, Sequence, SequenceDatabase};

/// One record of the pattern stream. `pattern` indexes `CodeTable::patterns`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternCode {
    Singleton(EventId),
    Pattern { pattern: usize, instance: Vec<EventId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetaCode {
    Gap,
    Fill,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetaRecord {
    pub pattern: usize,
    pub code: MetaCode,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodeStreams {
    pub pattern_stream: Vec<PatternCode>,
    pub meta_stream: Vec<MetaRecord>,
}

struct Context<'a> {
    pattern: usize,
    matched: &'a [u32],
    next: usize,
}

/// Encodes `db` under the cover given by `sel`; every window's pattern must
/// be in `ct`.
pub fn encode_cover(db: &SequenceDatabase, ct: &CodeTable, sel: &SelectedWindows) -> Result<CodeStreams> {
    let mut streams = CodeStreams::default();
    for (si, seq) in db.sequences().iter().enumerate() {
        let si = si as u32;
        if sel.seq_len(si) as usize != seq.len() {
            return Err(Error::InvalidCover("selection built for another database".into()));
        }
        let mut contexts: Vec<Context> = Vec::new();
        for j in 0..seq.len() as u32 {
            let mut filled = false;
            if !contexts.is_empty() {
                for ctx in contexts.iter_mut() {
                    let code = if ctx.matched[ctx.next] == j {
                        ctx.next += 1;
                        filled = true;
                        MetaCode::Fill
                    } else {
                        MetaCode::Gap
                    };
                    streams.meta_stream.push(MetaRecord {
                        pattern: ctx.pattern,
                        code,
                    });
                }
                contexts.retain(|c| c.next < c.matched.len());
            }
            if filled {
                continue;
            }
            match sel.owner(si, j) {
                None => streams
                    .pattern_stream
                    .push(PatternCode::Singleton(seq[j as usize])),
                Some(w) if w.start() == j => {
                    let pattern = ct.index_of(w.pattern).ok_or_else(|| {
                        Error::InvalidCover(format!("pattern {:?} not in code table", w.pattern))
                    })?;
                    streams.pattern_stream.push(PatternCode::Pattern {
                        pattern,
                        instance: w.instance(db),
                    });
                    if w.matched.len() > 1 {
                        contexts.push(Context {
                            pattern,
                            matched: &w.matched,
                            next: 1,
                        });
                    }
                }
                Some(_) => {
                    return Err(Error::InvalidCover(format!(
                        "offset {j} of sequence {si} is claimed out of order"
                    )))
                }
            }
        }
        if !contexts.is_empty() {
            return Err(Error::InvalidCover("window runs past its sequence".into()));
        }
    }
    Ok(streams)
}

/// Reconstructs the sequences from the two streams and the sequence lengths.
pub fn decode_streams(ct: &CodeTable, streams: &CodeStreams, lengths: &[usize]) -> Result<Vec<Sequence>> {
    let mut codes = streams.pattern_stream.iter();
    let mut metas = streams.meta_stream.iter();
    let mut out = Vec::with_capacity(lengths.len());
    for &n in lengths {
        let mut seq = Vec::with_capacity(n);
        // (pattern index, instance, next slot)
        let mut contexts: Vec<(usize, &[EventId], usize)> = Vec::new();
        while seq.len() < n {
            if !contexts.is_empty() {
                let mut fill = None;
                for (i, ctx) in contexts.iter().enumerate() {
                    let rec = metas.next().ok_or(Error::TruncatedStream)?;
                    if rec.pattern != ctx.0 {
                        return Err(Error::MalformedStream(format!(
                            "meta record for pattern {} where {} was expected",
                            rec.pattern, ctx.0
                        )));
                    }
                    if rec.code == MetaCode::Fill {
                        if fill.is_some() {
                            return Err(Error::MalformedStream("two fills in one round".into()));
                        }
                        fill = Some(i);
                    }
                }
                if let Some(i) = fill {
                    let ctx = &mut contexts[i];
                    seq.push(ctx.1[ctx.2]);
                    ctx.2 += 1;
                    contexts.retain(|c| c.2 < c.1.len());
                    continue;
                }
            }
            match codes.next().ok_or(Error::TruncatedStream)? {
                PatternCode::Singleton(e) => seq.push(*e),
                PatternCode::Pattern { pattern, instance } => {
                    let entry = ct
                        .patterns
                        .get(*pattern)
                        .ok_or_else(|| Error::MalformedStream(format!("unknown pattern index {pattern}")))?;
                    if !entry.pattern.contains_instance(instance) {
                        return Err(Error::MalformedStream(format!(
                            "instance does not match pattern {pattern}"
                        )));
                    }
                    seq.push(instance[0]);
                    if instance.len() > 1 {
                        contexts.push((*pattern, instance, 1));
                    }
                }
            }
        }
        if !contexts.is_empty() {
            return Err(Error::TruncatedStream);
        }
        out.push(seq);
    }
    if codes.next().is_some() || metas.next().is_some() {
        return Err(Error::MalformedStream("trailing records".into()));
    }
    Ok(out)
}

impl CodeStreams {
    /// Line-oriented dump: `P s<event>` for singletons, `P <pattern-id> <events>`
    /// for pattern codes and `M <pattern-id> G|F` for meta records.
    pub fn dump(&self, ct: &CodeTable) -> String {
        let mut out = String::new();
        for code in &self.pattern_stream {
            match code {
                PatternCode::Singleton(e) => {
                    let _ = writeln!(out, "P s{}", e.0);
                }
                PatternCode::Pattern { pattern, instance } => {
                    let ids: Vec<String> = instance.iter().map(|e| e.0.to_string()).collect();
                    let _ = writeln!(out, "P {} {}", ct.patterns[*pattern].id.0, ids.join(","));
                }
            }
        }
        for rec in &self.meta_stream {
            let c = match rec.code {
                MetaCode::Gap => 'G',
                MetaCode::Fill => 'F',
            };
            let _ = writeln!(out, "M {} {}", ct.patterns[rec.pattern].id.0, c);
        }
        out
    }

    /// Parses [`CodeStreams::dump`] output against the same code table.
    pub fn parse_dump(text: &str, ct: &CodeTable) -> Result<Self> {
        let mut streams = Self::default();
        for (ln, line) in text.lines().enumerate() {
            let err = |message: &str| Error::Parse {
                line: ln + 1,
                column: 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split(' ').collect();
            let index_of = |s: &str| -> Result<usize> {
                let id: u32 = s.parse().map_err(|_| err("bad pattern id"))?;
                ct.index_of(PatternId(id))
                    .ok_or_else(|| err("unknown pattern id"))
            };
            match fields.as_slice() {
                ["P", s] if s.starts_with('s') => {
                    let e: u32 = s[1..].parse().map_err(|_| err("bad event id"))?;
                    streams.pattern_stream.push(PatternCode::Singleton(EventId(e)));
                }
                ["P", id, events] => {
                    let instance = events
                        .split(',')
                        .map(|t| t.parse().map(EventId).map_err(|_| err("bad event id")))
                        .collect::<Result<Vec<_>>>()?;
                    streams.pattern_stream.push(PatternCode::Pattern {
                        pattern: index_of(id)?,
                        instance,
                    });
                }
                ["M", id, code] => {
                    let code = match *code {
                        "G" => MetaCode::Gap,
                        "F" => MetaCode::Fill,
                        _ => return Err(err("meta code must be G or F")),
                    };
                    streams.meta_stream.push(MetaRecord {
                        pattern: index_of(id)?,
                        code,
                    });
                }
                [""] => {}
                _ => return Err(err("unrecognised record")),
            }
        }
        Ok(streams)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{cover_to_stats, Window};
    use crate::pattern::Pattern;
    use crate::seqdb::InputFormat;

    fn figure_cover() -> (SequenceDatabase, CodeTable, SelectedWindows) {
        let db = SequenceDatabase::load_str("a b d c", InputFormat::TokenText).unwrap();
        let id = |t: &str| db.alphabet().id(t).unwrap();
        let p = Pattern::serial(&[id("a"), id("c")]).unwrap();
        let q = Pattern::serial(&[id("b"), id("d")]).unwrap();
        let windows = vec![
            Window {
                seq: 0,
                matched: vec![0, 3],
                pattern: PatternId(0),
            },
            Window {
                seq: 0,
                matched: vec![1, 2],
                pattern: PatternId(1),
            },
        ];
        let sel = SelectedWindows::from_windows(&db, &windows, |pid| match pid.0 {
            0 => Some(&p),
            1 => Some(&q),
            _ => None,
        })
        .unwrap();
        let ct = cover_to_stats(&sel, &db, &[(PatternId(0), &p), (PatternId(1), &q)]).unwrap();
        (db, ct, sel)
    }

    #[test]
    fn interleaved_streams() {
        let (db, ct, sel) = figure_cover();
        let s = encode_cover(&db, &ct, &sel).unwrap();
        assert_eq!(s.pattern_stream.len(), 2);
        assert!(matches!(
            s.pattern_stream[0],
            PatternCode::Pattern { pattern: 0, .. }
        ));
        assert!(matches!(
            s.pattern_stream[1],
            PatternCode::Pattern { pattern: 1, .. }
        ));
        let metas: Vec<(usize, MetaCode)> = s.meta_stream.iter().map(|r| (r.pattern, r.code)).collect();
        assert_eq!(
            metas,
            vec![
                (0, MetaCode::Gap),
                (0, MetaCode::Gap),
                (1, MetaCode::Fill),
                (0, MetaCode::Fill)
            ]
        );
        let decoded = decode_streams(&ct, &s, &db.sequence_lengths()).unwrap();
        assert_eq!(decoded, db.sequences());
    }

    #[test]
    fn truncated_and_dump_roundtrip() {
        let (db, ct, sel) = figure_cover();
        let mut s = encode_cover(&db, &ct, &sel).unwrap();
        let text = s.dump(&ct);
        assert!(text.starts_with("P 0 0,3\nP 1 1,2\nM 0 G\n"));
        assert_eq!(CodeStreams::parse_dump(&text, &ct).unwrap(), s);
        s.meta_stream.pop();
        assert!(matches!(
            decode_streams(&ct, &s, &db.sequence_lengths()),
            Err(Error::TruncatedStream)
        ));
    }

    #[test]
    fn singleton_cover_has_no_meta() {
        let db = SequenceDatabase::load_str("a b\nc", InputFormat::TokenText).unwrap();
        let sel = SelectedWindows::new(&db);
        let ct = CodeTable::standard(&db);
        let s = encode_cover(&db, &ct, &sel).unwrap();
        assert!(s.meta_stream.is_empty());
        assert_eq!(s.pattern_stream.len(), 3);
        assert_eq!(decode_streams(&ct, &s, &[2, 1]).unwrap(), db.sequences());
        assert!(decode_streams(&ct, &CodeStreams::default(), &[])
            .unwrap()
            .is_empty());
    }
}
