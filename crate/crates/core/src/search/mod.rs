//! Pattern-set search: candidate generation, MDL acceptance, pruning,
//! choice-episode merging and the anytime outer loop.

mod estimate;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{
    candidate_order_cmp, cover_to_stats, find_windows, greedy_cover, is_minimal_window, AdmissionOrder,
    CandidateKey, CoverMode, SelectedWindows, Window,
};
use crate::encoding::{
    code_table_length, lstar, pattern_model_length, standard_length, total_length, usage_distribution_length,
    CodeTable, LengthBreakdown, StandardTable, SCORE_EPSILON,
};
use crate::error::{Error, Result};
use crate::pattern::{Pattern, PatternId};
use crate::seqdb::{EventId, InvertedIndex, SequenceDatabase};

pub use estimate::{estimate, window_gain, CoverSnapshot, Extension};

/// Which pattern language and cover semantics to mine with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Serial episodes whose windows never overlap or nest.
    Disjoint,
    /// Serial episodes with interleaved and nested windows.
    Interleave,
    /// As `Interleave`, also merging patterns into choice episodes.
    #[default]
    Choicisode,
}

impl Mode {
    pub fn cover_mode(self) -> CoverMode {
        match self {
            Mode::Disjoint => CoverMode::Disjoint,
            Mode::Interleave | Mode::Choicisode => CoverMode::Interleaved,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Disjoint => "disjoint",
            Mode::Interleave => "interleave",
            Mode::Choicisode => "choicisode",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SquishConfig {
    pub mode: Mode,
    /// Wall-clock budget; `None` runs to convergence.
    pub time_budget: Option<Duration>,
    /// Upper bound on the number of slots of mined patterns.
    pub max_pattern_len: Option<usize>,
    /// Longest joined window considered during estimation.
    pub estimate_span_cap: Option<u32>,
    /// Estimation threads; 0 uses the global pool.
    pub threads: usize,
    pub admission: AdmissionOrder,
    /// Stop after this many batches.
    pub max_batches: Option<usize>,
}

/// Choice among merging a new pattern into an existing one or keeping it apart.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeDecision {
    pub target: Option<PatternId>,
    pub position: usize,
    pub delta_model_bits: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Accept,
    Merge,
    Prune,
}

#[derive(Debug, Clone, Serialize)]
pub struct Step {
    pub kind: StepKind,
    pub pattern: String,
    pub total_bits: f64,
    pub delta_l: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub elapsed_seconds: f64,
    pub total_bits: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SquishReport {
    pub mode: Mode,
    pub num_patterns: usize,
    pub standard_bits: f64,
    pub model_bits: f64,
    pub data_bits: f64,
    pub total_bits: f64,
    pub delta_l: f64,
    pub elapsed_seconds: f64,
    pub batches: usize,
    pub candidates_tested: usize,
    pub timed_out: bool,
    pub steps: Vec<Step>,
    pub curve: Vec<CurvePoint>,
}

/// A mined pattern with its cover statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MinedPattern {
    pub id: PatternId,
    pub pattern: Pattern,
    pub usage: u64,
    pub gaps: u64,
    pub fills: u64,
    /// Length of the pattern under the standard table.
    pub model_bits: f64,
    pub instances: Vec<(Vec<EventId>, u64)>,
}

#[derive(Debug, Clone)]
pub struct SquishResult {
    /// In candidate order.
    pub patterns: Vec<MinedPattern>,
    pub selection: SelectedWindows,
    pub code_table: CodeTable,
    pub lengths: LengthBreakdown,
    pub report: SquishReport,
}

#[derive(Debug, Clone)]
struct State {
    order: Vec<PatternId>,
    sel: SelectedWindows,
    ct: CodeTable,
    lengths: LengthBreakdown,
}

struct Known {
    pattern: Pattern,
    candidates: Arc<Vec<Window>>,
    key: CandidateKey,
}

/// Mutable search state over one database.
pub struct Miner<'a> {
    db: &'a SequenceDatabase,
    index: InvertedIndex,
    st: StandardTable,
    config: SquishConfig,
    ids: HashMap<Pattern, PatternId>,
    known: Vec<Known>,
    state: State,
    standard_bits: f64,
    started: Instant,
    steps: Vec<Step>,
    curve: Vec<CurvePoint>,
    candidates_tested: usize,
}

impl<'a> Miner<'a> {
    /// Starts from the singleton-only model.
    pub fn new(db: &'a SequenceDatabase, config: SquishConfig) -> Result<Self> {
        if db.total_events() == 0 {
            return Err(Error::EmptyDatabase);
        }
        let sel = SelectedWindows::new(db);
        let ct = CodeTable::standard(db);
        let lengths = total_length(db, &ct)?;
        let mut miner = Self {
            db,
            index: InvertedIndex::build(db),
            st: StandardTable::new(db),
            config,
            ids: HashMap::new(),
            known: Vec::new(),
            state: State {
                order: Vec::new(),
                sel,
                ct,
                lengths,
            },
            standard_bits: standard_length(db),
            started: Instant::now(),
            steps: Vec::new(),
            curve: Vec::new(),
            candidates_tested: 0,
        };
        miner.record_curve();
        Ok(miner)
    }

    pub fn total_bits(&self) -> f64 {
        self.state.lengths.total
    }

    pub fn lengths(&self) -> LengthBreakdown {
        self.state.lengths
    }

    pub fn code_table(&self) -> &CodeTable {
        &self.state.ct
    }

    pub fn selection(&self) -> &SelectedWindows {
        &self.state.sel
    }

    /// Current patterns in candidate order.
    pub fn patterns(&self) -> Vec<&Pattern> {
        self.state
            .order
            .iter()
            .map(|id| &self.known[id.index()].pattern)
            .collect()
    }

    pub fn pattern_id(&self, p: &Pattern) -> Option<PatternId> {
        self.ids.get(p).copied()
    }

    pub fn contains(&self, p: &Pattern) -> bool {
        self.pattern_id(p)
            .is_some_and(|id| self.state.order.contains(&id))
    }

    fn elapsed(&self) -> f64 {
        self.started.elapsed().as_secs_f64()
    }

    fn out_of_time(&self) -> bool {
        self.config
            .time_budget
            .is_some_and(|b| self.started.elapsed() >= b)
    }

    fn record_curve(&mut self) {
        let point = CurvePoint {
            elapsed_seconds: self.elapsed(),
            total_bits: self.state.lengths.total,
        };
        self.curve.push(point);
    }

    fn record_step(&mut self, kind: StepKind, id: PatternId) {
        let step = Step {
            kind,
            pattern: self.known[id.index()].pattern.display(self.db.alphabet()),
            total_bits: self.state.lengths.total,
            delta_l: self.standard_bits - self.state.lengths.total,
            elapsed_seconds: self.elapsed(),
        };
        self.steps.push(step);
        self.record_curve();
    }

    fn intern(&mut self, p: &Pattern) -> PatternId {
        if let Some(&id) = self.ids.get(p) {
            return id;
        }
        let id = PatternId(self.known.len() as u32);
        let mut candidates = find_windows(&self.index, p, id);
        if self.config.mode == Mode::Disjoint {
            candidates.retain(|w| is_minimal_window(&self.index, p, w));
        }
        let st_len = pattern_model_length(p, &self.st).unwrap_or(f64::INFINITY);
        let key = CandidateKey::new(p, candidates.len(), st_len);
        self.known.push(Known {
            pattern: p.clone(),
            candidates: Arc::new(candidates),
            key,
        });
        self.ids.insert(p.clone(), id);
        id
    }

    fn order_cmp(&self, a: PatternId, b: PatternId) -> std::cmp::Ordering {
        let (ka, kb) = (&self.known[a.index()], &self.known[b.index()]);
        candidate_order_cmp((&ka.key, &ka.pattern), (&kb.key, &kb.pattern))
    }

    fn with_inserted(&self, order: &[PatternId], id: PatternId) -> Vec<PatternId> {
        let pos = order.partition_point(|&o| self.order_cmp(o, id).is_lt());
        let mut out = order.to_vec();
        out.insert(pos, id);
        out
    }

    /// Covers the database with `order`, reusing the current cover up to
    /// the first position where the orders differ.
    fn evaluate(&self, order: Vec<PatternId>) -> Result<State> {
        let cur = &self.state.order;
        let common = cur.iter().zip(&order).take_while(|(a, b)| a == b).count();
        let mut sel = self.state.sel.clone();
        for &id in &cur[common..] {
            sel.remove_pattern(id);
        }
        for &id in &order[common..] {
            let k = &self.known[id.index()];
            greedy_cover(
                &mut sel,
                self.db,
                &self.index,
                &k.pattern,
                id,
                &k.candidates,
                self.config.mode.cover_mode(),
                self.config.admission,
            );
        }
        let order: Vec<PatternId> = order.into_iter().filter(|&id| sel.usage_of(id) > 0).collect();
        let list: Vec<(PatternId, &Pattern)> = order
            .iter()
            .map(|&id| (id, &self.known[id.index()].pattern))
            .collect();
        let ct = cover_to_stats(&sel, self.db, &list)?;
        let lengths = total_length(self.db, &ct)?;
        Ok(State {
            order,
            sel,
            ct,
            lengths,
        })
    }

    fn improves(&self, trial: &State) -> bool {
        trial.lengths.total < self.state.lengths.total - SCORE_EPSILON
    }

    /// Tests adding `z`; commits and returns true iff the total length drops.
    /// In choicisode mode, merging `z` into a pattern that differs at one
    /// slot is tried as well and preferred when it scores at least as well.
    pub fn accept_candidate(&mut self, z: &Pattern) -> Result<bool> {
        if z.len() < 2 || self.contains(z) {
            return Ok(false);
        }
        if self.config.max_pattern_len.is_some_and(|m| z.len() > m) {
            return Ok(false);
        }
        let id = self.intern(z);
        if self.known[id.index()].candidates.is_empty() {
            return Ok(false);
        }
        self.candidates_tested += 1;
        let alone = self.evaluate(self.with_inserted(&self.state.order, id))?;
        let merged = if self.config.mode == Mode::Choicisode {
            let base = self.state.order.clone();
            self.merged_trial(z, &base)?
        } else {
            None
        };
        let alone_ok = self.improves(&alone) && alone.order.contains(&id);
        match merged {
            Some((mid, trial))
                if self.improves(&trial) && (!alone_ok || trial.lengths.total <= alone.lengths.total) =>
            {
                self.state = trial;
                self.record_step(StepKind::Merge, mid);
                Ok(true)
            }
            _ if alone_ok => {
                self.state = alone;
                self.record_step(StepKind::Accept, id);
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    /// The best one-slot merge target for `z` among the current patterns.
    pub fn merge_decision(&self, z: &Pattern) -> MergeDecision {
        let mut best = MergeDecision {
            target: None,
            position: 0,
            delta_model_bits: 0.0,
        };
        let z_bits = pattern_model_length(z, &self.st).unwrap_or(f64::INFINITY);
        let ct = &self.state.ct;
        let num = ct.patterns.len() as u64;
        let usage = ct.pattern_usage();
        let codes = ct.pattern_codes();
        let z_in_table = self
            .pattern_id(z)
            .is_some_and(|id| self.state.order.contains(&id));
        for &tid in &self.state.order {
            let t = &self.known[tid.index()].pattern;
            let Some(pos) = z.single_difference(t) else {
                continue;
            };
            let merged = t.with_extended_slot(pos, z.slot(pos));
            let t_bits = pattern_model_length(t, &self.st).unwrap_or(f64::INFINITY);
            let m_bits = pattern_model_length(&merged, &self.st).unwrap_or(f64::INFINITY);
            // Model with t and z apart versus with the merged pattern only.
            let (num_apart, codes_apart) = if z_in_table {
                (num, codes)
            } else {
                (num + 1, codes + z.num_instantiations())
            };
            let codes_merged =
                codes_apart - t.num_instantiations() - z.num_instantiations() + merged.num_instantiations();
            let delta = m_bits - t_bits - z_bits + lstar(num_apart) - lstar(num_apart + 1)
                + usage_distribution_length(usage, codes_merged)
                - usage_distribution_length(usage, codes_apart);
            if delta < best.delta_model_bits {
                best = MergeDecision {
                    target: Some(tid),
                    position: pos,
                    delta_model_bits: delta,
                };
            }
        }
        best
    }

    fn merged_trial(&mut self, z: &Pattern, base: &[PatternId]) -> Result<Option<(PatternId, State)>> {
        let decision = self.merge_decision(z);
        let Some(tid) = decision.target else {
            return Ok(None);
        };
        let t = self.known[tid.index()].pattern.clone();
        let merged = t.with_extended_slot(decision.position, z.slot(decision.position));
        let mid = self.intern(&merged);
        let zid = self.pattern_id(z);
        let mut order: Vec<PatternId> = base
            .iter()
            .copied()
            .filter(|&o| o != tid && Some(o) != zid && o != mid)
            .collect();
        order = self.with_inserted(&order, mid);
        let trial = self.evaluate(order)?;
        if !trial.order.contains(&mid) {
            return Ok(None);
        }
        Ok(Some((mid, trial)))
    }

    /// Merges the current pattern `z` into its best one-slot target if the
    /// total length does not increase.
    pub fn try_merge_choicisode(&mut self, z: &Pattern) -> Result<Option<PatternId>> {
        if !self.contains(z) {
            return Ok(None);
        }
        let base = self.state.order.clone();
        match self.merged_trial(z, &base)? {
            Some((mid, trial)) if trial.lengths.total <= self.state.lengths.total => {
                self.state = trial;
                self.record_step(StepKind::Merge, mid);
                Ok(Some(mid))
            }
            _ => Ok(None),
        }
    }

    /// Removes patterns whose windows do not pay for their model cost.
    pub fn prune(&mut self) -> Result<usize> {
        let mut removed = 0;
        for id in self.state.order.clone() {
            let Some(pos) = self.state.order.iter().position(|&o| o == id) else {
                continue;
            };
            let ct = &self.state.ct;
            let ct_idx = ct.index_of(id).expect("ordered patterns are in the table");
            let gains: Result<f64> = self
                .state
                .sel
                .windows_of(id)
                .iter()
                .map(|w| window_gain(ct, ct_idx, &w.instance(self.db), w.gaps() as u64))
                .sum();
            let mut without = ct.clone();
            without.patterns.remove(ct_idx);
            let model_delta = code_table_length(ct, self.db)? - code_table_length(&without, self.db)?;
            let suspicious = gains.map_or(true, |g| g < model_delta);
            if !suspicious {
                continue;
            }
            let mut order = self.state.order.clone();
            order.remove(pos);
            let trial = self.evaluate(order)?;
            if self.improves(&trial) {
                self.state = trial;
                self.record_step(StepKind::Prune, id);
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// Variants of `id` with one frequent gap event inserted at its most
    /// common gap slot, most frequent first.
    pub fn bridging_variants(&self, id: PatternId) -> Vec<Pattern> {
        let pattern = &self.known[id.index()].pattern;
        let mut counts: BTreeMap<EventId, (u64, BTreeMap<usize, u64>)> = BTreeMap::new();
        for w in self.state.sel.windows_of(id) {
            let seq = self.db.sequence(w.seq as usize);
            let mut slot = 0;
            for o in w.start()..=w.end() {
                if w.matched[slot] == o {
                    slot += 1;
                    continue;
                }
                let entry = counts.entry(seq[o as usize]).or_default();
                entry.0 += 1;
                *entry.1.entry(slot).or_insert(0) += 1;
            }
        }
        let mut variants: Vec<(u64, Pattern)> = counts
            .into_iter()
            .filter(|(_, (n, _))| *n >= 2)
            .map(|(e, (n, slots))| {
                let (&at, _) = slots
                    .iter()
                    .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                    .expect("counted at least once");
                (n, pattern.with_inserted(at, e))
            })
            .collect();
        variants.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        variants.into_iter().map(|(_, p)| p).collect()
    }

    /// Extensions of every code-table entry estimated to shorten the total
    /// length, best first.
    pub fn estimate_batch(&self) -> Vec<Extension> {
        let snap = CoverSnapshot::build(
            self.db,
            &self.state.sel,
            &self.state.ct,
            self.config.mode == Mode::Disjoint,
        );
        let entries = snap.live_entries();
        let run = || -> Vec<Extension> {
            entries
                .par_iter()
                .flat_map_iter(|&x| {
                    estimate(
                        &snap,
                        x,
                        self.config.max_pattern_len,
                        self.config.estimate_span_cap,
                    )
                })
                .collect()
        };
        let all = match self.config.threads {
            0 => run(),
            n => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                Ok(pool) => pool.install(run),
                Err(_) => run(),
            },
        };
        let mut best: HashMap<Pattern, Extension> = HashMap::new();
        for ext in all.into_iter().filter(|e| e.estimated_delta < 0.0) {
            match best.get(&ext.pattern) {
                Some(b) if b.estimated_delta <= ext.estimated_delta => {}
                _ => {
                    best.insert(ext.pattern.clone(), ext);
                }
            }
        }
        let mut out: Vec<Extension> = best.into_values().collect();
        out.sort_by(|a, b| {
            a.estimated_delta
                .total_cmp(&b.estimated_delta)
                .then_with(|| a.pattern.cmp(&b.pattern))
        });
        out
    }

    fn offer(&mut self, z: &Pattern) -> Result<bool> {
        if !self.accept_candidate(z)? {
            return Ok(false);
        }
        let mut queue = vec![z.clone()];
        while let Some(p) = queue.pop() {
            if self.out_of_time() {
                break;
            }
            let Some(id) = self.pattern_id(&p).filter(|id| self.state.order.contains(id)) else {
                continue;
            };
            for v in self.bridging_variants(id).into_iter().rev() {
                if self.out_of_time() {
                    break;
                }
                if self.accept_candidate(&v)? {
                    queue.push(v);
                }
            }
        }
        self.prune()?;
        Ok(true)
    }

    /// Runs batches until one yields no accepted candidate or time runs out.
    pub fn run(mut self) -> Result<SquishResult> {
        let mut batches = 0;
        let mut timed_out = false;
        loop {
            if self.out_of_time() {
                timed_out = true;
                break;
            }
            if self.config.max_batches.is_some_and(|m| batches >= m) {
                break;
            }
            batches += 1;
            let candidates = self.estimate_batch();
            let mut accepted = false;
            for ext in &candidates {
                if self.out_of_time() {
                    timed_out = true;
                    break;
                }
                if self.offer(&ext.pattern)? {
                    accepted = true;
                }
            }
            if !accepted || timed_out {
                break;
            }
        }
        self.record_curve();
        Ok(self.finish(batches, timed_out))
    }

    fn finish(self, batches: usize, timed_out: bool) -> SquishResult {
        let lengths = self.state.lengths;
        let patterns: Vec<MinedPattern> = self
            .state
            .ct
            .patterns
            .iter()
            .map(|p| MinedPattern {
                id: p.id,
                pattern: p.pattern.clone(),
                usage: p.usage(),
                gaps: p.gaps,
                fills: p.fills,
                model_bits: self.known[p.id.index()].key.standard_length,
                instances: p.instances.iter().map(|(k, &v)| (k.clone(), v)).collect(),
            })
            .collect();
        let report = SquishReport {
            mode: self.config.mode,
            num_patterns: patterns.len(),
            standard_bits: self.standard_bits,
            model_bits: lengths.model,
            data_bits: lengths.data,
            total_bits: lengths.total,
            delta_l: self.standard_bits - lengths.total,
            elapsed_seconds: self.elapsed(),
            batches,
            candidates_tested: self.candidates_tested,
            timed_out,
            steps: self.steps,
            curve: self.curve,
        };
        SquishResult {
            patterns,
            selection: self.state.sel,
            code_table: self.state.ct,
            lengths,
            report,
        }
    }

    /// Replaces the model by exactly `patterns`, covered in candidate order.
    pub fn set_patterns(&mut self, patterns: &[Pattern]) -> Result<()> {
        let mut order = Vec::new();
        for p in patterns {
            let id = self.intern(p);
            if !order.contains(&id) {
                order = self.with_inserted(&order, id);
            }
        }
        self.state = self.evaluate(order)?;
        self.record_curve();
        Ok(())
    }
}

/// Mines a pattern set for `db`.
pub fn squish(db: &SequenceDatabase, config: SquishConfig) -> Result<SquishResult> {
    Miner::new(db, config)?.run()
}

/// Upper bound on the bits gained by coding `w` with its pattern, under `ct`.
pub fn gain(db: &SequenceDatabase, ct: &CodeTable, w: &Window) -> Result<f64> {
    let idx = ct
        .index_of(w.pattern)
        .ok_or_else(|| Error::InvalidCover(format!("pattern {:?} not in code table", w.pattern)))?;
    window_gain(ct, idx, &w.instance(db), w.gaps() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqdb::InputFormat;

    fn db(text: &str) -> SequenceDatabase {
        SequenceDatabase::load_str(text, InputFormat::TokenText).unwrap()
    }

    fn serial(db: &SequenceDatabase, toks: &[&str]) -> Pattern {
        let ids: Vec<EventId> = toks.iter().map(|t| db.alphabet().id(t).unwrap()).collect();
        Pattern::serial(&ids).unwrap()
    }

    fn config(mode: Mode) -> SquishConfig {
        SquishConfig {
            mode,
            ..Default::default()
        }
    }

    #[test]
    fn estimate_joins_alternating_pairs() {
        let d = db("a b a b a b a b a b a b");
        let miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        let exts = miner.estimate_batch();
        let ab = serial(&d, &["a", "b"]);
        let top = &exts[0];
        assert_eq!(top.pattern, ab);
        assert_eq!(top.joined_windows, 6);
    }

    #[test]
    fn self_join_does_not_reuse_events() {
        let d = db(&vec!["a a a a b"; 40].join("\n"));
        let snap = CoverSnapshot::build(&d, &SelectedWindows::new(&d), &CodeTable::standard(&d), false);
        let exts = estimate(&snap, 0, None, None);
        let aa = exts
            .iter()
            .find(|e| e.pattern == serial(&d, &["a", "a"]))
            .unwrap();
        assert_eq!(aa.joined_windows, 80);
    }

    #[test]
    fn accept_and_reject() {
        let text = "a b x a b y a b z a b w a b v a b u a b t a b s";
        let d = db(text);
        let mut miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        let ab = serial(&d, &["a", "b"]);
        let before = miner.total_bits();
        assert!(miner.accept_candidate(&ab).unwrap());
        assert!(miner.total_bits() < before);
        assert!(!miner.accept_candidate(&ab).unwrap());
        let ba = serial(&d, &["s", "a"]);
        assert!(!miner.accept_candidate(&ba).unwrap());
    }

    #[test]
    fn gain_sign() {
        let text = "a b x a b y a b z a b w a b v a b u a b t a b s b a";
        let d = db(text);
        let mut miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        miner.set_patterns(&[serial(&d, &["a", "b"])]).unwrap();
        let w = miner.selection().windows()[0].clone();
        assert!(gain(&d, miner.code_table(), &w).unwrap() > 0.0);
        // Once every `a` is covered its singleton code is undefined.
        let d = db("a b x a b y a b");
        let mut miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        miner.set_patterns(&[serial(&d, &["a", "b"])]).unwrap();
        let w = miner.selection().windows()[0].clone();
        assert!(matches!(gain(&d, miner.code_table(), &w), Err(Error::ZeroUsage)));
    }

    #[test]
    fn covered_subpattern_is_dropped() {
        let d = db("a b c d x a b c d y a b c d z a b c d w a b c d");
        let mut miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        miner
            .set_patterns(&[serial(&d, &["a", "b"]), serial(&d, &["c", "d"])])
            .unwrap();
        assert_eq!(miner.patterns().len(), 2);
        assert!(miner
            .accept_candidate(&serial(&d, &["a", "b", "c", "d"]))
            .unwrap());
        miner.prune().unwrap();
        assert_eq!(miner.patterns(), vec![&serial(&d, &["a", "b", "c", "d"])]);
    }

    #[test]
    fn merge_prefers_choice_slot() {
        let mut lines = Vec::new();
        for i in 0..12 {
            lines.push(format!("a x c q{i} b x c r{i}"));
        }
        let d = db(&lines.join("\n"));
        let mut miner = Miner::new(&d, config(Mode::Choicisode)).unwrap();
        let axc = serial(&d, &["a", "x", "c"]);
        let bxc = serial(&d, &["b", "x", "c"]);
        miner.set_patterns(std::slice::from_ref(&axc)).unwrap();
        let decision = miner.merge_decision(&bxc);
        assert_eq!(decision.target, miner.pattern_id(&axc));
        assert_eq!(decision.position, 0);
        assert!(decision.delta_model_bits < 0.0);
        assert!(miner.accept_candidate(&bxc).unwrap());
        assert_eq!(miner.patterns().len(), 1);
        assert!(!miner.patterns()[0].is_serial());
    }

    #[test]
    fn bridging_variant_inserts_gap_event() {
        let d = db("a g b x a g b y a g b z a g b");
        let mut miner = Miner::new(&d, config(Mode::Interleave)).unwrap();
        miner.set_patterns(&[serial(&d, &["a", "b"])]).unwrap();
        let id = miner.pattern_id(&serial(&d, &["a", "b"])).unwrap();
        assert_eq!(miner.bridging_variants(id), vec![serial(&d, &["a", "g", "b"])]);
    }

    #[test]
    fn squish_finds_repeated_pattern_and_curve_is_monotone() {
        let mut lines = Vec::new();
        for i in 0..30 {
            lines.push(format!("p{} a b c d p{}", i % 7, (i * 3) % 11));
        }
        let d = db(&lines.join("\n"));
        let r = squish(&d, config(Mode::Interleave)).unwrap();
        assert!(r
            .patterns
            .iter()
            .any(|p| p.pattern == serial(&d, &["a", "b", "c", "d"])));
        assert!(r.report.delta_l > 0.0);
        for pair in r.report.curve.windows(2) {
            assert!(pair[1].total_bits <= pair[0].total_bits);
        }
    }
}
