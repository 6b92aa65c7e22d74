use proptest::prelude::*;
use squish::cover::{
    cover_to_stats, find_windows, greedy_cover, is_minimal_window, validate_window, AdmissionOrder,
    CoverMode, SelectedWindows,
};
use squish::encoding::{
    decode_streams, encode_cover, prequential_meta_length, standard_length, total_length,
    universal_int_length, CodeTable,
};
use squish::eval::{format_pattern_list, parse_pattern_list, pattern_recall, TokenPattern};
use squish::search::{squish, Miner, Mode, SquishConfig};
use squish::{EventId, InputFormat, InvertedIndex, Pattern, PatternId, SequenceDatabase};

fn database() -> impl Strategy<Value = SequenceDatabase> {
    (1usize..=5, 1u32..=6).prop_flat_map(|(nseq, alphabet)| {
        prop::collection::vec(prop::collection::vec(0..alphabet, 1..40), nseq).prop_map(|seqs| {
            let toks: Vec<Vec<String>> = seqs
                .iter()
                .map(|s| s.iter().map(|e| format!("e{e}")).collect())
                .collect();
            SequenceDatabase::from_token_sequences(&toks).unwrap()
        })
    })
}

/// Patterns over the database alphabet; slots with several events are choices.
fn patterns_for(db: &SequenceDatabase, raw: &[Vec<Vec<u32>>]) -> Vec<Pattern> {
    let n = db.alphabet_size() as u32;
    let mut out: Vec<Pattern> = Vec::new();
    for p in raw {
        let slots: Vec<Vec<EventId>> = p
            .iter()
            .map(|s| s.iter().map(|&e| EventId(e % n)).collect())
            .collect();
        if let Ok(p) = Pattern::new(slots) {
            if p.len() >= 2 && !out.contains(&p) {
                out.push(p);
            }
        }
    }
    out
}

fn raw_patterns() -> impl Strategy<Value = Vec<Vec<Vec<u32>>>> {
    prop::collection::vec(
        prop::collection::vec(prop::collection::vec(0u32..6, 1..3), 2..5),
        1..5,
    )
}

fn cover_with(
    db: &SequenceDatabase,
    patterns: &[Pattern],
    mode: CoverMode,
    order: AdmissionOrder,
) -> SelectedWindows {
    let index = InvertedIndex::build(db);
    let mut sel = SelectedWindows::new(db);
    for (i, p) in patterns.iter().enumerate() {
        let id = PatternId(i as u32);
        let mut cands = find_windows(&index, p, id);
        if mode == CoverMode::Disjoint {
            cands.retain(|w| is_minimal_window(&index, p, w));
        }
        greedy_cover(&mut sel, db, &index, p, id, &cands, mode, order);
    }
    sel
}

fn mode_strategy() -> impl Strategy<Value = CoverMode> {
    prop_oneof![Just(CoverMode::Disjoint), Just(CoverMode::Interleaved)]
}

fn order_strategy() -> impl Strategy<Value = AdmissionOrder> {
    prop_oneof![
        Just(AdmissionOrder::ShortestFirst),
        Just(AdmissionOrder::LongestFirst),
        Just(AdmissionOrder::Positional)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn greedy_covers_are_lossless_and_disjoint(
        db in database(),
        raw in raw_patterns(),
        mode in mode_strategy(),
        order in order_strategy(),
    ) {
        let patterns = patterns_for(&db, &raw);
        let sel = cover_with(&db, &patterns, mode, order);

        let mut seen = std::collections::HashSet::new();
        for w in sel.windows() {
            validate_window(&db, &patterns[w.pattern.index()], w).unwrap();
            for &o in &w.matched {
                prop_assert!(seen.insert((w.seq, o)), "offset claimed twice");
            }
            if mode == CoverMode::Disjoint {
                let index = InvertedIndex::build(&db);
                prop_assert!(is_minimal_window(&index, &patterns[w.pattern.index()], w));
            }
        }

        let table: Vec<(PatternId, &Pattern)> =
            patterns.iter().enumerate().map(|(i, p)| (PatternId(i as u32), p)).collect();
        let ct = cover_to_stats(&sel, &db, &table).unwrap();
        let singles: u64 = ct.singleton_usage.iter().sum();
        prop_assert_eq!(sel.covered_events() as u64 + singles, db.total_events() as u64);
        for p in &ct.patterns {
            prop_assert_eq!(p.fills, p.usage() * (p.pattern.len() as u64 - 1));
        }

        let streams = encode_cover(&db, &ct, &sel).unwrap();
        let decoded = decode_streams(&ct, &streams, &db.sequence_lengths()).unwrap();
        prop_assert_eq!(decoded, db.sequences().to_vec());
    }

    #[test]
    fn find_windows_one_per_start(db in database(), raw in raw_patterns()) {
        let index = InvertedIndex::build(&db);
        for p in patterns_for(&db, &raw) {
            let ws = find_windows(&index, &p, PatternId(0));
            for w in &ws {
                validate_window(&db, &p, w).unwrap();
            }
            for pair in ws.windows(2) {
                prop_assert!((pair[0].seq, pair[0].start()) < (pair[1].seq, pair[1].start()));
            }
        }
    }

    #[test]
    fn universal_code_is_monotone(n in 1u64..1_000_000_000_000) {
        prop_assert!(universal_int_length(n + 1).unwrap() >= universal_int_length(n).unwrap());
    }

    #[test]
    fn prequential_grows_with_records(f in 0u64..2000, g in 0u64..2000) {
        let base = prequential_meta_length(f, g);
        prop_assert!(prequential_meta_length(f + 1, g) > base);
        prop_assert!(prequential_meta_length(f, g + 1) > base);
    }

    #[test]
    fn singleton_model_is_the_baseline(db in database()) {
        let lengths = total_length(&db, &CodeTable::standard(&db)).unwrap();
        prop_assert!((lengths.total - standard_length(&db)).abs() < 1e-9);
        let miner = Miner::new(&db, SquishConfig::default()).unwrap();
        prop_assert!((miner.total_bits() - standard_length(&db)).abs() < 1e-9);
    }

    #[test]
    fn acceptance_and_pruning_never_lengthen(db in database(), raw in raw_patterns()) {
        let mut miner = Miner::new(&db, SquishConfig::default()).unwrap();
        for p in patterns_for(&db, &raw) {
            let before = miner.total_bits();
            if miner.accept_candidate(&p).unwrap() {
                prop_assert!(miner.total_bits() < before - 1e-9);
            } else {
                prop_assert!((miner.total_bits() - before).abs() < 1e-9);
            }
            let before = miner.total_bits();
            miner.prune().unwrap();
            prop_assert!(miner.total_bits() <= before + 1e-9);
        }
    }

    #[test]
    fn recall_is_label_free(
        mined in prop::collection::vec(prop::collection::vec(0u8..6, 1..5), 0..5),
        targets in prop::collection::vec(prop::collection::vec(0u8..6, 1..5), 1..5),
        shift in 1u8..6,
    ) {
        let to_tokens = |ps: &[Vec<u8>], k: u8| -> Vec<TokenPattern> {
            ps.iter().map(|p| p.iter().map(|&e| format!("t{}", (e + k) % 6)).collect()).collect()
        };
        let r = pattern_recall(&to_tokens(&mined, 0), &to_tokens(&targets, 0));
        prop_assert!((0.0..=1.0).contains(&r));
        let relabeled = pattern_recall(&to_tokens(&mined, shift), &to_tokens(&targets, shift));
        prop_assert_eq!(r, relabeled);
    }

    #[test]
    fn pattern_lists_round_trip(ps in prop::collection::vec(prop::collection::vec("[a-z][a-z0-9]{0,3}", 1..5), 0..6)) {
        let text = format_pattern_list(&ps);
        prop_assert_eq!(parse_pattern_list(&text).unwrap(), ps);
    }

    #[test]
    fn token_text_round_trips(db in database()) {
        let again = SequenceDatabase::load_str(&db.to_token_text(), InputFormat::TokenText).unwrap();
        prop_assert_eq!(again.sequences(), db.sequences());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mining_is_deterministic_lossless_and_anytime(db in database(), mode in prop_oneof![
        Just(Mode::Disjoint), Just(Mode::Interleave), Just(Mode::Choicisode)
    ]) {
        let config = SquishConfig { mode, ..Default::default() };
        let a = squish(&db, config.clone()).unwrap();
        let b = squish(&db, config).unwrap();
        prop_assert_eq!(&a.patterns, &b.patterns);
        prop_assert_eq!(a.lengths.total, b.lengths.total);
        prop_assert!(a.report.delta_l >= -1e-9);
        for pair in a.report.curve.windows(2) {
            prop_assert!(pair[1].total_bits <= pair[0].total_bits + 1e-9);
        }
        let streams = encode_cover(&db, &a.code_table, &a.selection).unwrap();
        let decoded = decode_streams(&a.code_table, &streams, &db.sequence_lengths()).unwrap();
        prop_assert_eq!(decoded, db.sequences().to_vec());
    }
}
