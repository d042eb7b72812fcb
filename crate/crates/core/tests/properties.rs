mod common;

use common::{direct_support, expected_multiset, keyed, keyed_multiset};
use proptest::prelude::*;
use wpsmine::incremental::DeltaBatch;
use wpsmine::{
    generate_rules, mine_fp, mine_levelwise, oracle_bruteforce, sessionize, IndexHandle, LogRecord,
    PageCatalog, SessionConfig, StorageConfig, TransactionDb, WpsIndex,
};

fn rows() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::btree_set(0u8..12, 1..7).prop_map(|s| s.into_iter().map(|i| format!("p{i}")).collect()),
        1..30,
    )
}

fn build(db: &TransactionDb) -> WpsIndex {
    WpsIndex::build(db, &StorageConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_reconstructs_input(rows in rows()) {
        let db = TransactionDb::from_keyed(&rows);
        let ix = build(&db);
        prop_assert!(ix.tree().validate().is_ok());
        prop_assert_eq!(keyed_multiset(&ix.tree().reconstruct(), ix.catalog()), expected_multiset(&db, &ix));
    }

    #[test]
    fn occurrences_match_scan(rows in rows()) {
        let ix = build(&TransactionDb::from_keyed(&rows));
        for (item, _) in ix.catalog().iter() {
            let mut a = ix.lookup_occurrences(item);
            let mut b = ix.scan_occurrences(item);
            a.sort();
            b.sort();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(a.iter().map(|o| o.1).sum::<u64>(), ix.support(item));
        }
    }

    #[test]
    fn miners_agree_with_oracle(rows in rows(), s in 1u64..6) {
        let db = TransactionDb::from_keyed(&rows);
        let mut ix = build(&db);
        let oracle = keyed(&oracle_bruteforce(&db, s).unwrap(), db.catalog());
        prop_assert_eq!(&keyed(&mine_fp(&mut ix, s).unwrap(), ix.catalog()), &oracle);
        prop_assert_eq!(&keyed(&mine_levelwise(&mut ix, s).unwrap(), ix.catalog()), &oracle);
        for (set, &sup) in &oracle {
            prop_assert_eq!(direct_support(&db, set), sup);
        }
    }

    #[test]
    fn rule_confidence_is_a_support_ratio(rows in rows()) {
        let db = TransactionDb::from_keyed(&rows);
        let mut ix = build(&db);
        let sets = mine_fp(&mut ix, 2).unwrap();
        for r in generate_rules(&sets, 0.0).unwrap() {
            let ante: Vec<String> = r.antecedent.iter().map(|&i| ix.catalog().key(i).to_string()).collect();
            let both: Vec<String> = ante
                .iter()
                .cloned()
                .chain(r.consequent.iter().map(|&i| ix.catalog().key(i).to_string()))
                .collect();
            let expected = direct_support(&db, &both) as f64 / direct_support(&db, &ante) as f64;
            prop_assert!((r.confidence - expected).abs() < 1e-9);
            prop_assert!(r.antecedent.iter().all(|a| !r.consequent.contains(a)));
        }
    }

    #[test]
    fn append_matches_scratch(rows in rows(), cut in 0usize..30) {
        let at = cut.min(rows.len());
        let head = TransactionDb::from_keyed(&rows[..at]);
        let tail = TransactionDb::from_keyed(&rows[at..]);
        let mut grown = build(&head);
        grown.append_transactions(&DeltaBatch::renumbered(&tail, grown.next_tid(), "p")).unwrap();
        let mut scratch = build(&TransactionDb::from_keyed(&rows));
        for s in [1, 2, 4] {
            prop_assert_eq!(
                keyed(&mine_fp(&mut grown, s).unwrap(), grown.catalog()),
                keyed(&mine_fp(&mut scratch, s).unwrap(), scratch.catalog())
            );
        }
        for (item, key) in scratch.catalog().iter() {
            prop_assert_eq!(grown.support(grown.item(key).unwrap()), scratch.support(item));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn save_open_preserves_reconstruction(rows in rows(), records in 2usize..12) {
        let cfg = StorageConfig {
            block_size: StorageConfig::block_size_for(records),
            ..StorageConfig::default()
        };
        let mut ix = WpsIndex::build(&TransactionDb::from_keyed(&rows), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        ix.save(dir.path()).unwrap();
        let mut h = IndexHandle::open(dir.path(), false).unwrap();
        let loaded = h.load_index().unwrap();
        prop_assert_eq!(loaded.tree().reconstruct(), ix.tree().reconstruct());
        prop_assert_eq!(h.stats_report().tree_records, ix.stats_report().tree_records);
    }

    #[test]
    fn sessionize_ignores_record_order(
        visits in prop::collection::vec((0u8..4, 0i64..20_000, 0u8..8), 1..60),
        seed in any::<u64>(),
    ) {
        let records: Vec<LogRecord> = visits
            .iter()
            .map(|&(c, ts, p)| LogRecord {
                client_id: format!("10.0.0.{c}"),
                timestamp: ts,
                page: format!("/page{p}.html"),
                status: 200,
                bytes: 100,
            })
            .collect();
        let mut shuffled = records.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let render = |recs: Vec<LogRecord>| {
            let mut cat = PageCatalog::new();
            let txs = sessionize(recs, SessionConfig::default(), &mut cat).unwrap();
            txs.iter()
                .map(|t| {
                    let mut k: Vec<String> = t.items().iter().map(|&i| cat.key(i).to_string()).collect();
                    k.sort();
                    (t.tid, k)
                })
                .collect::<Vec<_>>()
        };
        prop_assert_eq!(render(records), render(shuffled));
    }
}
