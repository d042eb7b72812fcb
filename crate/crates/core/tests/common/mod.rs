#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpsmine::index::PathMultiset;
use wpsmine::{ItemsetResult, PageCatalog, TransactionDb, WpsIndex};

/// Random db with at most `max_tx` transactions over at most `max_items`
/// items keyed `i0..`.
pub fn random_db(seed: u64, max_tx: usize, max_items: usize) -> TransactionDb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_tx = rng.random_range(1..=max_tx);
    let n_items = rng.random_range(1..=max_items);
    let density = rng.random_range(0.1..0.6);
    let rows: Vec<Vec<String>> = (0..n_tx)
        .map(|_| {
            let mut row: Vec<String> = (0..n_items)
                .filter(|_| rng.random_bool(density))
                .map(|i| format!("i{i}"))
                .collect();
            if row.is_empty() {
                row.push(format!("i{}", rng.random_range(0..n_items)));
            }
            row
        })
        .collect();
    TransactionDb::from_keyed(&rows)
}

/// Transactions sorted by the index's order and grouped, with item keys.
pub fn expected_multiset(db: &TransactionDb, index: &WpsIndex) -> BTreeMap<Vec<String>, u64> {
    let mut out = BTreeMap::new();
    for t in db.transactions() {
        let mut keys: Vec<(u32, String)> = t
            .items()
            .iter()
            .map(|&i| {
                let key = db.catalog().key(i);
                let id = index.item(key).expect("indexed key");
                (index.order().rank_of(id), key.to_string())
            })
            .collect();
        keys.sort();
        *out.entry(keys.into_iter().map(|k| k.1).collect()).or_default() += 1;
    }
    out
}

pub fn keyed_multiset(paths: &PathMultiset, catalog: &PageCatalog) -> BTreeMap<Vec<String>, u64> {
    paths
        .iter()
        .map(|(items, &m)| (items.iter().map(|&i| catalog.key(i).to_string()).collect(), m))
        .collect()
}

/// Results keyed by sorted item keys.
pub fn keyed(results: &[ItemsetResult], catalog: &PageCatalog) -> BTreeMap<Vec<String>, u64> {
    wpsmine::mining::keyed_results(results, catalog)
}

/// Every itemset and its support, by direct counting over `db`.
pub fn direct_support(db: &TransactionDb, keys: &[String]) -> u64 {
    db.transactions()
        .iter()
        .filter(|t| {
            keys.iter()
                .all(|k| db.item(k).is_some_and(|i| t.contains(i)))
        })
        .count() as u64
}
