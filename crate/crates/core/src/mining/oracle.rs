//! Exhaustive reference miner. Counts every subset of every transaction's
//! frequent items directly from the staged transactions; it shares no code
//! with the index or its access paths.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::item::ItemId;
use crate::mining::ItemsetResult;
use crate::store::TransactionDb;

pub const MAX_ITEMS: usize = 30;
pub const MAX_FREQUENT_ITEMS: usize = 20;
/// Largest per-transaction subset enumeration (2^22 subsets).
pub const MAX_FREQUENT_PER_TRANSACTION: usize = 22;

/// Items are sorted by id; the caller canonicalizes if needed.
pub fn oracle_bruteforce(db: &TransactionDb, min_support: u64) -> Result<Vec<ItemsetResult>> {
    let min_support = min_support.max(1);
    let mut support = vec![0u64; db.catalog().len()];
    for t in db.transactions() {
        for &i in t.items() {
            support[i.index()] += 1;
        }
    }
    let frequent: Vec<ItemId> = (0..support.len() as u32)
        .map(ItemId)
        .filter(|i| support[i.index()] >= min_support)
        .collect();
    if db.n_items() > MAX_ITEMS && frequent.len() > MAX_FREQUENT_ITEMS {
        return Err(Error::OracleGuard(format!(
            "{} items with {} frequent exceeds {MAX_ITEMS} items / {MAX_FREQUENT_ITEMS} frequent",
            db.n_items(),
            frequent.len()
        )));
    }
    if frequent.len() > 64 {
        return Err(Error::OracleGuard(format!("{} frequent items", frequent.len())));
    }
    let bit: HashMap<ItemId, u32> = frequent.iter().enumerate().map(|(b, &i)| (i, b as u32)).collect();

    let mut counts: HashMap<u64, u64> = HashMap::new();
    for t in db.transactions() {
        let mask = t
            .items()
            .iter()
            .filter_map(|i| bit.get(i))
            .fold(0u64, |m, &b| m | (1 << b));
        if mask.count_ones() as usize > MAX_FREQUENT_PER_TRANSACTION {
            return Err(Error::OracleGuard(format!(
                "transaction {} has {} frequent items",
                t.tid,
                mask.count_ones()
            )));
        }
        // every non-empty submask
        let mut sub = mask;
        while sub != 0 {
            *counts.entry(sub).or_default() += 1;
            sub = (sub - 1) & mask;
        }
    }

    let mut out: Vec<ItemsetResult> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_support)
        .map(|(mask, support)| ItemsetResult {
            items: (0..64)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| frequent[b as usize])
                .collect(),
            support,
        })
        .collect();
    out.sort_by(|a, b| (a.items.len(), &a.items).cmp(&(b.items.len(), &b.items)));
    Ok(out)
}
