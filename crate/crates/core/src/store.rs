//! Relation R held in memory after the single source scan, item supports,
//! and the canonical item order used by the prefix tree.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::item::{ItemId, PageCatalog, Transaction};

/// Staged transactional database. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct TransactionDb {
    transactions: Vec<Transaction>,
    catalog: PageCatalog,
    n_items: usize,
    duplicates_dropped: usize,
    source_scans: u64,
    source_bytes: u64,
}

impl TransactionDb {
    /// Stages an already-read source. Empty transactions are dropped.
    pub fn from_parts(
        transactions: Vec<Transaction>,
        catalog: PageCatalog,
        duplicates_dropped: usize,
    ) -> Self {
        let transactions: Vec<_> = transactions.into_iter().filter(|t| !t.is_empty()).collect();
        let mut seen = vec![false; catalog.len()];
        for t in &transactions {
            for &i in t.items() {
                seen[i.index()] = true;
            }
        }
        let n_items = seen.iter().filter(|&&s| s).count();
        Self {
            transactions,
            catalog,
            n_items,
            duplicates_dropped,
            source_scans: 1,
            source_bytes: 0,
        }
    }

    /// Builds a db from textual item keys; tids are 1..=N in input order.
    pub fn from_keyed<T, S>(rows: &[T]) -> Self
    where
        T: AsRef<[S]>,
        S: AsRef<str>,
    {
        let mut catalog = PageCatalog::new();
        let mut dropped = 0;
        let transactions = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let items = row
                    .as_ref()
                    .iter()
                    .map(|k| catalog.register(k.as_ref()))
                    .collect();
                let (t, d) = Transaction::with_dedup(i as u64 + 1, items);
                dropped += d;
                t
            })
            .collect();
        let mut db = Self::from_parts(transactions, catalog, dropped);
        db.source_bytes = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|k| k.as_ref().len() as u64 + 1).sum::<u64>())
            .sum();
        db
    }

    pub(crate) fn set_source_bytes(&mut self, bytes: u64) {
        self.source_bytes = bytes;
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn catalog(&self) -> &PageCatalog {
        &self.catalog
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Number of distinct items across all transactions.
    pub fn n_items(&self) -> usize {
        self.n_items
    }

    /// Duplicate items dropped while staging.
    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    /// Times the external source was read to produce this db (always 1).
    pub fn source_scans(&self) -> u64 {
        self.source_scans
    }

    /// Size of the staged source in bytes, as read.
    pub fn source_bytes(&self) -> u64 {
        self.source_bytes
    }

    pub fn total_items(&self) -> usize {
        self.transactions.iter().map(Transaction::len).sum()
    }

    pub fn avg_transaction_size(&self) -> f64 {
        if self.transactions.is_empty() {
            0.0
        } else {
            self.total_items() as f64 / self.transactions.len() as f64
        }
    }

    pub fn item(&self, key: &str) -> Option<ItemId> {
        self.catalog.id(key)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemStats {
    pub item: ItemId,
    pub support: u64,
}

/// Support of every item, indexed by [`ItemId`]. Unknown items have support 0.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Supports(Vec<u64>);

impl Supports {
    pub fn from_stats(stats: &[ItemStats]) -> Self {
        let len = stats.iter().map(|s| s.item.index() + 1).max().unwrap_or(0);
        let mut v = vec![0; len];
        for s in stats {
            v[s.item.index()] = s.support;
        }
        Supports(v)
    }

    pub fn get(&self, item: ItemId) -> u64 {
        self.0.get(item.index()).copied().unwrap_or(0)
    }

    pub fn add(&mut self, item: ItemId, delta: u64) {
        if self.0.len() <= item.index() {
            self.0.resize(item.index() + 1, 0);
        }
        self.0[item.index()] += delta;
    }

    pub fn set(&mut self, item: ItemId, value: u64) {
        if self.0.len() <= item.index() {
            self.0.resize(item.index() + 1, 0);
        }
        self.0[item.index()] = value;
    }

    pub fn max(&self) -> u64 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Items with non-zero support.
    pub fn stats(&self) -> Vec<ItemStats> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .map(|(i, &support)| ItemStats {
                item: ItemId(i as u32),
                support,
            })
            .collect()
    }
}

/// One entry per distinct item, in ascending item id order.
pub fn count_supports(db: &TransactionDb) -> Vec<ItemStats> {
    let mut counts = vec![0u64; db.catalog().len()];
    for t in db.transactions() {
        for &i in t.items() {
            counts[i.index()] += 1;
        }
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, support)| ItemStats {
            item: ItemId(i as u32),
            support,
        })
        .collect()
}

const UNRANKED: u32 = u32::MAX;

/// Total order over items: descending support, ties broken by ascending key.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemOrder {
    items: Vec<ItemId>,
    rank: Vec<u32>,
}

impl ItemOrder {
    pub fn from_sequence(items: Vec<ItemId>) -> Self {
        let len = items.iter().map(|i| i.index() + 1).max().unwrap_or(0);
        let mut rank = vec![UNRANKED; len];
        for (r, i) in items.iter().enumerate() {
            rank[i.index()] = r as u32;
        }
        Self { items, rank }
    }

    pub fn rank(&self, item: ItemId) -> Option<u32> {
        match self.rank.get(item.index()) {
            Some(&r) if r != UNRANKED => Some(r),
            _ => None,
        }
    }

    /// Rank of an item the caller knows to be ordered.
    ///
    /// Panics if the item is not part of the order.
    pub fn rank_of(&self, item: ItemId) -> u32 {
        self.rank(item)
            .unwrap_or_else(|| panic!("item {item} is not in the item order"))
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.rank(item).is_some()
    }

    /// Appends previously unseen items to the tail, ordered by key among
    /// themselves. Existing ranks are untouched.
    pub fn extend_tail(&mut self, mut new_items: Vec<ItemId>, catalog: &PageCatalog) {
        new_items.retain(|&i| !self.contains(i));
        new_items.sort_by(|&a, &b| catalog.key(a).cmp(catalog.key(b)));
        new_items.dedup();
        for i in new_items {
            if self.rank.len() <= i.index() {
                self.rank.resize(i.index() + 1, UNRANKED);
            }
            self.rank[i.index()] = self.items.len() as u32;
            self.items.push(i);
        }
    }

    /// Sorts `items` by ascending rank in place.
    pub fn sort(&self, items: &mut [ItemId]) {
        items.sort_by_key(|&i| self.rank_of(i));
    }

    /// True when ranks respect descending support (the property an append
    /// under a frozen order may break).
    pub fn is_support_descending(&self, supports: &Supports) -> bool {
        self.items
            .windows(2)
            .all(|w| supports.get(w[0]) >= supports.get(w[1]))
    }
}

fn support_then_key(a: &ItemStats, b: &ItemStats, catalog: &PageCatalog) -> Ordering {
    b.support
        .cmp(&a.support)
        .then_with(|| catalog.key(a.item).cmp(catalog.key(b.item)))
}

/// Descending support, then ascending key.
pub fn order_items(stats: &[ItemStats], catalog: &PageCatalog) -> ItemOrder {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| support_then_key(a, b, catalog));
    ItemOrder::from_sequence(sorted.into_iter().map(|s| s.item).collect())
}

/// Items of `tx` meeting `min_support` (when given), by ascending rank.
pub fn project_transaction(
    tx: &Transaction,
    order: &ItemOrder,
    min_support: Option<u64>,
    supports: &Supports,
) -> Vec<ItemId> {
    let mut out: Vec<ItemId> = tx
        .items()
        .iter()
        .copied()
        .filter(|&i| min_support.is_none_or(|m| supports.get(i) >= m))
        .collect();
    order.sort(&mut out);
    out
}
