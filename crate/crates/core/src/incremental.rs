//! Appending transactions to a built index without touching its source.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{WpsHashIndex, WpsIndex, WpsTree};
use crate::item::{ItemId, PageCatalog, Transaction};
use crate::storage::{IndexHandle, IoStats};
use crate::store::{order_items, ItemStats, Supports, TransactionDb};

/// New transactions plus a free-form origin tag (log segment, file name).
#[derive(Debug, Clone, Default)]
pub struct DeltaBatch {
    pub transactions: Vec<Transaction>,
    pub catalog: PageCatalog,
    pub provenance: String,
    pub source_bytes: u64,
}

impl DeltaBatch {
    /// Uses the db's transaction ids unchanged.
    pub fn from_db(db: &TransactionDb, provenance: impl Into<String>) -> Self {
        Self {
            transactions: db.transactions().to_vec(),
            catalog: db.catalog().clone(),
            provenance: provenance.into(),
            source_bytes: db.source_bytes(),
        }
    }

    /// Renumbers transactions consecutively from `first_tid`.
    pub fn renumbered(db: &TransactionDb, first_tid: u64, provenance: impl Into<String>) -> Self {
        let mut batch = Self::from_db(db, provenance);
        for (i, t) in batch.transactions.iter_mut().enumerate() {
            t.tid = first_tid + i as u64;
        }
        batch
    }

    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateReport {
    pub provenance: String,
    pub transactions_appended: u64,
    pub nodes_created: u64,
    pub counts_incremented: u64,
    pub new_items: Vec<String>,
    /// Reads of the original transaction source during the update.
    pub source_scans: u64,
}

impl WpsIndex {
    /// First tid guaranteed not to collide with the indexed range.
    pub fn next_tid(&self) -> u64 {
        self.info.tid_max.map_or(1, |t| t + 1)
    }

    /// Inserts `batch` under the frozen item order. Unseen items go to the
    /// tail of the order; on an index with no transactions the batch's own
    /// support order is used, so the result matches a fresh build.
    pub fn append_transactions(&mut self, batch: &DeltaBatch) -> Result<UpdateReport> {
        if self.config.k_sup > 0.0 {
            return Err(Error::Config(format!(
                "append requires an index built with k_sup = 0 (found {})",
                self.config.k_sup
            )));
        }
        let mut seen = HashSet::new();
        for t in &batch.transactions {
            let in_range = matches!((self.info.tid_min, self.info.tid_max), (Some(lo), Some(hi)) if (lo..=hi).contains(&t.tid));
            if in_range || !seen.insert(t.tid) {
                return Err(Error::TidCollision(t.tid));
            }
        }

        let mut new_keys = BTreeSet::new();
        let mapped: Vec<Transaction> = batch
            .transactions
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| {
                let items = t
                    .items()
                    .iter()
                    .map(|&i| {
                        let key = batch.catalog.key(i);
                        self.catalog.id(key).unwrap_or_else(|| {
                            new_keys.insert(key.to_string());
                            self.catalog.register(key)
                        })
                    })
                    .collect();
                Transaction::new(t.tid, items)
            })
            .collect();

        for t in &mapped {
            for &i in t.items() {
                self.supports.add(i, 1);
            }
        }
        let unranked: Vec<ItemId> = mapped
            .iter()
            .flat_map(|t| t.items().iter().copied())
            .filter(|&i| !self.order().contains(i))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if self.info.n_transactions == 0 && self.tree.n_nodes() == 0 {
            let stats: Vec<ItemStats> = self.supports.stats();
            *self.tree.order_mut() = order_items(&stats, &self.catalog);
        } else {
            let catalog = self.catalog.clone();
            self.tree.order_mut().extend_tail(unranked, &catalog);
        }

        let mut report = UpdateReport {
            provenance: batch.provenance.clone(),
            new_items: new_keys.into_iter().collect(),
            ..UpdateReport::default()
        };
        for t in &mapped {
            let mut items = t.items().to_vec();
            self.order().sort(&mut items);
            let outcome = self.insert_projected(&items, 1)?;
            report.nodes_created += outcome.created.len() as u64;
            report.counts_incremented += outcome.incremented.len() as u64;
            report.transactions_appended += 1;
            self.info.n_transactions += 1;
            self.info.total_items += items.len() as u64;
            self.info.tid_min = Some(self.info.tid_min.map_or(t.tid, |m| m.min(t.tid)));
            self.info.tid_max = Some(self.info.tid_max.map_or(t.tid, |m| m.max(t.tid)));
        }
        self.info.dataset_bytes += batch.source_bytes;
        Ok(report)
    }

    /// Rebuilds the tree under a fresh support order from the index's own
    /// reconstructed transactions.
    pub fn reorder_rebuild(&self) -> Result<WpsIndex> {
        let paths = self.tree.reconstruct();
        let mut supports = Supports::default();
        for (items, m) in &paths {
            for &i in items {
                supports.add(i, *m);
            }
        }
        let order = order_items(&supports.stats(), &self.catalog);
        let mut out = WpsIndex {
            catalog: self.catalog.clone(),
            tree: WpsTree::new(order.clone()),
            hash: WpsHashIndex::new(self.hash.n_buckets()),
            supports: self.supports.clone(),
            config: self.config.clone(),
            info: self.info.clone(),
            io: IoStats {
                source_scans: self.io.source_scans,
                ..IoStats::default()
            },
        };
        for (items, m) in paths {
            let mut items = items;
            order.sort(&mut items);
            out.insert_projected(&items, m)?;
        }
        Ok(out)
    }
}

impl IndexHandle {
    /// Loads, appends, rewrites the index directory and reopens it.
    pub fn append_transactions(&mut self, batch: &DeltaBatch) -> Result<UpdateReport> {
        if !self.is_writable() {
            return Err(Error::ReadOnly);
        }
        let mut index = self.load_index()?;
        let report = index.append_transactions(batch)?;
        let dir = self.path().to_path_buf();
        index.save(&dir)?;
        *self = IndexHandle::open(&dir, true)?;
        Ok(report)
    }
}
