//! The two-level index: prefix tree plus bucketed occurrence table.

pub mod hash;
pub mod layers;
pub mod tree;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use hash::{hash_bucket, ItemChain, Occurrence, WpsHashIndex, DEFAULT_BUCKETS};
pub use layers::{assign_layers, Layer, LayerAssignment, LayerThresholds};
pub use tree::{InsertOutcome, NodeId, PathMultiset, WpsNode, WpsTree};

use crate::error::Result;
use crate::item::{ItemId, PageCatalog};
use crate::storage::{IndexStatsReport, IoStats, StorageConfig};
use crate::store::{count_supports, order_items, project_transaction, ItemOrder, Supports, TransactionDb};

/// Source-level facts recorded at build time and carried through appends.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub dataset: String,
    pub n_transactions: u64,
    pub total_items: u64,
    pub dataset_bytes: u64,
    pub creation_seconds: f64,
    pub tid_min: Option<u64>,
    pub tid_max: Option<u64>,
}

/// In-memory index: tree, occurrence table, and the item metadata both
/// depend on.
#[derive(Debug, Clone)]
pub struct WpsIndex {
    pub(crate) catalog: PageCatalog,
    pub(crate) tree: WpsTree,
    pub(crate) hash: WpsHashIndex,
    /// Supports of the indexed data (items removed by `k_sup` have 0).
    pub(crate) supports: Supports,
    pub(crate) config: StorageConfig,
    pub(crate) info: BuildInfo,
    pub(crate) io: IoStats,
}

/// Smallest absolute support kept by a relative `k_sup` filter.
pub(crate) fn k_sup_min_support(k_sup: f64, n_transactions: u64) -> u64 {
    (k_sup * n_transactions as f64 - 1e-9).ceil().max(0.0) as u64
}

/// Builds the index from a staged db under a precomputed order.
pub fn build_index(db: &TransactionDb, order: &ItemOrder, cfg: &StorageConfig) -> Result<WpsIndex> {
    cfg.validate()?;
    let started = Instant::now();
    let full = Supports::from_stats(&count_supports(db));
    let min = k_sup_min_support(cfg.k_sup, db.len() as u64);
    let filter = (min > 1).then_some(min);

    let mut index = WpsIndex {
        catalog: db.catalog().clone(),
        tree: WpsTree::new(order.clone()),
        hash: WpsHashIndex::new(cfg.n_buckets),
        supports: Supports::default(),
        config: cfg.clone(),
        info: BuildInfo {
            dataset: String::new(),
            n_transactions: db.len() as u64,
            total_items: db.total_items() as u64,
            dataset_bytes: db.source_bytes(),
            creation_seconds: 0.0,
            tid_min: db.transactions().iter().map(|t| t.tid).min(),
            tid_max: db.transactions().iter().map(|t| t.tid).max(),
        },
        io: IoStats {
            source_scans: db.source_scans(),
            ..IoStats::default()
        },
    };
    for s in full.stats() {
        if filter.is_none_or(|m| s.support >= m) {
            index.supports.set(s.item, s.support);
        }
    }
    for tx in db.transactions() {
        let items = project_transaction(tx, order, filter, &full);
        index.insert_projected(&items, 1)?;
    }
    index.info.creation_seconds = started.elapsed().as_secs_f64();
    Ok(index)
}

impl WpsIndex {
    /// Counts supports, orders items and builds in one call.
    pub fn build(db: &TransactionDb, cfg: &StorageConfig) -> Result<Self> {
        let order = order_items(&count_supports(db), db.catalog());
        build_index(db, &order, cfg)
    }

    pub(crate) fn insert_projected(&mut self, items: &[ItemId], multiplicity: u64) -> Result<InsertOutcome> {
        let outcome = self.tree.insert_n(items, multiplicity)?;
        for &node in &outcome.created {
            let n = self.tree.node(node);
            let item = n.item.expect("created node has an item");
            self.hash.register(item, self.catalog.key(item), node, n.count);
        }
        for &node in &outcome.incremented {
            self.hash.set_count(node, self.tree.node(node).count);
        }
        Ok(outcome)
    }

    pub fn tree(&self) -> &WpsTree {
        &self.tree
    }

    pub fn hash_index(&self) -> &WpsHashIndex {
        &self.hash
    }

    pub fn catalog(&self) -> &PageCatalog {
        &self.catalog
    }

    pub fn order(&self) -> &ItemOrder {
        self.tree.order()
    }

    pub fn supports(&self) -> &Supports {
        &self.supports
    }

    pub fn support(&self, item: ItemId) -> u64 {
        self.supports.get(item)
    }

    pub fn config(&self) -> &StorageConfig {
        &self.config
    }

    pub fn info(&self) -> &BuildInfo {
        &self.info
    }

    pub fn set_dataset_name(&mut self, name: impl Into<String>) {
        self.info.dataset = name.into();
    }

    pub fn io_stats(&self) -> IoStats {
        self.io
    }

    pub fn item(&self, key: &str) -> Option<ItemId> {
        self.catalog.id(key)
    }

    /// Occurrence entries of `item` from the hash index.
    pub fn occurrences(&self, item: ItemId) -> &[Occurrence] {
        if item.index() >= self.catalog.len() {
            return &[];
        }
        self.hash.lookup(item, self.catalog.key(item))
    }

    /// `(node, count)` of every tree node carrying `item`.
    pub fn lookup_occurrences(&self, item: ItemId) -> Vec<(NodeId, u64)> {
        self.occurrences(item).iter().map(|o| (o.node, o.count)).collect()
    }

    /// Same answer as [`lookup_occurrences`](Self::lookup_occurrences) by a
    /// full tree traversal; the baseline the hash index is checked against.
    pub fn scan_occurrences(&self, item: ItemId) -> Vec<(NodeId, u64)> {
        self.tree
            .node_ids()
            .filter(|&id| self.tree.node(id).item == Some(item))
            .map(|id| (id, self.tree.node(id).count))
            .collect()
    }

    pub fn layer_thresholds(&self) -> LayerThresholds {
        self.config
            .layers
            .unwrap_or_else(|| LayerThresholds::default_for(self.info.n_transactions))
    }

    pub fn layers(&self) -> LayerAssignment {
        layers::assign_with(&self.tree, &self.supports, self.layer_thresholds())
    }

    /// Summary statistics of this index.
    pub fn stats_report(&self) -> IndexStatsReport {
        IndexStatsReport::new(
            &self.info,
            self.catalog.len() as u64,
            self.tree.n_nodes() as u64,
            (self.hash.n_entries() + self.hash.n_chains()) as u64,
        )
    }
}
