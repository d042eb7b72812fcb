//! Block-clustered persistence of the index, I/O accounting and the
//! index statistics report.

pub mod cluster;
pub mod format;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use cluster::{cluster_paths, BlockAssignment};
pub use format::{index_stats, open_index, write_index, IndexHandle, NodeRecord, FORMAT_VERSION, MAGIC};

use crate::error::{Error, Result};
use crate::index::{BuildInfo, LayerThresholds, DEFAULT_BUCKETS};

/// Bytes at the start of every block: the record count.
pub const BLOCK_HEADER_BYTES: usize = 4;
/// node id, item, count, parent, first child, next sibling.
pub const NODE_RECORD_BYTES: usize = 4 + 4 + 8 + 4 + 4 + 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageConfig {
    pub block_size: u32,
    /// Parent-count / child-count ratio above which an oversized subtree
    /// is moved to its own block.
    pub k_avg: f64,
    /// Minimum relative support for an item to enter the index.
    pub k_sup: f64,
    pub n_buckets: usize,
    /// Layer thresholds; derived from the transaction count when unset.
    pub layers: Option<LayerThresholds>,
}

impl Default for StorageConfig {
    fn default() -> Self {
        Self {
            block_size: 4096,
            k_avg: 1.2,
            k_sup: 0.0,
            n_buckets: DEFAULT_BUCKETS,
            layers: None,
        }
    }
}

impl StorageConfig {
    /// Block size that holds exactly `records` node records.
    pub fn block_size_for(records: usize) -> u32 {
        (BLOCK_HEADER_BYTES + records * NODE_RECORD_BYTES) as u32
    }

    pub fn block_capacity(&self) -> usize {
        (self.block_size as usize).saturating_sub(BLOCK_HEADER_BYTES) / NODE_RECORD_BYTES
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_capacity() == 0 {
            return Err(Error::Config(format!(
                "block size {} cannot hold one {NODE_RECORD_BYTES}-byte node record",
                self.block_size
            )));
        }
        if !self.k_avg.is_finite() || self.k_avg < 0.0 {
            return Err(Error::Config(format!("k_avg {} must be finite and >= 0", self.k_avg)));
        }
        if !(0.0..=1.0).contains(&self.k_sup) {
            return Err(Error::Config(format!("k_sup {} must lie in [0, 1]", self.k_sup)));
        }
        if self.n_buckets == 0 || self.n_buckets > u16::MAX as usize {
            return Err(Error::Config(format!(
                "bucket count {} must be in 1..=65535",
                self.n_buckets
            )));
        }
        if let Some(l) = self.layers {
            LayerThresholds::new(l.high, l.low)?;
        }
        Ok(())
    }
}

/// Per-handle I/O counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IoStats {
    pub blocks_read: u64,
    pub blocks_written: u64,
    pub nodes_read: u64,
    /// Reads of the original transaction source.
    pub source_scans: u64,
}

impl IoStats {
    /// Counter growth since `earlier`.
    pub fn since(&self, earlier: &IoStats) -> IoStats {
        IoStats {
            blocks_read: self.blocks_read - earlier.blocks_read,
            blocks_written: self.blocks_written - earlier.blocks_written,
            nodes_read: self.nodes_read - earlier.nodes_read,
            source_scans: self.source_scans - earlier.source_scans,
        }
    }
}

/// Dataset and index size summary; serialized column names follow the
/// classic index-characteristics table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexStatsReport {
    #[serde(rename = "Dataset")]
    pub dataset: String,
    #[serde(rename = "Transactions")]
    pub n_transactions: u64,
    #[serde(rename = "Dataset Items")]
    pub n_items: u64,
    #[serde(rename = "AvtrSz")]
    pub avg_tr_size: f64,
    /// Source size in KB.
    #[serde(rename = "Size(KB)")]
    pub dataset_size: f64,
    #[serde(rename = "WPs-Tree (Records)")]
    pub tree_records: u64,
    /// Occurrence entries plus one chain header per indexed item.
    #[serde(rename = "WPs-Hash -indexed tree (Records)")]
    pub hash_records: u64,
    #[serde(rename = "Time (sec)")]
    pub creation_time_seconds: f64,
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "Dataset",
    "Transactions",
    "Dataset Items",
    "AvtrSz",
    "Size(KB)",
    "WPs-Tree (Records)",
    "WPs-Hash -indexed tree (Records)",
    "Time (sec)",
];

impl IndexStatsReport {
    pub(crate) fn new(info: &BuildInfo, n_items: u64, tree_records: u64, hash_records: u64) -> Self {
        let avg = if info.n_transactions == 0 {
            0.0
        } else {
            info.total_items as f64 / info.n_transactions as f64
        };
        Self {
            dataset: info.dataset.clone(),
            n_transactions: info.n_transactions,
            n_items,
            avg_tr_size: avg,
            dataset_size: info.dataset_bytes as f64 / 1024.0,
            tree_records,
            hash_records,
            creation_time_seconds: info.creation_seconds.max(0.0),
        }
    }

    pub fn write_csv<W: Write>(reports: &[IndexStatsReport], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in reports {
            w.serialize(r)
                .map_err(|e| Error::Consistency(format!("csv: {e}")))?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
