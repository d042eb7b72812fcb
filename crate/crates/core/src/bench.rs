//! Hash-index access versus full tree scan, and mining timings.
//!
//! Only the counter columns are stable across machines; the `*_seconds`
//! columns are reported for reference.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::access::{prefix_paths, scan_prefix_paths, PrefixPath, TreeAccess};
use crate::error::{Error, Result};
use crate::item::ItemId;
use crate::mining::mine_fp;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemAccessBench {
    pub item: String,
    pub occurrences: u64,
    pub hash_nodes_read: u64,
    pub hash_blocks_read: u64,
    pub hash_seconds: f64,
    pub scan_nodes_read: u64,
    pub scan_blocks_read: u64,
    pub scan_seconds: f64,
    /// scan / hash
    pub node_ratio: f64,
    pub block_ratio: f64,
    pub time_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningBench {
    pub min_support: u64,
    pub itemsets: u64,
    pub nodes_read: u64,
    pub blocks_read: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub items: Vec<ItemAccessBench>,
    pub mining: Vec<MiningBench>,
    pub mean_node_ratio: f64,
    pub mean_block_ratio: f64,
    pub mean_time_ratio: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        f64::INFINITY
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.filter(|v| v.is_finite()).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn sorted(mut paths: Vec<PrefixPath>) -> Vec<PrefixPath> {
    paths.sort_by(|a, b| a.entries.cmp(&b.entries));
    paths
}

/// Measures one item both ways from a cold cache and checks that both
/// methods return the same paths.
pub fn bench_item<A: TreeAccess + ?Sized>(acc: &mut A, item: ItemId) -> Result<ItemAccessBench> {
    acc.clear_cache();
    let before = acc.io_stats();
    let started = Instant::now();
    let via_hash = prefix_paths(acc, item)?;
    let hash_seconds = started.elapsed().as_secs_f64();
    let hash = acc.io_stats().since(&before);

    acc.clear_cache();
    let before = acc.io_stats();
    let started = Instant::now();
    let via_scan = scan_prefix_paths(acc, item)?;
    let scan_seconds = started.elapsed().as_secs_f64();
    let scan = acc.io_stats().since(&before);

    let occurrences = via_hash.len() as u64;
    if sorted(via_hash) != sorted(via_scan) {
        return Err(Error::Consistency(format!(
            "hash and scan access disagree for item {}",
            acc.catalog().key(item)
        )));
    }
    Ok(ItemAccessBench {
        item: acc.catalog().key(item).to_string(),
        occurrences,
        hash_nodes_read: hash.nodes_read,
        hash_blocks_read: hash.blocks_read,
        hash_seconds,
        scan_nodes_read: scan.nodes_read,
        scan_blocks_read: scan.blocks_read,
        scan_seconds,
        node_ratio: ratio(scan.nodes_read as f64, hash.nodes_read as f64),
        block_ratio: ratio(scan.blocks_read as f64, hash.blocks_read as f64),
        time_ratio: ratio(scan_seconds, hash_seconds),
    })
}

pub fn bench_mining<A: TreeAccess + ?Sized>(acc: &mut A, min_support: u64) -> Result<MiningBench> {
    acc.clear_cache();
    let before = acc.io_stats();
    let started = Instant::now();
    let found = mine_fp(acc, min_support)?;
    let seconds = started.elapsed().as_secs_f64();
    let io = acc.io_stats().since(&before);
    Ok(MiningBench {
        min_support,
        itemsets: found.len() as u64,
        nodes_read: io.nodes_read,
        blocks_read: io.blocks_read,
        seconds,
    })
}

/// Runs the access comparison for `items` (every indexed item with at
/// least one occurrence when empty) and a mining run per support.
pub fn run_bench<A: TreeAccess + ?Sized>(acc: &mut A, items: &[ItemId], min_supports: &[u64]) -> Result<BenchReport> {
    let items: Vec<ItemId> = if items.is_empty() {
        acc.order()
            .items()
            .iter()
            .copied()
            .filter(|&i| !acc.occurrences(i).is_empty())
            .collect()
    } else {
        items.to_vec()
    };
    let mut report = BenchReport::default();
    for item in items {
        report.items.push(bench_item(acc, item)?);
    }
    for &s in min_supports {
        report.mining.push(bench_mining(acc, s)?);
    }
    report.mean_node_ratio = mean(report.items.iter().map(|r| r.node_ratio));
    report.mean_block_ratio = mean(report.items.iter().map(|r| r.block_ratio));
    report.mean_time_ratio = mean(report.items.iter().map(|r| r.time_ratio));
    Ok(report)
}

impl BenchReport {
    /// Per-item rows as CSV.
    pub fn write_items_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.items {
            w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_mining_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.mining {
            w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::{open_index, StorageConfig};
    use crate::testdata::table1;
    use crate::WpsIndex;

    #[test]
    fn table1_item_bench_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let mut ix = WpsIndex::build(&table1(), &StorageConfig::default()).unwrap();
        ix.save(dir.path()).unwrap();
        let mut h = open_index(dir.path()).unwrap();
        let p = h.catalog().id("p").unwrap();
        let r = bench_item(&mut h, p).unwrap();
        assert_eq!(r.occurrences, 2);
        assert_eq!(r.hash_nodes_read, 8);
        assert_eq!(r.scan_nodes_read, ix.tree().n_nodes() as u64);
        assert!(r.node_ratio >= 1.0);
    }

    #[test]
    fn full_report() {
        let mut ix = WpsIndex::build(&table1(), &StorageConfig::default()).unwrap();
        let r = run_bench(&mut ix, &[], &[5, 10]).unwrap();
        assert_eq!(r.items.len(), 23);
        assert!(r.items.iter().all(|i| i.hash_nodes_read <= i.scan_nodes_read));
        assert!(r.mean_node_ratio > 1.0);
        assert_eq!(r.mining[1].itemsets, 4);
        let mut buf = Vec::new();
        r.write_items_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("item,occurrences,hash_nodes_read"));
    }
}
