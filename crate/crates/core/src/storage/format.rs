//! On-disk layout. An index is a directory holding three files:
//!
//! * `tree.wps`: header, node directory (`block u32, slot u32` per node id),
//!   fixed-size blocks of node records, CRC32 trailer.
//! * `hash.wps`: header, bucket directory (`n_chains u32, offset u64` per
//!   bucket), chains (`item u32, n_entries u32`, then `node u32, count u64`
//!   per entry), CRC32 trailer.
//! * `meta.json`: catalog, supports, item order and build facts.
//!
//! Header (little-endian, 68 bytes): magic `WPSM`, version u16, n_buckets
//! u16, block_size u32, n_nodes u64, layer high u64, layer low u64, k_avg
//! f64, k_sup f64, n_blocks u32, root count u64, root first child u32.
//!
//! Block: record count u32, then records of `node u32, item u32, count u64,
//! parent u32, first_child u32, next_sibling u32`, zero padded.

use std::collections::{HashMap, VecDeque};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{BuildInfo, ItemChain, LayerThresholds, NodeId, Occurrence, WpsHashIndex, WpsIndex, WpsTree};
use crate::item::{ItemId, PageCatalog};
use crate::storage::{
    cluster_paths, BlockAssignment, IndexStatsReport, IoStats, StorageConfig, BLOCK_HEADER_BYTES,
    NODE_RECORD_BYTES,
};
use crate::store::{ItemOrder, Supports};

pub const MAGIC: [u8; 4] = *b"WPSM";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 68;
const NONE: u32 = u32::MAX;

const TREE_FILE: &str = "tree.wps";
const HASH_FILE: &str = "hash.wps";
const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Copy, PartialEq)]
struct Header {
    version: u16,
    n_buckets: u16,
    block_size: u32,
    n_nodes: u64,
    layer_high: u64,
    layer_low: u64,
    k_avg: f64,
    k_sup: f64,
    n_blocks: u32,
    root_count: u64,
    root_first_child: u32,
}

impl Header {
    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.extend_from_slice(&self.n_buckets.to_le_bytes());
        out.extend_from_slice(&self.block_size.to_le_bytes());
        out.extend_from_slice(&self.n_nodes.to_le_bytes());
        out.extend_from_slice(&self.layer_high.to_le_bytes());
        out.extend_from_slice(&self.layer_low.to_le_bytes());
        out.extend_from_slice(&self.k_avg.to_le_bytes());
        out.extend_from_slice(&self.k_sup.to_le_bytes());
        out.extend_from_slice(&self.n_blocks.to_le_bytes());
        out.extend_from_slice(&self.root_count.to_le_bytes());
        out.extend_from_slice(&self.root_first_child.to_le_bytes());
    }

    fn decode(buf: &[u8]) -> Result<Self> {
        if buf.len() < HEADER_BYTES {
            return Err(Error::Format("file too short for header".into()));
        }
        if buf[..4] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut r = Cursor::new(&buf[4..HEADER_BYTES]);
        let version = r.u16();
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        Ok(Self {
            version,
            n_buckets: r.u16(),
            block_size: r.u32(),
            n_nodes: r.u64(),
            layer_high: r.u64(),
            layer_low: r.u64(),
            k_avg: f64::from_bits(r.u64()),
            k_sup: f64::from_bits(r.u64()),
            n_blocks: r.u32(),
            root_count: r.u64(),
            root_first_child: r.u32(),
        })
    }
}

/// Little-endian reader over a slice the caller has length-checked.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.buf[self.pos..self.pos + N].try_into().expect("length checked");
        self.pos += N;
        out
    }

    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }

    fn u32(&mut self) -> u32 {
        u32::from_le_bytes(self.take())
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn opt(v: u32) -> Option<u32> {
    (v != NONE).then_some(v)
}

/// A node as stored on disk. Children are reached through `first_child`
/// and the `next_sibling` chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: NodeId,
    pub item: Option<ItemId>,
    pub count: u64,
    pub parent: Option<NodeId>,
    pub first_child: Option<NodeId>,
    pub next_sibling: Option<NodeId>,
}

impl NodeRecord {
    pub fn from_tree(tree: &WpsTree, id: NodeId) -> Self {
        let n = tree.node(id);
        Self {
            id,
            item: n.item,
            count: n.count,
            parent: n.parent,
            first_child: tree.first_child(id),
            next_sibling: tree.next_sibling(id),
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        let raw = |v: Option<u32>| v.unwrap_or(NONE);
        out.extend_from_slice(&self.id.0.to_le_bytes());
        out.extend_from_slice(&raw(self.item.map(|i| i.0)).to_le_bytes());
        out.extend_from_slice(&self.count.to_le_bytes());
        out.extend_from_slice(&raw(self.parent.map(|p| p.0)).to_le_bytes());
        out.extend_from_slice(&raw(self.first_child.map(|p| p.0)).to_le_bytes());
        out.extend_from_slice(&raw(self.next_sibling.map(|p| p.0)).to_le_bytes());
    }

    fn decode(r: &mut Cursor<'_>) -> Self {
        Self {
            id: NodeId(r.u32()),
            item: opt(r.u32()).map(ItemId),
            count: r.u64(),
            parent: opt(r.u32()).map(NodeId),
            first_child: opt(r.u32()).map(NodeId),
            next_sibling: opt(r.u32()).map(NodeId),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Meta {
    format_version: u16,
    catalog: PageCatalog,
    supports: Supports,
    order: Vec<ItemId>,
    info: BuildInfo,
    config: StorageConfig,
    n_count_updates: u64,
    source_scans: u64,
}

fn with_crc(mut body: Vec<u8>) -> Vec<u8> {
    let crc = crc32fast::hash(&body);
    body.extend_from_slice(&crc.to_le_bytes());
    body
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn header_for(index: &WpsIndex, thresholds: LayerThresholds, n_blocks: usize) -> Header {
    let tree = index.tree();
    Header {
        version: FORMAT_VERSION,
        n_buckets: index.hash_index().n_buckets() as u16,
        block_size: index.config().block_size,
        n_nodes: tree.n_nodes() as u64,
        layer_high: thresholds.high,
        layer_low: thresholds.low,
        k_avg: index.config().k_avg,
        k_sup: index.config().k_sup,
        n_blocks: n_blocks as u32,
        root_count: tree.root().count,
        root_first_child: tree.first_child(NodeId::ROOT).map_or(NONE, |n| n.0),
    }
}

/// Writes the three index files into `dir` (created if missing).
pub fn write_index(index: &WpsIndex, assignment: &BlockAssignment, dir: impl AsRef<Path>) -> Result<IoStats> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tree = index.tree();
    let thresholds = index.layer_thresholds();
    let header = header_for(index, thresholds, assignment.n_blocks());
    let block_size = index.config().block_size as usize;

    let mut body = Vec::new();
    header.encode(&mut body);
    for i in 0..=tree.n_nodes() {
        let (b, s) = match assignment.location(NodeId(i as u32)) {
            Some(loc) => loc,
            None if i == 0 => (NONE, NONE),
            None => return Err(Error::Contract(format!("node {i} has no block"))),
        };
        body.extend_from_slice(&b.to_le_bytes());
        body.extend_from_slice(&s.to_le_bytes());
    }
    for block in assignment.blocks() {
        let start = body.len();
        body.extend_from_slice(&(block.len() as u32).to_le_bytes());
        for &node in block {
            NodeRecord::from_tree(tree, node).encode(&mut body);
        }
        if body.len() - start > block_size {
            return Err(Error::Config("block overflow".into()));
        }
        body.resize(start + block_size, 0);
    }
    write_file(&dir.join(TREE_FILE), &with_crc(body))?;

    let hash = index.hash_index();
    let mut body = Vec::new();
    header.encode(&mut body);
    let mut data = Vec::new();
    for b in 0..hash.n_buckets() {
        let chains = hash.bucket(b);
        body.extend_from_slice(&(chains.len() as u32).to_le_bytes());
        body.extend_from_slice(&(data.len() as u64).to_le_bytes());
        for chain in chains {
            data.extend_from_slice(&chain.item.0.to_le_bytes());
            data.extend_from_slice(&(chain.entries.len() as u32).to_le_bytes());
            for e in &chain.entries {
                data.extend_from_slice(&e.node.0.to_le_bytes());
                data.extend_from_slice(&e.count.to_le_bytes());
            }
        }
    }
    body.extend_from_slice(&data);
    write_file(&dir.join(HASH_FILE), &with_crc(body))?;

    let meta = Meta {
        format_version: FORMAT_VERSION,
        catalog: index.catalog().clone(),
        supports: index.supports().clone(),
        order: index.order().items().to_vec(),
        info: index.info().clone(),
        config: index.config().clone(),
        n_count_updates: tree.n_count_updates(),
        source_scans: index.io_stats().source_scans,
    };
    let json = serde_json::to_vec_pretty(&meta).expect("meta serializes");
    write_file(&dir.join(META_FILE), &json)?;

    Ok(IoStats {
        blocks_written: assignment.n_blocks() as u64,
        source_scans: index.io_stats().source_scans,
        ..IoStats::default()
    })
}

impl WpsIndex {
    /// Clusters and writes the index. Clustering time is added to the
    /// recorded creation time.
    pub fn save(&mut self, dir: impl AsRef<Path>) -> Result<IoStats> {
        let started = Instant::now();
        let assignment = cluster_paths(self.tree(), &self.layers(), self.config())?;
        self.info.creation_seconds += started.elapsed().as_secs_f64();
        let stats = write_index(self, &assignment, dir)?;
        self.io.blocks_written += stats.blocks_written;
        Ok(stats)
    }
}

fn read_verified(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    if buf.len() < 4 {
        return Err(Error::Format(format!("{} is truncated", path.display())));
    }
    let (body, tail) = buf.split_at(buf.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored {
        return Err(Error::Format(format!("checksum mismatch in {}", path.display())));
    }
    buf.truncate(buf.len() - 4);
    Ok(buf)
}

fn decode_hash(buf: &[u8], n_buckets: usize) -> Result<WpsHashIndex> {
    let dir_bytes = n_buckets * 12;
    if buf.len() < HEADER_BYTES + dir_bytes {
        return Err(Error::Format("hash directory truncated".into()));
    }
    let data = &buf[HEADER_BYTES + dir_bytes..];
    let mut dir = Cursor::new(&buf[HEADER_BYTES..HEADER_BYTES + dir_bytes]);
    let mut buckets = Vec::with_capacity(n_buckets);
    for _ in 0..n_buckets {
        let n_chains = dir.u32() as usize;
        let offset = dir.u64() as usize;
        if offset > data.len() {
            return Err(Error::Format("hash bucket offset out of range".into()));
        }
        let mut r = Cursor::new(&data[offset..]);
        let mut chains = Vec::with_capacity(n_chains);
        for _ in 0..n_chains {
            if r.remaining() < 8 {
                return Err(Error::Format("hash chain truncated".into()));
            }
            let item = ItemId(r.u32());
            let n = r.u32() as usize;
            if r.remaining() < n * 12 {
                return Err(Error::Format("hash chain truncated".into()));
            }
            let entries = (0..n)
                .map(|_| Occurrence {
                    item,
                    node: NodeId(r.u32()),
                    count: r.u64(),
                })
                .collect();
            chains.push(ItemChain { item, entries });
        }
        buckets.push(chains);
    }
    Ok(WpsHashIndex::from_buckets(buckets))
}

/// Read handle over a persisted index. Blocks are loaded on demand and
/// every load is counted.
#[derive(Debug)]
pub struct IndexHandle {
    dir: PathBuf,
    header: Header,
    directory: Vec<(u32, u32)>,
    blocks_offset: u64,
    file: File,
    hash: WpsHashIndex,
    meta: Meta,
    order: ItemOrder,
    cache: HashMap<u32, Vec<NodeRecord>>,
    fifo: VecDeque<u32>,
    cache_capacity: Option<usize>,
    io: IoStats,
    writable: bool,
}

/// Opens an index read-only with an unbounded block cache.
pub fn open_index(dir: impl AsRef<Path>) -> Result<IndexHandle> {
    IndexHandle::open(dir, false)
}

impl IndexHandle {
    pub fn open(dir: impl AsRef<Path>, writable: bool) -> Result<Self> {
        let dir = dir.as_ref().to_path_buf();
        let meta_path = dir.join(META_FILE);
        let meta_bytes = fs::read(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut meta: Meta = serde_json::from_slice(&meta_bytes)
            .map_err(|e| Error::Format(format!("{}: {e}", meta_path.display())))?;
        if meta.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "format version {}, expected {FORMAT_VERSION}",
                meta.format_version
            )));
        }
        meta.catalog.reindex();

        let tree_path = dir.join(TREE_FILE);
        let tree_bytes = read_verified(&tree_path)?;
        let header = Header::decode(&tree_bytes)?;
        let n = header.n_nodes as usize + 1;
        let dir_end = HEADER_BYTES + n * 8;
        let blocks_len = header.n_blocks as usize * header.block_size as usize;
        if tree_bytes.len() != dir_end + blocks_len {
            return Err(Error::Format("tree file length does not match its header".into()));
        }
        let mut r = Cursor::new(&tree_bytes[HEADER_BYTES..dir_end]);
        let directory: Vec<(u32, u32)> = (0..n).map(|_| (r.u32(), r.u32())).collect();

        let hash_path = dir.join(HASH_FILE);
        let hash_bytes = read_verified(&hash_path)?;
        let hash_header = Header::decode(&hash_bytes)?;
        if hash_header != header {
            return Err(Error::Format("tree and hash headers disagree".into()));
        }
        let hash = decode_hash(&hash_bytes, header.n_buckets as usize)?;

        let file = File::open(&tree_path).map_err(|e| Error::io(&tree_path, e))?;
        let order = ItemOrder::from_sequence(meta.order.clone());
        let io = IoStats {
            source_scans: meta.source_scans,
            ..IoStats::default()
        };
        Ok(Self {
            dir,
            header,
            directory,
            blocks_offset: dir_end as u64,
            file,
            hash,
            meta,
            order,
            cache: HashMap::new(),
            fifo: VecDeque::new(),
            cache_capacity: None,
            io,
            writable,
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    /// Caps the block cache (FIFO eviction); `None` means unbounded.
    pub fn set_cache_capacity(&mut self, blocks: Option<usize>) {
        self.cache_capacity = blocks;
        self.clear_cache();
    }

    pub fn clear_cache(&mut self) {
        self.cache.clear();
        self.fifo.clear();
    }

    pub fn io_stats(&self) -> IoStats {
        self.io
    }

    /// Zeroes the read counters; the source-scan count is kept.
    pub fn reset_io(&mut self) {
        self.io = IoStats {
            source_scans: self.io.source_scans,
            ..IoStats::default()
        };
    }

    pub fn n_nodes(&self) -> u64 {
        self.header.n_nodes
    }

    pub fn n_blocks(&self) -> u32 {
        self.header.n_blocks
    }

    pub fn catalog(&self) -> &PageCatalog {
        &self.meta.catalog
    }

    pub fn supports(&self) -> &Supports {
        &self.meta.supports
    }

    pub fn order(&self) -> &ItemOrder {
        &self.order
    }

    pub fn config(&self) -> &StorageConfig {
        &self.meta.config
    }

    pub fn info(&self) -> &BuildInfo {
        &self.meta.info
    }

    pub fn n_count_updates(&self) -> u64 {
        self.meta.n_count_updates
    }

    pub fn layer_thresholds(&self) -> LayerThresholds {
        LayerThresholds {
            high: self.header.layer_high,
            low: self.header.layer_low,
        }
    }

    pub fn hash_index(&self) -> &WpsHashIndex {
        &self.hash
    }

    pub fn occurrences(&self, item: ItemId) -> &[Occurrence] {
        if item.index() >= self.meta.catalog.len() {
            return &[];
        }
        self.hash.lookup(item, self.meta.catalog.key(item))
    }

    /// Block id hosting `node`; `None` for the root.
    pub fn block_of(&self, node: NodeId) -> Option<u32> {
        self.directory.get(node.index()).and_then(|&(b, _)| opt(b))
    }

    fn load_block(&mut self, block: u32) -> Result<()> {
        if self.cache.contains_key(&block) {
            return Ok(());
        }
        let size = self.header.block_size as usize;
        let mut buf = vec![0u8; size];
        let tree_path = self.dir.join(TREE_FILE);
        self.file
            .seek(SeekFrom::Start(self.blocks_offset + block as u64 * size as u64))
            .and_then(|_| self.file.read_exact(&mut buf))
            .map_err(|e| Error::io(&tree_path, e))?;
        let mut r = Cursor::new(&buf);
        let n = r.u32() as usize;
        if BLOCK_HEADER_BYTES + n * NODE_RECORD_BYTES > size {
            return Err(Error::Format(format!("block {block} record count overflows")));
        }
        let records = (0..n).map(|_| NodeRecord::decode(&mut r)).collect();
        self.io.blocks_read += 1;
        if let Some(cap) = self.cache_capacity {
            while self.cache.len() >= cap.max(1) {
                match self.fifo.pop_front() {
                    Some(old) => {
                        self.cache.remove(&old);
                    }
                    None => break,
                }
            }
        }
        self.cache.insert(block, records);
        self.fifo.push_back(block);
        Ok(())
    }

    /// Reads one node, loading its whole block on a cache miss. The root is
    /// served from the header and is not counted.
    pub fn read_node(&mut self, id: NodeId) -> Result<NodeRecord> {
        if id == NodeId::ROOT {
            return Ok(NodeRecord {
                id,
                item: None,
                count: self.header.root_count,
                parent: None,
                first_child: opt(self.header.root_first_child).map(NodeId),
                next_sibling: None,
            });
        }
        let &(block, slot) = self
            .directory
            .get(id.index())
            .ok_or_else(|| Error::Format(format!("node {} not in directory", id.0)))?;
        self.load_block(block)?;
        self.io.nodes_read += 1;
        let rec = self.cache[&block]
            .get(slot as usize)
            .copied()
            .ok_or_else(|| Error::Format(format!("node {} slot out of range", id.0)))?;
        if rec.id != id {
            return Err(Error::Format(format!("directory points node {} at node {}", id.0, rec.id.0)));
        }
        Ok(rec)
    }

    pub fn stats_report(&self) -> IndexStatsReport {
        IndexStatsReport::new(
            &self.meta.info,
            self.meta.catalog.len() as u64,
            self.header.n_nodes,
            (self.hash.n_entries() + self.hash.n_chains()) as u64,
        )
    }

    /// Reads every block and rebuilds the in-memory index.
    pub fn load_index(&mut self) -> Result<WpsIndex> {
        let mut records = Vec::with_capacity(self.header.n_nodes as usize);
        for i in 1..=self.header.n_nodes as u32 {
            let rec = self.read_node(NodeId(i))?;
            let item = rec
                .item
                .ok_or_else(|| Error::Format(format!("node {i} has no item")))?;
            let parent = rec
                .parent
                .ok_or_else(|| Error::Format(format!("node {i} has no parent")))?;
            records.push((rec.id, item, rec.count, parent));
        }
        let tree = WpsTree::from_records(
            self.order.clone(),
            self.header.root_count,
            self.meta.n_count_updates,
            records,
        )?;
        Ok(WpsIndex {
            catalog: self.meta.catalog.clone(),
            tree,
            hash: self.hash.clone(),
            supports: self.meta.supports.clone(),
            config: self.meta.config.clone(),
            info: self.meta.info.clone(),
            io: IoStats {
                source_scans: self.meta.source_scans,
                ..IoStats::default()
            },
        })
    }
}

/// Summary statistics of an opened index.
pub fn index_stats(handle: &IndexHandle) -> IndexStatsReport {
    handle.stats_report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testdata::table1;

    fn saved(records: usize) -> (tempfile::TempDir, WpsIndex) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = StorageConfig {
            block_size: StorageConfig::block_size_for(records),
            ..StorageConfig::default()
        };
        let mut ix = WpsIndex::build(&table1(), &cfg).unwrap();
        ix.save(dir.path()).unwrap();
        (dir, ix)
    }

    #[test]
    fn header_starts_with_magic_and_version() {
        let (dir, ix) = saved(8);
        let bytes = fs::read(dir.path().join(TREE_FILE)).unwrap();
        assert_eq!(&bytes[..4], b"WPSM");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), FORMAT_VERSION);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 26);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), StorageConfig::block_size_for(8));
        assert_eq!(u64::from_le_bytes(bytes[12..20].try_into().unwrap()), ix.tree().n_nodes() as u64);
    }

    #[test]
    fn round_trip_reconstruction() {
        let (dir, ix) = saved(8);
        let mut h = open_index(dir.path()).unwrap();
        let back = h.load_index().unwrap();
        assert_eq!(back.tree().reconstruct(), ix.tree().reconstruct());
        assert_eq!(back.hash_index(), ix.hash_index());
        assert_eq!(h.io_stats().nodes_read, ix.tree().n_nodes() as u64);
        assert_eq!(h.io_stats().blocks_read, h.n_blocks() as u64);
    }

    #[test]
    fn node_reads_hit_cache() {
        let (dir, ix) = saved(8);
        let mut h = open_index(dir.path()).unwrap();
        let first = ix.tree().first_child(NodeId::ROOT).unwrap();
        let rec = h.read_node(first).unwrap();
        assert_eq!(rec, NodeRecord::from_tree(ix.tree(), first));
        h.read_node(first).unwrap();
        assert_eq!(h.io_stats().blocks_read, 1);
        assert_eq!(h.io_stats().nodes_read, 2);
        let root = h.read_node(NodeId::ROOT).unwrap();
        assert_eq!(root.count, 13);
        assert_eq!(h.io_stats().nodes_read, 2);
    }

    #[test]
    fn capped_cache_rereads() {
        let (dir, ix) = saved(2);
        let mut h = open_index(dir.path()).unwrap();
        h.set_cache_capacity(Some(1));
        let ids: Vec<NodeId> = ix.tree().node_ids().collect();
        let a = ids[0];
        let b = *ids.iter().find(|&&n| h.block_of(n) != h.block_of(a)).unwrap();
        h.read_node(a).unwrap();
        h.read_node(b).unwrap();
        h.read_node(a).unwrap();
        assert_eq!(h.io_stats().blocks_read, 3);
    }

    #[test]
    fn corruption_is_detected() {
        let (dir, _) = saved(8);
        let p = dir.path().join(TREE_FILE);
        let mut bytes = fs::read(&p).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0xff;
        fs::write(&p, bytes).unwrap();
        assert!(matches!(open_index(dir.path()), Err(Error::Format(_))));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let (dir, _) = saved(8);
        let p = dir.path().join(HASH_FILE);
        let mut bytes = fs::read(&p).unwrap();
        bytes[4] = 99;
        let n = bytes.len() - 4;
        let crc = crc32fast::hash(&bytes[..n]);
        bytes[n..].copy_from_slice(&crc.to_le_bytes());
        fs::write(&p, bytes).unwrap();
        let err = open_index(dir.path()).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn missing_dir_reports_path() {
        let err = open_index("/nonexistent/wps-index").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/wps-index"));
    }

    #[test]
    fn table1_stats() {
        let (dir, _) = saved(8);
        let h = open_index(dir.path()).unwrap();
        let r = index_stats(&h);
        assert_eq!(r.n_transactions, 13);
        assert_eq!(r.n_items, 23);
        assert!((r.avg_tr_size - 75.0 / 13.0).abs() < 1e-9);
        assert_eq!(r.hash_records, r.tree_records + 23);
    }
}
