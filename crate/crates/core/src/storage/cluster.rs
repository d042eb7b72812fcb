//! Assignment of tree nodes to fixed-capacity blocks.
//!
//! Packing is depth-first from the root. A child subtree that fits in the
//! space left in its parent's block stays there, so whole paths share a
//! block. A subtree that fits in an empty block gets one of its own and the
//! shared prefix above it stays in the prefix's block. Larger subtrees keep
//! extending the parent's block while it has room, unless they are weakly
//! correlated with the parent (`parent.count > k_avg * child.count`), in
//! which case they start a fresh block. Children are visited hottest
//! layer first, then by descending count.

use crate::error::{Error, Result};
use crate::index::{LayerAssignment, NodeId, WpsTree};
use crate::storage::StorageConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    capacity: usize,
    blocks: Vec<Vec<NodeId>>,
    /// (block, slot) per node id; `None` for the root, which is kept in the
    /// file header rather than in a block.
    location: Vec<Option<(u32, u32)>>,
}

impl BlockAssignment {
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<NodeId>] {
        &self.blocks
    }

    pub fn block_of(&self, node: NodeId) -> Option<u32> {
        self.location.get(node.index()).copied().flatten().map(|l| l.0)
    }

    pub fn location(&self, node: NodeId) -> Option<(u32, u32)> {
        self.location.get(node.index()).copied().flatten()
    }
}

struct Packer<'a> {
    tree: &'a WpsTree,
    layers: &'a LayerAssignment,
    k_avg: f64,
    capacity: usize,
    size: Vec<usize>,
    blocks: Vec<Vec<NodeId>>,
}

impl Packer<'_> {
    fn open(&mut self) -> usize {
        self.blocks.push(Vec::with_capacity(self.capacity));
        self.blocks.len() - 1
    }

    fn room(&self, block: usize) -> usize {
        self.capacity - self.blocks[block].len()
    }

    fn detached(&self, parent: NodeId, child: NodeId) -> bool {
        self.tree.node(parent).count as f64 > self.k_avg * self.tree.node(child).count as f64
    }

    fn sorted_children(&self, node: NodeId) -> Vec<NodeId> {
        let mut kids: Vec<NodeId> = self.tree.node(node).children().collect();
        kids.sort_by_key(|&c| (self.layers.layer(c), std::cmp::Reverse(self.tree.node(c).count)));
        kids
    }

    fn place_children(&mut self, node: NodeId, block: usize) {
        for child in self.sorted_children(node) {
            let size = self.size[child.index()];
            let target = if size <= self.room(block) || self.blocks[block].is_empty() {
                block
            } else if size <= self.capacity {
                self.open()
            } else if self.room(block) > 0 && !self.detached(node, child) {
                block
            } else {
                self.open()
            };
            self.place(child, target);
        }
    }

    fn place(&mut self, node: NodeId, mut block: usize) {
        if self.room(block) == 0 {
            block = self.open();
        }
        self.blocks[block].push(node);
        self.place_children(node, block);
    }
}

/// Assigns every non-root node to exactly one block.
pub fn cluster_paths(tree: &WpsTree, layers: &LayerAssignment, cfg: &StorageConfig) -> Result<BlockAssignment> {
    let capacity = cfg.block_capacity();
    if capacity == 0 {
        return Err(Error::Config(format!(
            "block size {} cannot hold a node record",
            cfg.block_size
        )));
    }
    let n = tree.n_nodes() + 1;
    let mut size = vec![1usize; n];
    // children always have larger ids than their parents
    for id in tree.node_ids().collect::<Vec<_>>().into_iter().rev() {
        let parent = tree.node(id).parent.expect("non-root has a parent");
        size[parent.index()] += size[id.index()];
    }

    let mut packer = Packer {
        tree,
        layers,
        k_avg: cfg.k_avg,
        capacity,
        size,
        blocks: Vec::new(),
    };
    if tree.n_nodes() > 0 {
        let first = packer.open();
        packer.place_children(NodeId::ROOT, first);
    }
    let mut location = vec![None; n];
    for (b, block) in packer.blocks.iter().enumerate() {
        for (s, node) in block.iter().enumerate() {
            location[node.index()] = Some((b as u32, s as u32));
        }
    }
    Ok(BlockAssignment {
        capacity,
        blocks: packer.blocks,
        location,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::WpsIndex;
    use crate::store::TransactionDb;

    fn cfg(records: usize) -> StorageConfig {
        StorageConfig {
            block_size: StorageConfig::block_size_for(records),
            ..StorageConfig::default()
        }
    }

    fn cluster(db: &TransactionDb, records: usize) -> (WpsIndex, BlockAssignment) {
        let c = cfg(records);
        let ix = WpsIndex::build(db, &c).unwrap();
        let a = cluster_paths(ix.tree(), &ix.layers(), &c).unwrap();
        (ix, a)
    }

    #[test]
    fn short_path_fits_one_block() {
        let db = TransactionDb::from_keyed(&[["a", "b", "c", "d", "e"]]);
        let (_, a) = cluster(&db, 10);
        assert_eq!(a.n_blocks(), 1);
        assert_eq!(a.blocks()[0].len(), 5);
    }

    #[test]
    fn shared_prefix_gets_own_block() {
        let db = TransactionDb::from_keyed(&[
            ["b", "e", "h", "x1", "x2", "x3"],
            ["b", "e", "h", "y1", "y2", "y3"],
        ]);
        let (ix, a) = cluster(&db, 3);
        assert_eq!(a.n_blocks(), 3);
        let block_of = |k: &str| {
            let item = ix.item(k).unwrap();
            a.block_of(ix.scan_occurrences(item)[0].0).unwrap()
        };
        assert_eq!(block_of("b"), block_of("h"));
        assert_eq!(block_of("x1"), block_of("x3"));
        assert_eq!(block_of("y1"), block_of("y3"));
        assert_ne!(block_of("x1"), block_of("y1"));
        assert_ne!(block_of("b"), block_of("x1"));
    }

    #[test]
    fn every_node_placed_once() {
        let db = crate::testdata::table1();
        let (ix, a) = cluster(&db, 4);
        let placed: usize = a.blocks().iter().map(Vec::len).sum();
        assert_eq!(placed, ix.tree().n_nodes());
        for id in ix.tree().node_ids() {
            assert!(a.block_of(id).is_some());
        }
        assert!(a.blocks().iter().all(|b| !b.is_empty() && b.len() <= 4));
        assert_eq!(a.block_of(NodeId::ROOT), None);
    }

    #[test]
    fn table1_paths_touch_few_blocks() {
        let db = crate::testdata::table1();
        let (ix, a) = cluster(&db, 8);
        let t = ix.tree();
        let (mut nodes, mut touched) = (0, 0);
        for id in t.node_ids().filter(|&id| t.node(id).is_leaf()) {
            let mut blocks = std::collections::BTreeSet::new();
            let mut cur = id;
            while cur != NodeId::ROOT {
                blocks.insert(a.block_of(cur).unwrap());
                cur = t.node(cur).parent.unwrap();
                nodes += 1;
            }
            assert!(blocks.len() <= 3, "leaf {} spans {} blocks", id.0, blocks.len());
            touched += blocks.len();
        }
        assert!(touched * 3 <= nodes, "{touched} blocks for {nodes} path nodes");
    }
}
