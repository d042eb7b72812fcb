//! Bucketed occurrence index: for every item, the tree nodes that carry it.
//!
//! Each bucket holds one chain per item; a chain lists that item's
//! occurrence nodes in creation order.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::index::tree::NodeId;
use crate::item::ItemId;

pub const DEFAULT_BUCKETS: usize = 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Occurrence {
    pub item: ItemId,
    pub node: NodeId,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemChain {
    pub item: ItemId,
    pub entries: Vec<Occurrence>,
}

/// Bucket of `key`. With 26 buckets a key starting with an ASCII letter
/// lands in that letter's bucket (`a`/`A` -> 0 ... `z`/`Z` -> 25); every
/// other case is FNV-1a of the key bytes modulo `n_buckets`.
pub fn hash_bucket(key: &str, n_buckets: usize) -> usize {
    assert!(n_buckets > 0, "at least one bucket is required");
    if n_buckets == 26 {
        if let Some(c) = key.bytes().next().filter(u8::is_ascii_alphabetic) {
            return (c.to_ascii_lowercase() - b'a') as usize;
        }
    }
    (fnv1a(key.as_bytes()) % n_buckets as u64) as usize
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WpsHashIndex {
    buckets: Vec<Vec<ItemChain>>,
    /// node -> (bucket, chain, entry)
    locator: HashMap<NodeId, (u32, u32, u32)>,
}

impl WpsHashIndex {
    pub fn new(n_buckets: usize) -> Self {
        assert!(n_buckets > 0, "at least one bucket is required");
        Self {
            buckets: vec![Vec::new(); n_buckets],
            locator: HashMap::new(),
        }
    }

    pub fn n_buckets(&self) -> usize {
        self.buckets.len()
    }

    pub fn bucket(&self, idx: usize) -> &[ItemChain] {
        &self.buckets[idx]
    }

    pub fn n_entries(&self) -> usize {
        self.locator.len()
    }

    pub fn n_chains(&self) -> usize {
        self.buckets.iter().map(Vec::len).sum()
    }

    /// Appends a new occurrence of `item` (whose textual key is `key`).
    pub fn register(&mut self, item: ItemId, key: &str, node: NodeId, count: u64) {
        let b = hash_bucket(key, self.buckets.len());
        let bucket = &mut self.buckets[b];
        let c = match bucket.iter().position(|ch| ch.item == item) {
            Some(c) => c,
            None => {
                bucket.push(ItemChain {
                    item,
                    entries: Vec::new(),
                });
                bucket.len() - 1
            }
        };
        let chain = &mut bucket[c];
        chain.entries.push(Occurrence { item, node, count });
        self.locator
            .insert(node, (b as u32, c as u32, chain.entries.len() as u32 - 1));
    }

    /// Mirrors a node count change into its chain entry.
    pub fn set_count(&mut self, node: NodeId, count: u64) {
        if let Some(&(b, c, e)) = self.locator.get(&node) {
            self.buckets[b as usize][c as usize].entries[e as usize].count = count;
        }
    }

    /// Occurrences of `item`, found by walking the chains of its bucket.
    pub fn lookup(&self, item: ItemId, key: &str) -> &[Occurrence] {
        let b = hash_bucket(key, self.buckets.len());
        self.buckets[b]
            .iter()
            .find(|ch| ch.item == item)
            .map_or(&[], |ch| ch.entries.as_slice())
    }

    pub(crate) fn from_buckets(buckets: Vec<Vec<ItemChain>>) -> Self {
        let mut locator = HashMap::new();
        for (b, bucket) in buckets.iter().enumerate() {
            for (c, chain) in bucket.iter().enumerate() {
                for (e, occ) in chain.entries.iter().enumerate() {
                    locator.insert(occ.node, (b as u32, c as u32, e as u32));
                }
            }
        }
        Self { buckets, locator }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letters_map_to_alphabet_buckets() {
        assert_eq!(hash_bucket("a", 26), 0);
        assert_eq!(hash_bucket("z", 26), 25);
        assert_eq!(hash_bucket("Home", 26), 7);
    }

    #[test]
    fn single_bucket_takes_everything() {
        for k in ["a", "z", "/x", "42"] {
            assert_eq!(hash_bucket(k, 1), 0);
        }
    }

    #[test]
    fn non_letters_hash_deterministically() {
        let b = hash_bucket("/index.html", 26);
        assert!(b < 26);
        assert_eq!(b, hash_bucket("/index.html", 26));
        assert!(hash_bucket("17", 7) < 7);
    }

    #[test]
    fn chains_keep_creation_order_and_counts() {
        let mut h = WpsHashIndex::new(26);
        h.register(ItemId(0), "a", NodeId(1), 1);
        h.register(ItemId(1), "ab", NodeId(2), 1);
        h.register(ItemId(0), "a", NodeId(5), 2);
        h.set_count(NodeId(1), 7);
        let occ = h.lookup(ItemId(0), "a");
        assert_eq!(occ.iter().map(|o| (o.node, o.count)).collect::<Vec<_>>(), [(NodeId(1), 7), (NodeId(5), 2)]);
        assert_eq!(h.bucket(0).len(), 2);
        assert!(h.lookup(ItemId(9), "q").is_empty());
        assert_eq!(h.n_entries(), 3);
        assert_eq!(h.n_chains(), 2);
    }
}
