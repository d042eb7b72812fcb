//! The three projections served from the index: prefix paths of an item,
//! the support-based projection, and the item-based projection.
//!
//! All of them run over [`TreeAccess`], implemented by the in-memory
//! [`WpsIndex`] and by the on-disk [`IndexHandle`], so node reads are
//! counted the same way on both.

use std::collections::HashMap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::index::{NodeId, Occurrence, PathMultiset, WpsIndex};
use crate::item::{ItemId, PageCatalog};
use crate::storage::{IndexHandle, IoStats, NodeRecord};
use crate::store::{ItemOrder, Supports};

/// Read access to a built index with node-level I/O accounting.
pub trait TreeAccess {
    fn catalog(&self) -> &PageCatalog;
    fn order(&self) -> &ItemOrder;
    fn supports(&self) -> &Supports;
    /// Non-root node count.
    fn n_nodes(&self) -> u64;
    /// Occurrence entries of `item` from the hash index (no node reads).
    fn occurrences(&self, item: ItemId) -> Vec<Occurrence>;
    fn read_node(&mut self, id: NodeId) -> Result<NodeRecord>;
    fn io_stats(&self) -> IoStats;
    /// Drops cached blocks so the next reads hit storage again.
    fn clear_cache(&mut self) {}
}

impl TreeAccess for WpsIndex {
    fn catalog(&self) -> &PageCatalog {
        WpsIndex::catalog(self)
    }

    fn order(&self) -> &ItemOrder {
        WpsIndex::order(self)
    }

    fn supports(&self) -> &Supports {
        WpsIndex::supports(self)
    }

    fn n_nodes(&self) -> u64 {
        self.tree().n_nodes() as u64
    }

    fn occurrences(&self, item: ItemId) -> Vec<Occurrence> {
        WpsIndex::occurrences(self, item).to_vec()
    }

    fn read_node(&mut self, id: NodeId) -> Result<NodeRecord> {
        if id != NodeId::ROOT {
            self.io.nodes_read += 1;
        }
        Ok(NodeRecord::from_tree(self.tree(), id))
    }

    fn io_stats(&self) -> IoStats {
        self.io
    }
}

impl TreeAccess for IndexHandle {
    fn catalog(&self) -> &PageCatalog {
        IndexHandle::catalog(self)
    }

    fn order(&self) -> &ItemOrder {
        IndexHandle::order(self)
    }

    fn supports(&self) -> &Supports {
        IndexHandle::supports(self)
    }

    fn n_nodes(&self) -> u64 {
        IndexHandle::n_nodes(self)
    }

    fn occurrences(&self, item: ItemId) -> Vec<Occurrence> {
        IndexHandle::occurrences(self, item).to_vec()
    }

    fn read_node(&mut self, id: NodeId) -> Result<NodeRecord> {
        IndexHandle::read_node(self, id)
    }

    fn io_stats(&self) -> IoStats {
        IndexHandle::io_stats(self)
    }

    fn clear_cache(&mut self) {
        IndexHandle::clear_cache(self)
    }
}

/// Upward path from an occurrence ("anchor") node to just below the root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixPath {
    /// `(item, count)` from the anchor upward.
    pub entries: Vec<(ItemId, u64)>,
    pub anchor_support: u64,
}

impl PrefixPath {
    pub fn anchor(&self) -> ItemId {
        self.entries[0].0
    }

    /// Ancestors of the anchor in rank order (root side first).
    pub fn ancestors(&self) -> Vec<ItemId> {
        self.entries[1..].iter().rev().map(|e| e.0).collect()
    }

    pub fn display(&self, catalog: &PageCatalog) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(i, c)| format!("{}:{}", catalog.key(*i), c))
            .collect();
        format!("[{}]", parts.join(" -> "))
    }
}

/// Projected transactions with multiplicities, rank-sorted, grouped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectedDb {
    pub entries: Vec<(Vec<ItemId>, u64)>,
}

impl ProjectedDb {
    fn from_groups(groups: HashMap<Vec<ItemId>, u64>, order: &ItemOrder) -> Self {
        let mut entries: Vec<(Vec<ItemId>, u64)> = groups.into_iter().filter(|(_, m)| *m > 0).collect();
        entries.sort_by_cached_key(|(items, _)| items.iter().map(|&i| order.rank_of(i)).collect::<Vec<_>>());
        Self { entries }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of multiplicities.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    pub fn multiplicity(&self, items: &[ItemId]) -> u64 {
        self.entries
            .iter()
            .find(|(i, _)| i == items)
            .map_or(0, |e| e.1)
    }

    pub fn to_multiset(&self) -> PathMultiset {
        let mut m = PathMultiset::new();
        for (items, mult) in &self.entries {
            *m.entry(items.clone()).or_default() += mult;
        }
        m
    }

    /// Flat transaction lines with a `*multiplicity` suffix.
    pub fn write_flat<W: Write>(&self, catalog: &PageCatalog, mut out: W) -> io::Result<()> {
        for (items, mult) in &self.entries {
            let keys: Vec<&str> = items.iter().map(|&i| catalog.key(i)).collect();
            writeln!(out, "{} *{}", keys.join(" "), mult)?;
        }
        out.flush()
    }
}

fn children<A: TreeAccess + ?Sized>(acc: &mut A, node: &NodeRecord) -> Result<Vec<NodeRecord>> {
    let mut out = Vec::new();
    let mut next = node.first_child;
    while let Some(id) = next {
        let rec = acc.read_node(id)?;
        next = rec.next_sibling;
        out.push(rec);
    }
    Ok(out)
}

fn upward<A: TreeAccess + ?Sized>(acc: &mut A, anchor: NodeId) -> Result<Vec<(ItemId, u64)>> {
    let mut entries = Vec::new();
    let mut cur = Some(anchor);
    while let Some(id) = cur.filter(|&id| id != NodeId::ROOT) {
        let rec = acc.read_node(id)?;
        entries.push((rec.item.expect("non-root has an item"), rec.count));
        cur = rec.parent;
    }
    Ok(entries)
}

/// Upward paths of every occurrence of `item`, found through the hash
/// index; only the occurrence nodes and their ancestors are read.
pub fn prefix_paths<A: TreeAccess + ?Sized>(acc: &mut A, item: ItemId) -> Result<Vec<PrefixPath>> {
    let occurrences = acc.occurrences(item);
    occurrences
        .iter()
        .map(|occ| {
            let entries = upward(acc, occ.node)?;
            Ok(PrefixPath {
                anchor_support: entries[0].1,
                entries,
            })
        })
        .collect()
}

/// The same paths by a depth-first visit of the whole tree; the baseline
/// the hash index access is compared against. Reads every node.
pub fn scan_prefix_paths<A: TreeAccess + ?Sized>(acc: &mut A, item: ItemId) -> Result<Vec<PrefixPath>> {
    let root = acc.read_node(NodeId::ROOT)?;
    let mut out = Vec::new();
    let mut path: Vec<(ItemId, u64)> = Vec::new();
    // (record, depth of its parent on `path`)
    let mut stack: Vec<(NodeRecord, usize)> = children(acc, &root)?.into_iter().rev().map(|r| (r, 0)).collect();
    while let Some((rec, depth)) = stack.pop() {
        path.truncate(depth);
        let node_item = rec.item.expect("non-root has an item");
        path.push((node_item, rec.count));
        if node_item == item {
            out.push(PrefixPath {
                entries: path.iter().rev().copied().collect(),
                anchor_support: rec.count,
            });
        }
        for child in children(acc, &rec)?.into_iter().rev() {
            stack.push((child, depth + 1));
        }
    }
    Ok(out)
}

/// Every count replaced by the anchor's count.
pub fn normalize_path(path: &PrefixPath) -> PrefixPath {
    PrefixPath {
        entries: path
            .entries
            .iter()
            .map(|&(i, _)| (i, path.anchor_support))
            .collect(),
        anchor_support: path.anchor_support,
    }
}

/// All transactions intersected with the items of support at least
/// `min_support`, read off the tree depth-first. Below an infrequent node
/// the visit stops when the item order is support-descending (every
/// descendant is infrequent too); otherwise infrequent nodes are skipped
/// and the visit continues beneath them.
pub fn support_projection<A: TreeAccess + ?Sized>(acc: &mut A, min_support: u64) -> Result<ProjectedDb> {
    let min_support = min_support.max(1);
    let truncate = acc.order().is_support_descending(acc.supports());
    let root = acc.read_node(NodeId::ROOT)?;
    let mut groups: HashMap<Vec<ItemId>, u64> = HashMap::new();
    let mut path = Vec::new();
    project_visit(acc, &root, &mut path, min_support, truncate, &mut groups)?;
    groups.remove(&Vec::new());
    Ok(ProjectedDb::from_groups(groups, acc.order()))
}

fn project_visit<A: TreeAccess + ?Sized>(
    acc: &mut A,
    node: &NodeRecord,
    path: &mut Vec<ItemId>,
    min_support: u64,
    truncate: bool,
    groups: &mut HashMap<Vec<ItemId>, u64>,
) -> Result<()> {
    let kids = children(acc, node)?;
    let mut here = node.count - kids.iter().map(|k| k.count).sum::<u64>();
    for kid in &kids {
        let item = kid.item.expect("non-root has an item");
        if acc.supports().get(item) >= min_support {
            path.push(item);
            project_visit(acc, kid, path, min_support, truncate, groups)?;
            path.pop();
        } else if truncate {
            here += kid.count;
        } else {
            project_visit(acc, kid, path, min_support, truncate, groups)?;
        }
    }
    if here > 0 && node.id != NodeId::ROOT {
        *groups.entry(path.clone()).or_default() += here;
    }
    Ok(())
}

/// Every transaction containing `item`, as its full rank-sorted item list:
/// the upward path of each occurrence joined with the residual expansion of
/// the occurrence's subtree.
pub fn item_projection<A: TreeAccess + ?Sized>(acc: &mut A, item: ItemId) -> Result<ProjectedDb> {
    let mut groups: HashMap<Vec<ItemId>, u64> = HashMap::new();
    for occ in acc.occurrences(item) {
        let anchor = acc.read_node(occ.node)?;
        let mut path: Vec<ItemId> = match anchor.parent {
            Some(p) if p != NodeId::ROOT => upward(acc, p)?.into_iter().rev().map(|e| e.0).collect(),
            _ => Vec::new(),
        };
        path.push(item);
        expand(acc, &anchor, &mut path, &mut groups)?;
    }
    Ok(ProjectedDb::from_groups(groups, acc.order()))
}

fn expand<A: TreeAccess + ?Sized>(
    acc: &mut A,
    node: &NodeRecord,
    path: &mut Vec<ItemId>,
    groups: &mut HashMap<Vec<ItemId>, u64>,
) -> Result<()> {
    let kids = children(acc, node)?;
    let residual = node.count - kids.iter().map(|k| k.count).sum::<u64>();
    if residual > 0 {
        *groups.entry(path.clone()).or_default() += residual;
    }
    for kid in &kids {
        path.push(kid.item.expect("non-root has an item"));
        expand(acc, kid, path, groups)?;
        path.pop();
    }
    Ok(())
}
