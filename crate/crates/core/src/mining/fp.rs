//! FP-growth over the index. The first level reads each frequent item's
//! normalized prefix paths through the hash index; deeper levels run on
//! in-memory conditional trees.

use std::collections::HashMap;

use crate::access::{normalize_path, prefix_paths, TreeAccess};
use crate::error::Result;
use crate::item::ItemId;
use crate::mining::{canonicalize, ItemsetResult};
use crate::store::ItemOrder;

struct CondNode {
    item: ItemId,
    count: u64,
    parent: usize,
    children: Vec<usize>,
}

/// Conditional FP-tree with node links per item.
struct CondTree {
    nodes: Vec<CondNode>,
    links: HashMap<ItemId, Vec<usize>>,
}

const ROOT: usize = 0;

impl CondTree {
    /// Builds from a pattern base, keeping items frequent within it.
    fn build(base: &[(Vec<ItemId>, u64)], min_support: u64) -> Self {
        let mut counts: HashMap<ItemId, u64> = HashMap::new();
        for (items, m) in base {
            for &i in items {
                *counts.entry(i).or_default() += m;
            }
        }
        let mut tree = CondTree {
            nodes: vec![CondNode {
                item: ItemId(u32::MAX),
                count: 0,
                parent: ROOT,
                children: Vec::new(),
            }],
            links: HashMap::new(),
        };
        for (items, m) in base {
            let mut cur = ROOT;
            for &i in items.iter().filter(|i| counts[i] >= min_support) {
                let found = tree.nodes[cur]
                    .children
                    .iter()
                    .copied()
                    .find(|&c| tree.nodes[c].item == i);
                cur = match found {
                    Some(c) => {
                        tree.nodes[c].count += m;
                        c
                    }
                    None => {
                        let id = tree.nodes.len();
                        tree.nodes.push(CondNode {
                            item: i,
                            count: *m,
                            parent: cur,
                            children: Vec::new(),
                        });
                        tree.nodes[cur].children.push(id);
                        tree.links.entry(i).or_default().push(id);
                        id
                    }
                };
            }
        }
        tree
    }

    fn prefix_of(&self, mut node: usize) -> Vec<ItemId> {
        let mut out = Vec::new();
        node = self.nodes[node].parent;
        while node != ROOT {
            out.push(self.nodes[node].item);
            node = self.nodes[node].parent;
        }
        out.reverse();
        out
    }
}

fn grow(tree: &CondTree, suffix: &[ItemId], min_support: u64, order: &ItemOrder, out: &mut Vec<ItemsetResult>) {
    // deepest items first, as in the classic header-table walk
    let mut items: Vec<ItemId> = tree.links.keys().copied().collect();
    items.sort_by_key(|&i| std::cmp::Reverse(order.rank_of(i)));
    for item in items {
        let nodes = &tree.links[&item];
        let support: u64 = nodes.iter().map(|&n| tree.nodes[n].count).sum();
        if support < min_support {
            continue;
        }
        let mut itemset = suffix.to_vec();
        itemset.push(item);
        out.push(ItemsetResult {
            items: itemset.clone(),
            support,
        });
        let base: Vec<(Vec<ItemId>, u64)> = nodes
            .iter()
            .map(|&n| (tree.prefix_of(n), tree.nodes[n].count))
            .filter(|(p, _)| !p.is_empty())
            .collect();
        if !base.is_empty() {
            let sub = CondTree::build(&base, min_support);
            if !sub.links.is_empty() {
                grow(&sub, &itemset, min_support, order, out);
            }
        }
    }
}

/// Every itemset with support >= `min_support`, canonically ordered.
pub fn mine_fp<A: TreeAccess + ?Sized>(acc: &mut A, min_support: u64) -> Result<Vec<ItemsetResult>> {
    let min_support = min_support.max(1);
    let order = acc.order().clone();
    let supports = acc.supports().clone();
    let mut frequent: Vec<ItemId> = order
        .items()
        .iter()
        .copied()
        .filter(|&i| supports.get(i) >= min_support)
        .collect();
    frequent.sort_by_key(|&i| (supports.get(i), std::cmp::Reverse(order.rank_of(i))));

    let mut out = Vec::new();
    for item in frequent {
        out.push(ItemsetResult {
            items: vec![item],
            support: supports.get(item),
        });
        let base: Vec<(Vec<ItemId>, u64)> = prefix_paths(acc, item)?
            .iter()
            .map(normalize_path)
            .map(|p| (p.ancestors(), p.anchor_support))
            .filter(|(a, _)| !a.is_empty())
            .collect();
        let tree = CondTree::build(&base, min_support);
        if !tree.links.is_empty() {
            grow(&tree, &[item], min_support, &order, &mut out);
        }
    }
    canonicalize(&mut out, &order);
    Ok(out)
}
