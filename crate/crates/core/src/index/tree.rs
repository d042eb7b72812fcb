use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::ItemId;
use crate::store::ItemOrder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WpsNode {
    pub item: Option<ItemId>,
    /// Number of represented transactions passing through this node.
    pub count: u64,
    pub parent: Option<NodeId>,
    /// Children keyed by their item's rank.
    children: BTreeMap<u32, NodeId>,
}

impl WpsNode {
    fn root() -> Self {
        Self {
            item: None,
            count: 0,
            parent: None,
            children: BTreeMap::new(),
        }
    }

    pub fn children(&self) -> impl DoubleEndedIterator<Item = NodeId> + '_ {
        self.children.values().copied()
    }

    pub fn n_children(&self) -> usize {
        self.children.len()
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertOutcome {
    pub created: Vec<NodeId>,
    pub incremented: Vec<NodeId>,
}

/// Multiset of rank-sorted transactions.
pub type PathMultiset = BTreeMap<Vec<ItemId>, u64>;

/// Prefix tree over rank-sorted transactions.
///
/// Nodes live in an arena; a child is always created after its parent, so
/// ids are a topological order.
#[derive(Debug, Clone)]
pub struct WpsTree {
    nodes: Vec<WpsNode>,
    order: ItemOrder,
    n_count_updates: u64,
}

impl WpsTree {
    pub fn new(order: ItemOrder) -> Self {
        Self {
            nodes: vec![WpsNode::root()],
            order,
            n_count_updates: 0,
        }
    }

    pub fn order(&self) -> &ItemOrder {
        &self.order
    }

    pub(crate) fn order_mut(&mut self) -> &mut ItemOrder {
        &mut self.order
    }

    pub fn root(&self) -> &WpsNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: NodeId) -> &WpsNode {
        &self.nodes[id.index()]
    }

    pub fn get(&self, id: NodeId) -> Option<&WpsNode> {
        self.nodes.get(id.index())
    }

    /// Non-root nodes.
    pub fn n_nodes(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_count_updates(&self) -> u64 {
        self.n_count_updates
    }

    /// Inserted non-empty transactions (the root count).
    pub fn n_transactions(&self) -> u64 {
        self.nodes[0].count
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (1..self.nodes.len() as u32).map(NodeId)
    }

    pub fn child(&self, id: NodeId, item: ItemId) -> Option<NodeId> {
        let rank = self.order.rank(item)?;
        self.node(id).children.get(&rank).copied()
    }

    pub fn first_child(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).children.values().next().copied()
    }

    pub fn next_sibling(&self, id: NodeId) -> Option<NodeId> {
        let node = self.node(id);
        let parent = node.parent?;
        let rank = self.order.rank_of(node.item?);
        self.node(parent)
            .children
            .range(rank + 1..)
            .next()
            .map(|(_, &c)| c)
    }

    pub fn depth(&self, mut id: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.node(id).parent {
            d += 1;
            id = p;
        }
        d
    }

    pub fn max_depth(&self) -> usize {
        let mut depth = vec![0usize; self.nodes.len()];
        let mut best = 0;
        for id in self.node_ids() {
            let p = self.node(id).parent.expect("non-root has parent");
            depth[id.index()] = depth[p.index()] + 1;
            best = best.max(depth[id.index()]);
        }
        best
    }

    /// Items from `id` up to (excluding) the root, in rank order.
    pub fn path_items(&self, mut id: NodeId) -> Vec<ItemId> {
        let mut out = Vec::new();
        while let Some(item) = self.node(id).item {
            out.push(item);
            id = self.node(id).parent.expect("non-root has parent");
        }
        out.reverse();
        out
    }

    /// Count minus the children's counts: transactions ending here.
    pub fn residual(&self, id: NodeId) -> u64 {
        let node = self.node(id);
        node.count - node.children().map(|c| self.node(c).count).sum::<u64>()
    }

    fn check_sorted(&self, items: &[ItemId]) -> Result<()> {
        let mut prev: Option<u32> = None;
        for &i in items {
            let r = self
                .order
                .rank(i)
                .ok_or_else(|| Error::Contract(format!("item {i} is not in the item order")))?;
            if prev.is_some_and(|p| p >= r) {
                return Err(Error::Contract(
                    "transaction items must be strictly increasing in rank".into(),
                ));
            }
            prev = Some(r);
        }
        Ok(())
    }

    /// Inserts one rank-sorted transaction.
    pub fn insert(&mut self, items: &[ItemId]) -> Result<InsertOutcome> {
        self.insert_n(items, 1)
    }

    /// Inserts `multiplicity` copies of one rank-sorted transaction; each
    /// matched node receives one count update.
    pub fn insert_n(&mut self, items: &[ItemId], multiplicity: u64) -> Result<InsertOutcome> {
        self.check_sorted(items)?;
        let mut outcome = InsertOutcome::default();
        if items.is_empty() || multiplicity == 0 {
            return Ok(outcome);
        }
        self.nodes[0].count += multiplicity;
        let mut cur = NodeId::ROOT;
        for &item in items {
            let rank = self.order.rank_of(item);
            match self.nodes[cur.index()].children.get(&rank) {
                Some(&child) => {
                    self.nodes[child.index()].count += multiplicity;
                    self.n_count_updates += 1;
                    outcome.incremented.push(child);
                    cur = child;
                }
                None => {
                    let id = NodeId(self.nodes.len() as u32);
                    self.nodes.push(WpsNode {
                        item: Some(item),
                        count: multiplicity,
                        parent: Some(cur),
                        children: BTreeMap::new(),
                    });
                    self.nodes[cur.index()].children.insert(rank, id);
                    outcome.created.push(id);
                    cur = id;
                }
            }
        }
        Ok(outcome)
    }

    /// Every root-to-node path emitted `residual` times.
    pub fn reconstruct(&self) -> PathMultiset {
        let mut out = PathMultiset::new();
        for id in self.node_ids() {
            let r = self.residual(id);
            if r > 0 {
                *out.entry(self.path_items(id)).or_default() += r;
            }
        }
        out
    }

    /// Rebuilds a tree from node records whose ids are already dense and
    /// parent-before-child.
    pub(crate) fn from_records(
        order: ItemOrder,
        root_count: u64,
        n_count_updates: u64,
        records: Vec<(NodeId, ItemId, u64, NodeId)>,
    ) -> Result<Self> {
        let mut tree = Self::new(order);
        tree.nodes[0].count = root_count;
        tree.n_count_updates = n_count_updates;
        tree.nodes.resize(records.len() + 1, WpsNode::root());
        for (id, item, count, parent) in records {
            if id.index() == 0 || id.index() >= tree.nodes.len() || parent.index() >= tree.nodes.len() {
                return Err(Error::Format(format!("node id {} out of range", id.0)));
            }
            let rank = tree
                .order
                .rank(item)
                .ok_or_else(|| Error::Format(format!("node {} has unordered item", id.0)))?;
            tree.nodes[id.index()] = WpsNode {
                item: Some(item),
                count,
                parent: Some(parent),
                children: BTreeMap::new(),
            };
            tree.nodes[parent.index()].children.insert(rank, id);
        }
        tree.validate().map_err(Error::Format)?;
        Ok(tree)
    }

    /// Checks the structural invariants; returns a description of the first
    /// violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let mut reached = vec![false; self.nodes.len()];
        reached[0] = true;
        let mut stack = vec![NodeId::ROOT];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            let parent_rank = node.item.map(|i| self.order.rank_of(i));
            let mut child_sum = 0;
            for (&rank, &c) in &node.children {
                let child = self.node(c);
                if child.parent != Some(id) {
                    return Err(format!("node {} has a wrong parent link", c.0));
                }
                if child.item.map(|i| self.order.rank_of(i)) != Some(rank) {
                    return Err(format!("node {} is filed under the wrong rank", c.0));
                }
                if parent_rank.is_some_and(|p| p >= rank) {
                    return Err(format!("ranks do not increase below node {}", id.0));
                }
                if child.count == 0 {
                    return Err(format!("node {} has zero count", c.0));
                }
                if reached[c.index()] {
                    return Err(format!("node {} reached twice", c.0));
                }
                reached[c.index()] = true;
                child_sum += child.count;
                stack.push(c);
            }
            if node.count < child_sum {
                return Err(format!("node {} count below its children's sum", id.0));
            }
        }
        if let Some(i) = reached.iter().position(|r| !r) {
            return Err(format!("node {i} unreachable from root"));
        }
        let top: u64 = self.root().children().map(|c| self.node(c).count).sum();
        if top != self.root().count {
            return Err("root count differs from the sum of its children".into());
        }
        Ok(())
    }
}
