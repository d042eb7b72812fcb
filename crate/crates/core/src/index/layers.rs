use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::tree::WpsTree;
use crate::store::Supports;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Layer {
    Excellent,
    Medium,
    Weak,
}

/// Item-support thresholds: `support >= high` is Excellent,
/// `low <= support < high` Medium, anything lower Weak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerThresholds {
    pub high: u64,
    pub low: u64,
}

impl LayerThresholds {
    pub fn new(high: u64, low: u64) -> Result<Self> {
        if low < 2 {
            return Err(Error::Config(format!("layer low threshold {low} must be at least 2")));
        }
        if high < low {
            return Err(Error::Config(format!(
                "layer high threshold {high} is below low threshold {low}"
            )));
        }
        Ok(Self { high, low })
    }

    /// `low` defaults to `ceil(high / 2)`, floored at 2.
    pub fn from_high(high: u64) -> Result<Self> {
        Self::new(high, high.div_ceil(2).max(2))
    }

    /// Defaults for a database of `n_transactions`: `high` is a tenth of
    /// the transactions, never below 2.
    pub fn default_for(n_transactions: u64) -> Self {
        let high = n_transactions.div_ceil(10).max(2);
        Self::from_high(high).expect("default thresholds are valid")
    }

    pub fn classify(&self, support: u64) -> Layer {
        if support >= self.high {
            Layer::Excellent
        } else if support >= self.low {
            Layer::Medium
        } else {
            Layer::Weak
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerAssignment {
    pub thresholds: LayerThresholds,
    /// Indexed by node id; the root is tagged Excellent.
    tags: Vec<Layer>,
}

impl LayerAssignment {
    pub fn layer(&self, node: crate::index::NodeId) -> Layer {
        self.tags[node.index()]
    }

    /// Non-root node counts per layer: `[excellent, medium, weak]`.
    pub fn histogram(&self) -> [usize; 3] {
        let mut h = [0; 3];
        for t in self.tags.iter().skip(1) {
            h[*t as usize] += 1;
        }
        h
    }
}

pub fn assign_layers(tree: &WpsTree, supports: &Supports, high: u64, low: u64) -> Result<LayerAssignment> {
    let thresholds = LayerThresholds::new(high, low)?;
    Ok(assign_with(tree, supports, thresholds))
}

pub fn assign_with(tree: &WpsTree, supports: &Supports, thresholds: LayerThresholds) -> LayerAssignment {
    let mut tags = Vec::with_capacity(tree.n_nodes() + 1);
    tags.push(Layer::Excellent);
    for id in tree.node_ids() {
        let item = tree.node(id).item.expect("non-root has an item");
        tags.push(thresholds.classify(supports.get(item)));
    }
    LayerAssignment { thresholds, tags }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_validation() {
        assert!(LayerThresholds::new(1, 1).is_err());
        assert!(LayerThresholds::new(3, 4).is_err());
        assert!(LayerThresholds::new(2, 2).is_ok());
        assert_eq!(LayerThresholds::from_high(5).unwrap().low, 3);
        assert_eq!(LayerThresholds::from_high(2).unwrap().low, 2);
    }

    #[test]
    fn equal_thresholds_leave_medium_empty() {
        let t = LayerThresholds::new(2, 2).unwrap();
        assert_eq!(t.classify(1), Layer::Weak);
        assert_eq!(t.classify(2), Layer::Excellent);
        assert!((1..100).all(|s| t.classify(s) != Layer::Medium));
    }
}
