//! Item identifiers, the page catalog and transactions (one visitor session
//! or one line of a flat transaction file).

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense item identifier assigned by a [`PageCatalog`], starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Bijection between textual item keys (page paths, or decimal tokens of a
/// flat file) and dense [`ItemId`]s.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageCatalog {
    keys: Vec<String>,
    #[serde(skip)]
    ids: HashMap<String, ItemId>,
}

impl PageCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_keys<I, S>(keys: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut catalog = Self::new();
        for key in keys {
            catalog.register(key);
        }
        catalog
    }

    /// Returns the id of `key`, registering it if unseen.
    pub fn register(&mut self, key: impl Into<String>) -> ItemId {
        let key = key.into();
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = ItemId(self.keys.len() as u32);
        self.ids.insert(key.clone(), id);
        self.keys.push(key);
        id
    }

    pub fn id(&self, key: &str) -> Option<ItemId> {
        self.ids.get(key).copied()
    }

    pub fn key(&self, id: ItemId) -> &str {
        &self.keys[id.index()]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn iter(&self) -> impl Iterator<Item = (ItemId, &str)> {
        self.keys
            .iter()
            .enumerate()
            .map(|(i, k)| (ItemId(i as u32), k.as_str()))
    }

    /// True when every key is a plain non-negative integer token, i.e. the
    /// catalog can be written back as a flat file without a label sidecar.
    pub fn is_numeric(&self) -> bool {
        self.keys.iter().all(|k| k.parse::<u64>().is_ok())
    }

    /// Rebuilds the reverse map; needed after deserialization.
    pub(crate) fn reindex(&mut self) {
        self.ids = self
            .keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), ItemId(i as u32)))
            .collect();
    }
}

/// A set of items with a unique transaction id. Items are kept sorted by id
/// and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub tid: u64,
    items: Vec<ItemId>,
}

impl Transaction {
    /// Builds a transaction, dropping duplicates. Returns the transaction and
    /// the number of duplicates removed.
    pub fn with_dedup(tid: u64, mut items: Vec<ItemId>) -> (Self, usize) {
        let before = items.len();
        items.sort_unstable();
        items.dedup();
        let dropped = before - items.len();
        (Self { tid, items }, dropped)
    }

    pub fn new(tid: u64, items: Vec<ItemId>) -> Self {
        Self::with_dedup(tid, items).0
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.items.binary_search(&item).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_is_a_bijection() {
        let mut c = PageCatalog::new();
        let a = c.register("/a.html");
        let b = c.register("/b.html");
        assert_eq!(c.register("/a.html"), a);
        assert_ne!(a, b);
        assert_eq!(c.key(b), "/b.html");
        assert_eq!(c.id("/a.html"), Some(a));
        assert_eq!(c.id("/zzz"), None);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn transaction_dedups() {
        let (t, dropped) = Transaction::with_dedup(1, vec![ItemId(3), ItemId(3), ItemId(7)]);
        assert_eq!(t.items(), &[ItemId(3), ItemId(7)]);
        assert_eq!(dropped, 1);
        assert!(t.contains(ItemId(7)));
        assert!(!t.contains(ItemId(4)));
    }

    #[test]
    fn reindex_after_serde() {
        let c = PageCatalog::from_keys(["x", "y"]);
        let json = serde_json::to_string(&c).unwrap();
        let mut back: PageCatalog = serde_json::from_str(&json).unwrap();
        assert_eq!(back.id("y"), None);
        back.reindex();
        assert_eq!(back.id("y"), Some(ItemId(1)));
    }
}
