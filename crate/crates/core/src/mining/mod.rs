//! Frequent itemset extraction over the index and association rules.

pub mod fp;
pub mod levelwise;
pub mod oracle;
pub mod rules;

use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

pub use fp::mine_fp;
pub use levelwise::mine_levelwise;
pub use oracle::oracle_bruteforce;
pub use rules::{generate_rules, write_rules_csv, AssociationRule};

use crate::error::{Error, Result};
use crate::item::{ItemId, PageCatalog};
use crate::store::ItemOrder;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ItemsetResult {
    pub items: Vec<ItemId>,
    pub support: u64,
}

/// Sorts items by rank and the list by size, then rank sequence.
pub fn canonicalize(results: &mut [ItemsetResult], order: &ItemOrder) {
    for r in results.iter_mut() {
        order.sort(&mut r.items);
    }
    results.sort_by_cached_key(|r| {
        (
            r.items.len(),
            r.items.iter().map(|&i| order.rank_of(i)).collect::<Vec<_>>(),
        )
    });
}

/// Itemsets keyed by their sorted textual item keys, for comparing results
/// across indexes whose item ids or orders differ.
pub fn keyed_results(results: &[ItemsetResult], catalog: &PageCatalog) -> BTreeMap<Vec<String>, u64> {
    results
        .iter()
        .map(|r| {
            let mut keys: Vec<String> = r.items.iter().map(|&i| catalog.key(i).to_string()).collect();
            keys.sort();
            (keys, r.support)
        })
        .collect()
}

/// One itemset per line: items space-separated, then ` (support)`.
pub fn write_itemsets<W: Write>(results: &[ItemsetResult], catalog: &PageCatalog, mut out: W) -> io::Result<()> {
    for r in results {
        let keys: Vec<&str> = r.items.iter().map(|&i| catalog.key(i)).collect();
        writeln!(out, "{} ({})", keys.join(" "), r.support)?;
    }
    out.flush()
}

/// Parses the itemset format back into textual keys and supports.
pub fn read_itemsets<R: BufRead>(reader: R) -> Result<Vec<(Vec<String>, u64)>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let open = line
            .rfind('(')
            .ok_or_else(|| Error::parse(line_no, "missing `(support)`"))?;
        let support = line[open + 1..]
            .strip_suffix(')')
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::parse(line_no, "bad support"))?;
        let items: Vec<String> = line[..open].split_whitespace().map(str::to_string).collect();
        if items.is_empty() {
            return Err(Error::parse(line_no, "empty itemset"));
        }
        out.push((items, support));
    }
    Ok(out)
}

/// Turns parsed itemsets into results over `catalog`, registering keys.
pub fn itemsets_from_keys(rows: &[(Vec<String>, u64)], catalog: &mut PageCatalog) -> Vec<ItemsetResult> {
    rows.iter()
        .map(|(keys, support)| ItemsetResult {
            items: keys.iter().map(|k| catalog.register(k.as_str())).collect(),
            support: *support,
        })
        .collect()
}
