//! Flat transaction files: one transaction per line, whitespace-separated
//! non-negative integer item ids, `#` comment lines ignored.
//!
//! An optional label sidecar (`id<TAB>key` per line) maps the integer ids
//! back to page keys so item ordering ties break on page names.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::item::{PageCatalog, Transaction};
use crate::store::TransactionDb;

pub type Labels = HashMap<u64, String>;

/// Parses flat transactions from a reader. Tids are 1..=N in line order.
pub fn parse_transactions<R: BufRead>(reader: R, labels: Option<&Labels>) -> Result<TransactionDb> {
    let mut catalog = PageCatalog::new();
    let mut transactions = Vec::new();
    let mut dropped = 0;
    let mut bytes = 0u64;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::parse(line_no, e.to_string()))?;
        bytes += line.len() as u64 + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let mut items = Vec::new();
        for tok in body.split_whitespace() {
            let id: u64 = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("`{tok}` is not a non-negative integer")))?;
            let key = match labels.and_then(|l| l.get(&id)) {
                Some(label) => label.clone(),
                None => id.to_string(),
            };
            items.push(catalog.register(key));
        }
        let (t, d) = Transaction::with_dedup(transactions.len() as u64 + 1, items);
        dropped += d;
        transactions.push(t);
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} duplicate item(s) while loading transactions");
    }
    let mut db = TransactionDb::from_parts(transactions, catalog, dropped);
    db.set_source_bytes(bytes);
    Ok(db)
}

pub fn load_transactions(path: impl AsRef<Path>) -> Result<TransactionDb> {
    load_transactions_labeled(path, None)
}

pub fn load_transactions_labeled(path: impl AsRef<Path>, labels: Option<&Labels>) -> Result<TransactionDb> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_transactions(BufReader::new(file), labels)
}

/// Writes `db` as flat lines. Numeric catalogs are written as their own
/// keys; otherwise items are written as dense ids and a label sidecar
/// (see [`write_labels`]) is needed to recover the keys.
pub fn write_transactions<W: Write>(db: &TransactionDb, mut out: W) -> io::Result<()> {
    let numeric = db.catalog().is_numeric();
    for t in db.transactions() {
        let mut first = true;
        for &i in t.items() {
            if !first {
                out.write_all(b" ")?;
            }
            first = false;
            if numeric {
                out.write_all(db.catalog().key(i).as_bytes())?;
            } else {
                write!(out, "{}", i.0)?;
            }
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_labels<W: Write>(catalog: &PageCatalog, mut out: W) -> io::Result<()> {
    for (id, key) in catalog.iter() {
        writeln!(out, "{}\t{}", id.0, key)?;
    }
    out.flush()
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Labels> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Labels::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, key) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(idx + 1, "expected `id<TAB>label`"))?;
        let id = id
            .trim()
            .parse()
            .map_err(|_| Error::parse(idx + 1, format!("bad item id `{id}`")))?;
        labels.insert(id, key.to_string());
    }
    Ok(labels)
}
