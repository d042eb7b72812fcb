//! Access-log parsing, sessionization and flat transaction files.

pub mod clf;
pub mod flat;
pub mod session;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Serialize;

pub use clf::{normalize_page, parse_log_line, LogRecord};
pub use flat::{
    load_transactions, load_transactions_labeled, parse_transactions, read_labels, write_labels,
    write_transactions, Labels,
};
pub use session::{sessionize, SessionConfig, Sessionizer};

use crate::error::{Error, Result};
use crate::item::PageCatalog;
use crate::store::TransactionDb;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub lines: usize,
    pub parse_errors: usize,
    pub filtered: usize,
    pub transactions: usize,
    /// Sessions still open at the end of the segment and left out.
    pub held_back: usize,
}

/// Reads a CLF log, skipping (and counting) malformed lines, and stages
/// the resulting sessions as a transaction db.
pub fn ingest_log<R: BufRead>(reader: R, cfg: SessionConfig) -> Result<(TransactionDb, IngestReport)> {
    ingest(reader, cfg, false)
}

/// Like [`ingest_log`] for one segment of a log that is still being
/// written: sessions whose last request lies within the session threshold
/// of the segment's newest record may still grow, so they are left out and
/// counted in `held_back`.
pub fn ingest_log_segment<R: BufRead>(reader: R, cfg: SessionConfig) -> Result<(TransactionDb, IngestReport)> {
    ingest(reader, cfg, true)
}

fn ingest<R: BufRead>(reader: R, cfg: SessionConfig, closed_only: bool) -> Result<(TransactionDb, IngestReport)> {
    let mut sessionizer = Sessionizer::new(cfg)?;
    let mut report = IngestReport::default();
    let mut bytes = 0u64;
    let mut newest = i64::MIN;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::parse(idx + 1, e.to_string()))?;
        bytes += line.len() as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        match parse_log_line(&line, idx + 1) {
            Ok(rec) => {
                newest = newest.max(rec.timestamp);
                sessionizer.push(rec)
            }
            Err(e) => {
                log::warn!("skipping malformed log line: {e}");
                report.parse_errors += 1;
            }
        }
    }
    report.filtered = sessionizer.filtered();
    let mut catalog = PageCatalog::new();
    let transactions = if closed_only {
        let closed = sessionizer.take_closed(newest, &mut catalog, 1);
        report.held_back = sessionizer.n_pending();
        closed
    } else {
        sessionizer.finish(&mut catalog, 1)
    };
    report.transactions = transactions.len();
    let mut db = TransactionDb::from_parts(transactions, catalog, 0);
    db.set_source_bytes(bytes);
    Ok((db, report))
}

pub fn ingest_log_file(path: impl AsRef<Path>, cfg: SessionConfig) -> Result<(TransactionDb, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_log(BufReader::new(file), cfg)
}

pub fn ingest_log_segment_file(path: impl AsRef<Path>, cfg: SessionConfig) -> Result<(TransactionDb, IngestReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_log_segment(BufReader::new(file), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_counts_everything() {
        let log = "\
1.1.1.1 - - [10/Oct/2020:13:55:36 +0000] \"GET /a.html HTTP/1.0\" 200 1
1.1.1.1 - - [10/Oct/2020:13:55:46 +0000] \"GET /b.html HTTP/1.0\" 200 1
garbage
1.1.1.1 - - [10/Oct/2020:13:55:50 +0000] \"GET /missing HTTP/1.0\" 404 1
2.2.2.2 - - [10/Oct/2020:14:55:36 +0000] \"GET /a.html HTTP/1.0\" 200 1
";
        let (db, report) = ingest_log(log.as_bytes(), SessionConfig::with_threshold(30)).unwrap();
        assert_eq!(
            report,
            IngestReport {
                lines: 5,
                parse_errors: 1,
                filtered: 1,
                transactions: 2,
                held_back: 0,
            }
        );
        assert_eq!(db.len(), 2);
        assert_eq!(db.n_items(), 2);
    }

    #[test]
    fn segment_holds_back_open_sessions() {
        let log = "\
1.1.1.1 - - [10/Oct/2020:13:00:00 +0000] \"GET /a.html HTTP/1.0\" 200 1
2.2.2.2 - - [10/Oct/2020:13:59:50 +0000] \"GET /b.html HTTP/1.0\" 200 1
1.1.1.1 - - [10/Oct/2020:14:00:00 +0000] \"GET /c.html HTTP/1.0\" 200 1
";
        let (db, report) = ingest_log_segment(log.as_bytes(), SessionConfig::with_threshold(60)).unwrap();
        assert_eq!(report.transactions, 1);
        assert_eq!(report.held_back, 2);
        assert_eq!(db.catalog().key(db.transactions()[0].items()[0]), "/a.html");
    }
}
