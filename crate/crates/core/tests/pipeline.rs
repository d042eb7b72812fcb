use std::fs::File;
use std::io::BufReader;

use wpsmine::incremental::DeltaBatch;
use wpsmine::ingestion::{ingest_log, load_transactions_labeled, read_labels, write_labels, write_transactions};
use wpsmine::mining::{read_itemsets, write_itemsets};
use wpsmine::{mine_fp, open_index, IndexHandle, SessionConfig, StorageConfig, WpsIndex};

const LOG: &str = r#"10.0.0.1 - - [10/Oct/2020:13:55:36 +0000] "GET /index.html HTTP/1.1" 200 2326
10.0.0.1 - - [10/Oct/2020:13:56:01 +0000] "GET /products.html HTTP/1.1" 200 1200
10.0.0.2 - - [10/Oct/2020:13:57:12 +0000] "GET /index.html HTTP/1.1" 200 2326
10.0.0.2 - - [10/Oct/2020:13:58:40 +0000] "GET /products.html?id=3 HTTP/1.1" 200 900
10.0.0.2 - - [10/Oct/2020:13:59:02 +0000] "GET /missing.html HTTP/1.1" 404 0
10.0.0.3 - - [10/Oct/2020:14:01:00 +0000] "GET /index.html HTTP/1.1" 200 2326
this line is not a log record
10.0.0.1 - - [10/Oct/2020:16:00:00 +0000] "GET /contact.html HTTP/1.1" 200 500
10.0.0.1 - - [10/Oct/2020:16:00:30 +0000] "GET /index.html HTTP/1.1" 304 -
"#;

#[test]
fn log_to_itemsets() {
    let (db, report) = ingest_log(LOG.as_bytes(), SessionConfig::default()).unwrap();
    assert_eq!(report.lines, 9);
    assert_eq!(report.parse_errors, 1);
    assert_eq!(report.filtered, 1);
    // the 16:00 visit of 10.0.0.1 is a new session
    assert_eq!(db.len(), 4);

    let dir = tempfile::tempdir().unwrap();
    let tx_path = dir.path().join("tx.dat");
    let labels_path = dir.path().join("tx.labels");
    write_transactions(&db, File::create(&tx_path).unwrap()).unwrap();
    write_labels(db.catalog(), File::create(&labels_path).unwrap()).unwrap();
    let labels = read_labels(&labels_path).unwrap();
    let db = load_transactions_labeled(&tx_path, Some(&labels)).unwrap();
    assert_eq!(db.len(), 4);

    let mut ix = WpsIndex::build(&db, &StorageConfig::default()).unwrap();
    ix.save(dir.path().join("ix")).unwrap();
    let mut h = open_index(dir.path().join("ix")).unwrap();
    let found = mine_fp(&mut h, 2).unwrap();
    let out = dir.path().join("sets.txt");
    write_itemsets(&found, h.catalog(), File::create(&out).unwrap()).unwrap();
    let back = read_itemsets(BufReader::new(File::open(&out).unwrap())).unwrap();
    let pairs: Vec<_> = back.iter().filter(|(k, _)| k.len() == 2).collect();
    assert_eq!(pairs.len(), 1, "{back:?}");
    assert_eq!(pairs[0].0, ["/index.html", "/products.html"]);
    assert!(back.iter().any(|(k, s)| k == &["/index.html".to_string()] && *s == 4));
}

#[test]
fn appended_index_survives_reopen() {
    let dir = tempfile::tempdir().unwrap();
    let db = wpsmine::testdata::table1();
    let mut ix = WpsIndex::build(&db, &StorageConfig::default()).unwrap();
    ix.save(dir.path()).unwrap();
    let extra = wpsmine::TransactionDb::from_keyed(&[["b", "e", "q"], ["q", "x", "b"]]);
    {
        let mut h = IndexHandle::open(dir.path(), true).unwrap();
        let rep = h.append_transactions(&DeltaBatch::renumbered(&extra, 100, "seg-2")).unwrap();
        assert_eq!(rep.new_items, ["q", "x"]);
    }
    let mut h = open_index(dir.path()).unwrap();
    assert_eq!(h.info().n_transactions, 15);
    assert_eq!(h.supports().get(h.catalog().id("b").unwrap()), 12);
    let rebuilt = h.load_index().unwrap().reorder_rebuild().unwrap();
    assert!(rebuilt.order().is_support_descending(rebuilt.supports()));
    assert_eq!(rebuilt.io_stats().source_scans, 1);
}
