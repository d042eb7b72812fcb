//! Frequent web page set mining over a single-scan, persistent index.
//!
//! Sessions are staged into a [`TransactionDb`], indexed once into a
//! [`WpsIndex`] (prefix tree plus bucketed occurrence table), written to
//! clustered fixed-size blocks and mined through counted node reads.
//!
//! ```
//! use wpsmine::{mine_fp, StorageConfig, WpsIndex};
//! use wpsmine::testdata::table1;
//!
//! let db = table1();
//! let mut index = WpsIndex::build(&db, &StorageConfig::default()).unwrap();
//! let frequent = mine_fp(&mut index, 10).unwrap();
//! assert_eq!(frequent.len(), 4);
//! ```

pub mod access;
pub mod bench;
pub mod error;
pub mod incremental;
pub mod index;
pub mod ingestion;
pub mod item;
pub mod mining;
pub mod storage;
pub mod store;
pub mod synth;
pub mod testdata;

pub use access::{item_projection, normalize_path, prefix_paths, scan_prefix_paths, support_projection, PrefixPath, ProjectedDb, TreeAccess};
pub use error::{Error, Result};
pub use incremental::{DeltaBatch, UpdateReport};
pub use index::{build_index, BuildInfo, Layer, LayerThresholds, NodeId, WpsIndex};
pub use ingestion::{ingest_log, sessionize, LogRecord, SessionConfig};
pub use item::{ItemId, PageCatalog, Transaction};
pub use mining::{generate_rules, mine_fp, mine_levelwise, oracle_bruteforce, AssociationRule, ItemsetResult};
pub use storage::{open_index, IndexHandle, IndexStatsReport, IoStats, StorageConfig};
pub use store::{count_supports, order_items, ItemOrder, Supports, TransactionDb};
