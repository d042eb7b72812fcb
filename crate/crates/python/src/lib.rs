//! Python bindings: `pywpsmine.TransactionDb`, `Index`, `IndexHandle` and a
//! few free functions.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wpsmine::incremental::DeltaBatch;
use wpsmine::ingestion::{ingest_log_file, load_transactions_labeled, read_labels};
use wpsmine::mining::{itemsets_from_keys, keyed_results};
use wpsmine::synth::{generate_rows, GenConfig, GenKind};
use wpsmine::{
    generate_rules, mine_fp, mine_levelwise, normalize_path, oracle_bruteforce, prefix_paths, Error, IndexStatsReport,
    ItemsetResult, LayerThresholds, PageCatalog, SessionConfig, StorageConfig, TreeAccess,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

type Itemsets = Vec<(Vec<String>, u64)>;
type Path = Vec<(String, u64)>;
type Rule = (Vec<String>, Vec<String>, u64, f64);

fn itemsets(results: &[ItemsetResult], catalog: &PageCatalog) -> Itemsets {
    results
        .iter()
        .map(|r| (r.items.iter().map(|&i| catalog.key(i).to_string()).collect(), r.support))
        .collect()
}

fn mine_with<A: TreeAccess>(acc: &mut A, min_support: u64, algorithm: &str) -> PyResult<Itemsets> {
    if min_support == 0 {
        return Err(PyValueError::new_err("min_support must be at least 1"));
    }
    let found = match algorithm {
        "fp" => mine_fp(acc, min_support),
        "levelwise" => mine_levelwise(acc, min_support),
        other => return Err(PyValueError::new_err(format!("unknown algorithm {other:?}"))),
    }
    .map_err(to_py)?;
    Ok(itemsets(&found, acc.catalog()))
}

fn paths_of<A: TreeAccess>(acc: &mut A, key: &str, normalized: bool) -> PyResult<Vec<Path>> {
    let item = acc
        .catalog()
        .id(key)
        .ok_or_else(|| PyKeyError::new_err(key.to_string()))?;
    let paths = prefix_paths(acc, item).map_err(to_py)?;
    let catalog = acc.catalog();
    Ok(paths
        .iter()
        .map(|p| {
            let p = if normalized { normalize_path(p) } else { p.clone() };
            p.entries.iter().map(|&(i, c)| (catalog.key(i).to_string(), c)).collect()
        })
        .collect())
}

fn io_dict<'py>(py: Python<'py>, acc: &impl TreeAccess) -> PyResult<Bound<'py, PyDict>> {
    let io = acc.io_stats();
    let d = PyDict::new(py);
    d.set_item("blocks_read", io.blocks_read)?;
    d.set_item("blocks_written", io.blocks_written)?;
    d.set_item("nodes_read", io.nodes_read)?;
    d.set_item("source_scans", io.source_scans)?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &IndexStatsReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("Dataset", &r.dataset)?;
    d.set_item("Transactions", r.n_transactions)?;
    d.set_item("Dataset Items", r.n_items)?;
    d.set_item("AvtrSz", r.avg_tr_size)?;
    d.set_item("Size(KB)", r.dataset_size)?;
    d.set_item("WPs-Tree (Records)", r.tree_records)?;
    d.set_item("WPs-Hash -indexed tree (Records)", r.hash_records)?;
    d.set_item("Time (sec)", r.creation_time_seconds)?;
    Ok(d)
}

/// Staged transactions.
#[pyclass(module = "pywpsmine")]
struct TransactionDb {
    inner: wpsmine::TransactionDb,
}

#[pymethods]
impl TransactionDb {
    /// One list of page keys per transaction; tids are 1..=N.
    #[staticmethod]
    fn from_rows(rows: Vec<Vec<String>>) -> Self {
        Self {
            inner: wpsmine::TransactionDb::from_keyed(&rows),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (path, labels=None))]
    fn load(path: PathBuf, labels: Option<PathBuf>) -> PyResult<Self> {
        let labels = labels.map(read_labels).transpose().map_err(to_py)?;
        let inner = load_transactions_labeled(path, labels.as_ref()).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, session_threshold=1800))]
    fn from_log(path: PathBuf, session_threshold: u64) -> PyResult<Self> {
        let (inner, _) = ingest_log_file(path, SessionConfig::with_threshold(session_threshold)).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn rows(&self) -> Vec<Vec<String>> {
        let cat = self.inner.catalog();
        self.inner
            .transactions()
            .iter()
            .map(|t| t.items().iter().map(|&i| cat.key(i).to_string()).collect())
            .collect()
    }

    #[getter]
    fn n_items(&self) -> usize {
        self.inner.n_items()
    }

    #[getter]
    fn avg_tr_size(&self) -> f64 {
        self.inner.avg_transaction_size()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// In-memory index.
#[pyclass(module = "pywpsmine")]
struct Index {
    inner: wpsmine::WpsIndex,
}

#[pymethods]
impl Index {
    #[new]
    #[pyo3(signature = (db, block_size=4096, k_avg=1.2, k_sup=0.0, n_buckets=26, layer_high=None, layer_low=None))]
    fn new(
        db: &TransactionDb,
        block_size: u32,
        k_avg: f64,
        k_sup: f64,
        n_buckets: usize,
        layer_high: Option<u64>,
        layer_low: Option<u64>,
    ) -> PyResult<Self> {
        let layers = match (layer_high, layer_low) {
            (Some(h), Some(l)) => Some(LayerThresholds::new(h, l).map_err(to_py)?),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("give both layer_high and layer_low or neither")),
        };
        let cfg = StorageConfig {
            block_size,
            k_avg,
            k_sup,
            n_buckets,
            layers,
        };
        let inner = wpsmine::WpsIndex::build(&db.inner, &cfg).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn save(&mut self, path: PathBuf) -> PyResult<()> {
        self.inner.save(path).map(|_| ()).map_err(to_py)
    }

    #[pyo3(signature = (min_support, algorithm="fp"))]
    fn mine(&mut self, min_support: u64, algorithm: &str) -> PyResult<Itemsets> {
        mine_with(&mut self.inner, min_support, algorithm)
    }

    #[pyo3(signature = (item, normalized=false))]
    fn prefix_paths(&mut self, item: &str, normalized: bool) -> PyResult<Vec<Path>> {
        paths_of(&mut self.inner, item, normalized)
    }

    /// `(node id, count)` of every tree occurrence of `item`.
    fn lookup_occurrences(&self, item: &str) -> PyResult<Vec<(u32, u64)>> {
        let id = self.inner.item(item).ok_or_else(|| PyKeyError::new_err(item.to_string()))?;
        Ok(self.inner.lookup_occurrences(id).into_iter().map(|(n, c)| (n.0, c)).collect())
    }

    fn support(&self, item: &str) -> u64 {
        self.inner.item(item).map_or(0, |i| self.inner.support(i))
    }

    /// Appends transactions given as key lists; returns the update report.
    #[pyo3(signature = (rows, provenance="python"))]
    fn append<'py>(&mut self, py: Python<'py>, rows: Vec<Vec<String>>, provenance: &str) -> PyResult<Bound<'py, PyDict>> {
        let db = wpsmine::TransactionDb::from_keyed(&rows);
        let batch = DeltaBatch::renumbered(&db, self.inner.next_tid(), provenance);
        let r = self.inner.append_transactions(&batch).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("transactions_appended", r.transactions_appended)?;
        d.set_item("nodes_created", r.nodes_created)?;
        d.set_item("counts_incremented", r.counts_incremented)?;
        d.set_item("new_items", r.new_items)?;
        Ok(d)
    }

    fn reorder_rebuild(&self) -> PyResult<Index> {
        Ok(Index {
            inner: self.inner.reorder_rebuild().map_err(to_py)?,
        })
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        report_dict(py, &self.inner.stats_report())
    }

    fn io_stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        io_dict(py, &self.inner)
    }

    #[getter]
    fn n_nodes(&self) -> usize {
        self.inner.tree().n_nodes()
    }
}

/// Persisted index opened from a directory.
#[pyclass(module = "pywpsmine")]
struct IndexHandle {
    inner: wpsmine::IndexHandle,
}

#[pymethods]
impl IndexHandle {
    #[new]
    #[pyo3(signature = (path, writable=false))]
    fn open(path: PathBuf, writable: bool) -> PyResult<Self> {
        Ok(Self {
            inner: wpsmine::IndexHandle::open(path, writable).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (min_support, algorithm="fp"))]
    fn mine(&mut self, min_support: u64, algorithm: &str) -> PyResult<Itemsets> {
        mine_with(&mut self.inner, min_support, algorithm)
    }

    #[pyo3(signature = (item, normalized=false))]
    fn prefix_paths(&mut self, item: &str, normalized: bool) -> PyResult<Vec<Path>> {
        paths_of(&mut self.inner, item, normalized)
    }

    #[pyo3(signature = (rows, provenance="python"))]
    fn append(&mut self, rows: Vec<Vec<String>>, provenance: &str) -> PyResult<u64> {
        let db = wpsmine::TransactionDb::from_keyed(&rows);
        let next = self.inner.info().tid_max.map_or(1, |t| t + 1);
        let r = self
            .inner
            .append_transactions(&DeltaBatch::renumbered(&db, next, provenance))
            .map_err(to_py)?;
        Ok(r.transactions_appended)
    }

    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        report_dict(py, &self.inner.stats_report())
    }

    fn io_stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        io_dict(py, &self.inner)
    }

    fn reset_io(&mut self) {
        self.inner.reset_io();
    }

    #[getter]
    fn n_blocks(&self) -> u32 {
        self.inner.n_blocks()
    }
}

/// Exhaustive reference miner over `db`.
#[pyfunction]
fn oracle(db: &TransactionDb, min_support: u64) -> PyResult<Itemsets> {
    let found = oracle_bruteforce(&db.inner, min_support).map_err(to_py)?;
    let keyed = keyed_results(&found, db.inner.catalog());
    Ok(keyed.into_iter().collect())
}

/// `(antecedent, consequent, support, confidence)` tuples.
#[pyfunction]
fn rules(itemsets: Itemsets, min_confidence: f64) -> PyResult<Vec<Rule>> {
    let mut catalog = PageCatalog::new();
    let sets = itemsets_from_keys(&itemsets, &mut catalog);
    let keys = |v: &[wpsmine::ItemId]| v.iter().map(|&i| catalog.key(i).to_string()).collect::<Vec<_>>();
    Ok(generate_rules(&sets, min_confidence)
        .map_err(to_py)?
        .into_iter()
        .map(|r| (keys(&r.antecedent), keys(&r.consequent), r.support, r.confidence))
        .collect())
}

/// Synthetic rows keyed `"1".."n_items"`.
#[pyfunction]
#[pyo3(signature = (kind, n_transactions, n_items, avg_tr_size, seed=42))]
fn generate(kind: &str, n_transactions: usize, n_items: usize, avg_tr_size: f64, seed: u64) -> PyResult<Vec<Vec<String>>> {
    let kind: GenKind = kind.parse().map_err(to_py)?;
    let cfg = match kind {
        GenKind::Dense => GenConfig::dense(n_transactions, n_items, avg_tr_size, seed),
        GenKind::Sparse => GenConfig::sparse(n_transactions, n_items, avg_tr_size, seed),
    };
    Ok(generate_rows(&cfg)
        .map_err(to_py)?
        .into_iter()
        .map(|r| r.into_iter().map(|i| (i + 1).to_string()).collect())
        .collect())
}

/// The 13-session example dataset.
#[pyfunction]
fn example_rows() -> Vec<Vec<String>> {
    wpsmine::testdata::TABLE1
        .iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TransactionDb>()?;
    m.add_class::<Index>()?;
    m.add_class::<IndexHandle>()?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(rules, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(example_rows, m)?)?;
    Ok(())
}

#[pymodule]
fn pywpsmine(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
