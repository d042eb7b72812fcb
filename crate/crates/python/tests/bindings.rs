use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run(code: &str) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "pywpsmine").unwrap();
        pywpsmine::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("wm", m).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn mine_and_paths() {
    run(r#"
db = wm.TransactionDb.from_rows(wm.example_rows())
ix = wm.Index(db)
got = {tuple(sorted(k)): s for k, s in ix.mine(10)}
assert got == {("b",): 10, ("e",): 10, ("h",): 10, ("e", "h"): 10}, got
assert [("p", 3), ("d", 5), ("h", 7), ("e", 7), ("b", 10)] in ix.prefix_paths("p")
assert sum(c for _, c in ix.lookup_occurrences("h")) == ix.support("h") == 10
assert ix.stats()["Dataset Items"] == 23
"#);
}

#[test]
fn errors_become_exceptions() {
    run(r#"
ix = wm.Index(wm.TransactionDb.from_rows([["a", "b"]]))
for bad in (lambda: ix.mine(0), lambda: ix.mine(1, "lcm"), lambda: wm.Index(wm.TransactionDb.from_rows([["a"]]), block_size=4)):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
try:
    ix.prefix_paths("zzz")
except KeyError:
    pass
else:
    raise AssertionError("expected KeyError")
try:
    wm.IndexHandle("/nonexistent/index")
except OSError:
    pass
else:
    raise AssertionError("expected OSError")
"#);
}

#[test]
fn append_and_rebuild() {
    run(r#"
rows = wm.example_rows()
ix = wm.Index(wm.TransactionDb.from_rows(rows[:10]))
rep = ix.append(rows[10:])
assert rep["transactions_appended"] == 3
full = wm.Index(wm.TransactionDb.from_rows(rows))
norm = lambda r: sorted((tuple(sorted(k)), s) for k, s in r)
for s in range(1, 14):
    assert norm(ix.mine(s)) == norm(full.mine(s)), s
assert ix.io_stats()["source_scans"] == 1
assert ix.reorder_rebuild().n_nodes == full.n_nodes
"#);
}
