use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TABLE1: &str = "b h e p v d g
m h n d b e
l f o h e c p
a w e k h j
d b e h n
a r n u i b s
b g h d e p
a i b
f e i c h p
h a e b r t
r e h b a
z i a n r b
b d h p e
";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpsmine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Writes letter transactions as integer ids plus a `.labels` sidecar.
fn write_letters(path: &Path, text: &str) {
    let ids: String = text
        .lines()
        .map(|l| {
            let row: Vec<String> = l.split_whitespace().map(|k| (k.as_bytes()[0] - b'a').to_string()).collect();
            row.join(" ") + "\n"
        })
        .collect();
    fs::write(path, ids).unwrap();
    let labels: String = (b'a'..=b'z').map(|c| format!("{}\t{}\n", c - b'a', c as char)).collect();
    fs::write(format!("{}.labels", path.display()), labels).unwrap();
}

/// Itemset lines with items sorted, order-independent.
fn as_set(text: &str) -> std::collections::BTreeSet<String> {
    text.lines()
        .map(|l| {
            let (items, sup) = l.rsplit_once(' ').unwrap();
            let mut items: Vec<&str> = items.split(' ').collect();
            items.sort();
            format!("{} {sup}", items.join(" "))
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_mine_rules_stats() {
    let dir = tempfile::tempdir().unwrap();
    let tx = dir.path().join("table1.dat");
    write_letters(&tx, TABLE1);
    let ix = dir.path().join("ix");

    let built: serde_json::Value = serde_json::from_str(&ok(&["build", s(&tx), "-o", s(&ix)])).unwrap();
    assert_eq!(built["source_scans"], 1);
    assert_eq!(built["report"]["Transactions"], 13);
    assert_eq!(built["report"]["Dataset"], "table1");

    let sets = dir.path().join("sets.txt");
    ok(&["mine", s(&ix), "-s", "10", "-o", s(&sets)]);
    let text = fs::read_to_string(&sets).unwrap();
    assert_eq!(text, "b (10)\ne (10)\nh (10)\ne h (10)\n");
    let lw = ok(&["mine", s(&ix), "-s", "10", "-a", "levelwise"]);
    assert_eq!(lw, text);

    ok(&["mine", s(&ix), "-s", "5", "-o", s(&sets)]);
    let rules = ok(&["rules", s(&sets), "-c", "0.8"]);
    let mut lines = rules.lines();
    assert_eq!(lines.next(), Some("antecedent;consequent;support;confidence"));
    assert!(rules.contains("a;b;5;0.833333"), "{rules}");
    assert!(rules.contains("e;h;10;1.000000"), "{rules}");

    let stats: serde_json::Value = serde_json::from_str(&ok(&["stats", s(&ix)])).unwrap();
    assert_eq!(stats["source_scans"], 1);
    assert_eq!(stats["report"]["Dataset Items"], 23);
    let csv = ok(&["stats", s(&ix), "--format", "csv"]);
    assert!(csv.starts_with("Dataset,Transactions,Dataset Items,AvtrSz,Size(KB),"));
}

#[test]
fn access_modes() {
    let dir = tempfile::tempdir().unwrap();
    let tx = dir.path().join("t.dat");
    write_letters(&tx, TABLE1);
    let ix = dir.path().join("ix");
    ok(&["build", s(&tx), "-o", s(&ix)]);

    let paths = ok(&["access", s(&ix), "-i", "p"]);
    assert!(paths.contains("[p:3 -> d:5 -> h:7 -> e:7 -> b:10]\t[p:3 -> d:3 -> h:3 -> e:3 -> b:3]"), "{paths}");
    let scan = ok(&["access", s(&ix), "-i", "p", "-m", "scan"]);
    let mut a: Vec<&str> = paths.lines().collect();
    let mut b: Vec<&str> = scan.lines().collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);

    let proj = ok(&["access", s(&ix), "-m", "support", "-s", "10"]);
    assert!(proj.contains("b e h *7"), "{proj}");

    let out = run(&["access", s(&ix), "-i", "nope"]);
    assert!(!out.status.success());
}

#[test]
fn append_flat_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let head: String = TABLE1.lines().take(10).map(|l| format!("{l}\n")).collect();
    let tail: String = TABLE1.lines().skip(10).map(|l| format!("{l}\n")).collect();
    let (h, t, all) = (dir.path().join("h.dat"), dir.path().join("t.dat"), dir.path().join("all.dat"));
    write_letters(&h, &head);
    write_letters(&t, &tail);
    write_letters(&all, TABLE1);
    let (ix, full) = (dir.path().join("ix"), dir.path().join("full"));
    ok(&["build", s(&h), "-o", s(&ix)]);
    ok(&["build", s(&all), "-o", s(&full)]);

    let rep: serde_json::Value = serde_json::from_str(&ok(&["append", s(&ix), s(&t)])).unwrap();
    assert_eq!(rep["update"]["transactions_appended"], 3);
    assert_eq!(rep["index_source_scans"], 1);
    for sup in ["1", "3", "5", "7"] {
        assert_eq!(
            as_set(&ok(&["mine", s(&ix), "-s", sup])),
            as_set(&ok(&["mine", s(&full), "-s", sup])),
            "min_support {sup}"
        );
    }

    let log = dir.path().join("seg.log");
    fs::write(
        &log,
        "1.1.1.1 - - [10/Oct/2020:13:00:00 +0000] \"GET /x HTTP/1.0\" 200 1\n\
         1.1.1.1 - - [10/Oct/2020:15:00:00 +0000] \"GET /y HTTP/1.0\" 200 1\n",
    )
    .unwrap();
    let rep: serde_json::Value = serde_json::from_str(&ok(&["append", s(&ix), s(&log), "--log"])).unwrap();
    assert_eq!(rep["update"]["transactions_appended"], 1);
    assert_eq!(rep["held_back_sessions"], 1);
    assert_eq!(rep["update"]["new_items"], serde_json::json!(["/x"]));
}

#[test]
fn ingest_then_build_uses_labels() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("access.log");
    fs::write(
        &log,
        "1.1.1.1 - - [10/Oct/2020:13:00:00 +0000] \"GET /a.html HTTP/1.0\" 200 1\n\
         1.1.1.1 - - [10/Oct/2020:13:00:10 +0000] \"GET /b.html HTTP/1.0\" 200 1\n\
         2.2.2.2 - - [10/Oct/2020:13:00:20 +0000] \"GET /a.html HTTP/1.0\" 200 1\n\
         bad line\n",
    )
    .unwrap();
    let tx = dir.path().join("s.dat");
    let rep: serde_json::Value = serde_json::from_str(&ok(&["ingest", s(&log), "-o", s(&tx)])).unwrap();
    assert_eq!(rep["transactions"], 2);
    assert_eq!(rep["parse_errors"], 1);
    assert!(dir.path().join("s.dat.labels").is_file());
    let ix = dir.path().join("ix");
    ok(&["build", s(&tx), "-o", s(&ix)]);
    assert_eq!(ok(&["mine", s(&ix), "-s", "2"]), "/a.html (2)\n");
}

#[test]
fn gen_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let dense = dir.path().join("dense.dat");
    ok(&["gen", "dense", "-n", "1200", "--items", "38", "--avg-size", "7", "--seed", "42", "-o", s(&dense)]);
    let text = fs::read_to_string(&dense).unwrap();
    let lens: Vec<usize> = text.lines().map(|l| l.split_whitespace().count()).collect();
    assert_eq!(lens.len(), 1200);
    let mean = lens.iter().sum::<usize>() as f64 / lens.len() as f64;
    assert!((mean - 7.0).abs() <= 0.7, "{mean}");
    let again = dir.path().join("again.dat");
    ok(&["gen", "dense", "-n", "1200", "--items", "38", "--avg-size", "7", "--seed", "42", "-o", s(&again)]);
    assert_eq!(fs::read(&dense).unwrap(), fs::read(&again).unwrap());

    let sparse = dir.path().join("sparse.dat");
    ok(&["gen", "sparse", "-n", "1600", "--items", "1000", "--avg-size", "7.9", "-o", s(&sparse)]);
    let text = fs::read_to_string(&sparse).unwrap();
    let total: usize = text.lines().map(|l| l.split_whitespace().count()).sum();
    assert!((total as f64 / 1600.0 - 7.9).abs() <= 0.79);

    let empty = dir.path().join("empty.dat");
    ok(&["gen", "sparse", "-n", "0", "--items", "10", "--avg-size", "3", "-o", s(&empty)]);
    assert_eq!(fs::read_to_string(&empty).unwrap(), "");

    let ix = dir.path().join("ix");
    ok(&["build", s(&sparse), "-o", s(&ix)]);
    let rep: serde_json::Value =
        serde_json::from_str(&ok(&["bench", s(&ix), "--items", "1,2,3", "-s", "50,100"])).unwrap();
    for row in rep["items"].as_array().unwrap() {
        assert!(row["node_ratio"].as_f64().unwrap() >= 1.0);
    }
    assert_eq!(rep["mining"].as_array().unwrap().len(), 2);
}

#[test]
fn errors_exit_nonzero_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.dat");
    let out = run(&["build", s(&missing), "-o", s(&dir.path().join("ix"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.dat"));

    let bad = dir.path().join("bad.dat");
    fs::write(&bad, "1 2\n3 x\n").unwrap();
    let out = run(&["build", s(&bad), "-o", s(&dir.path().join("ix"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&["build", s(&bad), "-o", "x", "--block-size", "8"]);
    assert!(!out.status.success());
    assert!(!Path::new("x").exists());
    let out = run(&["mine", s(&bad), "-s", "0"]);
    assert!(!out.status.success());
}
