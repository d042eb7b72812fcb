use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpsmine::bench::run_bench;
use wpsmine::incremental::DeltaBatch;
use wpsmine::ingestion::{
    ingest_log_file, ingest_log_segment_file, load_transactions_labeled, read_labels, write_labels,
    write_transactions,
};
use wpsmine::mining::{itemsets_from_keys, read_itemsets, write_itemsets, write_rules_csv};
use wpsmine::synth::{generate, GenConfig, GenKind};
use wpsmine::{
    generate_rules, item_projection, mine_fp, mine_levelwise, normalize_path, open_index, prefix_paths,
    scan_prefix_paths, support_projection, IndexHandle, IndexStatsReport, LayerThresholds, PageCatalog,
    SessionConfig, StorageConfig, TransactionDb, TreeAccess, WpsIndex,
};

macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(io::stdout().lock(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(name = "wpsmine", version, about = "Frequent web page set mining over a persistent prefix-tree index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sessionize a Common Log Format file into a transaction file.
    Ingest(IngestArgs),
    /// Build an index directory from a transaction file.
    Build(BuildArgs),
    /// Mine frequent itemsets from an index.
    Mine(MineArgs),
    /// Derive association rules from an itemset file.
    Rules(RulesArgs),
    /// Read prefix paths or projections of an index.
    Access(AccessArgs),
    /// Append transactions (or completed log sessions) to an index.
    Append(AppendArgs),
    /// Print index statistics, layer histogram and update counters.
    Stats(StatsArgs),
    /// Generate a synthetic transaction file.
    ///
    /// dense: a few shuffled item templates; each transaction takes a
    /// template prefix and swaps items for random ones with probability
    /// --noise, so transactions share long prefixes.
    /// sparse: items drawn from a Zipf law (--zipf-exponent) over the
    /// whole universe, so transactions share little.
    /// Lengths are 1 + Poisson(avg-size - 1), capped at the item count.
    Gen(GenArgs),
    /// Compare hash-index access with a full tree scan and time mining.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Fp,
    Levelwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum AccessMode {
    /// Prefix paths of the item found through the hash index.
    Paths,
    /// The same paths by a full tree scan.
    Scan,
    /// Every transaction containing the item.
    Item,
    /// All transactions restricted to items with support >= --min-support.
    Support,
}

#[derive(Args)]
struct SessionArgs {
    /// Largest gap between two requests of one session, in seconds.
    #[arg(long, default_value_t = 1800)]
    session_threshold: u64,
    #[arg(long, default_value_t = 200)]
    min_status: u16,
    #[arg(long, default_value_t = 399)]
    max_status: u16,
}

impl SessionArgs {
    fn config(&self) -> Result<SessionConfig> {
        let cfg = SessionConfig {
            session_threshold: self.session_threshold,
            min_status: self.min_status,
            max_status: self.max_status,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct IngestArgs {
    log: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Where to write the item label file (default: <output>.labels).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    session: SessionArgs,
}

#[derive(Args)]
struct StorageArgs {
    #[arg(long, default_value_t = 4096)]
    block_size: u32,
    #[arg(long, default_value_t = wpsmine::index::DEFAULT_BUCKETS)]
    n_buckets: usize,
    /// Parent/child count ratio above which an oversized subtree gets its own block.
    #[arg(long, default_value_t = 1.2)]
    k_avg: f64,
    /// Minimum relative support for an item to be indexed (0 keeps all).
    #[arg(long, default_value_t = 0.0)]
    k_sup: f64,
    #[arg(long, requires = "layer_low")]
    layer_high: Option<u64>,
    #[arg(long, requires = "layer_high")]
    layer_low: Option<u64>,
}

impl StorageArgs {
    fn config(&self) -> Result<StorageConfig> {
        let layers = match (self.layer_high, self.layer_low) {
            (Some(h), Some(l)) => Some(LayerThresholds::new(h, l)?),
            _ => None,
        };
        let cfg = StorageConfig {
            block_size: self.block_size,
            k_avg: self.k_avg,
            k_sup: self.k_sup,
            n_buckets: self.n_buckets,
            layers,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BuildArgs {
    transactions: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Item label file mapping ids in the transaction file to page keys.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Dataset name for the stats report (default: file stem).
    #[arg(long)]
    name: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    storage: StorageArgs,
}

#[derive(Args)]
struct MineArgs {
    index: PathBuf,
    #[arg(short = 's', long)]
    min_support: u64,
    #[arg(short, long, value_enum, default_value_t = Algorithm::Fp)]
    algorithm: Algorithm,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RulesArgs {
    itemsets: PathBuf,
    #[arg(short = 'c', long)]
    min_confidence: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AccessArgs {
    index: PathBuf,
    #[arg(short, long, value_enum, default_value_t = AccessMode::Paths)]
    mode: AccessMode,
    /// Item key (required for paths, scan and item).
    #[arg(short, long)]
    item: Option<String>,
    #[arg(short = 's', long, default_value_t = 1)]
    min_support: u64,
}

#[derive(Args)]
struct AppendArgs {
    index: PathBuf,
    input: PathBuf,
    /// Treat the input as a Common Log Format segment.
    #[arg(long)]
    log: bool,
    /// With --log: append every session, including ones that may still grow.
    #[arg(long, requires = "log")]
    final_segment: bool,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Keep the input's transaction ids instead of numbering after the index.
    #[arg(long)]
    keep_tids: bool,
    #[arg(long)]
    provenance: Option<String>,
    #[command(flatten)]
    session: SessionArgs,
}

#[derive(Args)]
struct StatsArgs {
    index: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: KindArg,
    #[arg(short = 'n', long)]
    transactions: usize,
    #[arg(long)]
    items: usize,
    #[arg(long)]
    avg_size: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    templates: usize,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 1.0)]
    zipf_exponent: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Dense,
    Sparse,
}

#[derive(Args)]
struct BenchArgs {
    index: PathBuf,
    /// Item keys to query (default: every indexed item).
    #[arg(long, value_delimiter = ',')]
    items: Vec<String>,
    /// Supports at which to time mining.
    #[arg(short = 's', long, value_delimiter = ',')]
    min_support: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_report(report: &IndexStatsReport, format: Format) -> Result<()> {
    match format {
        Format::Json => outln!("{}", report.to_json()),
        Format::Csv => IndexStatsReport::write_csv(std::slice::from_ref(report), io::stdout().lock())?,
    }
    Ok(())
}

/// Reads a transaction file, using `<path>.labels` when no label file is
/// given and one exists next to it.
fn load_db(path: &Path, labels: Option<&Path>) -> Result<TransactionDb> {
    let sidecar = {
        let mut p = path.to_path_buf().into_os_string();
        p.push(".labels");
        PathBuf::from(p)
    };
    let labels = match labels {
        Some(p) => Some(read_labels(p)?),
        None if sidecar.is_file() => Some(read_labels(&sidecar)?),
        None => None,
    };
    Ok(load_transactions_labeled(path, labels.as_ref())?)
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let cfg = args.session.config()?;
    let (db, report) = ingest_log_file(&args.log, cfg)?;
    write_transactions(&db, create(&args.output)?)?;
    let labels = args.labels.unwrap_or_else(|| {
        let mut p = args.output.clone().into_os_string();
        p.push(".labels");
        p.into()
    });
    write_labels(db.catalog(), create(&labels)?)?;
    outln!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let cfg = args.storage.config()?;
    let db = load_db(&args.transactions, args.labels.as_deref())?;
    let mut index = WpsIndex::build(&db, &cfg)?;
    let name = args.name.unwrap_or_else(|| {
        args.transactions
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    index.set_dataset_name(name);
    let io = index.save(&args.output)?;
    log::info!(
        "source scans: {}, blocks written: {}",
        index.io_stats().source_scans,
        io.blocks_written
    );
    match args.format {
        Format::Json => outln!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "report": index.stats_report(),
                "source_scans": index.io_stats().source_scans,
                "blocks_written": io.blocks_written,
            }))?
        ),
        Format::Csv => print_report(&index.stats_report(), Format::Csv)?,
    }
    Ok(())
}

fn cmd_mine(args: MineArgs) -> Result<()> {
    if args.min_support == 0 {
        bail!("--min-support must be at least 1");
    }
    let mut handle = open_index(&args.index)?;
    let found = match args.algorithm {
        Algorithm::Fp => mine_fp(&mut handle, args.min_support)?,
        Algorithm::Levelwise => mine_levelwise(&mut handle, args.min_support)?,
    };
    write_itemsets(&found, handle.catalog(), output(args.output.as_deref())?)?;
    let io = handle.io_stats();
    log::info!(
        "{} itemsets, {} nodes read, {} blocks read",
        found.len(),
        io.nodes_read,
        io.blocks_read
    );
    Ok(())
}

fn cmd_rules(args: RulesArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&args.min_confidence) {
        bail!("--min-confidence must lie in [0, 1]");
    }
    let file = File::open(&args.itemsets).with_context(|| format!("cannot open {}", args.itemsets.display()))?;
    let rows = read_itemsets(BufReader::new(file)).with_context(|| format!("in {}", args.itemsets.display()))?;
    let mut catalog = PageCatalog::new();
    let sets = itemsets_from_keys(&rows, &mut catalog);
    let rules = generate_rules(&sets, args.min_confidence)?;
    write_rules_csv(&rules, &catalog, output(args.output.as_deref())?)?;
    Ok(())
}

fn cmd_access(args: AccessArgs) -> Result<()> {
    let mut handle = open_index(&args.index)?;
    let item = match (&args.item, args.mode) {
        (_, AccessMode::Support) => None,
        (Some(key), _) => Some(
            handle
                .catalog()
                .id(key)
                .with_context(|| format!("item {key:?} is not in the index"))?,
        ),
        (None, _) => bail!("--item is required for this mode"),
    };
    let mut out = io::stdout().lock();
    match (args.mode, item) {
        (AccessMode::Paths | AccessMode::Scan, Some(item)) => {
            let paths = if matches!(args.mode, AccessMode::Paths) {
                prefix_paths(&mut handle, item)?
            } else {
                scan_prefix_paths(&mut handle, item)?
            };
            for p in &paths {
                writeln!(
                    out,
                    "{}\t{}",
                    p.display(handle.catalog()),
                    normalize_path(p).display(handle.catalog())
                )?;
            }
        }
        (AccessMode::Item, Some(item)) => item_projection(&mut handle, item)?.write_flat(handle.catalog(), &mut out)?,
        (AccessMode::Support, _) => {
            support_projection(&mut handle, args.min_support)?.write_flat(handle.catalog(), &mut out)?
        }
        _ => unreachable!("item resolved above"),
    }
    let io = TreeAccess::io_stats(&handle);
    eprintln!("nodes_read={} blocks_read={}", io.nodes_read, io.blocks_read);
    Ok(())
}

fn cmd_append(args: AppendArgs) -> Result<()> {
    let cfg = args.session.config()?;
    let mut handle = IndexHandle::open(&args.index, true)?;
    let (db, held_back) = if args.log {
        let (db, report) = if args.final_segment {
            ingest_log_file(&args.input, cfg)?
        } else {
            ingest_log_segment_file(&args.input, cfg)?
        };
        (db, report.held_back)
    } else {
        (load_db(&args.input, args.labels.as_deref())?, 0)
    };
    let provenance = args
        .provenance
        .unwrap_or_else(|| args.input.display().to_string());
    let batch = if args.keep_tids {
        DeltaBatch::from_db(&db, provenance)
    } else {
        let next = handle.info().tid_max.map_or(1, |t| t + 1);
        DeltaBatch::renumbered(&db, next, provenance)
    };
    let report = handle.append_transactions(&batch)?;
    outln!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "update": report,
            "held_back_sessions": held_back,
            "index_source_scans": handle.io_stats().source_scans,
        }))?
    );
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let mut handle = open_index(&args.index)?;
    let report = handle.stats_report();
    if let Format::Csv = args.format {
        return print_report(&report, Format::Csv);
    }
    let thresholds = handle.layer_thresholds();
    let index = handle.load_index()?;
    let [excellent, medium, weak] = index.layers().histogram();
    outln!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "report": report,
            "layers": {
                "high": thresholds.high,
                "low": thresholds.low,
                "excellent": excellent,
                "medium": medium,
                "weak": weak,
            },
            "nodes": index.tree().n_nodes(),
            "count_updates": index.tree().n_count_updates(),
            "blocks": handle.n_blocks(),
            "block_size": handle.config().block_size,
            "source_scans": handle.io_stats().source_scans,
        }))?
    );
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let kind = match args.kind {
        KindArg::Dense => GenKind::Dense,
        KindArg::Sparse => GenKind::Sparse,
    };
    let cfg = GenConfig {
        kind,
        n_transactions: args.transactions,
        n_items: args.items,
        avg_tr_size: args.avg_size,
        seed: args.seed,
        n_templates: args.templates,
        noise: args.noise,
        zipf_exponent: args.zipf_exponent,
    };
    cfg.validate()?;
    let db = generate(&cfg)?;
    write_transactions(&db, create(&args.output)?)?;
    log::info!(
        "{} transactions, {} items, AvgTrSz {:.3}",
        db.len(),
        db.n_items(),
        db.avg_transaction_size()
    );
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    if args.min_support.contains(&0) {
        bail!("--min-support values must be at least 1");
    }
    let mut handle = open_index(&args.index)?;
    let items = args
        .items
        .iter()
        .map(|k| {
            handle
                .catalog()
                .id(k)
                .with_context(|| format!("item {k:?} is not in the index"))
        })
        .collect::<Result<Vec<_>>>()?;
    let report = run_bench(&mut handle, &items, &args.min_support)?;
    match args.format {
        Format::Json => outln!("{}", serde_json::to_string_pretty(&report)?),
        Format::Csv => {
            report.write_items_csv(io::stdout().lock())?;
            if !report.mining.is_empty() {
                outln!();
                report.write_mining_csv(io::stdout().lock())?;
            }
        }
    }
    Ok(())
}

fn broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Err(e) if broken_pipe(&e) => Ok(()),
        other => other,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Build(a) => cmd_build(a),
        Command::Mine(a) => cmd_mine(a),
        Command::Rules(a) => cmd_rules(a),
        Command::Access(a) => cmd_access(a),
        Command::Append(a) => cmd_append(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    }
}
