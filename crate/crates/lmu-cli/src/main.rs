//! Command-line surface for the learned memory unit engine: CSV ingestion,
//! build/query/maintenance, synthetic data generation, and the benchmark
//! harness.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 training failure.
//! Result rows and reports go to standard output; timings go to standard
//! error so identical invocations produce byte-identical captures.

use std::collections::BTreeSet;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lmu_core::harness::{self, AccuracyPoint, BenchSpec, Distribution};
use lmu_core::secure::{self, CipherKey};
use lmu_core::table::AttrDef;
use lmu_core::{nn, persist, relops};
use lmu_core::{
    Error, Interval, Lmu, LmuConfig, ResultSet, Schema, SetOpKind, StorageMode, Table, Tuple, Value,
};

#[derive(Parser)]
#[command(name = "lmu", version, about = "Relational storage in trained neural classifiers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train a memory unit from a CSV table and write it to disk
    Build(BuildArgs),
    /// Run a relational operation against stored units
    Query(QueryArgs),
    /// Insert, delete, or update tuples in a stored unit
    Maintain(MaintainArgs),
    /// Generate a deterministic synthetic CSV table
    Datagen(DatagenArgs),
    /// Sweep classifier accuracy and capacity limits
    BenchCapacity(BenchCapacityArgs),
    /// Reproduce the four preliminary feasibility trials
    BenchTrials(BenchTrialsArgs),
}

#[derive(Args)]
struct BuildArgs {
    /// Input CSV: header row, first column the tuple id
    input: PathBuf,
    /// Output path for the trained unit
    #[arg(long)]
    out: PathBuf,
    /// Declared attribute domain as `MIN:MAX` (inclusive); inferred from the
    /// data when omitted
    #[arg(long, value_parser = parse_domain)]
    domain: Option<(i64, i64)>,
    /// Name of the id column
    #[arg(long, default_value = "id")]
    id_col: String,
    #[arg(long, default_value_t = 10)]
    fanout: usize,
    /// Hidden layer width
    #[arg(long, default_value_t = 64)]
    width: usize,
    /// Hidden layer count
    #[arg(long, default_value_t = 4)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1500)]
    max_epochs: usize,
    #[arg(long, default_value_t = 0.003)]
    learning_rate: f64,
    /// Shortcut for a small 24x2 architecture suited to small tables
    #[arg(long)]
    light: bool,
    /// Encrypt ids and values with the 64-hex-digit key in this file
    #[arg(long, value_name = "KEYFILE")]
    encrypt: Option<PathBuf>,
}

#[derive(Args)]
struct QueryArgs {
    /// Stored unit to query
    file: PathBuf,
    /// Key file for encrypted units (place before the operation name)
    #[arg(long, value_name = "KEYFILE")]
    encrypt: Option<PathBuf>,
    #[command(subcommand)]
    op: QueryOp,
}

#[derive(Subcommand)]
enum QueryOp {
    /// All live tuples in id order
    Scan,
    /// One tuple by id
    Get {
        #[arg(long)]
        id: u64,
    },
    /// Membership check by id or by full attribute vector
    Exists {
        #[arg(long)]
        id: Option<u64>,
        /// Full attribute vector as `V1,...,Vd`
        #[arg(long, conflicts_with = "id")]
        values: Option<String>,
    },
    /// Id plus the named attribute columns for every live tuple
    Project {
        #[arg(long, value_delimiter = ',')]
        attrs: Vec<String>,
    },
    /// Tuples with attribute equal to a constant
    SelectEq {
        #[arg(long)]
        attr: String,
        #[arg(long)]
        value: Value,
    },
    /// Tuples with attribute in an inclusive range; repeat --and for
    /// conjunctive predicates
    SelectRange {
        #[arg(long)]
        attr: String,
        #[arg(long)]
        min: Value,
        #[arg(long)]
        max: Value,
        /// Extra predicate `ATTR:MIN:MAX`
        #[arg(long = "and", value_parser = parse_pred)]
        and: Vec<(String, Value, Value)>,
    },
    /// Cartesian product with a second unit
    Product {
        #[arg(long)]
        with: PathBuf,
    },
    /// Equality join with a second unit on `LEFT=RIGHT`
    Join {
        #[arg(long)]
        with: PathBuf,
        #[arg(long, value_parser = parse_join_on)]
        on: (String, String),
    },
    /// Set union with a second unit of the same schema
    Union {
        #[arg(long)]
        with: PathBuf,
        /// Also store the result unit here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Set intersection with a second unit of the same schema
    Intersect {
        #[arg(long)]
        with: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Set difference with a second unit of the same schema
    Minus {
        #[arg(long)]
        with: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MaintainArgs {
    /// Stored unit to modify; replaced atomically on success
    file: PathBuf,
    /// Key file for encrypted units (place before the action name)
    #[arg(long, value_name = "KEYFILE")]
    encrypt: Option<PathBuf>,
    #[command(subcommand)]
    action: MaintainAction,
}

#[derive(Subcommand)]
enum MaintainAction {
    /// Insert rows given inline or from a CSV file with the same header
    Insert {
        /// Row as `ID,V1,...,Vd`; repeatable
        #[arg(long = "row", value_parser = parse_row)]
        rows: Vec<Vec<Value>>,
        #[arg(long)]
        from_csv: Option<PathBuf>,
    },
    /// Delete tuples by id
    Delete {
        #[arg(long = "id", required = true)]
        ids: Vec<u64>,
    },
    /// Replace one tuple's attribute values in place
    Update {
        #[arg(long)]
        id: u64,
        /// New attribute values as `V1,...,Vd`
        #[arg(long)]
        values: String,
    },
}

#[derive(Args)]
struct DatagenArgs {
    /// Number of tuples (ids 1..=N)
    #[arg(long)]
    n: usize,
    /// Number of attributes
    #[arg(long)]
    d: usize,
    /// Attribute domain as `MIN:MAX` (inclusive)
    #[arg(long, value_parser = parse_domain, default_value = "1:1000")]
    domain: (i64, i64),
    #[arg(long, value_enum, default_value_t = DistKind::Uniform)]
    dist: DistKind,
    /// Zipf exponent (used with --dist zipf)
    #[arg(long, default_value_t = 1.5)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistKind {
    Uniform,
    Zipf,
}

#[derive(Args)]
struct BenchCapacityArgs {
    #[arg(long, value_enum, default_value_t = BenchMode::Capacity)]
    mode: BenchMode,
    #[arg(long, default_value_t = 4)]
    input_dim: usize,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 4)]
    layers: usize,
    /// Output class counts to sweep
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    classes: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    step: usize,
    #[arg(long, default_value_t = 3000)]
    max_n: usize,
    #[arg(long, default_value_t = 1.0)]
    target: f64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 600)]
    max_epochs: usize,
    #[arg(long, default_value_t = 0.003)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Table sizes for accuracy mode; defaults to multiples of the step
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    /// Upper bound on parallel training jobs (runs sequentially today)
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the result CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchMode {
    /// Final accuracy of one flat classifier per table size
    Accuracy,
    /// Largest N holding the accuracy target, per class count
    Capacity,
}

#[derive(Args)]
struct BenchTrialsArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report CSV here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        if let Error::Io(io) = &err {
            // Downstream consumer (e.g. head) closed the pipe; not our error.
            if io.kind() == std::io::ErrorKind::BrokenPipe {
                return;
            }
        }
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_)
        | Error::InvalidInterval { .. }
        | Error::InvalidDimensions(_)
        | Error::UnknownAttribute(_)
        | Error::UnsupportedSecure(_)
        | Error::MultiPartMaintenance => 1,
        Error::TrainingFailure { .. } => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.cmd {
        Cmd::Build(args) => cmd_build(args),
        Cmd::Query(args) => cmd_query(args),
        Cmd::Maintain(args) => cmd_maintain(args),
        Cmd::Datagen(args) => cmd_datagen(args),
        Cmd::BenchCapacity(args) => cmd_bench_capacity(args),
        Cmd::BenchTrials(args) => cmd_bench_trials(args),
    }
}

// ---- argument parsers ----

fn parse_domain(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| "expected MIN:MAX".to_string())?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad integer {lo:?}"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad integer {hi:?}"))?;
    if lo > hi {
        return Err(format!("empty domain {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn parse_row(s: &str) -> Result<Vec<Value>, String> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("bad integer {v:?}")))
        .collect()
}

fn parse_pred(s: &str) -> Result<(String, Value, Value), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected ATTR:MIN:MAX".to_string());
    }
    let min = parts[1].trim().parse().map_err(|_| format!("bad integer {:?}", parts[1]))?;
    let max = parts[2].trim().parse().map_err(|_| format!("bad integer {:?}", parts[2]))?;
    Ok((parts[0].to_string(), min, max))
}

fn parse_join_on(s: &str) -> Result<(String, String), String> {
    let (l, r) = s
        .split_once('=')
        .ok_or_else(|| "expected LEFT=RIGHT".to_string())?;
    Ok((l.trim().to_string(), r.trim().to_string()))
}

// ---- CSV ingestion and emission ----

fn read_csv_table(
    path: &Path,
    id_col: &str,
    domain: Option<(i64, i64)>,
) -> Result<Table, Error> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() || &header[0] != id_col {
        return Err(Error::InvalidTable(format!(
            "first CSV column must be the id column {id_col:?}"
        )));
    }
    let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(Error::InvalidTable("CSV has no attribute columns".into()));
    }

    let mut tuples = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // 1-based, after the header
        let record = record.map_err(csv_error)?;
        if record.len() != names.len() + 1 {
            return Err(Error::InvalidTable(format!(
                "row {row}: expected {} fields, got {}",
                names.len() + 1,
                record.len()
            )));
        }
        let id: u64 = record[0]
            .parse()
            .map_err(|_| Error::InvalidTable(format!("row {row}: bad id {:?}", &record[0])))?;
        if !seen.insert(id) {
            return Err(Error::InvalidTable(format!("row {row}: duplicate id {id}")));
        }
        let values: Result<Vec<Value>, Error> = record
            .iter()
            .skip(1)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidTable(format!("row {row}: bad integer {v:?}")))
            })
            .collect();
        tuples.push(Tuple { id, values: values? });
    }
    if tuples.is_empty() {
        return Err(Error::InvalidTable("CSV has no data rows".into()));
    }

    let attrs: Result<Vec<AttrDef>, Error> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let (lo, hi) = match domain {
                Some(d) => d,
                None => {
                    let vals = tuples.iter().map(|t| t.values[j]);
                    (vals.clone().min().unwrap(), vals.max().unwrap())
                }
            };
            Ok(AttrDef {
                name: name.clone(),
                domain: Interval::new(lo as i128, hi as i128 + 1)?,
            })
        })
        .collect();
    Table::new(Schema::new(attrs?)?, tuples)
}

fn csv_error(err: csv::Error) -> Error {
    Error::InvalidTable(format!("CSV parse error: {err}"))
}

fn write_csv<W: std::io::Write>(
    out: &mut W,
    columns: &[String],
    rows: &[Vec<Value>],
) -> Result<(), Error> {
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

fn table_columns(schema: &Schema) -> Vec<String> {
    std::iter::once("id".to_string())
        .chain(schema.attrs.iter().map(|a| a.name.clone()))
        .collect()
}

fn tuples_to_rows(tuples: &[Tuple]) -> Vec<Vec<Value>> {
    tuples
        .iter()
        .map(|t| {
            std::iter::once(t.id as Value)
                .chain(t.values.iter().copied())
                .collect()
        })
        .collect()
}

// ---- key files ----

fn read_key(path: &Path) -> Result<CipherKey, Error> {
    let text = std::fs::read_to_string(path)?;
    let hex: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if hex.len() != 64 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(Error::InvalidParameter(format!(
            "key file {} must hold 64 hex digits (256-bit key)",
            path.display()
        )));
    }
    let mut bytes = [0u8; 32];
    for (i, b) in bytes.iter_mut().enumerate() {
        *b = u8::from_str_radix(&hex[2 * i..2 * i + 2], 16).unwrap();
    }
    Ok(CipherKey::new(&bytes))
}

fn require_key(lmu: &Lmu, key: &Option<CipherKey>) -> Result<(), Error> {
    match (lmu.mode, key) {
        (StorageMode::Encrypted, None) => Err(Error::InvalidParameter(
            "unit is encrypted; pass --encrypt KEYFILE".into(),
        )),
        (StorageMode::Plain, Some(_)) => Err(Error::InvalidParameter(
            "--encrypt given but the unit is plaintext".into(),
        )),
        _ => Ok(()),
    }
}

// ---- build ----

fn cmd_build(args: BuildArgs) -> Result<(), Error> {
    let table = read_csv_table(&args.input, &args.id_col, args.domain)?;
    let mut cfg = if args.light {
        LmuConfig::light(args.seed)
    } else {
        LmuConfig::default()
    };
    if !args.light {
        cfg.fanout = args.fanout;
        cfg.hidden_width = args.width;
        cfg.hidden_layers = args.layers;
        cfg.seed = args.seed;
    }
    cfg.train.max_epochs = args.max_epochs;
    cfg.train.learning_rate = args.learning_rate;

    let start = Instant::now();
    let epochs_before = nn::epochs_trained();
    let (lmu, log) = match &args.encrypt {
        Some(keyfile) => {
            let key = read_key(keyfile)?;
            (secure::build_secure_lmu(&table, &key, &cfg)?, None)
        }
        None => {
            let (lmu, log) = lmu_core::build_lmu_logged(&table, &cfg)?;
            (lmu, Some(log))
        }
    };
    let total_epochs = nn::epochs_trained() - epochs_before;
    persist::save(&lmu, &args.out)?;
    let elapsed = start.elapsed();

    let stats = lmu.stats();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "built {} from {}", args.out.display(), args.input.display())?;
    writeln!(out, "tuples: {}", table.len())?;
    writeln!(out, "attributes: {}", table.schema.arity())?;
    writeln!(out, "training accuracy: 100% on every tree (build contract)")?;
    if let Some(log) = log {
        for (j, (fwd, bundle)) in log.forward_epochs.iter().zip(&log.bundle_epochs).enumerate() {
            writeln!(
                out,
                "attribute {}: forward epochs {}, bundle epochs {}",
                table.schema.attrs[j].name, fwd, bundle
            )?;
        }
        writeln!(out, "inverse epochs: {}", log.inverse_epochs)?;
    }
    writeln!(out, "total epochs: {total_epochs}")?;
    writeln!(out, "parameters: {}", stats.total_params)?;
    writeln!(
        out,
        "space: {} bytes stored / {} bytes raw (ratio {:.2})",
        stats.serialized_bytes, stats.raw_table_bytes, stats.overhead_ratio
    )?;
    eprintln!("build time: {} ms", elapsed.as_millis());
    Ok(())
}

// ---- query ----

fn cmd_query(args: QueryArgs) -> Result<(), Error> {
    let lmu = persist::load(&args.file)?;
    let key = args.encrypt.as_deref().map(read_key).transpose()?;
    require_key(&lmu, &key)?;

    let start = Instant::now();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match args.op {
        QueryOp::Scan => {
            let tuples = match &key {
                Some(key) => secure::secure_scan(&lmu, key)?,
                None => lmu.seq_scan(),
            };
            write_csv(&mut out, &table_columns(lmu.schema()), &tuples_to_rows(&tuples))?;
        }
        QueryOp::Get { id } => {
            let tuple = match &key {
                Some(key) => {
                    let enc = key.encrypt_u64(id);
                    get_tuple(&lmu, enc).map(|t| Tuple {
                        id,
                        values: t.values.iter().map(|&v| key.decrypt_value(v)).collect(),
                    })
                }
                None => get_tuple(&lmu, id),
            };
            let tuple = tuple.ok_or(Error::UnknownId(id))?;
            write_csv(&mut out, &table_columns(lmu.schema()), &tuples_to_rows(&[tuple]))?;
        }
        QueryOp::Exists { id, values } => {
            let values = values
                .map(|s| parse_row(&s).map_err(Error::InvalidParameter))
                .transpose()?;
            let found = match (id, values, &key) {
                (Some(id), None, Some(key)) => secure::secure_exists_id(&lmu, key, id)?,
                (Some(id), None, None) => lmu.exists_id(id),
                (None, Some(values), Some(key)) => secure::secure_exists_attrs(&lmu, key, &values)?,
                (None, Some(values), None) => lmu.exists_attrs(&values)?,
                _ => {
                    return Err(Error::InvalidParameter(
                        "exists needs exactly one of --id or --values".into(),
                    ))
                }
            };
            writeln!(out, "{found}")?;
        }
        QueryOp::Project { attrs } => {
            let result = match &key {
                Some(key) => secure::secure_project(&lmu, key, &attrs)?,
                None => relops::project(&lmu, &attrs)?,
            };
            write_sorted(&mut out, &result)?;
        }
        QueryOp::SelectEq { attr, value } => {
            let result = match &key {
                Some(key) => secure::secure_select_eq(&lmu, key, &attr, value)?,
                None => relops::select_eq(&lmu, &attr, value)?,
            };
            write_sorted(&mut out, &result)?;
        }
        QueryOp::SelectRange { attr, min, max, and } => {
            let result = if and.is_empty() {
                relops::select_range(&lmu, &attr, min, max)?
            } else {
                let preds: Result<Vec<relops::Predicate>, Error> = std::iter::once((attr, min, max))
                    .chain(and)
                    .map(|(attr, min, max)| {
                        Ok(relops::Predicate {
                            attr: lmu.schema().attr_index(&attr)?,
                            kind: relops::PredicateKind::Range(min, max),
                        })
                    })
                    .collect();
                relops::select_range_multi(&lmu, &preds?)?
            };
            write_sorted(&mut out, &result)?;
        }
        QueryOp::Product { with } => {
            let other = load_plain(&with, &key)?;
            write_sorted(&mut out, &relops::cartesian(&lmu, &other)?)?;
        }
        QueryOp::Join { with, on } => {
            let other = load_plain(&with, &key)?;
            write_sorted(&mut out, &relops::join_eq(&lmu, &on.0, &other, &on.1)?)?;
        }
        QueryOp::Union { with, out: path } => run_set_op(&lmu, &with, &key, SetOpKind::Union, path, &mut out)?,
        QueryOp::Intersect { with, out: path } => {
            run_set_op(&lmu, &with, &key, SetOpKind::Intersect, path, &mut out)?
        }
        QueryOp::Minus { with, out: path } => {
            run_set_op(&lmu, &with, &key, SetOpKind::Difference, path, &mut out)?
        }
    }
    eprintln!("query time: {} ms", start.elapsed().as_millis());
    Ok(())
}

fn get_tuple(lmu: &Lmu, id: u64) -> Option<Tuple> {
    lmu.parts
        .iter()
        .find(|p| p.aux.live_ids.contains(&id))
        .map(|p| Tuple {
            id,
            values: p.recover(id),
        })
}

fn load_plain(path: &Path, key: &Option<CipherKey>) -> Result<Lmu, Error> {
    if key.is_some() {
        return Err(Error::UnsupportedSecure("multi-unit operators"));
    }
    let lmu = persist::load(path)?;
    require_key(&lmu, key)?;
    Ok(lmu)
}

fn run_set_op(
    lmu: &Lmu,
    with: &Path,
    key: &Option<CipherKey>,
    kind: SetOpKind,
    out_path: Option<PathBuf>,
    out: &mut impl std::io::Write,
) -> Result<(), Error> {
    let other = load_plain(with, key)?;
    let result = relops::set_op(lmu, &other, kind)?;
    let mut tuples = result.seq_scan();
    tuples.sort_unstable_by_key(|t| t.id);
    write_csv(out, &table_columns(result.schema()), &tuples_to_rows(&tuples))?;
    if let Some(path) = out_path {
        persist::save(&result, &path)?;
    }
    Ok(())
}

fn write_sorted(out: &mut impl std::io::Write, result: &ResultSet) -> Result<(), Error> {
    write_csv(out, &result.columns, &result.sorted_rows())
}

// ---- maintain ----

fn cmd_maintain(args: MaintainArgs) -> Result<(), Error> {
    let mut lmu = persist::load(&args.file)?;
    let key = args.encrypt.as_deref().map(read_key).transpose()?;
    require_key(&lmu, &key)?;
    let arity = lmu.schema().arity();

    let start = Instant::now();
    let before = lmu.live_len();
    match args.action {
        MaintainAction::Insert { rows, from_csv } => {
            let mut batch: Vec<Tuple> = Vec::new();
            for row in rows {
                if row.len() != arity + 1 {
                    return Err(Error::InvalidParameter(format!(
                        "--row needs {} fields (id plus {} values)",
                        arity + 1,
                        arity
                    )));
                }
                if row[0] < 0 {
                    return Err(Error::InvalidParameter(format!("bad id {}", row[0])));
                }
                batch.push(Tuple {
                    id: row[0] as u64,
                    values: row[1..].to_vec(),
                });
            }
            if let Some(path) = from_csv {
                let table = read_csv_table(&path, "id", None)?;
                if table.schema.arity() != arity {
                    return Err(Error::SchemaMismatch(format!(
                        "CSV has {} attributes, unit has {}",
                        table.schema.arity(),
                        arity
                    )));
                }
                batch.extend(table.tuples);
            }
            if batch.is_empty() {
                return Err(Error::InvalidParameter(
                    "insert needs --row or --from-csv".into(),
                ));
            }
            if let Some(key) = &key {
                for t in &mut batch {
                    t.id = key.encrypt_u64(t.id);
                    for v in &mut t.values {
                        *v = key.encrypt_value(*v);
                    }
                }
            }
            let n = batch.len();
            relops::insert_batch(&mut lmu, batch)?;
            println!("inserted {n} tuples");
        }
        MaintainAction::Delete { ids } => {
            for id in &ids {
                let stored = match &key {
                    Some(key) => key.encrypt_u64(*id),
                    None => *id,
                };
                relops::delete(&mut lmu, stored).map_err(|e| match e {
                    Error::UnknownId(_) => Error::UnknownId(*id),
                    other => other,
                })?;
            }
            println!("deleted {} tuples", ids.len());
        }
        MaintainAction::Update { id, values } => {
            let values = parse_row(&values).map_err(Error::InvalidParameter)?;
            if values.len() != arity {
                return Err(Error::InvalidParameter(format!(
                    "--values needs {arity} fields"
                )));
            }
            let (stored_id, stored_values) = match &key {
                Some(key) => (
                    key.encrypt_u64(id),
                    values.iter().map(|&v| key.encrypt_value(v)).collect(),
                ),
                None => (id, values),
            };
            relops::update(&mut lmu, stored_id, stored_values).map_err(|e| match e {
                Error::UnknownId(_) => Error::UnknownId(id),
                other => other,
            })?;
            println!("updated tuple {id}");
        }
    }
    persist::save(&lmu, &args.file)?;
    println!("live tuples: {} -> {}", before, lmu.live_len());
    eprintln!("maintain time: {} ms", start.elapsed().as_millis());
    Ok(())
}

// ---- datagen ----

fn cmd_datagen(args: DatagenArgs) -> Result<(), Error> {
    let (lo, hi) = args.domain;
    let domain = Interval::new(lo as i128, hi as i128 + 1)?;
    let dist = match args.dist {
        DistKind::Uniform => Distribution::Uniform,
        DistKind::Zipf => Distribution::Zipf(args.s),
    };
    let table = harness::generate_table(args.n, args.d, domain, dist, args.seed)?;
    let mut file = std::fs::File::create(&args.out)?;
    write_csv(
        &mut file,
        &table_columns(&table.schema),
        &tuples_to_rows(&table.tuples),
    )?;
    file.sync_all()?;
    println!(
        "wrote {} rows x {} attributes to {}",
        args.n,
        args.d,
        args.out.display()
    );
    Ok(())
}

// ---- benchmarks ----

fn cmd_bench_capacity(args: BenchCapacityArgs) -> Result<(), Error> {
    if args.jobs < 1 {
        return Err(Error::InvalidParameter("--jobs must be at least 1".into()));
    }
    let mut spec = BenchSpec {
        input_dim: args.input_dim,
        hidden_width: args.width,
        hidden_layers: args.layers,
        classes: args.classes.clone(),
        step: args.step,
        max_n: args.max_n,
        target_accuracy: args.target,
        repetitions: args.reps,
        seed: args.seed,
        ..BenchSpec::default()
    };
    spec.train.max_epochs = args.max_epochs;
    spec.train.learning_rate = args.learning_rate;
    spec.validate()?;

    let start = Instant::now();
    let mut csv = String::new();
    match args.mode {
        BenchMode::Accuracy => {
            let points = args.points.unwrap_or_else(|| {
                (1..=args.max_n / args.step).map(|i| i * args.step).collect()
            });
            csv.push_str("classes,n,accuracy\n");
            for &classes in &spec.classes {
                for AccuracyPoint { classes, n, accuracy } in
                    harness::accuracy_vs_n(&spec, classes, &points)?
                {
                    csv.push_str(&format!("{classes},{n},{accuracy:.4}\n"));
                }
            }
        }
        BenchMode::Capacity => {
            csv.push_str("classes,max_n\n");
            for result in harness::max_capacity(&spec)? {
                csv.push_str(&format!("{},{}\n", result.classes, result.max_n));
            }
        }
    }
    emit_report(&csv, args.out.as_deref())?;
    eprintln!("bench time: {} ms", start.elapsed().as_millis());
    Ok(())
}

fn cmd_bench_trials(args: BenchTrialsArgs) -> Result<(), Error> {
    let start = Instant::now();
    let outcomes = harness::run_trials(args.seed)?;
    let mut csv = String::from("panel,accuracy,description\n");
    for o in &outcomes {
        csv.push_str(&format!("{},{:.4},{}\n", o.panel, o.accuracy, o.description));
    }
    emit_report(&csv, args.out.as_deref())?;
    eprintln!("trials time: {} ms", start.elapsed().as_millis());
    Ok(())
}

fn emit_report(csv: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
