use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use steiner_core::analysis::{self, EstimateReport};
use steiner_core::configgen::{self, read_manifest, write_manifest, ConfigRecord, ManifestRow};
use steiner_core::design::Configuration;
use steiner_core::pipeline::{self, LedgerRow, PipelineOptions, StatsRow};
use steiner_core::Error;

mod checkpoint;

use checkpoint::Checkpoint;

#[derive(Parser)]
#[command(name = "steiner", version, about = "Steiner triple systems with a Fano subsystem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify (m, r) configurations and write one file per class plus a manifest.
    Configs(ConfigsArgs),
    /// Extend the configurations of a manifest shard to designs of order v.
    Pipeline(PipelineArgs),
    /// Mass check and aggregate tables over ledgers and stats files.
    Verify(VerifyArgs),
    /// Print the asymptotic estimates.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct ConfigsArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Keep the double-Fano configuration only as a commented manifest row.
    #[arg(long)]
    exclude_wilson: bool,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    v: usize,
    /// Manifest written by `configs`; configuration files sit next to it.
    #[arg(long)]
    manifest: PathBuf,
    /// `i/n`: process manifest indices congruent to i modulo n.
    #[arg(long, default_value = "0/1", value_parser = parse_shard)]
    shard: (usize, usize),
    /// Ledger CSV to create or resume.
    #[arg(long)]
    out: PathBuf,
    /// Per-configuration stats CSV; defaults to `<out>.stats.csv`.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Checkpoint file; defaults to `<out>.ckpt`.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Also write every accepted design into this directory.
    #[arg(long)]
    emit_designs: Option<PathBuf>,
    /// Stop each configuration after this many factorizations.
    #[arg(long)]
    factorization_cap: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    v: usize,
    #[arg(long, required = true)]
    ledger: Vec<PathBuf>,
    #[arg(long, required = true)]
    stats: Vec<PathBuf>,
    /// When given, every active manifest row must appear in the stats.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Classes of STS(21) with a sub-STS(7).
    #[arg(long, default_value_t = analysis::STS21_WITH_FANO)]
    count: u64,
    /// Kirkman systems of order 21 with a sub-STS(7).
    #[arg(long, default_value_t = analysis::KTS21_WITH_FANO)]
    kirkman: u64,
    /// Evaluate the Latin-square analogue at this n.
    #[arg(long, default_value_t = 10)]
    latin_f: u64,
}

fn parse_shard(s: &str) -> Result<(usize, usize), String> {
    let (i, n) = s.split_once('/').ok_or("expected i/n")?;
    let i: usize = i.parse().map_err(|e| format!("{e}"))?;
    let n: usize = n.parse().map_err(|e| format!("{e}"))?;
    if n == 0 || i >= n {
        return Err(format!("shard index {i} must be below the shard count {n}"));
    }
    Ok((i, n))
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Input(_) | Error::Parse { .. } => 1,
            Error::Consistency(_) | Error::Structural(_) | Error::Io(_) => 2,
            Error::Resource(_) => 3,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { code: 1, msg: msg.into() }
}

fn data(msg: impl Into<String>) -> Failure {
    Failure { code: 2, msg: msg.into() }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.msg);
        return ExitCode::from(f.code);
    }
    let result = match cli.command {
        Command::Configs(a) => cmd_configs(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Estimate(a) => cmd_estimate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("STEINER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| usage(format!("STEINER_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(usage("STEINER_THREADS must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("thread pool: {e}")))
}

fn config_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("config_{index:05}.txt"))
}

fn cmd_configs(a: ConfigsArgs) -> Result<(), Failure> {
    let records = configgen::classify_configurations(a.m, a.r)?;
    if records.is_empty() {
        return Err(usage(format!("no linear ({}, {}) configurations exist", a.m, a.r)));
    }
    fs::create_dir_all(&a.out)?;
    let manifest = a.out.join("manifest.csv");
    if manifest.exists() {
        return Err(usage(format!("{} already exists", manifest.display())));
    }
    let mut rows = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let mut f = BufWriter::new(File::create(config_path(&a.out, i))?);
        r.config.write_to(&mut f)?;
        f.flush()?;
        rows.push(ManifestRow::of(i, r, a.exclude_wilson && r.wilson_flag));
    }
    if a.exclude_wilson && !records.iter().any(|r| r.wilson_flag) {
        return Err(data("no double-Fano configuration to exclude"));
    }
    let mut f = BufWriter::new(File::create(&manifest)?);
    write_manifest(&mut f, &rows)?;
    f.flush()?;

    let non_wilson: Vec<ConfigRecord> = records.iter().filter(|r| !r.wilson_flag).cloned().collect();
    let summary = format!(
        "m={} r={}\nclasses={}\nactive={}\nunderlying_graph_classes_all={}\nunderlying_graph_classes_non_wilson={}\naut_order_distribution={}\n",
        a.m,
        a.r,
        records.len(),
        rows.iter().filter(|r| !r.excluded).count(),
        configgen::underlying_graph_classes(&records)?,
        configgen::underlying_graph_classes(&non_wilson)?,
        configgen::aut_order_distribution(&records),
    );
    fs::write(a.out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Output of one configuration, committed to disk as a unit.
struct Processed {
    index: usize,
    ledger: Vec<LedgerRow>,
    designs: Vec<String>,
    stats: StatsRow,
}

fn process(dir: &Path, row: &ManifestRow, v: usize, opts: PipelineOptions) -> Result<Processed, Failure> {
    let path = config_path(dir, row.index);
    let config = Configuration::read_from(BufReader::new(File::open(&path)?))?;
    let record = configgen::record_for(config)?;
    if record.canonical_hex() != row.canonical_hex {
        return Err(data(format!("{} does not match its manifest row", path.display())));
    }
    let mut ledger = Vec::new();
    let mut designs = Vec::new();
    let stats = pipeline::run_pipeline(&record, v, opts, |d| {
        ledger.push(LedgerRow {
            config_index: row.index,
            design_seq: ledger.len() as u64,
            aut_order: d.aut_order,
            u: d.u,
            i1: d.i1,
            i3: d.i3,
            canonical_hex: d.canonical_hex.clone(),
        });
        designs.push(d.design.to_text());
        Ok(())
    })?;
    Ok(Processed {
        index: row.index,
        stats: StatsRow {
            config_index: row.index,
            aut_order: record.aut.order(),
            factorizations: stats.factorizations,
            complete: stats.complete,
            designs: ledger.len() as u64,
        },
        ledger,
        designs,
    })
}

fn cmd_pipeline(a: PipelineArgs) -> Result<(), Failure> {
    if ![15, 19, 21].contains(&a.v) {
        return Err(usage(format!("order must be 15, 19 or 21, got {}", a.v)));
    }
    let stats_path = a.stats.clone().unwrap_or_else(|| with_suffix(&a.out, ".stats.csv"));
    let ckpt_path = a.checkpoint.clone().unwrap_or_else(|| with_suffix(&a.out, ".ckpt"));
    let paths = [&a.manifest, &a.out, &stats_path, &ckpt_path];
    for (i, p) in paths.iter().enumerate() {
        if paths[i + 1..].contains(p) {
            return Err(usage(format!("{} is used twice", p.display())));
        }
    }
    let dir = a.manifest.parent().map(Path::to_path_buf).unwrap_or_default();
    let manifest = read_manifest(BufReader::new(File::open(&a.manifest)?))?;
    let (shard, total) = a.shard;
    let todo: Vec<&ManifestRow> = manifest
        .iter()
        .filter(|r| !r.excluded && r.index % total == shard)
        .collect();

    let mut ckpt = Checkpoint::open(&ckpt_path, shard, total, a.v, &a.out, &stats_path)?;
    let remaining: Vec<&ManifestRow> = todo
        .into_iter()
        .filter(|r| ckpt.last.is_none_or(|last| r.index > last))
        .collect();
    if let Some(d) = &a.emit_designs {
        fs::create_dir_all(d)?;
    }
    let opts = PipelineOptions {
        factorization_cap: a.factorization_cap,
    };
    let batch = rayon::current_num_threads().max(1);
    for chunk in remaining.chunks(batch) {
        let results: Vec<Result<Processed, Failure>> =
            chunk.par_iter().map(|row| process(&dir, row, a.v, opts)).collect();
        for res in results {
            let p = res?;
            if let Some(d) = &a.emit_designs {
                for (seq, text) in p.designs.iter().enumerate() {
                    fs::write(d.join(format!("c{:05}_d{seq:06}.sts", p.index)), text)?;
                }
            }
            let ledger_text: String = p.ledger.iter().map(|r| r.to_csv() + "\n").collect();
            append(&a.out, &ledger_text)?;
            append(&stats_path, &(p.stats.to_csv() + "\n"))?;
            ckpt.commit(p.index, &a.out, &stats_path)?;
            eprintln!(
                "config {}: {} factorizations{}, {} designs",
                p.index,
                p.stats.factorizations,
                if p.stats.complete { "" } else { " (capped)" },
                p.stats.designs
            );
        }
    }
    Ok(())
}

fn append(path: &Path, text: &str) -> Result<(), Failure> {
    let mut f = OpenOptions::new().append(true).open(path)?;
    f.write_all(text.as_bytes())?;
    f.sync_data()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let mut ledger = Vec::new();
    for p in &a.ledger {
        ledger.extend(pipeline::read_ledger(BufReader::new(File::open(p)?))?);
    }
    let mut stats = Vec::new();
    for p in &a.stats {
        stats.extend(pipeline::read_stats(BufReader::new(File::open(p)?))?);
    }
    let mut complete = stats.iter().all(|s| s.complete);
    if let Some(m) = &a.manifest {
        let rows = read_manifest(BufReader::new(File::open(m)?))?;
        let seen: std::collections::HashSet<usize> = stats.iter().map(|s| s.config_index).collect();
        complete &= rows.iter().filter(|r| !r.excluded).all(|r| seen.contains(&r.index));
    }
    let mass = analysis::mass_check(&ledger, &stats, a.v)?;
    let complete = complete && mass.complete;
    println!("designs = {}", ledger.len());
    println!("lhs = {}", mass.lhs);
    println!("rhs = {}", mass.rhs);
    let (rows, marginal) = analysis::aggregate_results(&ledger);
    println!("O,U,I1,I3,count");
    for r in &rows {
        println!("{},{},{},{},{}", r.aut_order, r.u, r.i1, r.i3, r.count);
    }
    println!("O,count");
    for (o, c) in &marginal {
        println!("{o},{c}");
    }
    if !complete {
        println!("scope is partial; no equality claim");
        return Ok(());
    }
    println!("lhs == rhs: {}", mass.equal);
    if !mass.equal {
        return Err(data("mass check failed"));
    }
    Ok(())
}

fn cmd_estimate(a: EstimateArgs) -> Result<(), Failure> {
    let report = EstimateReport {
        n_labelled_fano: analysis::labelled_subsystems(7)?,
        n_labelled_sts9: analysis::labelled_subsystems(9)?,
        alpha: analysis::alpha(),
        mu: vec![
            (19, 7, analysis::mu(19, 7)?),
            (21, 7, analysis::mu(21, 7)?),
            (1_000_000, 7, analysis::mu(1_000_000, 7)?),
            (21, 9, analysis::mu(21, 9)?),
        ],
        estimates: vec![
            ("sts21".into(), a.count as f64, analysis::estimate_total(a.count as f64)),
            ("kirkman21".into(), a.kirkman as f64, analysis::estimate_total(a.kirkman as f64)),
        ],
        ratios: vec![(
            "sts19".into(),
            analysis::STS19_WITH_FANO as f64,
            analysis::STS19_TOTAL as f64,
            analysis::ratio(analysis::STS19_WITH_FANO as f64, analysis::STS19_TOTAL as f64),
        )],
        latin: vec![(a.latin_f, analysis::latin_f(a.latin_f)?)],
    };
    print!("{}", report.render());
    Ok(())
}
