//! Command-line driver: run the algorithms on generated or loaded graphs,
//! check them against the oracles and print metric reports.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clique_sim::algo::{run_algorithm, AlgoParams, Algorithm, RunRecord};
use clique_sim::engine::{EngineError, RunOptions};
use clique_sim::graph::{generate, GeneratorSpec, Graph};
use rayon::prelude::*;
use serde::Serialize;

const EXIT_INCORRECT: u8 = 1;
const EXIT_ENGINE: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "clique-sim", version, about = "Range-limited congested clique simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one graph for one or more seeds.
    Run(RunArgs),
    /// Run one algorithm over a range of sizes.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// boruvka-msf, broadcast-cc, msf-rcast2, msf-capopt, cc-logstar or cc-capopt.
    #[arg(long, value_parser = parse_algo)]
    algo: Algorithm,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list such as `1,2,5` or range `0..100`.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    /// Degree threshold of broadcast-cc.
    #[arg(long)]
    s: Option<usize>,
    /// Bandwidth multiplier of broadcast-cc.
    #[arg(long)]
    d: Option<usize>,
    /// Override the model range.
    #[arg(long)]
    r: Option<usize>,
    /// Override the model bandwidth in bits.
    #[arg(long)]
    b: Option<usize>,
    /// Attach each run's phase records (json-lines only).
    #[arg(long)]
    phase_log: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Edge-list file: a header `n m`, then `u v w` per edge.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    graph: Option<std::path::PathBuf>,
    /// Generator such as `gnp(1024,8/n)` or `path(64):unweighted`.
    #[arg(long)]
    gen: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Generator with the literal argument `n` standing for the size, e.g. `gnp(n,8/n)`.
    #[arg(long)]
    gen: String,
    /// Sizes `2^a ..= 2^b`, written `a..b`.
    #[arg(long, value_parser = parse_range, conflicts_with = "n")]
    log_n: Option<(u32, u32)>,
    /// Explicit sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    JsonLines,
    Csv,
}

#[derive(Clone, Debug)]
struct SeedList(Vec<u64>);

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
    Ok((a, b))
}

fn parse_seeds(s: &str) -> Result<SeedList, String> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        let b: u64 = b.trim().parse().map_err(|_| format!("bad seed range {s:?}"))?;
        return Ok(SeedList((a..b).collect()));
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad seed {t:?}")))
        .collect::<Result<_, _>>()
        .map(SeedList)
}

/// How a failed command should end.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, msg: msg.into() }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::Config(_)) { EXIT_USAGE } else { EXIT_ENGINE };
        Failure { code, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

impl Common {
    fn seeds(&self) -> Vec<u64> {
        match (&self.seeds, self.seed) {
            (Some(list), _) => list.0.clone(),
            (None, Some(s)) => vec![s],
            (None, None) => vec![0],
        }
    }

    fn params(&self) -> AlgoParams {
        AlgoParams { s: self.s, d: self.d }
    }

    fn options(&self) -> RunOptions {
        RunOptions { range: self.r, bandwidth: self.b, ..Default::default() }
    }

    fn warn_overrides(&self) {
        let algo = self.algo;
        if let Some(r) = self.r.filter(|&r| r != algo.range()) {
            eprintln!("warning: {algo} is built for range {}, running with --r {r}", algo.range());
        }
        if let Some(b) = self.b {
            eprintln!("warning: {algo} picks its own bandwidth, running with --b {b}");
        }
        if self.phase_log && self.format != Format::JsonLines {
            eprintln!("warning: --phase-log is only printed with --format json-lines");
        }
    }
}

#[derive(Serialize)]
struct Line<'a> {
    #[serde(flatten)]
    record: &'a RunRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_log: Option<&'a serde_json::Value>,
}

struct Outcome {
    record: RunRecord,
    phase_log: serde_json::Value,
}

fn execute(common: &Common, jobs: Vec<(Arc<Graph>, u64)>) -> Result<Vec<Outcome>, Failure> {
    let (algo, params, opts) = (common.algo, common.params(), common.options());
    jobs.into_par_iter()
        .map(|(g, seed)| {
            let run = run_algorithm(algo, &g, seed, params, &opts)?;
            Ok(Outcome { record: run.record, phase_log: run.phase_log })
        })
        .collect()
}

fn report(common: &Common, outcomes: &[Outcome], out: &mut impl Write) -> io::Result<()> {
    let records: Vec<&RunRecord> = outcomes.iter().map(|o| &o.record).collect();
    match common.format {
        Format::JsonLines => {
            for o in outcomes {
                let line = Line { record: &o.record, phase_log: common.phase_log.then_some(&o.phase_log) };
                writeln!(out, "{}", serde_json::to_string(&line).expect("records serialize"))?;
            }
        }
        Format::Csv => write_csv(&records, out)?,
        Format::Table => write_table(&records, out)?,
    }
    Ok(())
}

fn finish(outcomes: &[Outcome]) -> u8 {
    let mut code = 0;
    for o in outcomes.iter().filter(|o| !o.record.correct) {
        let r = &o.record;
        eprintln!("incorrect: {} n={} seed={}: {}", r.algorithm, r.n, r.seed, r.mismatch.as_deref().unwrap_or("?"));
        code = EXIT_INCORRECT;
    }
    code
}

fn cmd_run(args: RunArgs) -> Result<u8, Failure> {
    let common = &args.common;
    common.warn_overrides();
    let seeds = common.seeds();
    let jobs: Vec<(Arc<Graph>, u64)> = match (&args.graph, &args.gen) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            let g = Arc::new(Graph::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?);
            seeds.iter().map(|&s| (g.clone(), s)).collect()
        }
        (None, Some(desc)) => {
            let spec: GeneratorSpec = desc.parse().map_err(|e| Failure::usage(format!("{e}")))?;
            seeds
                .iter()
                .map(|&s| Ok((Arc::new(generate(&spec, s).map_err(|e| Failure::usage(format!("{e}")))?), s)))
                .collect::<Result<_, Failure>>()?
        }
        (None, None) => return Err(Failure::usage("one of --graph or --gen is required")),
    };
    let outcomes = execute(common, jobs)?;
    report(common, &outcomes, &mut io::stdout().lock()).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(finish(&outcomes))
}

/// Replaces every argument that is exactly `n` by `size`.
fn instantiate(template: &str, size: usize) -> Result<GeneratorSpec, Failure> {
    let open = template.find('(').ok_or_else(|| Failure::usage(format!("expected name(args) in {template:?}")))?;
    let close = template.rfind(')').ok_or_else(|| Failure::usage(format!("missing ')' in {template:?}")))?;
    let args: Vec<String> = template[open + 1..close]
        .split(',')
        .map(|a| if a.trim() == "n" { size.to_string() } else { a.trim().to_string() })
        .collect();
    let text = format!("{}({}){}", &template[..open], args.join(","), &template[close + 1..]);
    text.parse().map_err(|e| Failure::usage(format!("{e}")))
}

#[derive(Serialize)]
struct Summary {
    algorithm: Algorithm,
    n: usize,
    runs: usize,
    correct: usize,
    median_rounds: f64,
    median_total_capacity: f64,
    /// `median_total_capacity / log₂ n`.
    capacity_per_log_n: f64,
    median_per_node_bits_max: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

fn summarize(records: &[&RunRecord]) -> Vec<Summary> {
    let mut by_n: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    by_n.into_iter()
        .map(|(n, rs)| {
            let cap = median(rs.iter().map(|r| r.total_capacity as f64).collect());
            Summary {
                algorithm: rs[0].algorithm,
                n,
                runs: rs.len(),
                correct: rs.iter().filter(|r| r.correct).count(),
                median_rounds: median(rs.iter().map(|r| r.rounds as f64).collect()),
                median_total_capacity: cap,
                capacity_per_log_n: cap / (n as f64).log2().max(1.0),
                median_per_node_bits_max: median(rs.iter().map(|r| r.per_node_bits_max as f64).collect()),
            }
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let common = &args.common;
    common.warn_overrides();
    let sizes: Vec<usize> = match args.log_n {
        Some((a, b)) => (a..=b).map(|e| 1usize << e).collect(),
        None => args.n.clone(),
    };
    let seeds = common.seeds();
    let mut jobs = Vec::with_capacity(sizes.len() * seeds.len());
    for &size in &sizes {
        let spec = instantiate(&args.gen, size)?;
        for &s in &seeds {
            jobs.push((Arc::new(generate(&spec, s).map_err(|e| Failure::usage(format!("{e}")))?), s));
        }
    }
    let mut outcomes = execute(common, jobs)?;
    outcomes.sort_by_key(|o| (o.record.n, o.record.seed));
    let records: Vec<&RunRecord> = outcomes.iter().map(|o| &o.record).collect();
    let summary = summarize(&records);
    let out = &mut io::stdout().lock();
    let write = |out: &mut io::StdoutLock<'_>| -> io::Result<()> {
        report(common, &outcomes, out)?;
        match common.format {
            Format::JsonLines => {
                for s in &summary {
                    writeln!(out, "{}", serde_json::json!({ "summary": s }))?;
                }
            }
            Format::Csv | Format::Table if !summary.is_empty() => {
                writeln!(out)?;
                write_summary(&summary, common.format == Format::Csv, out)?;
            }
            _ => {}
        }
        Ok(())
    };
    write(out).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(finish(&outcomes))
}

const COLUMNS: [&str; 12] = [
    "algorithm",
    "n",
    "m",
    "seed",
    "rounds",
    "total_capacity",
    "max_beta",
    "max_range",
    "per_node_bits_max",
    "phases",
    "correct",
    "mismatch",
];

fn cells(r: &RunRecord) -> [String; 12] {
    [
        r.algorithm.to_string(),
        r.n.to_string(),
        r.m.to_string(),
        r.seed.to_string(),
        r.rounds.to_string(),
        r.total_capacity.to_string(),
        r.max_beta.to_string(),
        r.max_range.to_string(),
        r.per_node_bits_max.to_string(),
        r.phases.to_string(),
        r.correct.to_string(),
        r.mismatch.clone().unwrap_or_default(),
    ]
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_csv(records: &[&RunRecord], out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for r in records {
        let row: Vec<String> = cells(r).iter().map(|c| csv_field(c)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn write_aligned(header: &[&str], rows: &[Vec<String>], out: &mut impl Write) -> io::Result<()> {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cols: Vec<&str>| -> String {
        cols.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    writeln!(out, "{}", line(header.to_vec()))?;
    for row in rows {
        writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
    }
    Ok(())
}

fn write_table(records: &[&RunRecord], out: &mut impl Write) -> io::Result<()> {
    let rows: Vec<Vec<String>> = records.iter().map(|r| cells(r).to_vec()).collect();
    write_aligned(&COLUMNS, &rows, out)
}

fn write_summary(summary: &[Summary], csv: bool, out: &mut impl Write) -> io::Result<()> {
    let header = [
        "algorithm",
        "n",
        "runs",
        "correct",
        "median_rounds",
        "median_total_capacity",
        "capacity_per_log_n",
        "median_per_node_bits_max",
    ];
    let rows: Vec<Vec<String>> = summary
        .iter()
        .map(|s| {
            vec![
                s.algorithm.to_string(),
                s.n.to_string(),
                s.runs.to_string(),
                s.correct.to_string(),
                format!("{}", s.median_rounds),
                format!("{}", s.median_total_capacity),
                format!("{:.2}", s.capacity_per_log_n),
                format!("{}", s.median_per_node_bits_max),
            ]
        })
        .collect();
    if csv {
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    } else {
        write_aligned(&header, &rows, out)
    }
}
