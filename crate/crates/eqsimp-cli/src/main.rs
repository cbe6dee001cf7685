//! Command line for the expression simplifier: simplify single
//! expressions, run seeded benchmark suites, generate corpora, and
//! saturate tiny alphabets exhaustively.
//!
//! Exit codes: 0 on success, 1 on expression syntax errors, 2 on bad
//! flags or out-of-range parameters.

use clap::{Args, Parser, Subcommand};
use eqsimp::axioms::{extended_axioms, load_axiom_file, standard_axioms, AxiomSet};
use eqsimp::gen::random_expr;
use eqsimp::harness::{bench_csv, run_bench, table1_csv, table3_csv};
use eqsimp::oracle::saturate;
use eqsimp::rng::SplitMix64;
use eqsimp::simplifier::{preset, simplify_with, stats_csv, Config};
use eqsimp::term::parse;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "eqsimp", version, about = "Simplify expressions modulo an equational theory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simplify one expression and print the result and its size.
    Simplify(SimplifyArgs),
    /// Generate a seeded corpus and run presets over it, writing CSVs.
    Bench(BenchArgs),
    /// Exhaustive bottom-up closure over a tiny alphabet.
    Saturate(SaturateArgs),
    /// Write seeded random expressions, one per line.
    Gen(GenArgs),
}

#[derive(Args)]
struct SimplifyArgs {
    /// Expression text.
    #[arg(long, conflicts_with = "file")]
    expr: Option<String>,
    /// Read the expression from a file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Algorithm variant: default or var1..var12.
    #[arg(long, default_value = "default")]
    preset: String,
    /// Theory file overriding the preset's axiom set.
    #[arg(long)]
    axioms: Option<PathBuf>,
    /// Stop as soon as the minimal size reaches this value.
    #[arg(long)]
    expected_size: Option<usize>,
    /// Consecutive non-improving iterations tolerated.
    #[arg(long)]
    max_count: Option<usize>,
    /// Maximum structure count of the store.
    #[arg(long)]
    capacity: Option<usize>,
    /// Per-iteration timeout in seconds; 0 disables it.
    #[arg(long)]
    timeout: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write per-iteration statistics as CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated letter counts, one corpus cohort each.
    #[arg(long, value_delimiter = ',', default_value = "3")]
    letters: Vec<usize>,
    /// Expressions per cohort.
    #[arg(long, default_value_t = 20)]
    count: usize,
    /// Polish size of every generated expression.
    #[arg(long, default_value_t = 800)]
    size: usize,
    /// Comma-separated preset names.
    #[arg(long, value_delimiter = ',', default_value = "default")]
    presets: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for bench.csv, table1.csv, table3.csv and stats/.
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration timeout in seconds; 0 disables it.
    #[arg(long)]
    timeout: Option<u64>,
    #[arg(long)]
    capacity: Option<usize>,
}

#[derive(Args)]
struct SaturateArgs {
    /// Number of letters next to the constants 0 and 1 (at most 2).
    #[arg(long)]
    letters: usize,
    /// Structure budget before giving up on the fixpoint.
    #[arg(long, default_value_t = 200_000)]
    limit: usize,
    /// Use the extended axiom set.
    #[arg(long)]
    extended: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    letters: usize,
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to a file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simplify(args) => cmd_simplify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Saturate(args) => cmd_saturate(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn bad_flags(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn build_config(
    preset_name: &str,
    expected_size: Option<usize>,
    max_count: Option<usize>,
    capacity: Option<usize>,
    timeout: Option<u64>,
    seed: Option<u64>,
) -> Result<Config, String> {
    let mut cfg = preset(preset_name).map_err(|e| e.to_string())?;
    if let Some(v) = expected_size {
        cfg.expected_size = v;
    }
    if let Some(v) = max_count {
        cfg.max_count = v;
    }
    if let Some(v) = capacity {
        cfg.capacity = v;
    }
    if let Some(v) = timeout {
        cfg.iteration_timeout = Duration::from_secs(v);
    }
    if let Some(v) = seed {
        cfg.seed = v;
    }
    Ok(cfg)
}

fn load_set(path: Option<&PathBuf>, cfg: &Config) -> Result<AxiomSet, String> {
    match path {
        Some(p) => load_axiom_file(p).map_err(|e| e.to_string()),
        None => Ok(match cfg.axiom_choice {
            eqsimp::simplifier::AxiomChoice::Standard => standard_axioms(),
            eqsimp::simplifier::AxiomChoice::Extended => extended_axioms(),
        }),
    }
}

fn cmd_simplify(args: SimplifyArgs) -> ExitCode {
    let text = match (&args.expr, &args.file) {
        (Some(e), _) => e.clone(),
        (None, Some(p)) => match std::fs::read_to_string(p) {
            Ok(t) => t,
            Err(e) => return bad_flags(&format!("cannot read {}: {e}", p.display())),
        },
        (None, None) => return bad_flags("one of --expr or --file is required"),
    };
    let cfg = match build_config(
        &args.preset,
        args.expected_size,
        args.max_count,
        args.capacity,
        args.timeout,
        args.seed,
    ) {
        Ok(c) => c,
        Err(e) => return bad_flags(&e),
    };
    let set = match load_set(args.axioms.as_ref(), &cfg) {
        Ok(s) => s,
        Err(e) => return bad_flags(&e),
    };
    let expr = match parse(text.trim()) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = simplify_with(&expr, &cfg, &set);
    println!("{}", result.simplified);
    println!("size={}", result.final_size);
    if let Some(path) = &args.stats {
        if let Err(e) = std::fs::write(path, stats_csv(&result.iterations)) {
            return bad_flags(&format!("cannot write {}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    if args.letters.iter().any(|&l| l == 0 || l > 16) {
        return bad_flags("letter counts must be in 1..=16");
    }
    if args.size == 0 {
        return bad_flags("size must be at least 1");
    }
    let mut presets: Vec<(String, Config)> = Vec::new();
    for name in &args.presets {
        let cfg = match build_config(name, None, None, args.capacity, args.timeout, None) {
            Ok(c) => c,
            Err(e) => return bad_flags(&e),
        };
        presets.push((name.clone(), cfg));
    }
    let stats_dir = args.out.join("stats");
    if let Err(e) = std::fs::create_dir_all(&stats_dir) {
        return bad_flags(&format!("cannot create {}: {e}", stats_dir.display()));
    }
    let records = run_bench(&args.letters, args.count, args.size, &presets, args.seed);
    let rows: Vec<_> = records.iter().map(|r| r.row.clone()).collect();
    let first_preset = args.presets.first().map(String::as_str).unwrap_or("default");
    let files = [
        ("bench.csv", bench_csv(&rows)),
        ("table1.csv", table1_csv(&rows, first_preset)),
        ("table3.csv", table3_csv(&rows)),
    ];
    for (name, contents) in files {
        if let Err(e) = std::fs::write(args.out.join(name), contents) {
            return bad_flags(&format!("cannot write {name}: {e}"));
        }
    }
    for r in &records {
        let name = format!("{}__{}.csv", r.row.expr_id, r.row.preset);
        if let Err(e) = std::fs::write(stats_dir.join(&name), stats_csv(&r.stats)) {
            return bad_flags(&format!("cannot write {name}: {e}"));
        }
    }
    println!("wrote {} runs to {}", records.len(), args.out.display());
    ExitCode::SUCCESS
}

fn cmd_saturate(args: SaturateArgs) -> ExitCode {
    if args.letters > 2 {
        return bad_flags("saturation is exhaustive; letters must be at most 2");
    }
    let mut constants = vec!['0', '1'];
    constants.extend("ab".chars().take(args.letters));
    let set = if args.extended { extended_axioms() } else { standard_axioms() };
    let report = saturate(&constants, &set, args.limit);
    println!("classes={} fixpoint={}", report.classes, report.reached_fixpoint);
    println!("structures={}", report.structures);
    ExitCode::SUCCESS
}

fn cmd_gen(args: GenArgs) -> ExitCode {
    if args.letters == 0 || args.letters > 16 {
        return bad_flags("letters must be in 1..=16");
    }
    if args.size == 0 {
        return bad_flags("size must be at least 1");
    }
    let mut master = SplitMix64::new(args.seed);
    let mut out = String::new();
    for _ in 0..args.count {
        let expr = random_expr(master.next_u64(), args.letters, args.size)
            .expect("parameters validated");
        out.push_str(&expr.to_string());
        out.push('\n');
    }
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, out) {
                return bad_flags(&format!("cannot write {}: {e}", path.display()));
            }
        }
        None => print!("{out}"),
    }
    ExitCode::SUCCESS
}
