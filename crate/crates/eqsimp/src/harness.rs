//! Seeded corpora and batch simplification runs, with the CSV emitters
//! behind the `bench` command. Runs are independent (one store each) and
//! execute through [`crate::exec`], so they parallelize when the
//! `parallel` feature is on; row order is by (expression, preset) and
//! does not depend on scheduling.

use crate::exec;
use crate::gen::random_expr;
use crate::rng::SplitMix64;
use crate::simplifier::{simplify, Config, IterationStats};
use crate::term::Term;
use std::fmt::Write as _;
use std::time::Instant;

/// One simplification run of the bench harness.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub expr_id: String,
    pub preset: String,
    pub letters: usize,
    pub input_size: usize,
    pub final_size: usize,
    pub time_ms: u128,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub row: BenchRow,
    pub stats: Vec<IterationStats>,
}

/// `count` expressions of exact size `size` over `letters` letters; the
/// per-expression seeds are drawn from one stream over `seed`, so the
/// corpus is reproducible and stable under parallel generation.
pub fn gen_corpus(seed: u64, letters: usize, size: usize, count: usize) -> Vec<Term> {
    let mut master = SplitMix64::new(seed);
    let seeds: Vec<u64> = (0..count).map(|_| master.next_u64()).collect();
    exec::map(seeds, move |s| {
        random_expr(s, letters, size).expect("validated parameters")
    })
}

/// Runs every preset on every expression of every cohort. Cohort seeds
/// derive from `seed` in the order the letter counts are given.
pub fn run_bench(
    letter_counts: &[usize],
    count: usize,
    size: usize,
    presets: &[(String, Config)],
    seed: u64,
) -> Vec<RunRecord> {
    let mut cohort_seeds = SplitMix64::new(seed);
    let mut jobs: Vec<(String, usize, Term, String, Config)> = Vec::new();
    for &letters in letter_counts {
        let cohort_seed = cohort_seeds.next_u64();
        let corpus = gen_corpus(cohort_seed, letters, size, count);
        for (k, expr) in corpus.into_iter().enumerate() {
            for (name, cfg) in presets {
                jobs.push((
                    format!("E{letters}-{k}"),
                    letters,
                    expr.clone(),
                    name.clone(),
                    cfg.clone(),
                ));
            }
        }
    }
    exec::map(jobs, |(expr_id, letters, expr, preset, cfg)| {
        let started = Instant::now();
        let result = simplify(&expr, &cfg);
        let time_ms = started.elapsed().as_millis();
        RunRecord {
            row: BenchRow {
                expr_id,
                preset,
                letters,
                input_size: expr.polish_size(),
                final_size: result.final_size,
                time_ms,
                iterations: result.iterations.len(),
            },
            stats: result.iterations,
        }
    })
}

/// `bench.csv`: one row per run.
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("expr_id,preset,letters,input_size,final_size,time_ms,iterations\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.expr_id, r.preset, r.letters, r.input_size, r.final_size, r.time_ms, r.iterations
        );
    }
    out
}

/// `table1.csv`: cumulative distribution of final sizes per letter
/// cohort, over the rows of the given preset. Each threshold row counts
/// the runs with final size at most the threshold and averages their
/// times; the closing `average` row carries the cohort's mean final size
/// and mean time.
pub fn table1_csv(rows: &[BenchRow], preset: &str) -> String {
    let mut out = String::from("letters,size,count,avg_time_ms\n");
    let mut cohorts: Vec<usize> = rows.iter().map(|r| r.letters).collect();
    cohorts.sort_unstable();
    cohorts.dedup();
    for letters in cohorts {
        let cohort: Vec<&BenchRow> = rows
            .iter()
            .filter(|r| r.letters == letters && r.preset == preset)
            .collect();
        if cohort.is_empty() {
            continue;
        }
        let mut sizes: Vec<usize> = cohort.iter().map(|r| r.final_size).collect();
        sizes.sort_unstable();
        sizes.dedup();
        for threshold in sizes {
            let hits: Vec<&&BenchRow> =
                cohort.iter().filter(|r| r.final_size <= threshold).collect();
            let avg_ms = hits.iter().map(|r| r.time_ms).sum::<u128>() as f64 / hits.len() as f64;
            let _ = writeln!(out, "{letters},{threshold},{},{avg_ms:.1}", hits.len());
        }
        let avg_size =
            cohort.iter().map(|r| r.final_size).sum::<usize>() as f64 / cohort.len() as f64;
        let avg_ms =
            cohort.iter().map(|r| r.time_ms).sum::<u128>() as f64 / cohort.len() as f64;
        let _ = writeln!(out, "{letters},average,{avg_size:.2},{avg_ms:.1}");
    }
    out
}

/// `table3.csv`: final size and time per (preset, expression).
pub fn table3_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("preset,expr_id,letters,final_size,time_ms\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.preset, r.expr_id, r.letters, r.final_size, r.time_ms
        );
    }
    out
}
