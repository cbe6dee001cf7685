//! Acceptance suite: one test per shipped criterion, each printing a
//! `criterion N: PASS` line (run with `--nocapture` to see them).
//!
//! Wall-clock-bounded criteria take a shared lock so they are not
//! distorted by the other tests saturating the cores.

use eqsimp::axioms::standard_axioms;
use eqsimp::exec;
use eqsimp::gen::random_expr;
use eqsimp::harness::gen_corpus;
use eqsimp::oracle::{equivalent, representable_function_count, saturate, NaiveCongruence};
use eqsimp::oracle::solve_ground;
use eqsimp::rng::SplitMix64;
use eqsimp::simplifier::{preset, simplify, Config, IterationStats};
use eqsimp::store::GcMode;
use eqsimp::term::parse;
use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

static HEAVY: Mutex<()> = Mutex::new(());

fn quiet_config(name: &str) -> Config {
    let mut cfg = preset(name).unwrap();
    cfg.iteration_timeout = Duration::ZERO;
    cfg
}

fn run_binary(args: &[&str]) -> (String, Duration) {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_eqsimp"))
        .args(args)
        .output()
        .expect("binary runs");
    let elapsed = started.elapsed();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    (String::from_utf8_lossy(&out.stdout).into_owned(), elapsed)
}

/// Worked example: `a + b + !b + a` simplifies to `1` in under a second.
#[test]
fn criterion_01_worked_example() {
    let _lock = HEAVY.lock().unwrap();
    let (out, elapsed) = run_binary(&["simplify", "--expr", "a + b + !b + a", "--preset", "default"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("1"));
    assert_eq!(lines.next(), Some("size=1"));
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 1: PASS (worked example gives 1 in {elapsed:?})");
}

/// Absorption: `a + ab` simplifies to `a` in under a second.
#[test]
fn criterion_02_absorption() {
    let _lock = HEAVY.lock().unwrap();
    let started = Instant::now();
    let r = simplify(&parse("a + ab").unwrap(), &quiet_config("default"));
    let elapsed = started.elapsed();
    assert_eq!(r.simplified.to_string(), "a");
    assert_eq!(r.final_size, 1);
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!("criterion 2: PASS (a + ab gives a in {elapsed:?})");
}

/// Early application handles the trailing letter; the default preset
/// reaches 1 as well within its plateau budget.
#[test]
fn criterion_03_early_application() {
    let expr = parse("a + b + !b + c").unwrap();
    let with_1f = simplify(&expr, &quiet_config("var5"));
    assert_eq!(with_1f.simplified.to_string(), "1");
    let plain = simplify(&expr, &quiet_config("default"));
    assert_eq!(plain.simplified.to_string(), "1");
    println!("criterion 3: PASS (1F and default both reach 1)");
}

/// Polish size pin for the nine-letter expression.
#[test]
fn criterion_04_polish_size_pin() {
    let t = parse("b + (g + a)d + i + !(hfe(d + ag!c))").unwrap();
    assert_eq!(t.polish_size(), 25);
    println!("criterion 4: PASS (size 25)");
}

/// Saturation class counts: 4 classes with one letter, 16 with two,
/// verified against the truth-table partition oracle.
#[test]
fn criterion_05_saturation_class_counts() {
    let _lock = HEAVY.lock().unwrap();
    // Oracle: numbers of boolean functions representable at small sizes.
    assert_eq!(representable_function_count(1, 3), 4);
    assert_eq!(representable_function_count(2, 9), 16);

    let started = Instant::now();
    let (out, _) = run_binary(&["saturate", "--letters", "1"]);
    assert_eq!(out.lines().next(), Some("classes=4 fixpoint=true"));
    let set = standard_axioms();
    let two = saturate(&['0', '1', 'a', 'b'], &set, 200_000);
    assert!(two.reached_fixpoint);
    assert_eq!(two.classes, 16);
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    println!("criterion 5: PASS (4 and 16 classes in {elapsed:?})");
}

/// Twenty seeded 800-symbol three-letter expressions under the default
/// preset: at least 90% end at size 16 or less, each under 10 seconds.
#[test]
fn criterion_06_three_letter_corpus() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = {
        let mut c = quiet_config("default");
        c.capacity = 500_000;
        c
    };
    let corpus = gen_corpus(42, 3, 800, 20);
    let mut small = 0;
    let mut worst = Duration::ZERO;
    for (k, expr) in corpus.iter().enumerate() {
        let started = Instant::now();
        let r = simplify(expr, &cfg);
        let elapsed = started.elapsed();
        worst = worst.max(elapsed);
        assert!(elapsed < Duration::from_secs(10), "run {k} took {elapsed:?}");
        if r.final_size <= 16 {
            small += 1;
        }
    }
    assert!(small * 10 >= 20 * 9, "only {small}/20 reached size 16");
    println!("criterion 6: PASS ({small}/20 at size <= 16, worst run {worst:?})");
}

/// One fixed seeded 800-symbol five-letter expression: the default,
/// strict, single-sub-iteration and strict-single variants agree on the
/// final size, which stays at 24 or less.
#[test]
fn criterion_07_variant_agreement() {
    let _lock = HEAVY.lock().unwrap();
    let expr = random_expr(777, 5, 800).unwrap();
    let mut sizes = Vec::new();
    for name in ["default", "var1", "var2", "var6"] {
        let r = simplify(&expr, &quiet_config(name));
        sizes.push((name, r.final_size));
    }
    let first = sizes[0].1;
    assert!(sizes.iter().all(|&(_, s)| s == first), "sizes differ: {sizes:?}");
    assert!(first <= 24, "final size {first} above 24");
    println!("criterion 7: PASS (all variants at size {first})");
}

/// Soundness: 200 seeded random expressions over at most 8 letters are
/// truth-table-equivalent to their simplified forms, exhaustively.
#[test]
fn criterion_08_soundness_suite() {
    let _lock = HEAVY.lock().unwrap();
    let cfg = quiet_config("default");
    let mut rng = SplitMix64::new(20_24);
    let cases: Vec<(usize, u64, usize)> = (0..200)
        .map(|k| {
            let letters = 1 + (k % 8);
            let size = 1 + rng.next_below(200) as usize;
            (letters, rng.next_u64(), size)
        })
        .collect();
    let failures: usize = exec::map(cases, |(letters, seed, size)| {
        let expr = random_expr(seed, letters, size).unwrap();
        let out = simplify(&expr, &cfg);
        usize::from(!equivalent(&expr, &out.simplified))
    })
    .into_iter()
    .sum();
    assert_eq!(failures, 0, "{failures} unsound simplifications");
    println!("criterion 8: PASS (200/200 equivalent)");
}

/// Property suites in compact form; the full versions run in the library
/// crate's own test targets.
#[test]
fn criterion_09_property_suites() {
    // Store invariants and garbage collection across random stores.
    for seed in 0..100u64 {
        let mut store = eqsimp::store::Store::new(1 << 20);
        store.to_set(&parse("0").unwrap(), None).unwrap();
        store.to_set(&parse("1").unwrap(), None).unwrap();
        let mut rng = SplitMix64::new(seed);
        let mut main = eqsimp::store::Id(1);
        for _ in 0..4 {
            let t = random_expr(rng.next_u64(), 3, 1 + rng.next_below(10) as usize).unwrap();
            main = store.to_set(&t, None).unwrap();
        }
        store.set_main(main);
        let ids: Vec<_> = store.live_ids_chronological().collect();
        store.unify(ids[0], ids[ids.len() - 1]).unwrap();
        store.check_invariants().unwrap();
        let root = store.main_id().unwrap();
        let before = store.size(root);
        store.gc(GcMode::AllMinimal, root);
        assert_eq!(store.size(root), before);
        store.check_invariants().unwrap();
    }

    // Ground word problem against the explicit closure.
    for seed in 0..100u64 {
        let mut rng = SplitMix64::new(seed);
        let eqs: Vec<_> = (0..2)
            .map(|_| {
                (
                    random_expr(rng.next_u64(), 2, 1 + rng.next_below(4) as usize).unwrap(),
                    random_expr(rng.next_u64(), 2, 1 + rng.next_below(4) as usize).unwrap(),
                )
            })
            .collect();
        let mut cc = NaiveCongruence::new(&eqs, &[]);
        let mut store = solve_ground(&eqs);
        let universe: Vec<_> = cc.terms().to_vec();
        for u in &universe {
            for v in &universe {
                assert_eq!(
                    store.to_set(u, None).unwrap() == store.to_set(v, None).unwrap(),
                    cc.equal(u, v),
                    "seed {seed}"
                );
            }
        }
    }

    // Monotone size column and determinism without the timeout.
    let cfg = quiet_config("default");
    for seed in 0..6u64 {
        let expr = random_expr(seed, 3, 90).unwrap();
        let a = simplify(&expr, &cfg);
        let sizes: Vec<usize> = a.iterations.iter().map(|i| i.size).collect();
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
        let b = simplify(&expr, &cfg);
        let ka: Vec<[u64; 13]> = a.iterations.iter().map(IterationStats::counters).collect();
        let kb: Vec<[u64; 13]> = b.iterations.iter().map(IterationStats::counters).collect();
        assert_eq!(ka, kb);
    }
    println!("criterion 9: PASS (compact property suites)");
}

/// Statistics bookkeeping on the worked example: the whole reduction is
/// booked under applications that consulted constant 0 or 1.
#[test]
fn criterion_10_stats_bookkeeping() {
    let r = simplify(&parse("a + b + !b + a").unwrap(), &quiet_config("default"));
    assert_eq!(r.simplified.to_string(), "1");
    let ds01: u64 = r.iterations.iter().map(|i| i.ds01).sum();
    let nd01: u64 = r.iterations.iter().map(|i| i.nd01).sum();
    let ods: u64 = r.iterations.iter().map(|i| i.ods).sum();
    assert_eq!(ds01, 7, "full size drop 8 -> 1 booked under ds01");
    assert_eq!(ods, 0);
    assert!(nd01 >= 1);
    println!("criterion 10: PASS (ds01 {ds01}, nd01 {nd01})");
}
