//! The simplification driver.
//!
//! One iteration walks the identifier list in chronological order,
//! generates valuations for each identifier, applies them to all axioms
//! of matching arity, and ends with a garbage collection. Sub-iterations
//! segment the walk whenever it crosses into identifiers created after
//! the current segment began; valuation generation only consults
//! structures older than the running segment, which keeps the walk fair
//! and prevents early fixpoints. A pass can be restarted from the head of
//! the list a bounded number of times, the store has a hard structure
//! capacity (with an in-iteration emergency collection when it fills),
//! and each iteration carries an optional wall-clock timeout. Runs stop
//! once the minimal size reaches the expected size or fails to improve
//! for a configured number of consecutive iterations.

use crate::axioms::{
    self, apply, early_apply_single_var, AxiomSet, ApplyMode, ApplyOutcome, ApplyScratch,
    EarlyStop,
};
use crate::store::{GcMode, Id, Store, StoreError, Tick};
use crate::term::Term;
use crate::valuation::{
    expand_multiple, generate_type0, generate_type1, generate_type2, StructureFilter,
    Type3Stream, Valuation, ValuationType,
};
use rustc_hash::FxHashSet;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyStyle {
    /// Apply each generated valuation as is.
    Strict,
    /// Also apply every distinct permutation of its bindings.
    Multiple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxiomChoice {
    Standard,
    Extended,
}

#[derive(Debug, Clone)]
pub struct Config {
    pub valuation_type: ValuationType,
    pub application: ApplyStyle,
    pub max_sub_count: usize,
    pub max_re_count: usize,
    /// Consecutive non-improving iterations tolerated before stopping.
    pub max_count: usize,
    pub expected_size: usize,
    pub bottom_up: bool,
    pub axiom_choice: AxiomChoice,
    pub one_var_first: bool,
    pub capacity: usize,
    /// Per-iteration wall-clock budget; zero disables the timeout and
    /// makes runs fully deterministic.
    pub iteration_timeout: Duration,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            valuation_type: ValuationType::Type0,
            application: ApplyStyle::Multiple,
            max_sub_count: 6,
            max_re_count: 2,
            max_count: 20,
            expected_size: 1,
            bottom_up: false,
            axiom_choice: AxiomChoice::Standard,
            one_var_first: false,
            capacity: 500_000,
            iteration_timeout: Duration::from_secs(60),
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown preset '{0}'")]
pub struct UnknownPreset(pub String);

/// The named algorithm variants: `default` and `var1` through `var12`
/// (also accepted as `var/1` style). Single-sub-iteration variants get
/// three restarts of the identifier walk per iteration.
pub fn preset(name: &str) -> Result<Config, UnknownPreset> {
    let mut cfg = Config::default();
    let canon = name.trim().to_ascii_lowercase().replace('/', "");
    let mut set = |vt: u8, style: ApplyStyle, subs: usize, bu: bool, ext: bool, one_f: bool| {
        cfg.valuation_type = ValuationType::from_number(vt).unwrap();
        cfg.application = style;
        cfg.max_sub_count = subs;
        cfg.bottom_up = bu;
        cfg.axiom_choice = if ext { AxiomChoice::Extended } else { AxiomChoice::Standard };
        cfg.one_var_first = one_f;
    };
    use ApplyStyle::{Multiple, Strict};
    match canon.as_str() {
        "default" => set(0, Multiple, 6, false, false, false),
        "var1" => set(0, Strict, 6, false, false, false),
        "var2" => set(0, Multiple, 1, false, false, false),
        "var3" => set(0, Multiple, 6, true, false, false),
        "var4" => set(0, Multiple, 6, false, true, false),
        "var5" => set(0, Multiple, 6, false, false, true),
        "var6" => set(0, Strict, 1, false, false, false),
        "var7" => set(1, Multiple, 6, false, false, false),
        "var8" => set(1, Multiple, 1, false, true, false),
        "var9" => set(2, Multiple, 6, false, false, false),
        "var10" => set(2, Strict, 1, false, false, false),
        "var11" => set(3, Multiple, 6, false, false, false),
        "var12" => set(3, Multiple, 1, false, false, true),
        _ => return Err(UnknownPreset(name.to_string())),
    }
    Ok(cfg)
}

pub const PRESET_NAMES: [&str; 13] = [
    "default", "var1", "var2", "var3", "var4", "var5", "var6", "var7", "var8", "var9", "var10",
    "var11", "var12",
];

/// Per-iteration counters. `ds01`/`nd01` aggregate the size decreases of
/// applications that consulted the class of constant 0 or 1, `ods`/`nods`
/// the others; `nid` counts identifier selections by the main walk and
/// `nid1` identifiers handled by the early single-variable pass.
#[derive(Debug, Clone, Default)]
pub struct IterationStats {
    pub time: Duration,
    pub size: usize,
    pub nval: u64,
    pub napl: u64,
    pub ds01: u64,
    pub nd01: u64,
    pub ods: u64,
    pub nods: u64,
    pub nid: u64,
    pub nid1: u64,
    pub ids_start: usize,
    pub structures_start: usize,
    pub ids_end: usize,
    pub structures_end: usize,
}

impl IterationStats {
    fn record(&mut self, out: &ApplyOutcome) {
        if out.useful {
            self.napl += 1;
        }
        if out.size_drop > 0 {
            if out.used01 {
                self.ds01 += out.size_drop as u64;
                self.nd01 += 1;
            } else {
                self.ods += out.size_drop as u64;
                self.nods += 1;
            }
        }
    }

    /// Everything except the wall-clock column, for determinism checks.
    pub fn counters(&self) -> [u64; 13] {
        [
            self.size as u64,
            self.nval,
            self.napl,
            self.ds01,
            self.nd01,
            self.ods,
            self.nods,
            self.nid,
            self.nid1,
            self.ids_start as u64,
            self.structures_start as u64,
            self.ids_end as u64,
            self.structures_end as u64,
        ]
    }
}

/// Stats CSV with one row per iteration, columns matching the run tables.
pub fn stats_csv(iterations: &[IterationStats]) -> String {
    let mut out = String::from("iter,time_ms,size,nval,napl,ds01,nd01,ods,nods,nid,nid1,Mi,Ni,Mf,Nf\n");
    for (k, it) in iterations.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            k + 1,
            it.time.as_millis(),
            it.size,
            it.nval,
            it.napl,
            it.ds01,
            it.nd01,
            it.ods,
            it.nods,
            it.nid,
            it.nid1,
            it.ids_start,
            it.structures_start,
            it.ids_end,
            it.structures_end,
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    ExpectedSizeReached,
    CountExhausted,
    /// The plateau budget ran out with the final iteration cut short by
    /// its wall-clock timeout.
    TimeoutBudget,
}

#[derive(Debug, Clone)]
pub struct SimplifyResult {
    pub simplified: Term,
    pub final_size: usize,
    pub iterations: Vec<IterationStats>,
    pub termination: TerminationReason,
}

/// Garbage collection policy: bottom-up application keeps the reachable
/// set; otherwise entering a plateau switches from the all-witness
/// collector to the single-witness one, which then stays.
pub fn select_gc(current: GcMode, plateau_len: usize, bottom_up: bool) -> GcMode {
    if bottom_up {
        GcMode::Reachable
    } else if plateau_len == 0 {
        current
    } else {
        GcMode::OneMinimal
    }
}

/// Simplifies with the configured axiom set.
pub fn simplify(expr: &Term, cfg: &Config) -> SimplifyResult {
    let set = match cfg.axiom_choice {
        AxiomChoice::Standard => axioms::standard_axioms(),
        AxiomChoice::Extended => axioms::extended_axioms(),
    };
    simplify_with(expr, cfg, &set)
}

/// Simplifies with an explicit axiom set (theory-file override).
pub fn simplify_with(expr: &Term, cfg: &Config, set: &AxiomSet) -> SimplifyResult {
    // Interning the input must always fit; resource pressure is handled
    // by collection, never surfaced.
    let capacity = cfg.capacity.max(2 + 2 * expr.polish_size());
    let mut store = Store::new(capacity);
    store.to_set(&Term::Const('0'), None).expect("capacity covers the input");
    store.to_set(&Term::Const('1'), None).expect("capacity covers the input");
    let main = store.to_set(expr, None).expect("capacity covers the input");
    store.set_main(main);

    let mut run = Run {
        store,
        cfg,
        set,
        scratch: ApplyScratch::new(),
        processed_1f: FxHashSet::default(),
        stats: IterationStats::default(),
        deadline: None,
        timed_out: false,
        early_gc_armed: true,
        gc_mode: if cfg.bottom_up { GcMode::Reachable } else { GcMode::AllMinimal },
        vals: Vec::new(),
        seen_vals: FxHashSet::default(),
    };

    let mut iterations: Vec<IterationStats> = Vec::new();
    let mut previous_size = run.size_of_main();
    let mut count = 0usize;
    let mut last_timed_out = false;

    while count != cfg.max_count && run.size_of_main() > cfg.expected_size {
        let started = Instant::now();
        run.stats = IterationStats {
            ids_start: run.store.live_id_count(),
            structures_start: run.store.live_structure_count(),
            ..IterationStats::default()
        };
        run.deadline = (cfg.iteration_timeout > Duration::ZERO)
            .then(|| started + cfg.iteration_timeout);
        run.timed_out = false;

        run.iteration();

        run.stats.ids_end = run.store.live_id_count();
        run.stats.structures_end = run.store.live_structure_count();
        let root = run.store.main_id().expect("main id tracked");
        run.store.gc(run.gc_mode, root);

        let size_now = run.size_of_main();
        run.stats.size = size_now;
        run.stats.time = started.elapsed();
        iterations.push(run.stats.clone());
        last_timed_out = run.timed_out;

        if size_now == previous_size {
            count += 1;
        } else {
            count = 0;
            previous_size = size_now;
        }
        run.gc_mode = select_gc(run.gc_mode, count, cfg.bottom_up);
    }

    let root = run.store.main_id().expect("main id tracked");
    let simplified = run.store.extract_min(root).expect("main class is live");
    let final_size = run.size_of_main();
    debug_assert_eq!(simplified.polish_size(), final_size);
    let termination = if final_size <= cfg.expected_size {
        TerminationReason::ExpectedSizeReached
    } else if last_timed_out {
        TerminationReason::TimeoutBudget
    } else {
        TerminationReason::CountExhausted
    };
    SimplifyResult { simplified, final_size, iterations, termination }
}

/// Signals that the current iteration must stop (timeout, unrecoverable
/// capacity pressure, or the size target being met).
struct EndIteration;

type Flow = Result<(), EndIteration>;

struct Run<'a> {
    store: Store,
    cfg: &'a Config,
    set: &'a AxiomSet,
    scratch: ApplyScratch,
    processed_1f: FxHashSet<Id>,
    stats: IterationStats,
    deadline: Option<Instant>,
    timed_out: bool,
    early_gc_armed: bool,
    gc_mode: GcMode,
    vals: Vec<Valuation>,
    seen_vals: FxHashSet<Valuation>,
}

impl<'a> Run<'a> {
    fn size_of_main(&self) -> usize {
        self.store.size(self.store.main_id().expect("main id tracked"))
    }

    fn mode(&self) -> ApplyMode {
        if self.cfg.bottom_up { ApplyMode::BottomUp } else { ApplyMode::Conditional }
    }

    fn check_deadline(&mut self) -> Flow {
        if let Some(d) = self.deadline {
            if Instant::now() >= d {
                self.timed_out = true;
                return Err(EndIteration);
            }
        }
        Ok(())
    }

    /// Emergency collection when the store fills mid-iteration: at most
    /// one per sub-iteration, after which capacity pressure ends the
    /// iteration. Collection may recover nothing when the witness set
    /// itself is large.
    fn reclaim(&mut self) -> Flow {
        if !self.early_gc_armed {
            return Err(EndIteration);
        }
        self.early_gc_armed = false;
        let root = self.store.main_id().expect("main id tracked");
        self.store.gc(self.gc_mode, root);
        if self.store.is_full() {
            return Err(EndIteration);
        }
        Ok(())
    }

    fn apply_recorded(&mut self, v: &Valuation, axiom: &axioms::Axiom) -> Flow {
        let mode = self.mode();
        loop {
            if !v.all_live(&self.store) {
                return Ok(());
            }
            match apply(&mut self.store, v, axiom, mode, &mut self.scratch) {
                Ok(out) => {
                    self.stats.record(&out);
                    if self.size_of_main() <= self.cfg.expected_size {
                        return Err(EndIteration);
                    }
                    self.check_deadline()?;
                    return Ok(());
                }
                Err(StoreError::CapacityExceeded) => {
                    self.reclaim()?;
                    // Retry once against the collected store.
                }
                Err(e) => unreachable!("live bindings cannot fail: {e}"),
            }
        }
    }

    fn run_1f(&mut self) -> Flow {
        // Every sub-iteration re-applies the one-variable axioms to all
        // identifiers; the marks only keep one pass from reprocessing an
        // identifier (and let it resume after an emergency collection).
        self.processed_1f.clear();
        loop {
            let mode = self.mode();
            let mut outs: Vec<ApplyOutcome> = Vec::new();
            let (done, stop) = early_apply_single_var(
                &mut self.store,
                self.set,
                &mut self.processed_1f,
                mode,
                self.deadline,
                &mut self.scratch,
                |o| outs.push(o),
            );
            self.stats.nid1 += done;
            for o in &outs {
                self.stats.record(o);
            }
            match stop {
                EarlyStop::Completed => return Ok(()),
                EarlyStop::TimedOut => {
                    self.timed_out = true;
                    return Err(EndIteration);
                }
                EarlyStop::Full => {
                    self.reclaim()?;
                }
            }
            if self.size_of_main() <= self.cfg.expected_size {
                return Err(EndIteration);
            }
        }
    }

    fn generate(&mut self, anchor: Id, horizon: Tick) {
        self.vals.clear();
        let filter = StructureFilter { horizon: Some(horizon), size_guard: true };
        match self.cfg.valuation_type {
            ValuationType::Type0 => {
                generate_type0(&self.store, anchor, &filter, &mut self.vals)
            }
            ValuationType::Type1 => {
                generate_type1(&self.store, anchor, &filter, &mut self.vals)
            }
            ValuationType::Type2 => {
                generate_type2(&self.store, anchor, &filter, &mut self.vals)
            }
            ValuationType::Type3 => unreachable!("type 3 streams"),
        }
    }

    fn apply_valuation(&mut self, v: &Valuation) -> Flow {
        // With early application on, one-variable axioms are the early
        // pass's job.
        if v.arity() == 1 && self.cfg.one_var_first {
            return Ok(());
        }
        match self.cfg.application {
            ApplyStyle::Strict => {
                for ax in self.set.of_arity(v.arity()) {
                    self.apply_recorded(v, ax)?;
                }
            }
            ApplyStyle::Multiple => {
                for w in expand_multiple(v) {
                    for ax in self.set.of_arity(w.arity()) {
                        self.apply_recorded(&w, ax)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// The valuations of an identifier form a set; under multiple
    /// application they are further normalized up to permutation, so a
    /// mirrored structure does not replay the same application batch.
    fn admit(&mut self, v: &Valuation) -> bool {
        let key = match self.cfg.application {
            ApplyStyle::Multiple => v.canonical(),
            ApplyStyle::Strict => *v,
        };
        self.seen_vals.insert(key)
    }

    fn process_id(&mut self, anchor: Id, horizon: Tick) -> Flow {
        self.stats.nid += 1;
        self.seen_vals.clear();
        if self.cfg.valuation_type == ValuationType::Type3 {
            let stream = Type3Stream::new(&self.store, anchor);
            for v in stream {
                if !self.admit(&v) {
                    continue;
                }
                self.stats.nval += 1;
                self.apply_valuation(&v)?;
            }
        } else {
            self.generate(anchor, horizon);
            let vals = std::mem::take(&mut self.vals);
            let mut flow = Ok(());
            for v in &vals {
                if !self.admit(v) {
                    continue;
                }
                self.stats.nval += 1;
                flow = self.apply_valuation(v);
                if flow.is_err() {
                    break;
                }
            }
            self.vals = vals;
            flow?;
        }
        Ok(())
    }

    /// The body of the main loop, up to (not including) the end-of-
    /// iteration collection.
    fn iteration(&mut self) {
        let _ = self.iteration_inner();
    }

    fn iteration_inner(&mut self) -> Flow {
        let mut re_count = 0;
        while re_count != self.cfg.max_re_count && !self.store.is_full() {
            // One pass over the identifier list from the start.
            let mut cursor: Tick = 0;
            let mut time_limit = self.store.clock();
            let mut sub_count = 0;
            self.early_gc_armed = true;
            if self.cfg.one_var_first {
                self.run_1f()?;
            }
            loop {
                if self.store.is_full() {
                    self.reclaim()?;
                }
                if sub_count == self.cfg.max_sub_count {
                    break;
                }
                if self.size_of_main() <= self.cfg.expected_size {
                    return Err(EndIteration);
                }
                let Some(i) = self.store.next_id_by_time(cursor) else { break };
                cursor = self.store.time(i);
                self.process_id(i, time_limit)?;
                if self.store.time(i) > time_limit {
                    sub_count += 1;
                    time_limit = self.store.clock();
                    self.early_gc_armed = true;
                    if self.cfg.one_var_first && sub_count != self.cfg.max_sub_count {
                        self.run_1f()?;
                    }
                }
            }
            re_count += 1;
        }
        Ok(())
    }
}
