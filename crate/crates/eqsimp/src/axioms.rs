//! Axiom sets and the application engine.
//!
//! An axiom is a pair of patterns over the variables `x`, `y`, `z`.
//! Applying a valuation to an axiom interns both sides and unifies the
//! resulting classes. Two disciplines exist: conditional application
//! commits only when at least one side already names an existing class
//! (keeping the store focused on the expression under simplification),
//! bottom-up application commits unconditionally.
//!
//! Both sides are first resolved against a staged overlay, so a rejected
//! application leaves the store untouched. Under conditional application
//! a structure may be created only if none of its children is larger
//! than the class the fresh side is about to be unified with; oversized
//! results abort the application. Renaming is not creation: structures
//! moved between classes by a merge carry no such bound.

use crate::store::{Id, Key, Store, StoreError};
use crate::term::{parse_pattern, Term, VARIABLES};
use crate::valuation::Valuation;
use rustc_hash::FxHashSet;
use smallvec::SmallVec;
use std::time::Instant;
use thiserror::Error;

const STANDARD_FILE: &str = "boolean_standard.axioms";
const EXTENDED_FILE: &str = "boolean_extended.axioms";
const STANDARD_TEXT: &str = include_str!("../theories/boolean_standard.axioms");
const EXTENDED_TEXT: &str = include_str!("../theories/boolean_extended.axioms");

/// Environment variable naming a directory to load the shipped theory
/// files from instead of the embedded copies.
pub const AXIOM_DIR_ENV: &str = "EQSIMP_AXIOM_DIR";

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("could not read theory file: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PatOp {
    Var(u8),
    Const(char),
    Unary(char),
    Binary(char),
}

/// Postorder program interning one axiom side.
#[derive(Debug, Clone)]
struct Pattern(SmallVec<[PatOp; 8]>);

impl Pattern {
    fn compile(t: &Term) -> Pattern {
        fn walk(t: &Term, out: &mut SmallVec<[PatOp; 8]>) {
            match t {
                Term::Const(c) => match VARIABLES.iter().position(|v| v == c) {
                    Some(k) => out.push(PatOp::Var(k as u8)),
                    None => out.push(PatOp::Const(*c)),
                },
                Term::Unary(op, x) => {
                    walk(x, out);
                    out.push(PatOp::Unary(*op));
                }
                Term::Binary(op, l, r) => {
                    walk(l, out);
                    walk(r, out);
                    out.push(PatOp::Binary(*op));
                }
            }
        }
        let mut ops = SmallVec::new();
        walk(t, &mut ops);
        Pattern(ops)
    }
}

#[derive(Debug, Clone)]
pub struct Axiom {
    pub lhs: Term,
    pub rhs: Term,
    pub arity: usize,
    /// The source line, used to name the axiom in diagnostics.
    pub tag: String,
    lhs_pat: Pattern,
    rhs_pat: Pattern,
}

#[derive(Debug, Clone)]
pub struct AxiomSet {
    axioms: Vec<Axiom>,
    by_arity: [Vec<usize>; 4],
    pub extended: bool,
}

impl AxiomSet {
    /// Parses a theory file: `symbol <token> <arity>` header lines, then
    /// one `lhs = rhs` axiom per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<AxiomSet, TheoryError> {
        let mut symbols: Vec<(char, usize)> = Vec::new();
        let mut axioms: Vec<Axiom> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TheoryError::Malformed { line: lineno + 1, message };
            if let Some(rest) = line.strip_prefix("symbol ") {
                let mut parts = rest.split_whitespace();
                let tok = parts.next().ok_or_else(|| err("missing symbol token".into()))?;
                let arity: usize = parts
                    .next()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| err("missing or bad arity".into()))?;
                if tok.chars().count() != 1 || arity > 2 {
                    return Err(err(format!("bad symbol declaration '{line}'")));
                }
                symbols.push((tok.chars().next().unwrap(), arity));
                continue;
            }
            let Some((lhs_text, rhs_text)) = line.split_once('=') else {
                return Err(err(format!("expected 'lhs = rhs', got '{line}'")));
            };
            let lhs = parse_pattern(lhs_text)
                .map_err(|e| err(format!("left side: {e}")))?;
            let rhs = parse_pattern(rhs_text)
                .map_err(|e| err(format!("right side: {e}")))?;
            for side in [&lhs, &rhs] {
                check_symbols(side, &symbols).map_err(|m| err(m))?;
            }
            let mut vars = lhs.variables();
            for v in rhs.variables() {
                if !vars.contains(&v) {
                    vars.push(v);
                }
            }
            vars.sort_unstable();
            let arity = vars.len();
            if arity == 0 || arity > 3 {
                return Err(err("axioms must use one to three variables".into()));
            }
            if vars != VARIABLES[..arity] {
                return Err(err(format!(
                    "variables must be the first {arity} of x, y, z"
                )));
            }
            axioms.push(Axiom {
                lhs_pat: Pattern::compile(&lhs),
                rhs_pat: Pattern::compile(&rhs),
                arity,
                tag: line.to_string(),
                lhs,
                rhs,
            });
        }
        let mut by_arity: [Vec<usize>; 4] = Default::default();
        for (k, ax) in axioms.iter().enumerate() {
            by_arity[ax.arity].push(k);
        }
        Ok(AxiomSet { axioms, by_arity, extended: false })
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn len(&self) -> usize {
        self.axioms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axioms.is_empty()
    }

    pub fn of_arity(&self, arity: usize) -> impl Iterator<Item = &Axiom> + '_ {
        self.by_arity[arity.min(3)].iter().map(move |&k| &self.axioms[k])
    }
}

fn check_symbols(t: &Term, symbols: &[(char, usize)]) -> Result<(), String> {
    let find = |c: char, arity: usize| -> Result<(), String> {
        if VARIABLES.contains(&c) && arity == 0 {
            return Ok(());
        }
        if symbols.iter().any(|&(s, a)| s == c && a == arity) {
            Ok(())
        } else {
            Err(format!("symbol '{c}' with arity {arity} is not declared"))
        }
    };
    match t {
        Term::Const(c) => find(*c, 0),
        Term::Unary(op, x) => {
            find(*op, 1)?;
            check_symbols(x, symbols)
        }
        Term::Binary(op, l, r) => {
            find(*op, 2)?;
            check_symbols(l, symbols)?;
            check_symbols(r, symbols)
        }
    }
}

fn load_named(file: &str, embedded: &str) -> AxiomSet {
    if let Ok(dir) = std::env::var(AXIOM_DIR_ENV) {
        let path = std::path::Path::new(&dir).join(file);
        if let Ok(text) = std::fs::read_to_string(&path) {
            return AxiomSet::parse(&text)
                .unwrap_or_else(|e| panic!("bad theory file {}: {e}", path.display()));
        }
    }
    AxiomSet::parse(embedded).expect("embedded theory file parses")
}

/// The 21 standard boolean axioms.
pub fn standard_axioms() -> AxiomSet {
    load_named(STANDARD_FILE, STANDARD_TEXT)
}

/// The standard axioms plus the four non-standard extras.
pub fn extended_axioms() -> AxiomSet {
    let mut set = load_named(EXTENDED_FILE, EXTENDED_TEXT);
    set.extended = true;
    set
}

pub fn load_axiom_file(path: &std::path::Path) -> Result<AxiomSet, TheoryError> {
    let text = std::fs::read_to_string(path)?;
    AxiomSet::parse(&text)
}

// ----------------------------------------------------------------------
// Application.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyMode {
    /// Commit only when one side resolves to a pre-existing class.
    Conditional,
    /// Commit both sides unconditionally.
    BottomUp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyOutcome {
    /// The store changed: structures were added or classes merged.
    pub useful: bool,
    /// The application consulted the class of constant 0 or 1, in the
    /// valuation, during resolution, or anywhere in the unify cascade.
    pub used01: bool,
    /// Decrease of the minimal size of the main class across the call.
    pub size_drop: usize,
}

#[derive(Debug, Clone, Copy)]
struct StagedEntry {
    key: Key,
    id: Id,
    size: u32,
}

/// Reusable buffers for [`apply`].
#[derive(Debug, Default)]
pub struct ApplyScratch {
    staged: Vec<StagedEntry>,
    stack: Vec<Id>,
}

impl ApplyScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn staged_size(&self, store: &Store, id: Id, base: u32) -> u32 {
        if id.0 >= base {
            self.staged[(id.0 - base) as usize].size
        } else {
            store.size(id) as u32
        }
    }

    fn lookup(&self, key: &Key) -> Option<Id> {
        self.staged.iter().find(|e| e.key == *key).map(|e| e.id)
    }

    fn stage(&mut self, store: &Store, key: Key, base: u32) -> Id {
        let id = Id(base + self.staged.len() as u32);
        let mut size: u32 = 1;
        for c in key.children() {
            size = size.saturating_add(self.staged_size(store, *c, base));
        }
        self.staged.push(StagedEntry { key, id, size });
        id
    }

    fn resolve(&mut self, store: &mut Store, pat: &Pattern, v: &Valuation, base: u32) -> Id {
        self.stack.clear();
        for op in &pat.0 {
            let key = match op {
                PatOp::Var(k) => {
                    self.stack.push(v.bindings()[*k as usize]);
                    continue;
                }
                PatOp::Const(c) => Key::constant(*c),
                PatOp::Unary(op) => {
                    let c = self.stack.pop().expect("pattern child");
                    Key::unary(*op, c)
                }
                PatOp::Binary(op) => {
                    let r = self.stack.pop().expect("pattern child");
                    let l = self.stack.pop().expect("pattern child");
                    Key::binary(*op, l, r)
                }
            };
            let id = match store.resolve_key(&key) {
                Some(id) => id,
                None => match self.lookup(&key) {
                    Some(id) => id,
                    None => self.stage(store, key, base),
                },
            };
            self.stack.push(id);
        }
        debug_assert_eq!(self.stack.len(), 1);
        self.stack.pop().expect("pattern root")
    }
}

/// Applies a valuation to an axiom. See the module comment for the two
/// modes. `CapacityExceeded` leaves the store unchanged, so the caller
/// can collect garbage and retry.
pub fn apply(
    store: &mut Store,
    v: &Valuation,
    axiom: &Axiom,
    mode: ApplyMode,
    scratch: &mut ApplyScratch,
) -> Result<ApplyOutcome, StoreError> {
    debug_assert_eq!(v.arity(), axiom.arity);
    let mut watched: SmallVec<[Id; 4]> = SmallVec::new();
    watched.extend(store.resolve_key_quiet(&Key::constant('0')));
    watched.extend(store.resolve_key_quiet(&Key::constant('1')));
    let val_uses = v.bindings().iter().any(|b| watched.contains(b));
    store.arm_watch(&watched);

    let main_before = store.main_id().map(|m| store.size(m));
    let base = store.peek_next_id().0;

    scratch.staged.clear();
    let lhs_id = scratch.resolve(store, &axiom.lhs_pat, v, base);
    let rhs_id = scratch.resolve(store, &axiom.rhs_pat, v, base);
    let staged_consts = scratch
        .staged
        .iter()
        .any(|e| e.key.arity == 0 && (e.key.sym == '0' || e.key.sym == '1'));

    let mut reject = false;
    if mode == ApplyMode::Conditional {
        let lhs_new = lhs_id.0 >= base;
        let rhs_new = rhs_id.0 >= base;
        if lhs_new && rhs_new {
            reject = true;
        } else if lhs_new || rhs_new {
            // Creation size guard: children of every staged structure
            // must fit within the class the fresh side joins.
            let target = store.size(if lhs_new { rhs_id } else { lhs_id }) as u32;
            debug_assert_eq!(
                scratch.staged.last().map(|e| e.id),
                Some(if lhs_new { lhs_id } else { rhs_id })
            );
            for e in &scratch.staged {
                let oversized = e
                    .key
                    .children()
                    .iter()
                    .any(|c| scratch.staged_size(store, *c, base) > target);
                if oversized {
                    reject = true;
                    break;
                }
            }
        } else {
            debug_assert!(scratch.staged.is_empty());
        }
    }
    if reject {
        let hit = store.disarm_watch();
        return Ok(ApplyOutcome { useful: false, used01: hit || val_uses, size_drop: 0 });
    }

    if store.live_structure_count() + scratch.staged.len() > store.capacity() {
        store.disarm_watch();
        return Err(StoreError::CapacityExceeded);
    }
    for k in 0..scratch.staged.len() {
        let e = scratch.staged[k];
        let got = store.create_structure(&e.key)?;
        debug_assert_eq!(got, e.id);
        if e.key.arity == 0 && (e.key.sym == '0' || e.key.sym == '1') {
            store.extend_watch(got);
        }
    }

    let merged = lhs_id != rhs_id;
    if merged {
        store.unify(lhs_id, rhs_id)?;
    }
    let hit = store.disarm_watch();
    let main_after = store.main_id().map(|m| store.size(m));
    let size_drop = match (main_before, main_after) {
        (Some(b), Some(a)) => b.saturating_sub(a),
        _ => 0,
    };
    Ok(ApplyOutcome {
        useful: merged || !scratch.staged.is_empty(),
        used01: hit || val_uses || staged_consts,
        size_drop,
    })
}

/// Outcome of an early single-variable pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarlyStop {
    Completed,
    TimedOut,
    Full,
}

/// Applies every one-variable axiom to each identifier not yet marked in
/// `processed`, oldest first, marking identifiers as they complete. New
/// identifiers created along the way are processed in the same pass.
/// Returns the number of identifiers processed; on `Full`, collect
/// garbage and call again to resume.
pub fn early_apply_single_var(
    store: &mut Store,
    set: &AxiomSet,
    processed: &mut FxHashSet<Id>,
    mode: ApplyMode,
    deadline: Option<Instant>,
    scratch: &mut ApplyScratch,
    mut on_outcome: impl FnMut(ApplyOutcome),
) -> (u64, EarlyStop) {
    let mut done: u64 = 0;
    let mut cursor: Option<Id> = None;
    loop {
        let after = cursor.map(|i| store.time(i)).unwrap_or(0);
        let Some(i) = store.next_id_by_time(after) else { break };
        cursor = Some(i);
        if processed.contains(&i) {
            continue;
        }
        let v = Valuation::unary(i);
        for ax in set.of_arity(1) {
            if !store.is_live(i) {
                break;
            }
            match apply(store, &v, ax, mode, scratch) {
                Ok(out) => on_outcome(out),
                Err(StoreError::CapacityExceeded) => return (done, EarlyStop::Full),
                Err(e) => unreachable!("live bindings cannot fail: {e}"),
            }
        }
        processed.insert(i);
        done += 1;
        if let Some(d) = deadline {
            if Instant::now() >= d {
                return (done, EarlyStop::TimedOut);
            }
        }
    }
    (done, EarlyStop::Completed)
}
