//! Independent reference machinery, used by tests as ground truth and by
//! the command line for exhaustive saturation.
//!
//! Nothing here shares code with the simplification path: equivalence is
//! decided by truth tables, the ground word problem by an explicit
//! subterm-universe congruence closure, and minimal sizes (in tests) by
//! fixpoint relaxation over enumerated terms.

use crate::axioms::{apply, ApplyMode, ApplyScratch, AxiomSet};
use crate::exec;
use crate::rng::SplitMix64;
use crate::store::{Store, StoreError};
use crate::term::{Term, TruthAssignment};
use crate::valuation::Valuation;
use rustc_hash::{FxHashMap, FxHashSet};

/// True iff the two terms agree under every assignment to the union of
/// their letters (exhaustive; letters are capped at 16 by the alphabet).
pub fn equivalent(t1: &Term, t2: &Term) -> bool {
    let mut letters = t1.letters();
    for c in t2.letters() {
        if !letters.contains(&c) {
            letters.push(c);
        }
    }
    letters.sort_unstable();
    let total: u32 = 1 << letters.len();
    exec::range_all(total, |bits| {
        let v = TruthAssignment::from_bits(&letters, bits);
        t1.evaluate(&v).expect("boolean term") == t2.evaluate(&v).expect("boolean term")
    })
}

/// Equivalence on a seeded sample of assignments; for wide alphabets
/// where the exhaustive scan is too slow.
pub fn sampled_equivalent(t1: &Term, t2: &Term, seed: u64, samples: usize) -> bool {
    let mut letters = t1.letters();
    for c in t2.letters() {
        if !letters.contains(&c) {
            letters.push(c);
        }
    }
    letters.sort_unstable();
    let mut rng = SplitMix64::new(seed);
    let space = 1u64 << letters.len();
    (0..samples).all(|_| {
        let bits = rng.next_below(space) as u32;
        let v = TruthAssignment::from_bits(&letters, bits);
        t1.evaluate(&v).expect("boolean term") == t2.evaluate(&v).expect("boolean term")
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturationReport {
    pub classes: usize,
    pub structures: usize,
    pub reached_fixpoint: bool,
}

/// Exhaustive bottom-up closure: starting from the given constants,
/// every axiom is applied to every combination of current identifiers,
/// round after round, until a full round changes nothing. `limit` bounds
/// the structure count; hitting it reports a non-fixpoint.
pub fn saturate(constants: &[char], set: &AxiomSet, limit: usize) -> SaturationReport {
    let mut store = Store::new(limit);
    for &c in constants {
        store
            .to_set(&Term::Const(c), None)
            .expect("limit admits the constants");
    }
    let mut scratch = ApplyScratch::new();
    let report = |store: &Store, fixpoint: bool| SaturationReport {
        classes: store.live_id_count(),
        structures: store.live_structure_count(),
        reached_fixpoint: fixpoint,
    };

    loop {
        let snapshot: Vec<_> = store.live_ids_chronological().collect();
        let mut changed = false;
        let run = |store: &mut Store, v: Valuation, scratch: &mut ApplyScratch| {
            if !v.all_live(store) {
                return Ok(false);
            }
            let mut useful = false;
            for ax in set.of_arity(v.arity()) {
                if !v.all_live(store) {
                    break;
                }
                match apply(store, &v, ax, ApplyMode::BottomUp, scratch) {
                    Ok(out) => useful |= out.useful,
                    Err(StoreError::CapacityExceeded) => return Err(()),
                    Err(e) => unreachable!("live bindings cannot fail: {e}"),
                }
            }
            Ok(useful)
        };
        for &i in &snapshot {
            match run(&mut store, Valuation::unary(i), &mut scratch) {
                Ok(u) => changed |= u,
                Err(()) => return report(&store, false),
            }
        }
        for &i in &snapshot {
            for &j in &snapshot {
                match run(&mut store, Valuation::binary(i, j), &mut scratch) {
                    Ok(u) => changed |= u,
                    Err(()) => return report(&store, false),
                }
            }
        }
        for &i in &snapshot {
            for &j in &snapshot {
                for &k in &snapshot {
                    match run(&mut store, Valuation::ternary(i, j, k), &mut scratch) {
                        Ok(u) => changed |= u,
                        Err(()) => return report(&store, false),
                    }
                }
            }
        }
        if !changed {
            return report(&store, true);
        }
        if store.live_structure_count() > limit {
            return report(&store, false);
        }
    }
}

/// Solves ground equations by interning and unifying both sides; two
/// terms are then provably equal iff [`Store::to_set`] returns the same
/// identifier for them.
pub fn solve_ground(equations: &[(Term, Term)]) -> Store {
    let mut store = Store::new(1 << 22);
    for (s, t) in equations {
        let i = store.to_set(s, None).expect("capacity");
        let j = store.to_set(t, None).expect("capacity");
        store.unify(i, j).expect("fresh ids are live");
    }
    store
}

/// Textbook congruence closure over the explicit subterm universe of an
/// equation system: union-find plus congruence propagation to a fixpoint.
/// Deliberately naive and quadratic.
pub struct NaiveCongruence {
    terms: Vec<Term>,
    index: FxHashMap<Term, usize>,
    parent: Vec<usize>,
}

impl NaiveCongruence {
    /// Builds the closure over the subterms of the equations plus any
    /// extra terms one intends to query.
    pub fn new(equations: &[(Term, Term)], queries: &[Term]) -> NaiveCongruence {
        let mut cc = NaiveCongruence {
            terms: Vec::new(),
            index: FxHashMap::default(),
            parent: Vec::new(),
        };
        for (s, t) in equations {
            cc.add(s);
            cc.add(t);
        }
        for q in queries {
            cc.add(q);
        }
        for (s, t) in equations {
            let a = cc.index[s];
            let b = cc.index[t];
            cc.union(a, b);
        }
        cc.close();
        cc
    }

    fn add(&mut self, t: &Term) {
        if self.index.contains_key(t) {
            return;
        }
        match t {
            Term::Const(_) => {}
            Term::Unary(_, x) => self.add(x),
            Term::Binary(_, l, r) => {
                self.add(l);
                self.add(r);
            }
        }
        let k = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), k);
        self.parent.push(k);
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }

    fn close(&mut self) {
        let n = self.terms.len();
        let mut changed = true;
        while changed {
            changed = false;
            for a in 0..n {
                for b in (a + 1)..n {
                    if self.find(a) == self.find(b) {
                        continue;
                    }
                    if self.congruent(a, b) {
                        self.union(a, b);
                        changed = true;
                    }
                }
            }
        }
    }

    fn congruent(&mut self, a: usize, b: usize) -> bool {
        let (ta, tb) = (self.terms[a].clone(), self.terms[b].clone());
        match (&ta, &tb) {
            (Term::Unary(op1, x1), Term::Unary(op2, x2)) if op1 == op2 => {
                let (i1, i2) = (self.index[x1.as_ref()], self.index[x2.as_ref()]);
                self.find(i1) == self.find(i2)
            }
            (Term::Binary(op1, l1, r1), Term::Binary(op2, l2, r2)) if op1 == op2 => {
                let (a1, a2) = (self.index[l1.as_ref()], self.index[l2.as_ref()]);
                let (b1, b2) = (self.index[r1.as_ref()], self.index[r2.as_ref()]);
                self.find(a1) == self.find(a2) && self.find(b1) == self.find(b2)
            }
            _ => false,
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Both terms must belong to the subterm universe.
    pub fn equal(&mut self, u: &Term, v: &Term) -> bool {
        let (a, b) = (self.index[u], self.index[v]);
        self.find(a) == self.find(b)
    }
}

/// Number of distinct boolean functions expressible by terms of Polish
/// size at most `max_size` over the first `n_letters` letters plus the
/// constants. Dynamic program over truth-table masks.
pub fn representable_function_count(n_letters: usize, max_size: usize) -> usize {
    assert!(n_letters <= 4, "mask width");
    let assignments = 1usize << n_letters;
    let full: u32 = if assignments == 32 { u32::MAX } else { (1u32 << assignments) - 1 };
    let mut by_size: Vec<FxHashSet<u32>> = vec![FxHashSet::default(); max_size + 1];
    let mut atoms: FxHashSet<u32> = FxHashSet::default();
    atoms.insert(0);
    atoms.insert(full);
    for k in 0..n_letters {
        let mut mask = 0u32;
        for a in 0..assignments {
            if a >> k & 1 == 1 {
                mask |= 1 << a;
            }
        }
        atoms.insert(mask);
    }
    by_size[1] = atoms;
    for s in 2..=max_size {
        let mut new: FxHashSet<u32> = FxHashSet::default();
        for &m in &by_size[s - 1] {
            new.insert(!m & full);
        }
        for a in 1..s.saturating_sub(1) {
            let b = s - 1 - a;
            if b < 1 || b > max_size {
                continue;
            }
            for &ma in &by_size[a] {
                for &mb in &by_size[b] {
                    new.insert(ma & mb);
                    new.insert(ma | mb);
                }
            }
        }
        by_size[s] = new;
    }
    let mut all: FxHashSet<u32> = FxHashSet::default();
    for set in &by_size {
        all.extend(set.iter().copied());
    }
    all.len()
}
