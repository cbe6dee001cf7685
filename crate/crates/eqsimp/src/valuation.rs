//! Candidate valuations: maps from the axiom variables `x`, `y`, `z` to
//! class identifiers, generated around an anchor identifier under one of
//! four disciplines (types 0 to 3).
//!
//! Types 0 to 2 read the structures of the anchor (and, for three
//! variables, of its children), and only consult structures that are
//! admissible: created no later than the current sub-iteration horizon
//! and, when the size guard is on, with no child class larger than the
//! structure's own class. Type 3 ignores structures entirely and pairs
//! the anchor with every identifier no younger than itself.

use crate::store::{Id, Key, Store, Tick};
use smallvec::SmallVec;

pub const MAX_ARITY: usize = 3;

/// Binding of `x`, `y`, `z` (in that slot order) to identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Valuation {
    ids: [Id; MAX_ARITY],
    arity: u8,
}

impl Valuation {
    pub fn unary(x: Id) -> Valuation {
        Valuation { ids: [x, Id(0), Id(0)], arity: 1 }
    }

    pub fn binary(x: Id, y: Id) -> Valuation {
        Valuation { ids: [x, y, Id(0)], arity: 2 }
    }

    pub fn ternary(x: Id, y: Id, z: Id) -> Valuation {
        Valuation { ids: [x, y, z], arity: 3 }
    }

    pub fn arity(&self) -> usize {
        self.arity as usize
    }

    pub fn bindings(&self) -> &[Id] {
        &self.ids[..self.arity as usize]
    }

    /// Identifier bound to a variable token, if any.
    pub fn get(&self, var: char) -> Option<Id> {
        let slot = crate::term::VARIABLES.iter().position(|&v| v == var)?;
        if slot < self.arity as usize {
            Some(self.ids[slot])
        } else {
            None
        }
    }

    pub fn all_live(&self, store: &Store) -> bool {
        self.bindings().iter().all(|&i| store.is_live(i))
    }

    /// Representative of the valuation's permutation orbit (bindings
    /// sorted); two valuations expand to the same multiple-application
    /// set iff their canonical forms agree.
    pub fn canonical(&self) -> Valuation {
        let mut v = *self;
        v.ids[..v.arity as usize].sort_unstable();
        v
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.bindings().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {}", crate::term::VARIABLES[k], id)?;
        }
        write!(f, "}}")
    }
}

/// All distinct reassignments of the bound identifiers to the variables,
/// in a fixed permutation order, the identity first. Used by multiple
/// application; strict application keeps just the original.
pub fn expand_multiple(v: &Valuation) -> SmallVec<[Valuation; 6]> {
    const PERMS2: [[usize; 2]; 2] = [[0, 1], [1, 0]];
    const PERMS3: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out: SmallVec<[Valuation; 6]> = SmallVec::new();
    match v.arity() {
        1 => out.push(*v),
        2 => {
            for p in PERMS2 {
                let w = Valuation::binary(v.ids[p[0]], v.ids[p[1]]);
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        _ => {
            for p in PERMS3 {
                let w = Valuation::ternary(v.ids[p[0]], v.ids[p[1]], v.ids[p[2]]);
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValuationType {
    Type0,
    Type1,
    Type2,
    Type3,
}

impl ValuationType {
    pub fn from_number(n: u8) -> Option<ValuationType> {
        match n {
            0 => Some(ValuationType::Type0),
            1 => Some(ValuationType::Type1),
            2 => Some(ValuationType::Type2),
            3 => Some(ValuationType::Type3),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ValuationType::Type0 => 0,
            ValuationType::Type1 => 1,
            ValuationType::Type2 => 2,
            ValuationType::Type3 => 3,
        }
    }
}

/// Admissibility filter for structure consultation (types 0 to 2).
#[derive(Debug, Clone, Copy)]
pub struct StructureFilter {
    /// Only structures created at or before this tick are consulted;
    /// `None` admits everything.
    pub horizon: Option<Tick>,
    /// Reject structures with a child class larger than their own class.
    pub size_guard: bool,
}

impl StructureFilter {
    pub fn open() -> StructureFilter {
        StructureFilter { horizon: None, size_guard: true }
    }

    fn admits(&self, store: &Store, key: &Key, id: Id, created_at: Tick) -> bool {
        if let Some(h) = self.horizon {
            if created_at > h {
                return false;
            }
        }
        if self.size_guard {
            let parent = store.size(id);
            if key.children().iter().any(|&c| store.size(c) > parent) {
                return false;
            }
        }
        true
    }
}

/// The one.. two.. three-variable child slots of an admissible compound
/// structure; a unary child fills both slots.
fn child_pair(key: &Key) -> Option<(Id, Id)> {
    match key.arity {
        1 => {
            let j = key.children()[0];
            Some((j, j))
        }
        2 => Some((key.children()[0], key.children()[1])),
        _ => None,
    }
}

fn admissible_pairs(
    store: &Store,
    id: Id,
    filter: &StructureFilter,
) -> SmallVec<[(Id, Id); 8]> {
    let mut out = SmallVec::new();
    store.for_each_structure(id, |key, tick| {
        if key.arity > 0 && filter.admits(store, key, id, tick) {
            if let Some(p) = child_pair(key) {
                out.push(p);
            }
        }
    });
    out
}

/// Type 0: the anchor alone, the child pairs of its structures, and the
/// one-hop triples through either child.
pub fn generate_type0(store: &Store, anchor: Id, filter: &StructureFilter, out: &mut Vec<Valuation>) {
    out.push(Valuation::unary(anchor));
    let pairs = admissible_pairs(store, anchor, filter);
    for &(j1, j2) in &pairs {
        out.push(Valuation::binary(j1, j2));
    }
    for &(j1, j2) in &pairs {
        for (pos, j) in [(0usize, j1), (1usize, j2)] {
            for &(k1, k2) in &admissible_pairs(store, j, filter) {
                out.push(if pos == 0 {
                    Valuation::ternary(k1, k2, j2)
                } else {
                    Valuation::ternary(j1, k1, k2)
                });
            }
        }
    }
}

/// Types 1 and 2: every combination over a neighborhood of the anchor.
/// Type 1 takes the anchor and the children of each of its admissible
/// structures; type 2 extends each neighborhood one hop further down.
/// Output is duplicate-free and contains the type 0 emission.
fn generate_neighborhood(
    store: &Store,
    anchor: Id,
    filter: &StructureFilter,
    two_hops: bool,
    out: &mut Vec<Valuation>,
) {
    let mut seen: rustc_hash::FxHashSet<Valuation> = rustc_hash::FxHashSet::default();
    let mut push = |v: Valuation, out: &mut Vec<Valuation>| {
        if seen.insert(v) {
            out.push(v);
        }
    };
    let mut base = Vec::new();
    generate_type0(store, anchor, filter, &mut base);
    for v in base {
        push(v, out);
    }
    for &(j1, j2) in &admissible_pairs(store, anchor, filter) {
        let mut hood: SmallVec<[Id; 12]> = SmallVec::new();
        for id in [anchor, j1, j2] {
            if !hood.contains(&id) {
                hood.push(id);
            }
        }
        if two_hops {
            for j in [j1, j2] {
                for &(k1, k2) in &admissible_pairs(store, j, filter) {
                    for id in [k1, k2] {
                        if !hood.contains(&id) {
                            hood.push(id);
                        }
                    }
                }
            }
        }
        for &u in &hood {
            for &v in &hood {
                push(Valuation::binary(u, v), out);
            }
        }
        for &u in &hood {
            for &v in &hood {
                for &w in &hood {
                    push(Valuation::ternary(u, v, w), out);
                }
            }
        }
    }
}

pub fn generate_type1(store: &Store, anchor: Id, filter: &StructureFilter, out: &mut Vec<Valuation>) {
    generate_neighborhood(store, anchor, filter, false, out);
}

pub fn generate_type2(store: &Store, anchor: Id, filter: &StructureFilter, out: &mut Vec<Valuation>) {
    generate_neighborhood(store, anchor, filter, true, out);
}

/// Type 3: `{x -> i}`, then every `{x -> i, y -> i'}` and
/// `{x -> i, y -> i', z -> i''}` with `time(i) >= time(i') >= time(i'')`,
/// streamed lazily so the quadratic tail never materializes. The
/// candidate list is snapshotted at construction; identifiers renamed
/// away in the meantime simply fail their liveness check at application.
pub struct Type3Stream {
    anchor: Id,
    /// Live ids with time no greater than the anchor's, youngest first.
    prefix: Vec<Id>,
    stage: u8,
    a: usize,
    b: usize,
}

impl Type3Stream {
    pub fn new(store: &Store, anchor: Id) -> Type3Stream {
        let mut prefix: Vec<Id> = store
            .live_ids_chronological()
            .take_while(|&i| store.time(i) <= store.time(anchor))
            .collect();
        prefix.reverse();
        Type3Stream { anchor, prefix, stage: 0, a: 0, b: 0 }
    }
}

impl Iterator for Type3Stream {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        match self.stage {
            0 => {
                self.stage = 1;
                Some(Valuation::unary(self.anchor))
            }
            1 => {
                if self.a < self.prefix.len() {
                    let v = Valuation::binary(self.anchor, self.prefix[self.a]);
                    self.a += 1;
                    Some(v)
                } else {
                    self.stage = 2;
                    self.a = 0;
                    self.b = 0;
                    self.next()
                }
            }
            2 => {
                if self.a >= self.prefix.len() {
                    return None;
                }
                let v = Valuation::ternary(
                    self.anchor,
                    self.prefix[self.a],
                    self.prefix[self.b],
                );
                self.b += 1;
                if self.b >= self.prefix.len() {
                    self.a += 1;
                    self.b = self.a;
                }
                Some(v)
            }
            _ => None,
        }
    }
}
