//! The structure store.
//!
//! A store is a finite set of records `f(i1,i2):i` ("structures"), where
//! `f` is a symbol and the `i`s are identifiers of term classes. The key
//! `f(i1,i2)` says how a term is built, the identifier names the class
//! the term belongs to. A normalized store never holds two structures
//! with the same key and different identifiers, which makes identifiers
//! behave as the classes of a congruence.
//!
//! Four operations maintain that shape: [`Store::to_set`] interns a term
//! and returns its class, [`Store::substitute`] renames one identifier
//! into another, [`Store::normalize`] resolves key collisions until none
//! remain, and [`Store::unify`] merges two classes and propagates the
//! consequences. On top of these the store tracks, per identifier, the
//! minimal Polish size of any represented term, supports extracting one
//! minimal witness, and offers three garbage collection policies.
//!
//! Structures live in a slab and are threaded through three intrusive
//! doubly-linked lists (by identifier, by first child, by second child),
//! so renaming touches only the structures that mention the renamed
//! identifier. Every structure creation advances a logical clock; the
//! tick of an identifier's first structure is its age, and the younger
//! of two identifiers is always the one renamed away.

use crate::term::Term;
use crate::valuation::Valuation;
use rustc_hash::{FxHashMap, FxHashSet};
use smallvec::SmallVec;
use std::fmt::Write as _;
use thiserror::Error;

pub type Tick = u64;

/// Identifier of a class of terms. `NULL_ID` is reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Id(pub u32);

pub const NULL_ID: Id = Id(0);

impl Id {
    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for Id {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Symbol plus child identifiers; at most one structure per key in a
/// normalized store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    pub sym: char,
    pub arity: u8,
    children: [Id; 2],
}

impl Key {
    pub fn constant(sym: char) -> Key {
        Key { sym, arity: 0, children: [NULL_ID; 2] }
    }

    pub fn unary(sym: char, child: Id) -> Key {
        Key { sym, arity: 1, children: [child, NULL_ID] }
    }

    pub fn binary(sym: char, left: Id, right: Id) -> Key {
        Key { sym, arity: 2, children: [left, right] }
    }

    #[inline]
    pub fn children(&self) -> &[Id] {
        &self.children[..self.arity as usize]
    }

    fn rename(&self, from: Id, to: Id) -> Key {
        let mut k = *self;
        for c in k.children.iter_mut().take(k.arity as usize) {
            if *c == from {
                *c = to;
            }
        }
        k
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("the structure store is full")]
    CapacityExceeded,
    #[error("identifier {0} is not live")]
    UnknownId(Id),
    #[error("variable '{0}' is not bound by the valuation")]
    UnboundVariable(char),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcMode {
    /// Keep every structure participating in some minimal-size term of
    /// the root class.
    AllMinimal,
    /// Keep exactly one minimal witness, preferring the most recently
    /// created structures.
    OneMinimal,
    /// Keep everything reachable from the root through child edges, plus
    /// constant structures.
    Reachable,
}

const NONE: u32 = u32::MAX;
const UNSET_SIZE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Link {
    prev: u32,
    next: u32,
}

const NO_LINK: Link = Link { prev: NONE, next: NONE };

// List roles: by structure id, by first child, by second child.
const L_ID: usize = 0;
const L_C1: usize = 1;
const L_C2: usize = 2;

#[derive(Debug, Clone)]
struct Slot {
    key: Key,
    /// `NULL_ID` marks a vacant slab entry.
    id: Id,
    created_at: Tick,
    links: [Link; 3],
}

#[derive(Debug, Clone)]
struct IdMeta {
    heads: [u32; 3],
    size: u32,
    time: Tick,
    live: bool,
}

impl IdMeta {
    fn dead() -> Self {
        IdMeta { heads: [NONE; 3], size: UNSET_SIZE, time: 0, live: false }
    }
}

#[derive(Debug, Default)]
struct Watch {
    ids: SmallVec<[Id; 4]>,
    hit: bool,
}

#[derive(Debug)]
pub struct Store {
    slots: Vec<Slot>,
    free: Vec<u32>,
    meta: Vec<IdMeta>,
    /// Every id currently holding a given key; the first entry resolves
    /// lookups, extra entries are collisions awaiting normalization.
    key_index: FxHashMap<Key, SmallVec<[Id; 2]>>,
    /// Identifiers in creation order; dead entries are skipped and pruned
    /// by garbage collection.
    id_list: Vec<Id>,
    dirty_keys: Vec<Key>,
    live_ids: usize,
    live_slots: usize,
    clock: Tick,
    capacity: usize,
    main_id: Option<Id>,
    watch: Option<Watch>,
}

impl Store {
    pub fn new(capacity: usize) -> Store {
        Store {
            slots: Vec::new(),
            free: Vec::new(),
            meta: vec![IdMeta::dead()],
            key_index: FxHashMap::default(),
            id_list: Vec::new(),
            dirty_keys: Vec::new(),
            live_ids: 0,
            live_slots: 0,
            clock: 0,
            capacity,
            main_id: None,
            watch: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn clock(&self) -> Tick {
        self.clock
    }

    pub fn is_full(&self) -> bool {
        self.live_slots >= self.capacity
    }

    pub fn live_id_count(&self) -> usize {
        self.live_ids
    }

    pub fn live_structure_count(&self) -> usize {
        self.live_slots
    }

    pub fn is_live(&self, id: Id) -> bool {
        id != NULL_ID && id.idx() < self.meta.len() && self.meta[id.idx()].live
    }

    /// Tick at which the identifier's first structure was created.
    /// Renaming keeps the survivor's time.
    pub fn time(&self, id: Id) -> Tick {
        self.meta[id.idx()].time
    }

    /// Minimal Polish size over the terms of the class.
    pub fn size(&self, id: Id) -> usize {
        self.meta[id.idx()].size as usize
    }

    pub fn main_id(&self) -> Option<Id> {
        self.main_id
    }

    pub fn set_main(&mut self, id: Id) {
        self.main_id = Some(id);
    }

    /// The id the next created class will get.
    pub fn peek_next_id(&self) -> Id {
        Id(self.meta.len() as u32)
    }

    /// First live identifier with time strictly greater than `after`.
    pub fn next_id_by_time(&self, after: Tick) -> Option<Id> {
        let start = self.id_list.partition_point(|&i| self.meta[i.idx()].time <= after);
        self.id_list[start..].iter().copied().find(|&i| self.meta[i.idx()].live)
    }

    pub fn live_ids_chronological(&self) -> impl Iterator<Item = Id> + '_ {
        self.id_list.iter().copied().filter(move |&i| self.meta[i.idx()].live)
    }

    // ------------------------------------------------------------------
    // Usage tracking (which applications touch given classes).

    /// Starts recording whether any operation consults one of `ids`.
    pub fn arm_watch(&mut self, ids: &[Id]) {
        self.watch = Some(Watch { ids: ids.iter().copied().collect(), hit: false });
    }

    /// Adds an id to the active watch set, if any.
    pub fn extend_watch(&mut self, id: Id) {
        if let Some(w) = &mut self.watch {
            if !w.ids.contains(&id) {
                w.ids.push(id);
            }
        }
    }

    /// Stops recording and reports whether a watched id was touched.
    pub fn disarm_watch(&mut self) -> bool {
        self.watch.take().map(|w| w.hit).unwrap_or(false)
    }

    #[inline]
    fn note_ids(&mut self, ids: &[Id]) {
        if let Some(w) = &mut self.watch {
            if !w.hit && ids.iter().any(|i| w.ids.contains(i)) {
                w.hit = true;
            }
        }
    }

    #[inline]
    fn note_structure(&mut self, key: &Key, id: Id) {
        if let Some(w) = &mut self.watch {
            if !w.hit
                && (w.ids.contains(&id) || key.children().iter().any(|c| w.ids.contains(c)))
            {
                w.hit = true;
            }
        }
    }

    // ------------------------------------------------------------------
    // Lookup.

    /// Resolves a key to its class, recording the consultation for the
    /// usage watch.
    pub fn resolve_key(&mut self, key: &Key) -> Option<Id> {
        let id = self.key_index.get(key).map(|ids| ids[0]);
        if let Some(id) = id {
            self.note_structure(key, id);
        }
        id
    }

    /// As [`Store::resolve_key`] without touching the watch.
    pub fn resolve_key_quiet(&self, key: &Key) -> Option<Id> {
        self.key_index.get(key).map(|ids| ids[0])
    }

    fn has_structure(&self, key: &Key, id: Id) -> bool {
        self.key_index.get(key).is_some_and(|ids| ids.contains(&id))
    }

    // ------------------------------------------------------------------
    // Slot plumbing.

    fn list_anchor(key: &Key, id: Id, role: usize) -> Option<Id> {
        match role {
            L_ID => Some(id),
            L_C1 => key.children().first().copied(),
            _ => key.children().get(1).copied(),
        }
    }

    fn link_slot(&mut self, slot_idx: u32) {
        let (key, id) = {
            let s = &self.slots[slot_idx as usize];
            (s.key, s.id)
        };
        for role in 0..3 {
            let Some(anchor) = Self::list_anchor(&key, id, role) else { continue };
            let head = self.meta[anchor.idx()].heads[role];
            self.slots[slot_idx as usize].links[role] = Link { prev: NONE, next: head };
            if head != NONE {
                self.slots[head as usize].links[role].prev = slot_idx;
            }
            self.meta[anchor.idx()].heads[role] = slot_idx;
        }
    }

    fn unlink_slot(&mut self, slot_idx: u32) {
        let (key, id) = {
            let s = &self.slots[slot_idx as usize];
            (s.key, s.id)
        };
        for role in 0..3 {
            let Some(anchor) = Self::list_anchor(&key, id, role) else { continue };
            let link = self.slots[slot_idx as usize].links[role];
            if link.prev != NONE {
                self.slots[link.prev as usize].links[role].next = link.next;
            } else {
                self.meta[anchor.idx()].heads[role] = link.next;
            }
            if link.next != NONE {
                self.slots[link.next as usize].links[role].prev = link.prev;
            }
            self.slots[slot_idx as usize].links[role] = NO_LINK;
        }
    }

    /// Inserts a structure record; queues a normalization check when the
    /// key is already held by another id. Pure bookkeeping: no clock,
    /// size or id-list updates.
    fn insert_slot(&mut self, key: Key, id: Id, created_at: Tick) -> u32 {
        debug_assert!(!self.has_structure(&key, id));
        let slot = Slot { key, id, created_at, links: [NO_LINK; 3] };
        let idx = match self.free.pop() {
            Some(i) => {
                self.slots[i as usize] = slot;
                i
            }
            None => {
                self.slots.push(slot);
                (self.slots.len() - 1) as u32
            }
        };
        self.link_slot(idx);
        let entry = self.key_index.entry(key).or_default();
        entry.push(id);
        if entry.len() > 1 {
            self.dirty_keys.push(key);
        }
        self.live_slots += 1;
        self.note_structure(&key, id);
        idx
    }

    fn remove_slot(&mut self, slot_idx: u32) -> (Key, Id, Tick) {
        self.unlink_slot(slot_idx);
        let s = &mut self.slots[slot_idx as usize];
        let (key, id, tick) = (s.key, s.id, s.created_at);
        s.id = NULL_ID;
        if let Some(entry) = self.key_index.get_mut(&key) {
            if let Some(pos) = entry.iter().position(|&x| x == id) {
                entry.remove(pos);
            }
            if entry.is_empty() {
                self.key_index.remove(&key);
            }
        }
        self.free.push(slot_idx);
        self.live_slots -= 1;
        (key, id, tick)
    }

    fn occupied_slots(&self) -> impl Iterator<Item = (u32, &Slot)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.id != NULL_ID)
            .map(|(i, s)| (i as u32, s))
    }

    // ------------------------------------------------------------------
    // Creation.

    fn fresh_id(&mut self, time: Tick) -> Id {
        let id = Id(self.meta.len() as u32);
        self.meta.push(IdMeta { heads: [NONE; 3], size: UNSET_SIZE, time, live: true });
        self.id_list.push(id);
        self.live_ids += 1;
        id
    }

    /// `1 + sum of child sizes`, saturating so unset children poison the
    /// result instead of wrapping.
    fn key_cost(&self, key: &Key) -> u32 {
        let mut cost: u32 = 1;
        for c in key.children() {
            cost = cost.saturating_add(self.meta[c.idx()].size);
        }
        cost
    }

    /// Creates a structure under a fresh identifier. The key must not be
    /// present yet.
    pub fn create_structure(&mut self, key: &Key) -> Result<Id, StoreError> {
        debug_assert!(self.resolve_key_quiet(key).is_none());
        if self.live_slots + 1 > self.capacity {
            return Err(StoreError::CapacityExceeded);
        }
        for c in key.children() {
            if !self.is_live(*c) {
                return Err(StoreError::UnknownId(*c));
            }
        }
        self.clock += 1;
        let tick = self.clock;
        let id = self.fresh_id(tick);
        self.meta[id.idx()].size = self.key_cost(key);
        self.insert_slot(*key, id, tick);
        Ok(id)
    }

    /// Adds a structure to an existing class, keeping `created_at` (used
    /// when renaming moves a record). Updates sizes downward.
    fn add_structure_to(&mut self, key: Key, id: Id, created_at: Tick, dirty: &mut Vec<Id>) {
        self.insert_slot(key, id, created_at);
        let cand = self.key_cost(&key);
        if cand < self.meta[id.idx()].size {
            self.meta[id.idx()].size = cand;
            dirty.push(id);
        }
    }

    /// Interns a term, resolving variables through `val`. Returns the
    /// class of the term; creates structures (and classes) only for
    /// missing subterms. Calling it again with the same term returns the
    /// same id.
    pub fn to_set(&mut self, t: &Term, val: Option<&Valuation>) -> Result<Id, StoreError> {
        enum Frame<'a> {
            Visit(&'a Term),
            Build { sym: char, arity: u8 },
        }
        let mut out: Vec<Id> = Vec::new();
        let mut stack = vec![Frame::Visit(t)];
        while let Some(f) = stack.pop() {
            match f {
                Frame::Visit(t) => match t {
                    Term::Const(c) => {
                        if let Some(id) = val.and_then(|v| v.get(*c)) {
                            if !self.is_live(id) {
                                return Err(StoreError::UnknownId(id));
                            }
                            self.note_ids(&[id]);
                            out.push(id);
                        } else if crate::term::VARIABLES.contains(c) {
                            return Err(StoreError::UnboundVariable(*c));
                        } else {
                            out.push(self.intern_key(&Key::constant(*c))?);
                        }
                    }
                    Term::Unary(op, x) => {
                        stack.push(Frame::Build { sym: *op, arity: 1 });
                        stack.push(Frame::Visit(x));
                    }
                    Term::Binary(op, l, r) => {
                        stack.push(Frame::Build { sym: *op, arity: 2 });
                        stack.push(Frame::Visit(r));
                        stack.push(Frame::Visit(l));
                    }
                },
                Frame::Build { sym, arity } => {
                    let key = if arity == 1 {
                        let c = out.pop().expect("child id");
                        Key::unary(sym, c)
                    } else {
                        let r = out.pop().expect("child id");
                        let l = out.pop().expect("child id");
                        Key::binary(sym, l, r)
                    };
                    out.push(self.intern_key(&key)?);
                }
            }
        }
        Ok(out.pop().expect("root id"))
    }

    fn intern_key(&mut self, key: &Key) -> Result<Id, StoreError> {
        match self.resolve_key(key) {
            Some(id) => Ok(id),
            None => self.create_structure(key),
        }
    }

    // ------------------------------------------------------------------
    // The renaming operations.

    /// Renames `victim` into `survivor`: every structure mentioning
    /// `victim` is removed and its image under the renaming inserted
    /// unless already present. `victim` stops being live. The store need
    /// not be normalized on entry; key collisions produced here are
    /// queued for [`Store::normalize`].
    pub fn substitute(&mut self, survivor: Id, victim: Id) -> Result<(), StoreError> {
        if !self.is_live(survivor) {
            return Err(StoreError::UnknownId(survivor));
        }
        if !self.is_live(victim) {
            return Err(StoreError::UnknownId(victim));
        }
        debug_assert_ne!(survivor, victim);
        self.note_ids(&[survivor, victim]);

        let mut touched: Vec<u32> = Vec::new();
        let mut seen: FxHashSet<u32> = FxHashSet::default();
        for role in 0..3 {
            let mut cur = self.meta[victim.idx()].heads[role];
            while cur != NONE {
                if seen.insert(cur) {
                    touched.push(cur);
                }
                cur = self.slots[cur as usize].links[role].next;
            }
        }

        let mut removed: Vec<(Key, Id, Tick)> = Vec::with_capacity(touched.len());
        for idx in touched {
            removed.push(self.remove_slot(idx));
        }

        let mut dirty: Vec<Id> = Vec::new();
        for (key, id, tick) in removed {
            let new_key = key.rename(victim, survivor);
            let new_id = if id == victim { survivor } else { id };
            if !self.has_structure(&new_key, new_id) {
                self.add_structure_to(new_key, new_id, tick, &mut dirty);
            }
        }

        self.meta[victim.idx()].live = false;
        self.live_ids -= 1;
        if self.main_id == Some(victim) {
            self.main_id = Some(survivor);
        }
        self.propagate_size_decreases(dirty);
        Ok(())
    }

    /// Resolves queued key collisions until no two structures share a
    /// key, always renaming the younger identifier into the older.
    pub fn normalize(&mut self) {
        while let Some(key) = self.dirty_keys.pop() {
            loop {
                let Some(ids) = self.key_index.get(&key) else { break };
                if ids.len() < 2 {
                    break;
                }
                let (a, b) = (ids[0], ids[1]);
                let (survivor, victim) =
                    if self.time(a) <= self.time(b) { (a, b) } else { (b, a) };
                self.substitute(survivor, victim).expect("collision ids are live");
            }
        }
    }

    /// Merges the classes of `i` and `j` and propagates congruence
    /// consequences. The surviving identifier is the older one.
    pub fn unify(&mut self, i: Id, j: Id) -> Result<(), StoreError> {
        if !self.is_live(i) {
            return Err(StoreError::UnknownId(i));
        }
        if !self.is_live(j) {
            return Err(StoreError::UnknownId(j));
        }
        if i == j {
            return Ok(());
        }
        let (survivor, victim) = if self.time(i) <= self.time(j) { (i, j) } else { (j, i) };
        self.substitute(survivor, victim)?;
        self.normalize();
        Ok(())
    }

    // ------------------------------------------------------------------
    // Size maintenance.

    /// Relaxes parents of the given ids; sizes only decrease here.
    /// Renaming never increases a size: every removed structure leaves an
    /// image whose cost is no larger.
    fn propagate_size_decreases(&mut self, mut worklist: Vec<Id>) {
        let mut updates: Vec<(Id, u32)> = Vec::new();
        while let Some(i) = worklist.pop() {
            updates.clear();
            for role in [L_C1, L_C2] {
                let mut cur = self.meta[i.idx()].heads[role];
                while cur != NONE {
                    let s = &self.slots[cur as usize];
                    let cost = self.key_cost(&s.key);
                    updates.push((s.id, cost));
                    cur = s.links[role].next;
                }
            }
            for &(p, cost) in &updates {
                if cost < self.meta[p.idx()].size {
                    self.meta[p.idx()].size = cost;
                    worklist.push(p);
                }
            }
        }
    }

    /// Recomputes every live size from scratch by relaxing upward from
    /// constant structures (used after collection).
    fn recompute_sizes(&mut self) {
        let live: Vec<Id> = self.live_ids_chronological().collect();
        for &i in &live {
            self.meta[i.idx()].size = UNSET_SIZE;
        }
        let const_ids: Vec<Id> = self
            .slots
            .iter()
            .filter(|s| s.id != NULL_ID && s.key.arity == 0)
            .map(|s| s.id)
            .collect();
        let mut seeds: Vec<Id> = Vec::new();
        for id in const_ids {
            if self.meta[id.idx()].size != 1 {
                self.meta[id.idx()].size = 1;
                seeds.push(id);
            }
        }
        self.propagate_size_decreases(seeds);
        debug_assert!(
            live.iter().all(|i| self.meta[i.idx()].size != UNSET_SIZE),
            "collection left a class without a finite witness"
        );
    }

    // ------------------------------------------------------------------
    // Extraction.

    /// Picks the structure realizing `size(id)`; ties prefer the oldest
    /// structure (or newest, for the single-witness collector), then the
    /// smallest symbol, then lexicographic children.
    fn best_slot(&self, id: Id, newest: bool) -> u32 {
        let target = self.meta[id.idx()].size;
        let mut best: Option<u32> = None;
        let mut cur = self.meta[id.idx()].heads[L_ID];
        while cur != NONE {
            let s = &self.slots[cur as usize];
            if self.key_cost(&s.key) == target {
                let better = match best {
                    None => true,
                    Some(b) => {
                        let bs = &self.slots[b as usize];
                        let lhs = (s.created_at, s.key.sym, s.key.children);
                        let rhs = (bs.created_at, bs.key.sym, bs.key.children);
                        if newest {
                            lhs > rhs
                        } else {
                            lhs < rhs
                        }
                    }
                };
                if better {
                    best = Some(cur);
                }
            }
            cur = s.links[L_ID].next;
        }
        best.expect("live class has a minimal structure")
    }

    /// One term of minimal Polish size for the class, deterministically.
    pub fn extract_min(&self, id: Id) -> Result<Term, StoreError> {
        if !self.is_live(id) {
            return Err(StoreError::UnknownId(id));
        }
        enum Frame {
            Visit(Id),
            Build { sym: char, arity: u8 },
        }
        let mut out: Vec<Term> = Vec::new();
        let mut stack = vec![Frame::Visit(id)];
        while let Some(f) = stack.pop() {
            match f {
                Frame::Visit(i) => {
                    let s = &self.slots[self.best_slot(i, false) as usize];
                    stack.push(Frame::Build { sym: s.key.sym, arity: s.key.arity });
                    // Children of a minimal structure have strictly
                    // smaller sizes, so this terminates despite cycles.
                    for &c in s.key.children().iter().rev() {
                        stack.push(Frame::Visit(c));
                    }
                }
                Frame::Build { sym, arity } => {
                    let t = match arity {
                        0 => Term::Const(sym),
                        1 => Term::Unary(sym, Box::new(out.pop().expect("child"))),
                        _ => {
                            let r = out.pop().expect("child");
                            let l = out.pop().expect("child");
                            Term::Binary(sym, Box::new(l), Box::new(r))
                        }
                    };
                    out.push(t);
                }
            }
        }
        Ok(out.pop().expect("root"))
    }

    // ------------------------------------------------------------------
    // Garbage collection.

    /// Shrinks the store according to `mode`. The minimal size of the
    /// root class is unchanged by any mode.
    pub fn gc(&mut self, mode: GcMode, root: Id) {
        debug_assert!(self.is_live(root));
        debug_assert!(self.dirty_keys.is_empty());
        let before = self.meta[root.idx()].size;

        let mut keep: Vec<u32> = Vec::new();
        let mut marked: FxHashSet<Id> = FxHashSet::default();
        let mut queue: Vec<Id> = vec![root];
        marked.insert(root);
        match mode {
            GcMode::AllMinimal => {
                while let Some(i) = queue.pop() {
                    let target = self.meta[i.idx()].size;
                    let mut cur = self.meta[i.idx()].heads[L_ID];
                    while cur != NONE {
                        let s = &self.slots[cur as usize];
                        if self.key_cost(&s.key) == target {
                            keep.push(cur);
                            for &c in s.key.children() {
                                if marked.insert(c) {
                                    queue.push(c);
                                }
                            }
                        }
                        cur = s.links[L_ID].next;
                    }
                }
            }
            GcMode::OneMinimal => {
                while let Some(i) = queue.pop() {
                    let best = self.best_slot(i, true);
                    keep.push(best);
                    for &c in self.slots[best as usize].key.children() {
                        if marked.insert(c) {
                            queue.push(c);
                        }
                    }
                }
            }
            GcMode::Reachable => {
                // Constants stay: bottom-up growth restarts from them.
                for (_, s) in self.occupied_slots() {
                    if s.key.arity == 0 && marked.insert(s.id) {
                        queue.push(s.id);
                    }
                }
                while let Some(i) = queue.pop() {
                    let mut cur = self.meta[i.idx()].heads[L_ID];
                    while cur != NONE {
                        let s = &self.slots[cur as usize];
                        for &c in s.key.children() {
                            if marked.insert(c) {
                                queue.push(c);
                            }
                        }
                        cur = s.links[L_ID].next;
                    }
                }
                for (idx, s) in self.occupied_slots() {
                    if marked.contains(&s.id) {
                        keep.push(idx);
                    }
                }
            }
        }

        // Rebuild from the kept records, chronologically.
        let mut records: Vec<(Tick, Key, Id)> = keep
            .iter()
            .map(|&idx| {
                let s = &self.slots[idx as usize];
                (s.created_at, s.key, s.id)
            })
            .collect();
        records.sort_unstable();
        records.dedup();

        self.slots.clear();
        self.free.clear();
        self.key_index.clear();
        let mut live_now: FxHashSet<Id> = FxHashSet::default();
        for &(_, _, id) in &records {
            live_now.insert(id);
        }
        for (i, m) in self.meta.iter_mut().enumerate() {
            m.heads = [NONE; 3];
            m.live = live_now.contains(&Id(i as u32));
        }
        self.live_slots = 0;
        for &(tick, key, id) in &records {
            self.insert_slot(key, id, tick);
        }
        debug_assert!(self.dirty_keys.is_empty(), "collection cannot introduce collisions");
        self.id_list.retain(|i| live_now.contains(i));
        self.live_ids = self.id_list.len();
        self.recompute_sizes();
        debug_assert_eq!(self.meta[root.idx()].size, before);
    }

    // ------------------------------------------------------------------
    // Views and diagnostics.

    /// One structure per line, `symbol(children):id @tick`, in tick order.
    pub fn dump(&self) -> String {
        let mut live: Vec<&Slot> = self.occupied_slots().map(|(_, s)| s).collect();
        live.sort_by_key(|s| s.created_at);
        let mut out = String::new();
        for s in live {
            match s.key.arity {
                0 => {
                    let _ = writeln!(out, "{}:{} @{}", s.key.sym, s.id, s.created_at);
                }
                1 => {
                    let _ = writeln!(
                        out,
                        "{}({}):{} @{}",
                        s.key.sym,
                        s.key.children()[0],
                        s.id,
                        s.created_at
                    );
                }
                _ => {
                    let _ = writeln!(
                        out,
                        "{}({},{}):{} @{}",
                        s.key.sym,
                        s.key.children()[0],
                        s.key.children()[1],
                        s.id,
                        s.created_at
                    );
                }
            }
        }
        out
    }

    /// Calls `f` with `(key, created_at)` for every structure of the
    /// class, in list order (most recently inserted first).
    pub fn for_each_structure<F: FnMut(&Key, Tick)>(&self, id: Id, mut f: F) {
        let mut cur = self.meta[id.idx()].heads[L_ID];
        while cur != NONE {
            let s = &self.slots[cur as usize];
            f(&s.key, s.created_at);
            cur = s.links[L_ID].next;
        }
    }

    /// Verifies normalization, well-formedness and index coherence by a
    /// full scan. Test support.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut counted = 0usize;
        for (_, s) in self.occupied_slots() {
            counted += 1;
            if !self.has_structure(&s.key, s.id) {
                return Err(format!("slot {:?} missing from key index", s));
            }
            if !self.is_live(s.id) {
                return Err(format!("structure id {} is not live", s.id));
            }
            for c in s.key.children() {
                if !self.is_live(*c) {
                    return Err(format!("child {c} of {:?} is not live", s.key));
                }
                if self.meta[c.idx()].heads[L_ID] == NONE {
                    return Err(format!("child {c} has no defining structure"));
                }
            }
        }
        if counted != self.live_slots {
            return Err(format!(
                "live slot count {} does not match scan {}",
                self.live_slots, counted
            ));
        }
        for (key, ids) in &self.key_index {
            if ids.len() != 1 {
                return Err(format!("key {key:?} held by {ids:?}"));
            }
        }
        for i in self.live_ids_chronological() {
            if self.meta[i.idx()].heads[L_ID] == NONE {
                return Err(format!("live id {i} has no structure"));
            }
        }
        Ok(())
    }
}
