//! Simplification of expressions modulo an equational theory.
//!
//! The engine keeps a congruence-closed store of structures that
//! compactly represents very large sets of equivalent terms, grows it by
//! applying axioms through generated valuations, and extracts a term of
//! minimal Polish size. The shipped theory is boolean expressions over
//! `.`, `+` and `!`, with the standard and extended axiom sets and
//! thirteen named algorithm variants.
//!
//! Entry points:
//! - [`term::parse`] / [`term`]: concrete syntax, sizes, evaluation.
//! - [`simplifier::simplify`] with a [`simplifier::Config`] (see
//!   [`simplifier::preset`]).
//! - [`oracle`]: reference machinery (truth tables, exhaustive
//!   saturation, ground-equation solving) used as ground truth in tests.
//! - [`harness`]: seeded corpus generation and batch runs.

pub mod axioms;
pub mod exec;
pub mod gen;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod simplifier;
pub mod store;
pub mod term;
pub mod valuation;

pub use simplifier::{preset, simplify, Config, SimplifyResult};
pub use term::{parse, Term};
