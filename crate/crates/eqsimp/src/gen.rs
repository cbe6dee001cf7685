//! Seeded random boolean expressions of an exact Polish size.
//!
//! The generator walks a size budget top-down and emits the Polish symbol
//! sequence, then folds that sequence into a tree. With budget 1 it emits
//! a constant `0`/`1` with probability 1/8 and otherwise a uniform letter;
//! with budget 2 it must emit a negation; with a larger budget it emits a
//! negation with probability 1/4 and otherwise a binary operator (uniform
//! between product and sum) whose left share is uniform in
//! `1..=budget-2`. Every random draw comes from [`SplitMix64`], so a seed
//! pins the corpus exactly.

use crate::rng::SplitMix64;
use crate::term::{Term, AND, LETTERS, NOT, OR};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Deterministic random expression with `polish_size == target_size`,
/// over the first `n_letters` letters of `a..p`.
pub fn random_expr(seed: u64, n_letters: usize, target_size: usize) -> Result<Term, GenError> {
    let mut rng = SplitMix64::new(seed);
    random_expr_with(&mut rng, n_letters, target_size)
}

/// As [`random_expr`] but drawing from a caller-provided stream, so a
/// corpus can be produced from one seed.
pub fn random_expr_with(
    rng: &mut SplitMix64,
    n_letters: usize,
    target_size: usize,
) -> Result<Term, GenError> {
    if !(1..=LETTERS.len()).contains(&n_letters) {
        return Err(GenError::InvalidParameter(format!(
            "n_letters must be in 1..={}, got {n_letters}",
            LETTERS.len()
        )));
    }
    if target_size == 0 {
        return Err(GenError::InvalidParameter(
            "target_size must be at least 1".into(),
        ));
    }

    // Emit the Polish prefix sequence; budgets are processed left subtree
    // first so draws happen in prefix order.
    enum Tok {
        Atom(char),
        Not,
        Bin(char),
    }
    let mut prefix: Vec<Tok> = Vec::with_capacity(target_size);
    let mut budgets = vec![target_size];
    while let Some(budget) = budgets.pop() {
        match budget {
            1 => {
                let c = if rng.chance(1, 8) {
                    if rng.chance(1, 2) {
                        '1'
                    } else {
                        '0'
                    }
                } else {
                    let k = rng.next_below(n_letters as u64) as usize;
                    LETTERS.as_bytes()[k] as char
                };
                prefix.push(Tok::Atom(c));
            }
            2 => {
                prefix.push(Tok::Not);
                budgets.push(1);
            }
            _ => {
                if rng.chance(1, 4) {
                    prefix.push(Tok::Not);
                    budgets.push(budget - 1);
                } else {
                    let op = if rng.chance(1, 2) { AND } else { OR };
                    prefix.push(Tok::Bin(op));
                    let left = 1 + rng.next_below((budget - 2) as u64) as usize;
                    let right = budget - 1 - left;
                    // Left pops first.
                    budgets.push(right);
                    budgets.push(left);
                }
            }
        }
    }

    // Fold the prefix sequence right to left: operators find their
    // children on top of the stack, left child first.
    let mut stack: Vec<Term> = Vec::new();
    for tok in prefix.iter().rev() {
        match tok {
            Tok::Atom(c) => stack.push(Term::Const(*c)),
            Tok::Not => {
                let x = stack.pop().expect("prefix shape");
                stack.push(Term::Unary(NOT, Box::new(x)));
            }
            Tok::Bin(op) => {
                let l = stack.pop().expect("prefix shape");
                let r = stack.pop().expect("prefix shape");
                stack.push(Term::Binary(*op, Box::new(l), Box::new(r)));
            }
        }
    }
    debug_assert_eq!(stack.len(), 1);
    Ok(stack.pop().expect("prefix shape"))
}
