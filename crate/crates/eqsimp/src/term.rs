//! Concrete expression trees and their text syntax.
//!
//! The shipped theory is boolean: letters `a`..`p` and constants `0`/`1`
//! as atoms, `!` for negation, juxtaposition (or an explicit `.`) for
//! product and `+` for sum. Precedence is `!` above product above sum;
//! both binary operators associate to the left. Axiom patterns use the
//! same grammar plus the variable tokens `x`, `y`, `z`.
//!
//! Traversals are iterative so that very large inputs (10^5 symbols) do
//! not overflow the stack.

use std::fmt;
use thiserror::Error;

pub const LETTERS: &str = "abcdefghijklmnop";
pub const VARIABLES: [char; 3] = ['x', 'y', 'z'];
pub const AND: char = '.';
pub const OR: char = '+';
pub const NOT: char = '!';

#[derive(Debug, Hash)]
pub enum Term {
    Const(char),
    Unary(char, Box<Term>),
    Binary(char, Box<Term>, Box<Term>),
}

// Comparison, cloning and teardown are all spelled out iteratively; the
// derived forms recurse and overflow on deep chains.

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        let mut stack = vec![(self, other)];
        while let Some(pair) = stack.pop() {
            match pair {
                (Term::Const(a), Term::Const(b)) => {
                    if a != b {
                        return false;
                    }
                }
                (Term::Unary(o1, x1), Term::Unary(o2, x2)) => {
                    if o1 != o2 {
                        return false;
                    }
                    stack.push((x1, x2));
                }
                (Term::Binary(o1, l1, r1), Term::Binary(o2, l2, r2)) => {
                    if o1 != o2 {
                        return false;
                    }
                    stack.push((l1, l2));
                    stack.push((r1, r2));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Term {}

impl Clone for Term {
    fn clone(&self) -> Term {
        enum Frame<'a> {
            Visit(&'a Term),
            Build(char, u8),
        }
        let mut out: Vec<Term> = Vec::new();
        let mut stack = vec![Frame::Visit(self)];
        while let Some(f) = stack.pop() {
            match f {
                Frame::Visit(Term::Const(c)) => out.push(Term::Const(*c)),
                Frame::Visit(Term::Unary(op, x)) => {
                    stack.push(Frame::Build(*op, 1));
                    stack.push(Frame::Visit(x));
                }
                Frame::Visit(Term::Binary(op, l, r)) => {
                    stack.push(Frame::Build(*op, 2));
                    stack.push(Frame::Visit(r));
                    stack.push(Frame::Visit(l));
                }
                Frame::Build(op, 1) => {
                    let x = out.pop().expect("child");
                    out.push(Term::Unary(op, Box::new(x)));
                }
                Frame::Build(op, _) => {
                    let r = out.pop().expect("child");
                    let l = out.pop().expect("child");
                    out.push(Term::Binary(op, Box::new(l), Box::new(r)));
                }
            }
        }
        out.pop().expect("root")
    }
}

impl Drop for Term {
    fn drop(&mut self) {
        // Steal children onto an explicit stack; the default recursive
        // drop overflows on deep chains.
        fn detach(t: &mut Term, stack: &mut Vec<Term>) {
            match t {
                Term::Const(_) => {}
                Term::Unary(_, x) => stack.push(std::mem::replace(x.as_mut(), Term::Const('0'))),
                Term::Binary(_, l, r) => {
                    stack.push(std::mem::replace(l.as_mut(), Term::Const('0')));
                    stack.push(std::mem::replace(r.as_mut(), Term::Const('0')));
                }
            }
        }
        if matches!(self, Term::Const(_)) {
            return;
        }
        let mut stack: Vec<Term> = Vec::new();
        detach(self, &mut stack);
        while let Some(mut t) = stack.pop() {
            detach(&mut t, &mut stack);
        }
    }
}

impl Term {
    pub fn sym(c: char) -> Term {
        Term::Const(c)
    }

    pub fn not(t: Term) -> Term {
        Term::Unary(NOT, Box::new(t))
    }

    pub fn and(l: Term, r: Term) -> Term {
        Term::Binary(AND, Box::new(l), Box::new(r))
    }

    pub fn or(l: Term, r: Term) -> Term {
        Term::Binary(OR, Box::new(l), Box::new(r))
    }

    /// Number of symbols of the term written in Polish notation, i.e. its
    /// node count.
    pub fn polish_size(&self) -> usize {
        let mut count = 0usize;
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            count += 1;
            match t {
                Term::Const(_) => {}
                Term::Unary(_, x) => stack.push(x),
                Term::Binary(_, l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        count
    }

    /// Distinct letter tokens occurring in the term, sorted.
    pub fn letters(&self) -> Vec<char> {
        let mut seen = [false; 26];
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Const(c) => {
                    if c.is_ascii_lowercase() && LETTERS.contains(*c) {
                        seen[(*c as u8 - b'a') as usize] = true;
                    }
                }
                Term::Unary(_, x) => stack.push(x),
                Term::Binary(_, l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        (0..26)
            .filter(|&i| seen[i])
            .map(|i| (b'a' + i as u8) as char)
            .collect()
    }

    /// Distinct variable tokens (`x`, `y`, `z`) occurring in the term.
    pub fn variables(&self) -> Vec<char> {
        let mut seen = [false; 3];
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Term::Const(c) => {
                    if let Some(k) = VARIABLES.iter().position(|v| v == c) {
                        seen[k] = true;
                    }
                }
                Term::Unary(_, x) => stack.push(x),
                Term::Binary(_, l, r) => {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        (0..3).filter(|&k| seen[k]).map(|k| VARIABLES[k]).collect()
    }

    /// Replaces variable tokens by the given terms; used when checking
    /// axioms against the boolean semantics.
    pub fn instantiate(&self, map: &[(char, Term)]) -> Term {
        match self {
            Term::Const(c) => map
                .iter()
                .find(|(v, _)| v == c)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| self.clone()),
            Term::Unary(op, x) => Term::Unary(*op, Box::new(x.instantiate(map))),
            Term::Binary(op, l, r) => Term::Binary(
                *op,
                Box::new(l.instantiate(map)),
                Box::new(r.instantiate(map)),
            ),
        }
    }

    /// Standard boolean semantics: `.` is AND, `+` is OR, `!` is NOT.
    pub fn evaluate(&self, assignment: &TruthAssignment) -> Result<bool, EvalError> {
        enum Frame<'a> {
            Visit(&'a Term),
            Negate,
            Combine(char),
        }
        let mut values: Vec<bool> = Vec::new();
        let mut stack = vec![Frame::Visit(self)];
        while let Some(frame) = stack.pop() {
            match frame {
                Frame::Visit(t) => match t {
                    Term::Const('0') => values.push(false),
                    Term::Const('1') => values.push(true),
                    Term::Const(c) => match assignment.get(*c) {
                        Some(b) => values.push(b),
                        None => return Err(EvalError::UnboundLetter(*c)),
                    },
                    Term::Unary(op, x) => {
                        if *op != NOT {
                            return Err(EvalError::UnknownSymbol(*op));
                        }
                        stack.push(Frame::Negate);
                        stack.push(Frame::Visit(x));
                    }
                    Term::Binary(op, l, r) => {
                        if *op != AND && *op != OR {
                            return Err(EvalError::UnknownSymbol(*op));
                        }
                        stack.push(Frame::Combine(*op));
                        stack.push(Frame::Visit(r));
                        stack.push(Frame::Visit(l));
                    }
                },
                Frame::Negate => {
                    let a = values.pop().expect("value stack");
                    values.push(!a);
                }
                Frame::Combine(op) => {
                    let b = values.pop().expect("value stack");
                    let a = values.pop().expect("value stack");
                    values.push(if op == AND { a && b } else { a || b });
                }
            }
        }
        Ok(values.pop().expect("value stack"))
    }
}

/// Maps letters to truth values.
#[derive(Debug, Clone, Default)]
pub struct TruthAssignment {
    bits: [Option<bool>; 26],
}

impl TruthAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assignment for the given letters taken from the bits of `pattern`
    /// (letter `letters[k]` gets bit `k`).
    pub fn from_bits(letters: &[char], pattern: u32) -> Self {
        let mut a = Self::new();
        for (k, &c) in letters.iter().enumerate() {
            a.set(c, pattern >> k & 1 == 1);
        }
        a
    }

    pub fn set(&mut self, letter: char, value: bool) {
        self.bits[(letter as u8 - b'a') as usize] = Some(value);
    }

    pub fn get(&self, letter: char) -> Option<bool> {
        if !letter.is_ascii_lowercase() {
            return None;
        }
        self.bits[(letter as u8 - b'a') as usize]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("letter '{0}' has no truth value")]
    UnboundLetter(char),
    #[error("symbol '{0}' has no boolean meaning")]
    UnknownSymbol(char),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("syntax error at byte {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

/// Parses an expression over letters `a`..`p` and constants `0`/`1`.
pub fn parse(text: &str) -> Result<Term, SyntaxError> {
    Parser::new(text, false).run()
}

/// Parses an axiom-side pattern: like [`parse`] but also admits the
/// variable tokens `x`, `y`, `z`.
pub fn parse_pattern(text: &str) -> Result<Term, SyntaxError> {
    Parser::new(text, true).run()
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    allow_vars: bool,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, allow_vars: bool) -> Self {
        Parser {
            text: text.as_bytes(),
            pos: 0,
            allow_vars,
        }
    }

    fn run(mut self) -> Result<Term, SyntaxError> {
        self.skip_ws();
        if self.pos == self.text.len() {
            return Err(self.err("empty expression"));
        }
        let t = self.sum()?;
        self.skip_ws();
        if self.pos != self.text.len() {
            return Err(self.err(&format!("unexpected '{}'", self.text[self.pos] as char)));
        }
        Ok(t)
    }

    fn err(&self, message: &str) -> SyntaxError {
        SyntaxError {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.text.get(self.pos).copied()
    }

    fn is_atom_start(&self, c: u8) -> bool {
        let c = c as char;
        c == '(' || c == NOT || c == '0' || c == '1' || LETTERS.contains(c)
            || (self.allow_vars && VARIABLES.contains(&c))
    }

    fn sum(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.product()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            let rhs = self.product()?;
            t = Term::or(t, rhs);
        }
        Ok(t)
    }

    fn product(&mut self) -> Result<Term, SyntaxError> {
        let mut t = self.factor()?;
        loop {
            match self.peek() {
                Some(b'.') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    t = Term::and(t, rhs);
                }
                Some(c) if self.is_atom_start(c) => {
                    let rhs = self.factor()?;
                    t = Term::and(t, rhs);
                }
                _ => return Ok(t),
            }
        }
    }

    fn factor(&mut self) -> Result<Term, SyntaxError> {
        // Count a run of negations, then wrap the atom; avoids recursing
        // on long `!!!...` chains.
        let mut negations = 0usize;
        while self.peek() == Some(NOT as u8) {
            self.pos += 1;
            negations += 1;
        }
        let mut t = self.atom()?;
        for _ in 0..negations {
            t = Term::not(t);
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            None => Err(self.err("expected an operand")),
            Some(b'(') => {
                self.pos += 1;
                let t = self.sum()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("unbalanced parenthesis"));
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) if self.is_atom_start(c) && c != NOT as u8 => {
                self.pos += 1;
                Ok(Term::Const(c as char))
            }
            Some(c) => Err(self.err(&format!("unknown token '{}'", c as char))),
        }
    }
}

impl fmt::Display for Term {
    /// Emits the concrete syntax with minimal parentheses: products by
    /// juxtaposition, sums with `+`. `parse(print(t))` is structurally `t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        enum Step<'a> {
            Term(&'a Term),
            Text(&'static str),
        }
        let mut stack = vec![Step::Term(self)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Text(s) => f.write_str(s)?,
                Step::Term(Term::Const(c)) => write!(f, "{c}")?,
                Step::Term(Term::Unary(_, x)) => {
                    f.write_str("!")?;
                    if matches!(**x, Term::Binary(..)) {
                        stack.push(Step::Text(")"));
                        stack.push(Step::Term(x));
                        stack.push(Step::Text("("));
                    } else {
                        stack.push(Step::Term(x));
                    }
                }
                Step::Term(Term::Binary(op, l, r)) => {
                    let (sep, wrap_l, wrap_r) = if *op == OR {
                        (" + ", false, matches!(**r, Term::Binary(OR, ..)))
                    } else {
                        ("", matches!(**l, Term::Binary(OR, ..)), matches!(**r, Term::Binary(..)))
                    };
                    if wrap_r {
                        stack.push(Step::Text(")"));
                        stack.push(Step::Term(r));
                        stack.push(Step::Text("("));
                    } else {
                        stack.push(Step::Term(r));
                    }
                    stack.push(Step::Text(sep));
                    if wrap_l {
                        stack.push(Step::Text(")"));
                        stack.push(Step::Term(l));
                        stack.push(Step::Text("("));
                    } else {
                        stack.push(Step::Term(l));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn sums_associate_left() {
        // a + b + !b + a groups as ((a + b) + !b) + a.
        let t = p("a + b + !b + a");
        let expected = Term::or(
            Term::or(Term::or(Term::sym('a'), Term::sym('b')), Term::not(Term::sym('b'))),
            Term::sym('a'),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn single_letter() {
        assert_eq!(p("a"), Term::sym('a'));
    }

    #[test]
    fn juxtaposition_binds_tighter_than_sum() {
        let t = p("!(a + b)c");
        let expected = Term::and(
            Term::not(Term::or(Term::sym('a'), Term::sym('b'))),
            Term::sym('c'),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn explicit_dot_is_juxtaposition() {
        assert_eq!(p("a.b"), p("ab"));
        assert_eq!(p("a . b c"), p("abc"));
    }

    #[test]
    fn negation_binds_tightest() {
        assert_eq!(p("!ab"), Term::and(Term::not(Term::sym('a')), Term::sym('b')));
        assert_eq!(p("!!b"), Term::not(Term::not(Term::sym('b'))));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = parse("(").unwrap_err();
        assert_eq!(e.position, 1);
        let e = parse("a +").unwrap_err();
        assert!(e.message.contains("operand"));
        let e = parse("aq").unwrap_err();
        assert_eq!(e.position, 1);
        assert!(e.message.contains("unknown") || e.message.contains("unexpected"));
        assert!(parse("   ").is_err());
        let e = parse("a)b").unwrap_err();
        assert_eq!(e.position, 1);
    }

    #[test]
    fn variables_only_in_patterns() {
        assert!(parse("x + y").is_err());
        let t = parse_pattern("x + y").unwrap();
        assert_eq!(t, Term::or(Term::sym('x'), Term::sym('y')));
    }

    #[test]
    fn print_examples() {
        let t = Term::and(
            Term::not(Term::or(Term::sym('a'), Term::sym('b'))),
            Term::sym('c'),
        );
        assert_eq!(t.to_string(), "!(a + b)c");
        assert_eq!(Term::sym('1').to_string(), "1");
        assert_eq!(p("a + (b + c)").to_string(), "a + (b + c)");
        assert_eq!(p("a(bc)").to_string(), "a(bc)");
        assert_eq!(p("abc").to_string(), "abc");
        assert_eq!(p("a!b").to_string(), "a!b");
        assert_eq!(p("(a + !b)(c + !(da))").to_string(), "(a + !b)(c + !(da))");
    }

    #[test]
    fn polish_sizes() {
        assert_eq!(p("a + ab").polish_size(), 5);
        assert_eq!(p("a").polish_size(), 1);
        // Size pin for a 9-letter expression.
        assert_eq!(
            p("b + (g + a)d + i + !(hfe(d + ag!c))").polish_size(),
            25
        );
    }

    #[test]
    fn size_is_additive() {
        let l = p("a + b");
        let r = p("!c");
        assert_eq!(
            Term::and(l.clone(), r.clone()).polish_size(),
            1 + l.polish_size() + r.polish_size()
        );
    }

    #[test]
    fn evaluate_basics() {
        let mut v = TruthAssignment::new();
        v.set('a', false);
        assert_eq!(p("a + !a").evaluate(&v), Ok(true));
        v.set('a', true);
        assert_eq!(p("a . 0").evaluate(&v), Ok(false));
        assert_eq!(
            p("ab").evaluate(&v),
            Err(EvalError::UnboundLetter('b'))
        );
    }

    #[test]
    fn de_morgan_semantically() {
        let lhs = p("!(ab)");
        let rhs = p("!a + !b");
        for bits in 0..4u32 {
            let v = TruthAssignment::from_bits(&['a', 'b'], bits);
            assert_eq!(lhs.evaluate(&v), rhs.evaluate(&v));
        }
    }

    #[test]
    fn deep_input_roundtrip() {
        // A long left-associated chain exercises the iterative traversals.
        let n = 30_000;
        let mut s = String::from("a");
        for _ in 0..n {
            s.push_str("+a");
        }
        let t = p(&s);
        assert_eq!(t.polish_size(), 2 * n + 1);
        let printed = t.to_string();
        assert_eq!(parse(&printed).unwrap(), t);
        let v = TruthAssignment::from_bits(&['a'], 1);
        assert_eq!(t.evaluate(&v), Ok(true));
    }
}
