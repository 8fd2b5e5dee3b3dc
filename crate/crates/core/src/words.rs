//! Exact reduced-word arithmetic.
//!
//! Two alphabet modes, never mixed inside one word: free letters `s1, s2, …`
//! with formal inverses (rendered `S1, S2, …`), and involutive letters
//! `a1, a2, …` that square to the identity. Words are immutable,
//! cancellation-free symbol sequences; the empty word is the identity and
//! is compatible with both modes.

use crate::budget::{check, BudgetExceeded};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlphabetMode {
    Free,
    Involutive,
}

/// A single generator letter. Field order drives the enumeration order:
/// `s1 < S1 < s2 < S2` and `a1 < a2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    generator_id: u32,
    inverted: bool,
    involutive: bool,
}

impl Symbol {
    /// Free letter `s<id>`; ids start at 1.
    pub fn free(id: u32) -> Symbol {
        assert!(id >= 1, "generator ids start at 1");
        Symbol { generator_id: id, inverted: false, involutive: false }
    }

    /// Inverse free letter `S<id>`.
    pub fn free_inverse(id: u32) -> Symbol {
        assert!(id >= 1, "generator ids start at 1");
        Symbol { generator_id: id, inverted: true, involutive: false }
    }

    /// Order-2 letter `a<id>`; never carries the inverted flag.
    pub fn involutive(id: u32) -> Symbol {
        assert!(id >= 1, "generator ids start at 1");
        Symbol { generator_id: id, inverted: false, involutive: true }
    }

    pub fn generator_id(&self) -> u32 {
        self.generator_id
    }

    pub fn is_inverted(&self) -> bool {
        self.inverted
    }

    pub fn is_involutive(&self) -> bool {
        self.involutive
    }

    pub fn mode(&self) -> AlphabetMode {
        if self.involutive { AlphabetMode::Involutive } else { AlphabetMode::Free }
    }

    pub fn inverse(&self) -> Symbol {
        if self.involutive {
            *self
        } else {
            Symbol { inverted: !self.inverted, ..*self }
        }
    }

    /// Whether `self · other` cancels to the identity.
    pub fn cancels(&self, other: &Symbol) -> bool {
        *other == self.inverse()
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match (self.involutive, self.inverted) {
            (true, _) => 'a',
            (false, false) => 's',
            (false, true) => 'S',
        };
        write!(f, "{letter}{}", self.generator_id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("free and involutive symbols cannot mix in one word")]
    MixedAlphabet,
    #[error("cannot parse word token `{0}`")]
    Parse(String),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// A cancellation-free word. Equality is exact group-element equality
/// within a fixed alphabet mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord {
    symbols: Vec<Symbol>,
}

impl ReducedWord {
    pub fn identity() -> ReducedWord {
        ReducedWord { symbols: Vec::new() }
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `None` for the identity, which belongs to every alphabet.
    pub fn mode(&self) -> Option<AlphabetMode> {
        self.symbols.first().map(Symbol::mode)
    }

    pub fn single(sym: Symbol) -> ReducedWord {
        ReducedWord { symbols: vec![sym] }
    }

    pub fn inverse(&self) -> ReducedWord {
        // The reversed, letterwise-inverted sequence of a reduced word is
        // already reduced.
        ReducedWord { symbols: self.symbols.iter().rev().map(Symbol::inverse).collect() }
    }

    pub fn concat(&self, other: &ReducedWord) -> Result<ReducedWord, WordError> {
        let tokens: Vec<Symbol> =
            self.symbols.iter().chain(other.symbols.iter()).copied().collect();
        reduce(&tokens)
    }

    /// `self^n` for any integer exponent.
    pub fn power(&self, n: i64) -> Result<ReducedWord, WordError> {
        let base = if n >= 0 { self.clone() } else { self.inverse() };
        let mut acc = ReducedWord::identity();
        for _ in 0..n.unsigned_abs() {
            acc = acc.concat(&base)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.symbols {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
            first = false;
        }
        Ok(())
    }
}

/// Frees a token sequence of all adjacent cancellations. Idempotent; the
/// unique cancellation-free form of the input.
pub fn reduce(tokens: &[Symbol]) -> Result<ReducedWord, WordError> {
    let mut mode: Option<AlphabetMode> = None;
    for t in tokens {
        match mode {
            None => mode = Some(t.mode()),
            Some(m) if m != t.mode() => return Err(WordError::MixedAlphabet),
            _ => {}
        }
    }
    let mut stack: Vec<Symbol> = Vec::with_capacity(tokens.len());
    for &t in tokens {
        if stack.last().is_some_and(|top| top.cancels(&t)) {
            stack.pop();
        } else {
            stack.push(t);
        }
    }
    Ok(ReducedWord { symbols: stack })
}

/// Parses whitespace-separated tokens like `s1 S2 s1` or `a1 a2`; the empty
/// string is the identity. Reduces the result.
pub fn parse_word(text: &str) -> Result<ReducedWord, WordError> {
    let mut tokens = Vec::new();
    for tok in text.split_whitespace() {
        tokens.push(parse_symbol(tok)?);
    }
    reduce(&tokens)
}

pub fn parse_symbol(tok: &str) -> Result<Symbol, WordError> {
    let bad = || WordError::Parse(tok.to_string());
    let mut chars = tok.chars();
    let head = chars.next().ok_or_else(bad)?;
    let id: u32 = chars.as_str().parse().map_err(|_| bad())?;
    if id == 0 {
        return Err(bad());
    }
    match head {
        's' => Ok(Symbol::free(id)),
        'S' => Ok(Symbol::free_inverse(id)),
        'a' => Ok(Symbol::involutive(id)),
        _ => Err(bad()),
    }
}

/// All reduced words of length at most `r` over the alphabet, each once,
/// ordered by (length, lexicographic). For a free alphabet the listed
/// generators are closed under inverse automatically.
pub fn enumerate_ball(
    alphabet: &[Symbol],
    r: usize,
    cap: usize,
) -> Result<Vec<ReducedWord>, WordError> {
    let mut letters: Vec<Symbol> = Vec::new();
    let mut mode: Option<AlphabetMode> = None;
    for s in alphabet {
        match mode {
            None => mode = Some(s.mode()),
            Some(m) if m != s.mode() => return Err(WordError::MixedAlphabet),
            _ => {}
        }
        letters.push(*s);
        if !s.is_involutive() {
            letters.push(s.inverse());
        }
    }
    letters.sort();
    letters.dedup();

    let mut out = vec![ReducedWord::identity()];
    let mut level: Vec<ReducedWord> = vec![ReducedWord::identity()];
    for _ in 0..r {
        let mut next = Vec::new();
        for w in &level {
            for &s in &letters {
                if w.symbols.last().is_some_and(|last| last.cancels(&s)) {
                    continue;
                }
                check("word enumeration", (out.len() + next.len() + 1) as u128, cap as u128)?;
                let mut symbols = w.symbols.clone();
                symbols.push(s);
                next.push(ReducedWord { symbols });
            }
        }
        out.extend(next.iter().cloned());
        level = next;
        if level.is_empty() {
            break;
        }
    }
    Ok(out)
}
