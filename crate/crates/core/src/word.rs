//! Reduced words in two generators `A`, `B` and their inverses.
//!
//! A word is stored in canonical block form `A^{a_1} B^{b_1} ... A^{a_m} B^{b_m}`:
//! only the first block may carry a zero `A`-exponent (word starts with `B`)
//! and only the last a zero `B`-exponent (word ends with `A`); interior
//! exponents are nonzero. The text format uses the letters `A a B b` for
//! `A`, `A^-1`, `B`, `B^-1`.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid character {0:?} in word (expected one of A a B b)")]
    BadChar(char),
    #[error("commutator tower collapsed at level {level}: reduced length {got}, expected {expected}")]
    Collapse { level: u32, got: u64, expected: u64 },
    #[error("sign vector supplies {got} levels, tower of depth {need} needs {need}")]
    SignLength { got: usize, need: usize },
    #[error("sign entry must be '+' or '-', got {0:?}")]
    BadSign(char),
}

/// One letter of a word. The derived ordering `A < A^-1 < B < B^-1` is the
/// alphabet order used by the deterministic enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    A,
    AInv,
    B,
    BInv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Gen {
    A,
    B,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::A, Letter::AInv, Letter::B, Letter::BInv];

    pub fn inverse(self) -> Letter {
        match self {
            Letter::A => Letter::AInv,
            Letter::AInv => Letter::A,
            Letter::B => Letter::BInv,
            Letter::BInv => Letter::B,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::AInv => 'a',
            Letter::B => 'B',
            Letter::BInv => 'b',
        }
    }

    pub fn from_char(c: char) -> Result<Letter, WordError> {
        match c {
            'A' => Ok(Letter::A),
            'a' => Ok(Letter::AInv),
            'B' => Ok(Letter::B),
            'b' => Ok(Letter::BInv),
            other => Err(WordError::BadChar(other)),
        }
    }

    fn run(self) -> (Gen, i64) {
        match self {
            Letter::A => (Gen::A, 1),
            Letter::AInv => (Gen::A, -1),
            Letter::B => (Gen::B, 1),
            Letter::BInv => (Gen::B, -1),
        }
    }
}

/// A reduced word in canonical block form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    blocks: Vec<(i64, i64)>,
}

impl Word {
    pub fn empty() -> Word {
        Word { blocks: Vec::new() }
    }

    pub fn gen_a() -> Word {
        Word { blocks: vec![(1, 0)] }
    }

    pub fn gen_b() -> Word {
        Word { blocks: vec![(0, 1)] }
    }

    /// Reduces an arbitrary run sequence to canonical block form.
    fn from_runs<I: IntoIterator<Item = (Gen, i64)>>(runs: I) -> Word {
        let mut stack: Vec<(Gen, i64)> = Vec::new();
        for (g, e) in runs {
            if e == 0 {
                continue;
            }
            match stack.last_mut() {
                Some((tg, te)) if *tg == g => {
                    *te += e;
                    if *te == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push((g, e)),
            }
        }
        let mut blocks: Vec<(i64, i64)> = Vec::new();
        let mut pending_a: Option<i64> = None;
        for (g, e) in stack {
            match g {
                Gen::A => {
                    debug_assert!(pending_a.is_none());
                    pending_a = Some(e);
                }
                Gen::B => {
                    blocks.push((pending_a.take().unwrap_or(0), e));
                }
            }
        }
        if let Some(a) = pending_a {
            blocks.push((a, 0));
        }
        Word { blocks }
    }

    fn runs(&self) -> Vec<(Gen, i64)> {
        let mut out = Vec::with_capacity(2 * self.blocks.len());
        for &(a, b) in &self.blocks {
            if a != 0 {
                out.push((Gen::A, a));
            }
            if b != 0 {
                out.push((Gen::B, b));
            }
        }
        out
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        Word::from_runs(letters.into_iter().map(Letter::run))
    }

    /// Reduces an arbitrary block list (exponents may be zero or mergeable).
    pub fn from_blocks<I: IntoIterator<Item = (i64, i64)>>(blocks: I) -> Word {
        Word::from_runs(blocks.into_iter().flat_map(|(a, b)| [(Gen::A, a), (Gen::B, b)]))
    }

    pub fn parse(s: &str) -> Result<Word, WordError> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            letters.push(Letter::from_char(c)?);
        }
        Ok(Word::from_letters(letters))
    }

    pub fn blocks(&self) -> &[(i64, i64)] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Word length `sum_p (|a_p| + |b_p|)`.
    pub fn len(&self) -> u64 {
        self.blocks
            .iter()
            .map(|&(a, b)| a.unsigned_abs() + b.unsigned_abs())
            .sum()
    }

    /// Total weight of the `A`-exponents, `sum_p |a_p|`.
    pub fn a_weight(&self) -> u64 {
        self.blocks.iter().map(|&(a, _)| a.unsigned_abs()).sum()
    }

    pub fn b_weight(&self) -> u64 {
        self.blocks.iter().map(|&(_, b)| b.unsigned_abs()).sum()
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(self.len() as usize);
        for (g, e) in self.runs() {
            let letter = match (g, e > 0) {
                (Gen::A, true) => Letter::A,
                (Gen::A, false) => Letter::AInv,
                (Gen::B, true) => Letter::B,
                (Gen::B, false) => Letter::BInv,
            };
            for _ in 0..e.unsigned_abs() {
                out.push(letter);
            }
        }
        out
    }

    pub fn inverse(&self) -> Word {
        Word::from_runs(self.runs().into_iter().rev().map(|(g, e)| (g, -e)))
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::from_runs(self.runs().into_iter().chain(other.runs()))
    }

    pub fn commutator(a: &Word, b: &Word) -> Word {
        a.concat(b).concat(&a.inverse()).concat(&b.inverse())
    }

    /// True when the block list satisfies the canonical-form constraints.
    pub fn is_canonical(&self) -> bool {
        let m = self.blocks.len();
        for (p, &(a, b)) in self.blocks.iter().enumerate() {
            if a == 0 && (p > 0 || b == 0) {
                return false;
            }
            if b == 0 && p + 1 < m {
                return false;
            }
        }
        true
    }
}

impl std::ops::Mul for &Word {
    type Output = Word;
    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// Number of reduced words of length exactly `n`: `4 * 3^(n-1)`.
pub fn count_reduced(n: u32) -> u64 {
    if n == 0 {
        1
    } else {
        4 * 3u64.pow(n - 1)
    }
}

/// Streams every reduced word of length exactly `n`, each once, in
/// lexicographic order over the letter sequence (alphabet `A a B b`).
/// For `n = 0` the stream holds just the empty word.
pub fn enumerate(n: u32) -> Enumerator {
    Enumerator {
        n: n as usize,
        letters: Vec::new(),
        started: false,
        done: false,
    }
}

pub struct Enumerator {
    n: usize,
    letters: Vec<Letter>,
    started: bool,
    done: bool,
}

impl Enumerator {
    fn first_valid(prev: Option<Letter>) -> Letter {
        for &l in &Letter::ALL {
            if prev.map_or(true, |p| p.inverse() != l) {
                return l;
            }
        }
        unreachable!()
    }

    fn next_valid(prev: Option<Letter>, after: Letter) -> Option<Letter> {
        for &l in &Letter::ALL {
            if l > after && prev.map_or(true, |p| p.inverse() != l) {
                return Some(l);
            }
        }
        None
    }
}

impl Iterator for Enumerator {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.done = self.n == 0;
            self.letters = vec![Letter::A; self.n];
            return Some(Word::from_letters(self.letters.iter().copied()));
        }
        // Odometer step: bump the rightmost position that still has a valid
        // successor, then refill everything after it with the smallest
        // valid letters.
        let mut i = self.n;
        loop {
            if i == 0 {
                self.done = true;
                return None;
            }
            i -= 1;
            let prev = if i > 0 { Some(self.letters[i - 1]) } else { None };
            if let Some(next) = Self::next_valid(prev, self.letters[i]) {
                self.letters[i] = next;
                for j in i + 1..self.n {
                    self.letters[j] = Self::first_valid(Some(self.letters[j - 1]));
                }
                return Some(Word::from_letters(self.letters.iter().copied()));
            }
        }
    }
}

/// Sign choices for the commutator tower. `base_a`/`base_b` pick the powers
/// of the two seed rotations; each level picks the powers used inside the
/// two commutators `next_a = [a^{a_first}, b^{a_second}]` and
/// `next_b = [b^{b_first}, a^{b_second}]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerSigns {
    pub base_a: i8,
    pub base_b: i8,
    pub levels: Vec<LevelSigns>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelSigns {
    pub a_first: i8,
    pub a_second: i8,
    pub b_first: i8,
    pub b_second: i8,
}

impl TowerSigns {
    /// Default non-collapsing choice: `next_a = [a, b]`, `next_b = [b^-1, a^-1]`.
    pub fn standard(k: u32) -> TowerSigns {
        TowerSigns {
            base_a: 1,
            base_b: 1,
            levels: vec![
                LevelSigns { a_first: 1, a_second: 1, b_first: -1, b_second: -1 };
                k as usize
            ],
        }
    }

    /// Parses the text form `++|++--|++--`: two base signs, then four signs
    /// per level separated by `|`.
    pub fn parse(s: &str) -> Result<TowerSigns, WordError> {
        fn sign(c: char) -> Result<i8, WordError> {
            match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(WordError::BadSign(other)),
            }
        }
        let mut parts = s.split('|');
        let base: Vec<char> = parts.next().unwrap_or("").chars().collect();
        if base.len() != 2 {
            return Err(WordError::BadSign(*base.first().unwrap_or(&'?')));
        }
        let mut signs = TowerSigns {
            base_a: sign(base[0])?,
            base_b: sign(base[1])?,
            levels: Vec::new(),
        };
        for part in parts {
            let cs: Vec<char> = part.chars().collect();
            if cs.len() != 4 {
                return Err(WordError::BadSign(*cs.first().unwrap_or(&'?')));
            }
            signs.levels.push(LevelSigns {
                a_first: sign(cs[0])?,
                a_second: sign(cs[1])?,
                b_first: sign(cs[2])?,
                b_second: sign(cs[3])?,
            });
        }
        Ok(signs)
    }
}

impl fmt::Display for TowerSigns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s: i8| if s > 0 { '+' } else { '-' };
        write!(f, "{}{}", c(self.base_a), c(self.base_b))?;
        for l in &self.levels {
            write!(
                f,
                "|{}{}{}{}",
                c(l.a_first),
                c(l.a_second),
                c(l.b_first),
                c(l.b_second)
            )?;
        }
        Ok(())
    }
}

fn powered(w: &Word, s: i8) -> Word {
    if s > 0 {
        w.clone()
    } else {
        w.inverse()
    }
}

/// Builds the level-`k` element of the commutator tower. Both tracks must
/// stay fully reduced (length `4^level`) at every level; sign choices that
/// cancel to a shorter word are rejected.
pub fn commutator_tower(k: u32, signs: &TowerSigns) -> Result<Word, WordError> {
    if signs.levels.len() < k as usize {
        return Err(WordError::SignLength {
            got: signs.levels.len(),
            need: k as usize,
        });
    }
    let mut a = powered(&Word::gen_a(), signs.base_a);
    let mut b = powered(&Word::gen_b(), signs.base_b);
    for level in 0..k {
        let ls = signs.levels[level as usize];
        let na = Word::commutator(&powered(&a, ls.a_first), &powered(&b, ls.a_second));
        let nb = Word::commutator(&powered(&b, ls.b_first), &powered(&a, ls.b_second));
        let expected = 4u64.pow(level + 1);
        if na.len() != expected {
            return Err(WordError::Collapse {
                level: level + 1,
                got: na.len(),
                expected,
            });
        }
        if nb.len() != expected {
            return Err(WordError::Collapse {
                level: level + 1,
                got: nb.len(),
                expected,
            });
        }
        a = na;
        b = nb;
    }
    Ok(a)
}
