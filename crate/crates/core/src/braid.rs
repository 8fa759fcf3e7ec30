//! Braid words in Artin generators and the permutation of their closure.
//!
//! Letters act left to right on strand positions: reading the word left to
//! right is reading the diagram bottom to top.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BraidError {
    #[error("strand count must be at least 1")]
    NoStrands,
    #[error("unknown token {0:?} (expected sI, sI^-1 or sI^K)")]
    BadToken(String),
    #[error("generator s{index} out of range for {strands} strands")]
    OutOfRange { index: usize, strands: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Letter {
    /// 1-based generator index.
    pub index: usize,
    /// +1 or -1.
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BraidWord {
    pub strands: usize,
    pub letters: Vec<Letter>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    /// 1-based strand positions, starting at the smallest and following the cycle.
    pub strands: Vec<usize>,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureStructure {
    /// `permutation[i - 1]` is where the strand starting at position i ends (1-based).
    pub permutation: Vec<usize>,
    pub components: Vec<Component>,
}

pub fn parse_braid_word(text: &str, strands: usize) -> Result<BraidWord, BraidError> {
    if strands < 1 {
        return Err(BraidError::NoStrands);
    }
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let bad = || BraidError::BadToken(token.to_string());
        let body = token.strip_prefix('s').ok_or_else(bad)?;
        let (idx, exp) = match body.split_once('^') {
            Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad())?),
            None => (body, 1),
        };
        if idx.is_empty() || !idx.bytes().all(|b| b.is_ascii_digit()) || exp == 0 {
            return Err(bad());
        }
        let index: usize = idx.parse().map_err(|_| bad())?;
        if index < 1 || index >= strands {
            return Err(BraidError::OutOfRange { index, strands });
        }
        let sign = if exp > 0 { 1 } else { -1 };
        for _ in 0..exp.unsigned_abs() {
            letters.push(Letter { index, sign });
        }
    }
    Ok(BraidWord { strands, letters })
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<Letter>) -> Self {
        BraidWord { strands, letters }
    }

    /// Canonical text form, one token per letter.
    pub fn to_text(&self) -> String {
        self.letters
            .iter()
            .map(|l| {
                if l.sign > 0 {
                    format!("s{}", l.index)
                } else {
                    format!("s{}^-1", l.index)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// 0-based map from start position to end position.
    pub fn permutation0(&self) -> Vec<usize> {
        // slot[p] = strand currently at position p
        let mut slot: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            slot.swap(l.index - 1, l.index);
        }
        let mut end = vec![0; self.strands];
        for (pos, &strand) in slot.iter().enumerate() {
            end[strand] = pos;
        }
        end
    }
}

pub fn closure_structure(b: &BraidWord) -> ClosureStructure {
    let perm = b.permutation0();
    ClosureStructure {
        permutation: perm.iter().map(|p| p + 1).collect(),
        components: cycles(&perm)
            .into_iter()
            .map(|c| Component { size: c.len(), strands: c.iter().map(|p| p + 1).collect() })
            .collect(),
    }
}

/// Cycles of a 0-based permutation, each starting at its smallest element,
/// ordered by that element.
pub fn cycles(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut p = start;
        while !seen[p] {
            seen[p] = true;
            cycle.push(p);
            p = perm[p];
        }
        out.push(cycle);
    }
    out
}

/// Sorted cycle lengths; equal iff two permutations are conjugate.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut t: Vec<usize> = cycles(perm).iter().map(Vec::len).collect();
    t.sort_unstable();
    t
}

pub fn is_syntactic_square(b: &BraidWord) -> bool {
    let n = b.letters.len();
    n.is_multiple_of(2) && b.letters[..n / 2] == b.letters[n / 2..]
}
