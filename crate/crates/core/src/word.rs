//! Finite words over the alphabet `{1, …, N}` and their combinatorics.
//!
//! A word addresses a cell of the fractal; the empty word addresses the whole
//! attractor and doubles as the root state of the Markov chain. Words compare
//! lexicographically with the prefix ordering first, which is the canonical
//! iteration and table order everywhere in this crate.

use std::fmt;

use crate::error::Error;

/// A finite letter sequence; letters are 1-based and stored as bytes.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u8>);

impl Word {
    /// The empty word `∅`.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        Word(letters.to_vec())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Drops the last letter; `None` on the empty word.
    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// The last letter `τ(w)`; `None` on the empty word.
    pub fn last_letter(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Concatenation; the empty word is the neutral element on both sides.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Appends a single letter.
    pub fn child(&self, letter: u8) -> Word {
        let mut v = self.0.clone();
        v.push(letter);
        Word(v)
    }

    /// First `n` letters (all of them when `n ≥ len`).
    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn ends_with(&self, suffix: &Word) -> bool {
        self.0.ends_with(&suffix.0)
    }

    /// Checks all letters lie in `1..=alphabet`.
    pub fn validate(&self, alphabet: usize) -> Result<(), Error> {
        for &l in &self.0 {
            if l == 0 || l as usize > alphabet {
                return Err(Error::InvalidLetter { letter: l, alphabet });
            }
        }
        Ok(())
    }

    /// Parses the textual syntax: juxtaposed digits for `N ≤ 9`
    /// (`"122"`), comma-separated integers otherwise (`"10,3,12"`);
    /// `"-"` denotes the empty word.
    pub fn parse(text: &str, alphabet: usize) -> Result<Word, Error> {
        let t = text.trim();
        if t == "-" || t.is_empty() {
            return Ok(Word::empty());
        }
        let letters: Vec<u8> = if alphabet <= 9 {
            t.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::WordParse(text.to_string()))
                })
                .collect::<Result<_, _>>()?
        } else {
            t.split(',')
                .map(|p| {
                    p.trim()
                        .parse::<u8>()
                        .map_err(|_| Error::WordParse(text.to_string()))
                })
                .collect::<Result<_, _>>()?
        };
        let w = Word(letters);
        w.validate(alphabet)?;
        Ok(w)
    }

    /// Renders in the textual syntax for an alphabet of size `alphabet`.
    pub fn render(&self, alphabet: usize) -> String {
        if self.0.is_empty() {
            return "-".to_string();
        }
        if alphabet <= 9 {
            self.0.iter().map(|l| l.to_string()).collect()
        } else {
            self.0
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(9))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(9))
    }
}

/// `d(v, w) = |w| − |v|`; negative when `w` is shorter.
pub fn gap(v: &Word, w: &Word) -> i64 {
    w.len() as i64 - v.len() as i64
}

/// All `N^n` words of length `n` in lexicographic order; `n = 0` gives `[∅]`.
pub fn enumerate_level(n: usize, alphabet: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * alphabet);
        for w in &out {
            for a in 1..=alphabet as u8 {
                next.push(w.child(a));
            }
        }
        out = next;
    }
    out
}

/// An infinite word given by its prefixes: either an eventually-periodic
/// pattern `head · cycle^∞` or an explicit prefix chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfiniteWord {
    Periodic { head: Word, cycle: Word },
    /// Explicit prefixes; entry `i` must have length `i + 1` and extend entry `i − 1`.
    Explicit(Vec<Word>),
}

impl InfiniteWord {
    pub fn periodic(head: Word, cycle: Word) -> Result<Self, Error> {
        if cycle.is_empty() {
            return Err(Error::WordParse("empty cycle in periodic word".into()));
        }
        Ok(InfiniteWord::Periodic { head, cycle })
    }

    /// The restriction `w|_n` to the first `n` letters.
    ///
    /// For explicit prefix lists, `n` beyond the stored chain keeps the last entry.
    pub fn prefix(&self, n: usize) -> Word {
        match self {
            InfiniteWord::Periodic { head, cycle } => {
                let mut letters = Vec::with_capacity(n);
                letters.extend_from_slice(head.letters());
                while letters.len() < n {
                    letters.extend_from_slice(cycle.letters());
                }
                letters.truncate(n);
                Word(letters)
            }
            InfiniteWord::Explicit(prefixes) => {
                if n == 0 {
                    Word::empty()
                } else {
                    prefixes[(n - 1).min(prefixes.len() - 1)].prefix(n)
                }
            }
        }
    }

    /// Parses `head(cycle)` syntax, e.g. `1(2)` for `1·2^∞` and `(12)` for `(12)^∞`.
    pub fn parse(text: &str, alphabet: usize) -> Result<Self, Error> {
        let t = text.trim();
        let open = t.find('(').ok_or_else(|| Error::WordParse(t.to_string()))?;
        if !t.ends_with(')') {
            return Err(Error::WordParse(t.to_string()));
        }
        let head = Word::parse(&t[..open], alphabet)?;
        let cycle = Word::parse(&t[open + 1..t.len() - 1], alphabet)?;
        InfiniteWord::periodic(head, cycle)
    }

    pub fn render(&self, alphabet: usize) -> String {
        match self {
            InfiniteWord::Periodic { head, cycle } => {
                let h = if head.is_empty() {
                    String::new()
                } else {
                    head.render(alphabet)
                };
                format!("{}({})", h, cycle.render(alphabet))
            }
            InfiniteWord::Explicit(prefixes) => match prefixes.last() {
                Some(w) => format!("{}…", w.render(alphabet)),
                None => "-…".to_string(),
            },
        }
    }
}
