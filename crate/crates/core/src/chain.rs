//! The weighted Markov chain on word space: mass distribution, transition
//! probabilities, n-step probabilities, Green function and q-function.
//!
//! The chain moves from a word `v` to the children of its class: states
//! `w = v̂i` with `v̂ ∼ v`, with probability `m(w) / Σ_{v̂∼v} m(v̂)`. The Green
//! value `g(v, w)` equals the `(|w|−|v|)`-step transition probability and is
//! computed level by level through the one-step factorisation
//! `g(v, w) = p(w⁻, w) · Σ_{u∼w⁻} g(v, u)`; the q-function follows its own
//! mass-weighted recursion and the exact identity
//! `q(v, w) = g(v, w) · Σ_{v̂∼v} m(v̂) / m(w)` ties the two tables together.
//!
//! Everything here is an exact rational; nothing is rounded, ever.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::adjacency::Levels;
use crate::error::Error;
use crate::rat::{one, zero, Rational};
use crate::word::{gap, Word};

/// Positive letter weights summing to one, extended multiplicatively to words.
#[derive(Clone, Debug, PartialEq)]
pub struct MassDistribution {
    letter_mass: Vec<Rational>,
}

impl MassDistribution {
    pub fn new(letter_mass: Vec<Rational>) -> Result<MassDistribution, Error> {
        if letter_mass.is_empty() {
            return Err(Error::InvalidMasses("no letter masses given".into()));
        }
        for (i, m) in letter_mass.iter().enumerate() {
            // A zero mass would delete the letter; the chain excludes that
            // case from the start.
            if m <= &zero() || m >= &one() {
                return Err(Error::InvalidMasses(format!(
                    "mass of letter {} must lie in (0,1), got {}",
                    i + 1,
                    m
                )));
            }
        }
        let total: Rational = letter_mass.iter().fold(zero(), |a, m| a + m);
        if total != one() {
            return Err(Error::InvalidMasses(format!(
                "masses must sum to 1, got {}",
                total
            )));
        }
        Ok(MassDistribution { letter_mass })
    }

    pub fn uniform(n: usize) -> MassDistribution {
        let m = Rational::new(BigInt::one(), BigInt::from(n as i64));
        MassDistribution {
            letter_mass: vec![m; n],
        }
    }

    pub fn alphabet(&self) -> usize {
        self.letter_mass.len()
    }

    pub fn letter(&self, a: u8) -> &Rational {
        &self.letter_mass[a as usize - 1]
    }

    pub fn letters(&self) -> &[Rational] {
        &self.letter_mass
    }

    /// `m(w) = m(w_1)⋯m(w_n)`, with `m(∅) = 1`.
    pub fn word(&self, w: &Word) -> Rational {
        w.letters()
            .iter()
            .fold(one(), |acc, &a| acc * self.letter(a))
    }

    pub fn is_uniform(&self) -> bool {
        self.letter_mass.windows(2).all(|p| p[0] == p[1])
    }
}

/// Which recursion fills the q column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QMode {
    /// Mass-weighted class average (valid unconditionally).
    MassWeighted,
    /// Plain class average `q(v, wi) = (1/R(w)) Σ_{w̃∼w} q(v, w̃)`;
    /// valid only under assumption (B2), refused otherwise.
    ClassAverage,
}

/// Compact reference to a word in the level tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordRef {
    pub level: u32,
    pub idx: u32,
}

/// One sparse table entry: present iff `g(v,w) > 0` or `v = w`.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub g: Rational,
    pub q: Rational,
}

/// Sparse `(ancestor, descendant) → {g, q}` table, keyed by descendant.
#[derive(Clone, Debug, Default)]
pub struct KernelTable {
    /// `anc[level][word_idx]` = sorted `(ancestor, entry)` pairs.
    anc: Vec<Vec<Vec<(WordRef, Entry)>>>,
}

impl KernelTable {
    pub fn ancestors_of(&self, w: WordRef) -> &[(WordRef, Entry)] {
        &self.anc[w.level as usize][w.idx as usize]
    }

    fn lookup(&self, v: WordRef, w: WordRef) -> Option<&Entry> {
        let list = &self.anc[w.level as usize][w.idx as usize];
        list.binary_search_by(|probe| probe.0.cmp(&v))
            .ok()
            .map(|i| &list[i].1)
    }

    pub fn entry_count(&self) -> usize {
        self.anc
            .iter()
            .map(|lvl| lvl.iter().map(Vec::len).sum::<usize>())
            .sum()
    }
}

/// The weighted chain with its Green/q tables built to a fixed depth.
#[derive(Clone, Debug)]
pub struct Chain {
    pub levels: Arc<Levels>,
    pub masses: MassDistribution,
    word_mass: Vec<Vec<Rational>>,
    class_mass: Vec<Vec<Rational>>,
    table: KernelTable,
    q_mode: QMode,
}

impl Chain {
    /// Builds with the unconditional mass-weighted q recursion.
    pub fn build(levels: Arc<Levels>, masses: MassDistribution) -> Result<Chain, Error> {
        Chain::build_with_q_mode(levels, masses, QMode::MassWeighted)
    }

    pub fn build_with_q_mode(
        levels: Arc<Levels>,
        masses: MassDistribution,
        q_mode: QMode,
    ) -> Result<Chain, Error> {
        if masses.alphabet() != levels.ifs.alphabet {
            return Err(Error::InvalidMasses(format!(
                "{} masses for an alphabet of {} letters",
                masses.alphabet(),
                levels.ifs.alphabet
            )));
        }
        if q_mode == QMode::ClassAverage {
            // The plain class average needs (B2); find the first offender.
            let report = crate::audit::check_b2(&levels, &masses, levels.depth());
            if let Some(word) = report.first_failure() {
                return Err(Error::B2Refused {
                    word: word.render(levels.ifs.alphabet),
                    depth: levels.depth(),
                });
            }
        }

        let depth = levels.depth();
        let mut word_mass: Vec<Vec<Rational>> = Vec::with_capacity(depth + 1);
        let mut class_mass: Vec<Vec<Rational>> = Vec::with_capacity(depth + 1);
        for n in 0..=depth {
            let level = levels.level(n);
            let wm: Vec<Rational> = level.words.iter().map(|w| masses.word(w)).collect();
            let cm: Vec<Rational> = level
                .classes()
                .iter()
                .map(|members| members.iter().map(|&i| wm[i as usize].clone()).sum())
                .collect();
            word_mass.push(wm);
            class_mass.push(cm);
        }

        let mut table = KernelTable::default();
        table.anc.push(vec![vec![(
            WordRef { level: 0, idx: 0 },
            Entry {
                g: one(),
                q: one(),
            },
        )]]);

        let alphabet = levels.ifs.alphabet as u32;
        for n in 1..=depth {
            let level = levels.level(n);
            let parent_level = levels.level(n - 1);
            let mut rows: Vec<Vec<(WordRef, Entry)>> = Vec::with_capacity(level.words.len());
            for i in 0..level.words.len() {
                let parent_idx = (i as u32 / alphabet) as usize;
                let class_id = parent_level
                    .class_id(&parent_level.words[parent_idx])
                    .expect("parent indexed");
                let members = &parent_level.classes()[class_id];
                let denom = &class_mass[n - 1][class_id];
                let p_step = &word_mass[n][i] / denom;
                let r = members.len() as i64;

                // Accumulate Σ over the parent class: g-values and the two
                // q-numerators ahead of the per-ancestor division.
                let mut acc: HashMap<WordRef, (Rational, Rational)> = HashMap::new();
                for &u_idx in members {
                    let u_mass = &word_mass[n - 1][u_idx as usize];
                    for (v_ref, entry) in &table.anc[n - 1][u_idx as usize] {
                        let slot = acc.entry(*v_ref).or_insert_with(|| (zero(), zero()));
                        slot.0 += &entry.g;
                        match q_mode {
                            QMode::MassWeighted => slot.1 += &entry.q * u_mass,
                            QMode::ClassAverage => slot.1 += &entry.q,
                        }
                    }
                }

                let mut row: Vec<(WordRef, Entry)> = Vec::with_capacity(acc.len() + 1);
                for (v_ref, (g_sum, q_sum)) in acc {
                    let g = &p_step * &g_sum;
                    // A parent-level ancestor inside the class is `v ∼ w⁻`,
                    // whose children have q = 1 by definition.
                    let v_in_parent_class = v_ref.level as usize == n - 1
                        && members.binary_search(&v_ref.idx).is_ok();
                    let q = if v_in_parent_class {
                        one()
                    } else {
                        match q_mode {
                            QMode::MassWeighted => q_sum / denom,
                            QMode::ClassAverage => q_sum / Rational::from_integer(r.into()),
                        }
                    };
                    row.push((v_ref, Entry { g, q }));
                }
                row.push((
                    WordRef {
                        level: n as u32,
                        idx: i as u32,
                    },
                    Entry {
                        g: one(),
                        q: one(),
                    },
                ));
                row.sort_by_key(|entry| entry.0);
                rows.push(row);
            }
            table.anc.push(rows);
        }

        Ok(Chain {
            levels,
            masses,
            word_mass,
            class_mass,
            table,
            q_mode,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.depth()
    }

    pub fn q_mode(&self) -> QMode {
        self.q_mode
    }

    pub fn alphabet(&self) -> usize {
        self.levels.ifs.alphabet
    }

    pub fn word_ref(&self, w: &Word) -> Option<WordRef> {
        if w.len() > self.depth() {
            return None;
        }
        self.levels.level(w.len()).word_index(w).map(|i| WordRef {
            level: w.len() as u32,
            idx: i as u32,
        })
    }

    pub fn word_of(&self, r: WordRef) -> &Word {
        self.levels.level(r.level as usize).word_at(r.idx as usize)
    }

    fn assert_depth(&self, w: &Word) {
        assert!(
            w.len() <= self.depth(),
            "chain tables built to depth {}, word {} has length {}",
            self.depth(),
            w,
            w.len()
        );
    }

    /// `m(w)`, from the per-level cache when available.
    pub fn mass(&self, w: &Word) -> Rational {
        match self.word_ref(w) {
            Some(r) => self.word_mass[r.level as usize][r.idx as usize].clone(),
            None => self.masses.word(w),
        }
    }

    /// `Σ_{v̂∼v} m(v̂)`, the class-mass sum of `v`.
    pub fn class_mass(&self, v: &Word) -> Rational {
        self.assert_depth(v);
        let level = self.levels.level(v.len());
        let class = level.class_id(v).expect("word in level");
        self.class_mass[v.len()][class].clone()
    }

    /// All children of the class of `v`: words `v̂a` with `v̂ ∼ v`, sorted.
    pub fn children(&self, v: &Word) -> Vec<Word> {
        let mut out: Vec<Word> = self
            .levels
            .class_members(v)
            .iter()
            .flat_map(|m| (1..=self.alphabet() as u8).map(move |a| m.child(a)))
            .collect();
        out.sort();
        out
    }

    /// One-step transition probability `p(v, w)`.
    pub fn transition(&self, v: &Word, w: &Word) -> Rational {
        self.assert_depth(v);
        if w.len() != v.len() + 1 {
            return zero();
        }
        let parent = w.parent().expect("length ≥ 1");
        if !self.levels.related(v, &parent) {
            return zero();
        }
        self.mass(w) / self.class_mass(v)
    }

    /// n-step transition probability `p_n(v, w)`, by backward recursion over
    /// the parent class of `w`.
    pub fn n_step(&self, v: &Word, w: &Word, n: usize) -> Rational {
        if n == 0 {
            return if v == w { one() } else { zero() };
        }
        if gap(v, w) != n as i64 {
            return zero();
        }
        self.assert_depth(w);
        let parent = w.parent().expect("gap ≥ 1");
        let step = self.transition(&parent, w);
        if step.is_zero() {
            return zero();
        }
        let mut total = zero();
        for u in self.levels.class_members(&parent) {
            total += self.n_step(v, &u, n - 1);
        }
        step * total
    }

    /// Green function `g(v, w) = p_{|w|−|v|}(v, w)`, from the sparse table.
    pub fn green(&self, v: &Word, w: &Word) -> Rational {
        self.assert_depth(w);
        if v == w {
            return one();
        }
        if gap(v, w) <= 0 {
            return zero();
        }
        let (Some(v_ref), Some(w_ref)) = (self.word_ref(v), self.word_ref(w)) else {
            return zero();
        };
        self.table
            .lookup(v_ref, w_ref)
            .map(|e| e.g.clone())
            .unwrap_or_else(zero)
    }

    /// `q(v, w)`: 1 on the diagonal, else `g(v,w)·Σ_{v̂∼v}m(v̂)/m(w)`,
    /// maintained by its own recursion.
    pub fn q(&self, v: &Word, w: &Word) -> Rational {
        self.assert_depth(w);
        if v == w {
            return one();
        }
        if gap(v, w) <= 0 {
            return zero();
        }
        let (Some(v_ref), Some(w_ref)) = (self.word_ref(v), self.word_ref(w)) else {
            return zero();
        };
        self.table
            .lookup(v_ref, w_ref)
            .map(|e| e.q.clone())
            .unwrap_or_else(zero)
    }

    /// Is `v` an ancestor of `w` (`v ≪ w`, i.e. `g(v,w) > 0`)?
    pub fn is_ancestor(&self, v: &Word, w: &Word) -> bool {
        v == w || !self.green(v, w).is_zero()
    }

    /// Sorted ancestor entries of `w`, diagonal included.
    pub fn ancestor_entries(&self, w: &Word) -> &[(WordRef, Entry)] {
        self.assert_depth(w);
        let w_ref = self.word_ref(w).expect("word within depth");
        self.table.ancestors_of(w_ref)
    }

    /// Applies the Markov operator: `(Pf)(v) = Σ_w p(v, w) f(w)`.
    pub fn apply_markov_operator<F>(&self, f: F, v: &Word) -> Rational
    where
        F: Fn(&Word) -> Rational,
    {
        let denom = self.class_mass(v);
        let mut acc = zero();
        for w in self.children(v) {
            acc += self.mass(&w) / &denom * f(&w);
        }
        acc
    }

    /// All `(v, w, g, q)` rows with `g > 0` or `v = w`, sorted by `(v, w)`.
    pub fn all_entries(&self) -> Vec<(Word, Word, Rational, Rational)> {
        let mut rows = Vec::with_capacity(self.table.entry_count());
        for level in 0..=self.depth() {
            let words = &self.levels.level(level).words;
            for (i, w) in words.iter().enumerate() {
                let w_ref = WordRef {
                    level: level as u32,
                    idx: i as u32,
                };
                for (v_ref, entry) in self.table.ancestors_of(w_ref) {
                    rows.push((
                        self.word_of(*v_ref).clone(),
                        w.clone(),
                        entry.g.clone(),
                        entry.q.clone(),
                    ));
                }
            }
        }
        rows.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
        rows
    }

    /// Samples one chain path `X_0 = ∅, …, X_n` with exact rational
    /// thresholds against a deterministic 64-bit generator stream.
    pub fn sample_path(&self, seed: u64, depth: usize) -> Vec<Word> {
        assert!(depth <= self.depth(), "path deeper than built tables");
        let mut state = seed;
        let mut current = Word::empty();
        let mut path = vec![current.clone()];
        let two64 = BigInt::one() << 64u32;
        for _ in 0..depth {
            let denom = self.class_mass(&current);
            let draw = splitmix64(&mut state);
            let draw_int = BigInt::from(draw);
            // Select the first child whose cumulative probability exceeds
            // draw / 2^64, comparing exactly: draw·den < num·2^64.
            let mut cum = zero();
            let children = self.children(&current);
            let mut chosen = children.last().expect("alphabet nonempty").clone();
            for w in &children {
                cum += self.mass(w) / &denom;
                let lhs = &draw_int * cum.denom();
                let rhs = cum.numer() * &two64;
                if lhs < rhs {
                    chosen = w.clone();
                    break;
                }
            }
            current = chosen;
            path.push(current.clone());
        }
        path
    }
}

/// SplitMix64, the deterministic generator behind path sampling.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-path generator stream derived from `(seed, path index)`.
pub fn path_stream_seed(seed: u64, path_index: u64) -> u64 {
    let mut s = seed ^ path_index.wrapping_mul(0xA24B_AED4_963E_E407);
    splitmix64(&mut s)
}
