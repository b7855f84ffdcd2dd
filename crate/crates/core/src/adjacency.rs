//! The equivalence relation `∼` on words, its classes and R-values.
//!
//! Two distinct words are equivalent when they have equal length, their cells
//! intersect and their parents differ. The cell intersection is decided by
//! the scheme geometry (vertex sets in barycentric mode, boxes in box mode,
//! ε-coincidence in tolerance mode). A rule set can replace or extend the
//! geometric relation with explicit suffix identifications: a rule `(α, β)`
//! glues `uα ∼ uβ` under every common prefix `u`.
//!
//! Level structures are built depth by depth. Candidate pairs at level `n`
//! descend from touching pairs at level `n − 1`, which keeps the scan linear
//! in the level size for the fractals treated here.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Error;
use crate::ifs::{CellGeom, ComposedMap, IfsSpec, Touch};
use crate::word::{enumerate_level, Word};

/// Suffix-rewrite identifications: pairs of equal-length words glued under a
/// common prefix. The symmetric-transitive closure over equal-length suffixes
/// is computed once and queried per word.
#[derive(Clone, Debug, Default)]
pub struct RuleSet {
    pairs: Vec<(Word, Word)>,
    /// suffix → class representative, per suffix length
    class_of: HashMap<Word, usize>,
    /// class id → members
    members: Vec<Vec<Word>>,
}

impl RuleSet {
    pub fn new(pairs: Vec<(Word, Word)>, alphabet: usize) -> Result<RuleSet, Error> {
        for (a, b) in &pairs {
            a.validate(alphabet)?;
            b.validate(alphabet)?;
            if a.len() != b.len() {
                return Err(Error::InvalidRule(format!(
                    "rule words must have equal length: {} vs {}",
                    a, b
                )));
            }
            if a.is_empty() {
                return Err(Error::InvalidRule("empty rule word".into()));
            }
            if a == b {
                return Err(Error::InvalidRule(format!("rule glues {} to itself", a)));
            }
        }
        // Union-find over all words mentioned in rules.
        let mut index: HashMap<Word, usize> = HashMap::new();
        let mut words: Vec<Word> = Vec::new();
        let id = |w: &Word, index: &mut HashMap<Word, usize>, words: &mut Vec<Word>| {
            *index.entry(w.clone()).or_insert_with(|| {
                words.push(w.clone());
                words.len() - 1
            })
        };
        let mut edges = Vec::new();
        for (a, b) in &pairs {
            let ia = id(a, &mut index, &mut words);
            let ib = id(b, &mut index, &mut words);
            edges.push((ia, ib));
        }
        let mut uf = UnionFind::new(words.len());
        for (a, b) in edges {
            uf.union(a, b);
        }
        let mut root_to_class: HashMap<usize, usize> = HashMap::new();
        let mut members: Vec<Vec<Word>> = Vec::new();
        let mut class_of = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            let root = uf.find(i);
            let next = members.len();
            let class = *root_to_class.entry(root).or_insert(next);
            if class == members.len() {
                members.push(Vec::new());
            }
            members[class].push(w.clone());
            class_of.insert(w.clone(), class);
        }
        for m in &mut members {
            m.sort();
            // Closing the rules must not glue words of different lengths.
            if m.windows(2).any(|p| p[0].len() != p[1].len()) {
                return Err(Error::InvalidRule(
                    "rule closure glues words of different lengths".into(),
                ));
            }
        }
        Ok(RuleSet {
            pairs,
            class_of,
            members,
        })
    }

    pub fn pairs(&self) -> &[(Word, Word)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// All words glued to `w` by some rule under some common prefix,
    /// excluding `w` itself.
    pub fn partners(&self, w: &Word) -> Vec<Word> {
        let mut out = Vec::new();
        for (suffix, &class) in &self.class_of {
            if w.ends_with(suffix) {
                let prefix = w.prefix(w.len() - suffix.len());
                for other in &self.members[class] {
                    if other != suffix {
                        out.push(prefix.concat(other));
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out.retain(|x| x != w);
        out
    }

    /// Does a configured rule glue `v` and `w` directly?
    pub fn applies(&self, v: &Word, w: &Word) -> bool {
        if v.len() != w.len() || v == w {
            return false;
        }
        self.partners(v).iter().any(|p| p == w)
    }
}

/// How `∼` is decided.
#[derive(Clone, Debug)]
pub enum EquivalenceMode {
    /// Equal length, intersecting cells, different parents.
    Geometric,
    /// Explicit suffix rules only (plus reflexivity).
    Rules(RuleSet),
    /// Union of the geometric relation and the rules.
    GeometricPlusRules(RuleSet),
}

impl EquivalenceMode {
    fn rules(&self) -> Option<&RuleSet> {
        match self {
            EquivalenceMode::Geometric => None,
            EquivalenceMode::Rules(r) | EquivalenceMode::GeometricPlusRules(r) => Some(r),
        }
    }

    fn uses_geometry(&self) -> bool {
        !matches!(self, EquivalenceMode::Rules(_))
    }
}

/// Outcome of a single equivalence test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivOutcome {
    pub equivalent: bool,
    /// Tolerance mode: some vertex distance fell in `(ε, 2ε)`.
    pub ambiguous: bool,
}

/// Direct equivalence test on arbitrary words, without level tables.
pub fn equivalent(
    ifs: &IfsSpec,
    mode: &EquivalenceMode,
    v: &Word,
    w: &Word,
) -> Result<EquivOutcome, Error> {
    v.validate(ifs.alphabet)?;
    w.validate(ifs.alphabet)?;
    if v == w {
        return Ok(EquivOutcome {
            equivalent: true,
            ambiguous: false,
        });
    }
    if v.len() != w.len() {
        return Ok(EquivOutcome {
            equivalent: false,
            ambiguous: false,
        });
    }
    let mut ambiguous = false;
    if mode.uses_geometry() && v.parent() != w.parent() {
        let touch = ifs.cells_touch(&ifs.cell_geom_of_word(v)?, &ifs.cell_geom_of_word(w)?);
        ambiguous = touch.ambiguous;
        if touch.touching {
            return Ok(EquivOutcome {
                equivalent: true,
                ambiguous,
            });
        }
    }
    if let Some(rules) = mode.rules() {
        if rules.applies(v, w) {
            return Ok(EquivOutcome {
                equivalent: true,
                ambiguous,
            });
        }
    }
    Ok(EquivOutcome {
        equivalent: false,
        ambiguous,
    })
}

/// One fully-built word level: words, touch graph, `∼` graph, classes.
#[derive(Clone, Debug)]
pub struct LevelStructure {
    pub depth: usize,
    /// All words of the level in lexicographic order.
    pub words: Vec<Word>,
    index: HashMap<Word, u32>,
    /// `∼` edges as index pairs `(i, j)`, `i < j` (direct relation, no closure).
    pub sim_edges: Vec<(u32, u32)>,
    /// Geometric touch edges including same-parent pairs (empty in rules mode).
    pub touch_edges: Vec<(u32, u32)>,
    /// Class id per word.
    class_of: Vec<u32>,
    /// Members (word indices, sorted) per class.
    classes: Vec<Vec<u32>>,
    /// Any ambiguous tolerance-mode comparison seen on this level.
    pub ambiguous: bool,
}

impl LevelStructure {
    pub fn word_index(&self, w: &Word) -> Option<usize> {
        self.index.get(w).map(|&i| i as usize)
    }

    pub fn class_id(&self, w: &Word) -> Option<usize> {
        self.word_index(w).map(|i| self.class_of[i] as usize)
    }

    /// The `∼`-class of `w` (always contains `w`).
    pub fn class_members(&self, w: &Word) -> Vec<Word> {
        match self.class_id(w) {
            Some(c) => self.classes[c]
                .iter()
                .map(|&i| self.words[i as usize].clone())
                .collect(),
            None => vec![w.clone()],
        }
    }

    /// `R(w) = #class(w)`.
    pub fn r_value(&self, w: &Word) -> usize {
        self.class_id(w).map(|c| self.classes[c].len()).unwrap_or(1)
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn word_at(&self, i: usize) -> &Word {
        &self.words[i]
    }

    pub fn max_r(&self) -> usize {
        self.classes.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Are `v` and `w` directly `∼`-related on this level?
    pub fn related(&self, v: &Word, w: &Word) -> bool {
        if v == w {
            return self.word_index(v).is_some();
        }
        let (Some(i), Some(j)) = (self.word_index(v), self.word_index(w)) else {
            return false;
        };
        let key = (i.min(j) as u32, i.max(j) as u32);
        self.sim_edges.binary_search(&key).is_ok()
    }
}

/// All levels `0..=depth` of one scheme under one equivalence mode.
#[derive(Clone, Debug)]
pub struct Levels {
    pub ifs: Arc<IfsSpec>,
    pub mode: EquivalenceMode,
    pub levels: Vec<LevelStructure>,
}

impl Levels {
    pub fn build(ifs: Arc<IfsSpec>, mode: EquivalenceMode, depth: usize) -> Result<Levels, Error> {
        let mut levels = Vec::with_capacity(depth + 1);
        let mut geoms: Vec<CellGeom> = Vec::new();
        let mut maps: Vec<ComposedMap> = Vec::new();

        for n in 0..=depth {
            let words = enumerate_level(n, ifs.alphabet);
            let index: HashMap<Word, u32> = words
                .iter()
                .enumerate()
                .map(|(i, w)| (w.clone(), i as u32))
                .collect();
            let mut ambiguous = false;

            // Incremental composed maps and cell payloads.
            let (next_maps, next_geoms) = if mode.uses_geometry() {
                if n == 0 {
                    let m = ifs.identity_composed();
                    let g = ifs.cell_geom(&m);
                    (vec![m], vec![g])
                } else {
                    let mut nm = Vec::with_capacity(words.len());
                    let mut ng = Vec::with_capacity(words.len());
                    for (pi, _) in maps.iter().enumerate() {
                        for a in 1..=ifs.alphabet as u8 {
                            let m = ifs.extend_composed(&maps[pi], a)?;
                            ng.push(ifs.cell_geom(&m));
                            nm.push(m);
                        }
                    }
                    (nm, ng)
                }
            } else {
                (Vec::new(), Vec::new())
            };

            let mut touch_edges: Vec<(u32, u32)> = Vec::new();
            let mut sim_edges: Vec<(u32, u32)> = Vec::new();

            if mode.uses_geometry() && n >= 1 {
                // Candidate pairs descend from touching parents (and shared parents).
                let parent_level: &LevelStructure = &levels[n - 1];
                let mut candidates: Vec<(u32, u32)> = Vec::new();
                let a = ifs.alphabet as u32;
                for p in 0..parent_level.words.len() as u32 {
                    for x in 0..a {
                        for y in (x + 1)..a {
                            candidates.push((p * a + x, p * a + y));
                        }
                    }
                }
                for &(p, q) in &parent_level.touch_edges {
                    for x in 0..a {
                        for y in 0..a {
                            let (i, j) = (p * a + x, q * a + y);
                            candidates.push((i.min(j), i.max(j)));
                        }
                    }
                }
                for (i, j) in candidates {
                    let Touch {
                        touching,
                        ambiguous: amb,
                    } = ifs.cells_touch(&next_geoms[i as usize], &next_geoms[j as usize]);
                    ambiguous |= amb;
                    if touching {
                        touch_edges.push((i, j));
                        // Same length by construction; parents differ iff i/a ≠ j/a.
                        if i / a != j / a {
                            sim_edges.push((i, j));
                        }
                    }
                }
            }

            if let Some(rules) = mode.rules() {
                for (i, w) in words.iter().enumerate() {
                    for partner in rules.partners(w) {
                        if let Some(&j) = index.get(&partner) {
                            let key = (i as u32).min(j);
                            let key2 = (i as u32).max(j);
                            if key != key2 {
                                sim_edges.push((key, key2));
                            }
                        }
                    }
                }
            }

            touch_edges.sort_unstable();
            touch_edges.dedup();
            sim_edges.sort_unstable();
            sim_edges.dedup();

            // Classes are the connected components of the ∼ graph.
            let mut uf = UnionFind::new(words.len());
            for &(i, j) in &sim_edges {
                uf.union(i as usize, j as usize);
            }
            let mut root_to_class: HashMap<usize, u32> = HashMap::new();
            let mut classes: Vec<Vec<u32>> = Vec::new();
            let mut class_of = vec![0u32; words.len()];
            for i in 0..words.len() {
                let root = uf.find(i);
                let next = classes.len() as u32;
                let c = *root_to_class.entry(root).or_insert(next);
                if c as usize == classes.len() {
                    classes.push(Vec::new());
                }
                classes[c as usize].push(i as u32);
                class_of[i] = c;
            }

            levels.push(LevelStructure {
                depth: n,
                words,
                index,
                sim_edges,
                touch_edges,
                class_of,
                classes,
                ambiguous,
            });
            maps = next_maps;
            geoms = next_geoms;
        }
        let _ = geoms;
        Ok(Levels {
            ifs,
            mode,
            levels,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &LevelStructure {
        &self.levels[n]
    }

    /// Table-backed equivalence for words within the built depth.
    pub fn related(&self, v: &Word, w: &Word) -> bool {
        if v.len() != w.len() || v.len() > self.depth() {
            return false;
        }
        self.levels[v.len()].related(v, w)
    }

    pub fn r_value(&self, w: &Word) -> usize {
        if w.len() > self.depth() {
            return 1;
        }
        self.levels[w.len()].r_value(w)
    }

    pub fn class_members(&self, w: &Word) -> Vec<Word> {
        if w.len() > self.depth() {
            return vec![w.clone()];
        }
        self.levels[w.len()].class_members(w)
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug)]
struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(len: usize) -> UnionFind {
        UnionFind {
            parent: (0..len).collect(),
            size: vec![1; len],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (mut a, mut b) = (self.find(x), self.find(y));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }
}
