//! Structural audits at finite depth: transitivity of `∼`, the (B2)
//! dichotomy, nested-fractal evidence and the DS-type conditions LW1–LW5.
//!
//! None of these decide the infinite statement; each one certifies or refutes
//! the property on all words up to the requested depth, exactly.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use crate::adjacency::{EquivalenceMode, Levels};
use crate::chain::{Chain, MassDistribution};
use crate::error::Error;
use crate::ifs::{CellGeom, IfsSpec};
use crate::linalg::Vector;
use crate::osc::{osc_probe, OscProbe};
use crate::rat::{one, Rational};
use crate::word::{enumerate_level, Word};

/// All triples `(u, v, w)` with `u ∼ v`, `v ∼ w` but `u ≁ w`, up to `depth`.
///
/// An empty result certifies that `∼` is an equivalence relation on the
/// scanned levels (reflexivity and symmetry hold by construction).
pub fn audit_transitivity(levels: &Levels, depth: usize) -> Vec<(Word, Word, Word)> {
    let mut violations = Vec::new();
    for n in 0..=depth.min(levels.depth()) {
        let level = levels.level(n);
        for class in level.classes() {
            if class.len() < 3 {
                continue;
            }
            // Classes are connected components, so any non-related pair
            // inside one yields a violating triple through some middle word.
            for &i in class {
                for &j in class {
                    if i >= j {
                        continue;
                    }
                    let u = level.word_at(i as usize);
                    let w = level.word_at(j as usize);
                    if level.related(u, w) {
                        continue;
                    }
                    for &k in class {
                        if k == i || k == j {
                            continue;
                        }
                        let v = level.word_at(k as usize);
                        if level.related(u, v) && level.related(v, w) {
                            violations.push((u.clone(), v.clone(), w.clone()));
                            break;
                        }
                    }
                }
            }
        }
    }
    violations
}

/// Which (B2) clause a word satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum B2Clause {
    /// `m(w) = m(w̃)` for every `w̃ ∼ w`.
    MassEquality,
    /// `w⁻ ∼ (w̃)⁻` for every `w̃ ∼ w`.
    ParentEquivalence,
    Both,
    Neither,
}

/// Per-word (B2) verdicts; words in singleton classes satisfy both clauses
/// trivially and are only counted.
#[derive(Clone, Debug)]
pub struct B2Report {
    pub depth: usize,
    /// Verdict for every word in a class of size ≥ 2, in table order.
    pub checked: Vec<(Word, B2Clause)>,
    pub trivial_count: usize,
}

impl B2Report {
    pub fn pass(&self) -> bool {
        self.checked.iter().all(|(_, c)| *c != B2Clause::Neither)
    }

    pub fn first_failure(&self) -> Option<&Word> {
        self.checked
            .iter()
            .find(|(_, c)| *c == B2Clause::Neither)
            .map(|(w, _)| w)
    }
}

/// Checks assumption (B2): every word satisfies mass equality or parent
/// equivalence across its class.
pub fn check_b2(levels: &Levels, masses: &MassDistribution, depth: usize) -> B2Report {
    let mut checked = Vec::new();
    let mut trivial = 0usize;
    for n in 0..=depth.min(levels.depth()) {
        let level = levels.level(n);
        for class in level.classes() {
            if class.len() < 2 {
                trivial += class.len();
                continue;
            }
            let members: Vec<&Word> = class.iter().map(|&i| level.word_at(i as usize)).collect();
            let word_masses: Vec<Rational> = members.iter().map(|w| masses.word(w)).collect();
            for (i, w) in members.iter().enumerate() {
                let mass_eq = word_masses.iter().all(|m| *m == word_masses[i]);
                let parent_eq = members.iter().all(|other| {
                    let (Some(p), Some(q)) = (w.parent(), other.parent()) else {
                        return false;
                    };
                    levels.related(&p, &q)
                });
                let clause = match (mass_eq, parent_eq) {
                    (true, true) => B2Clause::Both,
                    (true, false) => B2Clause::MassEquality,
                    (false, true) => B2Clause::ParentEquivalence,
                    (false, false) => B2Clause::Neither,
                };
                checked.push(((*w).clone(), clause));
            }
        }
    }
    B2Report {
        depth,
        checked,
        trivial_count: trivial,
    }
}

/// Finite-depth nested-fractal evidence.
#[derive(Clone, Debug)]
pub struct NestedReport {
    pub depth: usize,
    /// 1-cells form a chain of pairwise intersecting cells.
    pub connectivity_ok: bool,
    /// Refining both cells one level added no intersection points beyond
    /// `S_v(F_0) ∩ S_w(F_0)`, on all same-length pairs to `depth`.
    pub nesting_ok: bool,
    pub nesting_failures: Vec<(Word, Word)>,
    /// `S_{ua}(K) ∩ S_u(F_0) = {S_u(q_a)}` on all applicable pairs.
    pub single_point_child_ok: bool,
    pub single_point_child_failures: Vec<(Word, u8)>,
    /// Same-length cells with distinct parents meet in at most one point.
    pub pairwise_single_point_ok: bool,
    pub pairwise_single_point_failures: Vec<(Word, Word)>,
    pub osc: OscProbe,
}

impl NestedReport {
    pub fn pass(&self) -> bool {
        self.connectivity_ok
            && self.nesting_ok
            && self.single_point_child_ok
            && self.pairwise_single_point_ok
    }
}

fn exact_vertex_set(ifs: &IfsSpec, w: &Word) -> Result<BTreeSet<Vector>, Error> {
    let cell = ifs.cell_geom_of_word(w)?;
    match cell {
        CellGeom::ExactVertices(set) => Ok(set),
        CellGeom::ExactBox { .. } => {
            // Box mode still exposes the F_0 images for vertex-set checks.
            Ok(ifs
                .cell_vertices(w)?
                .into_iter()
                .map(|p| p.exact().expect("exact mode").clone())
                .collect())
        }
        CellGeom::FloatVertices(_) => Err(Error::ExactModeRequired("nested check")),
    }
}

/// One-level refinement `∪_a S_{wa}(F_0)`.
fn refined_vertex_set(ifs: &IfsSpec, w: &Word) -> Result<BTreeSet<Vector>, Error> {
    let mut out = BTreeSet::new();
    for a in 1..=ifs.alphabet as u8 {
        out.extend(exact_vertex_set(ifs, &w.child(a))?);
    }
    Ok(out)
}

/// Nested-fractal checks to `depth` (exact mode only).
pub fn check_nested(ifs: &IfsSpec, depth: usize) -> Result<NestedReport, Error> {
    if !ifs.is_exact() {
        return Err(Error::ExactModeRequired("nested check"));
    }
    let n = ifs.alphabet;

    // Connectivity of 1-cells.
    let letters: Vec<Word> = enumerate_level(1, n);
    let geoms: Vec<CellGeom> = letters
        .iter()
        .map(|w| ifs.cell_geom_of_word(w))
        .collect::<Result<_, _>>()?;
    let mut reach = vec![false; n];
    let mut stack = vec![0usize];
    reach[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !reach[j] && ifs.cells_touch(&geoms[i], &geoms[j]).touching {
                reach[j] = true;
                stack.push(j);
            }
        }
    }
    let connectivity_ok = reach.iter().all(|&r| r);

    // Nesting evidence on same-length pairs.
    let mut nesting_failures = Vec::new();
    for level in 1..=depth {
        let words = enumerate_level(level, n);
        let sets: Vec<BTreeSet<Vector>> = words
            .iter()
            .map(|w| exact_vertex_set(ifs, w))
            .collect::<Result<_, _>>()?;
        let refined: Vec<BTreeSet<Vector>> = words
            .iter()
            .map(|w| refined_vertex_set(ifs, w))
            .collect::<Result<_, _>>()?;
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                let base: BTreeSet<&Vector> = sets[i].intersection(&sets[j]).collect();
                let fine: BTreeSet<&Vector> = refined[i].intersection(&refined[j]).collect();
                if base != fine {
                    nesting_failures.push((words[i].clone(), words[j].clone()));
                }
            }
        }
    }

    // S_{ua}(K) ∩ S_u(F_0) = {S_u(q_a)} on vertex sets, one refinement deep.
    let mut child_failures = Vec::new();
    let essential: BTreeSet<u8> = ifs.essential_letters().iter().copied().collect();
    for level in 0..depth {
        for u in enumerate_level(level, n) {
            let u_set = exact_vertex_set(ifs, &u)?;
            let u_map = match ifs.compose_map(&u)? {
                crate::ifs::ComposedMap::Exact(m) => m,
                crate::ifs::ComposedMap::Float(_) => unreachable!("exact mode"),
            };
            for a in 1..=n as u8 {
                if !essential.contains(&a) {
                    continue;
                }
                let q_a = ifs.fixed_points_all()[a as usize - 1]
                    .exact()
                    .expect("exact mode")
                    .clone();
                let expected: BTreeSet<Vector> = [u_map.apply(&q_a)].into_iter().collect();
                let child = u.child(a);
                let direct: BTreeSet<Vector> = exact_vertex_set(ifs, &child)?
                    .intersection(&u_set)
                    .cloned()
                    .collect();
                let refined: BTreeSet<Vector> = refined_vertex_set(ifs, &child)?
                    .intersection(&u_set)
                    .cloned()
                    .collect();
                if direct != expected || refined != expected {
                    child_failures.push((u.clone(), a));
                }
            }
        }
    }

    // Same length, different parents: at most one common point.
    let mut pairwise_failures = Vec::new();
    for level in 1..=depth {
        let words = enumerate_level(level, n);
        let sets: Vec<BTreeSet<Vector>> = words
            .iter()
            .map(|w| exact_vertex_set(ifs, w))
            .collect::<Result<_, _>>()?;
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                if words[i].parent() == words[j].parent() {
                    continue;
                }
                if sets[i].intersection(&sets[j]).count() > 1 {
                    pairwise_failures.push((words[i].clone(), words[j].clone()));
                }
            }
        }
    }

    Ok(NestedReport {
        depth,
        connectivity_ok,
        nesting_ok: nesting_failures.is_empty(),
        nesting_failures,
        single_point_child_ok: child_failures.is_empty(),
        single_point_child_failures: child_failures,
        pairwise_single_point_ok: pairwise_failures.is_empty(),
        pairwise_single_point_failures: pairwise_failures,
        osc: osc_probe(ifs, 4),
    })
}

/// Verdicts for the DS-type conditions LW1–LW5 at finite depth.
#[derive(Clone, Debug)]
pub struct DsTypeReport {
    pub depth: usize,
    pub lw1_ok: bool,
    pub lw2_ok: bool,
    pub lw3_ok: bool,
    /// Infimum of positive transition probabilities over `|v| < n`, per `n`.
    pub inf_by_depth: Vec<(usize, Rational)>,
    /// Overall infimum (the constant `a` of LW4) at the full depth.
    pub inf_probability: Rational,
    /// The infimum strictly decreased at the last depth step.
    pub lw4_decreasing: bool,
    /// Max ratio `g(∅,w₁)/g(∅,w₂)` over same-length ancestors of deep words.
    pub ratio_bound: Rational,
}

impl DsTypeReport {
    /// DS-type at this truncation: LW1–LW3 hold and evidence for LW4 is not
    /// deteriorating. LW5 always holds at finite depth with `ratio_bound`.
    pub fn pass(&self) -> bool {
        self.lw1_ok && self.lw2_ok && self.lw3_ok && !self.lw4_decreasing
    }
}

/// Evaluates LW1–LW5 on the chain to `depth`.
pub fn ds_type_check(chain: &Chain, depth: usize) -> DsTypeReport {
    let depth = depth.min(chain.depth());
    let levels = &chain.levels;
    let ifs = &levels.ifs;
    let mut lw1_ok = true;
    let mut lw2_ok = true;
    let mut lw3_ok = true;

    let mut inf_by_depth: Vec<(usize, Rational)> = Vec::new();
    let mut running_inf: Option<Rational> = None;

    for n in 1..=depth {
        let parent_level = levels.level(n - 1);
        let mut level_inf: Option<Rational> = None;
        for v in &parent_level.words {
            // Positive transitions out of v target exactly the children of
            // its class; everything else has p(v, ·) = 0 by definition.
            let children = chain.children(v);
            // LW1: the chain always steps to direct children.
            for a in 1..=ifs.alphabet as u8 {
                if !children.contains(&v.child(a)) || chain.transition(v, &v.child(a)).is_zero() {
                    lw1_ok = false;
                }
            }
            for w in &children {
                let p = chain.transition(v, w);
                let parent = w.parent().expect("children have length ≥ 1");
                if p.is_zero() {
                    // LW3: w has w⁻ ∼ v and is a sibling-equivalent, so it
                    // must be reachable.
                    let sibling_hit =
                        (1..=ifs.alphabet as u8).any(|k| levels.related(w, &v.child(k)));
                    if sibling_hit {
                        lw3_ok = false;
                    }
                    continue;
                }
                // LW2: positive probability demands v = w⁻ or touching cells.
                // In geometric mode ∼-related parents touch by construction;
                // rule-glued pairs still get the geometric test.
                let geometric_mode = matches!(levels.mode, EquivalenceMode::Geometric);
                if v != &parent && !(geometric_mode && levels.related(v, &parent)) {
                    let touch = ifs
                        .cells_touch(
                            &ifs.cell_geom_of_word(v).expect("valid word"),
                            &ifs.cell_geom_of_word(&parent).expect("valid word"),
                        )
                        .touching;
                    if !touch {
                        lw2_ok = false;
                    }
                }
                level_inf = Some(match level_inf {
                    Some(cur) => cur.min(p.clone()),
                    None => p.clone(),
                });
            }
        }
        let level_inf = level_inf.expect("every level has transitions");
        running_inf = Some(match running_inf {
            Some(cur) => cur.min(level_inf),
            None => level_inf,
        });
        inf_by_depth.push((n, running_inf.clone().unwrap()));
    }

    let inf_probability = running_inf.unwrap_or_else(one);
    let lw4_decreasing = inf_by_depth
        .len()
        .checked_sub(2)
        .map(|i| inf_by_depth[i].1 > inf_by_depth[i + 1].1)
        .unwrap_or(false);

    // LW5 over the truncation: deepest words stand in for infinite ones;
    // ancestors of every prefix are grouped per level and their root-Green
    // values (= masses) compared.
    let mut ratio_bound = one();
    if depth >= 1 {
        for x in &levels.level(depth).words {
            let mut per_level: BTreeMap<usize, BTreeSet<Word>> = BTreeMap::new();
            for j in 1..=depth {
                let prefix = x.prefix(j);
                for (v_ref, _) in chain.ancestor_entries(&prefix) {
                    let v = chain.word_of(*v_ref);
                    per_level.entry(v.len()).or_default().insert(v.clone());
                }
            }
            for ancestors in per_level.values() {
                let masses: Vec<Rational> =
                    ancestors.iter().map(|u| chain.mass(u)).collect();
                let max = masses.iter().max().unwrap();
                let min = masses.iter().min().unwrap();
                let ratio = max / min;
                if ratio > ratio_bound {
                    ratio_bound = ratio;
                }
            }
        }
    }

    DsTypeReport {
        depth,
        lw1_ok,
        lw2_ok,
        lw3_ok,
        inf_by_depth,
        inf_probability,
        lw4_decreasing,
        ratio_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjacency::EquivalenceMode;
    use crate::fixtures;
    use crate::rat::ratio;
    use std::sync::Arc;

    fn gasket_levels(depth: usize) -> Arc<Levels> {
        Arc::new(
            Levels::build(
                Arc::new(fixtures::gasket(3).unwrap()),
                EquivalenceMode::Geometric,
                depth,
            )
            .unwrap(),
        )
    }

    #[test]
    fn gasket_transitivity_clean() {
        let levels = gasket_levels(5);
        assert!(audit_transitivity(&levels, 5).is_empty());
    }

    #[test]
    fn carpet_geometric_transitivity_violated_at_depth_2() {
        let levels = Levels::build(
            Arc::new(fixtures::carpet().unwrap()),
            EquivalenceMode::Geometric,
            2,
        )
        .unwrap();
        let violations = audit_transitivity(&levels, 2);
        assert!(!violations.is_empty());
        // Every reported triple is a genuine counterexample.
        for (u, v, w) in &violations {
            assert!(levels.related(u, v) && levels.related(v, w) && !levels.related(u, w));
        }
    }

    #[test]
    fn carpet_extended_rules_transitivity_clean_to_depth_3() {
        let levels = Levels::build(
            Arc::new(fixtures::carpet().unwrap()),
            EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
            3,
        )
        .unwrap();
        assert!(audit_transitivity(&levels, 3).is_empty());
        assert!(levels.levels.iter().all(|l| l.max_r() <= 4));
    }

    #[test]
    fn b2_holds_on_weighted_gasket() {
        let levels = gasket_levels(5);
        let masses =
            MassDistribution::new(fixtures::gasket_weighted_masses(3)).unwrap();
        let report = check_b2(&levels, &masses, 5);
        assert!(report.pass());
        // Depth-2 classes {ab, ba} satisfy mass equality; deeper tails switch
        // to parent equivalence.
        let w122 = Word::parse("122", 3).unwrap();
        let clause = report
            .checked
            .iter()
            .find(|(w, _)| *w == w122)
            .map(|(_, c)| *c)
            .unwrap();
        assert!(matches!(
            clause,
            B2Clause::ParentEquivalence | B2Clause::Both
        ));
    }

    #[test]
    fn b2_uniform_masses_pass_via_mass_equality() {
        let levels = gasket_levels(4);
        let masses = MassDistribution::uniform(3);
        let report = check_b2(&levels, &masses, 4);
        assert!(report.pass());
        assert!(report
            .checked
            .iter()
            .all(|(_, c)| matches!(c, B2Clause::MassEquality | B2Clause::Both)));
    }

    #[test]
    fn b2_fails_on_weighted_carpet_extended_rules() {
        let levels = Levels::build(
            Arc::new(fixtures::carpet().unwrap()),
            EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
            2,
        )
        .unwrap();
        let masses = MassDistribution::new(fixtures::carpet_weighted_masses()).unwrap();
        let report = check_b2(&levels, &masses, 2);
        assert!(!report.pass());
        // The hole-corner class {28, 36, 51} has unequal masses and
        // non-equivalent single-letter parents.
        let w36 = Word::parse("36", 8).unwrap();
        let clause = report
            .checked
            .iter()
            .find(|(w, _)| *w == w36)
            .map(|(_, c)| *c)
            .unwrap();
        assert_eq!(clause, B2Clause::Neither);
    }

    #[test]
    fn nested_check_passes_on_gasket() {
        let ifs = fixtures::gasket(3).unwrap();
        let report = check_nested(&ifs, 3).unwrap();
        assert!(report.pass(), "{report:?}");
        assert!(report.osc.passed());
    }

    #[test]
    fn nested_check_connectivity_fails_on_disjoint_pair() {
        let ifs = fixtures::disjoint_pair().unwrap();
        let report = check_nested(&ifs, 2).unwrap();
        assert!(!report.connectivity_ok);
        assert!(!report.pass());
    }

    #[test]
    fn nested_check_refuses_tolerance_mode() {
        use crate::ifs::FloatMap;
        let maps = (0..2)
            .map(|i| FloatMap {
                matrix: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
                translation: vec![0.5 * i as f64, 0.0],
                ratio: 0.5,
            })
            .collect();
        let ifs = crate::ifs::IfsSpec::tolerance("float", 2, maps, 1e-9, None).unwrap();
        assert!(matches!(
            check_nested(&ifs, 2),
            Err(Error::ExactModeRequired(_))
        ));
    }

    #[test]
    fn homogeneous_gasket_is_ds_type_with_inf_one_sixth() {
        let levels = gasket_levels(5);
        let chain = Chain::build(levels, MassDistribution::uniform(3)).unwrap();
        let report = ds_type_check(&chain, 5);
        assert!(report.lw1_ok && report.lw2_ok && report.lw3_ok);
        assert_eq!(report.inf_probability, ratio(1, 6));
        assert!(!report.lw4_decreasing);
        assert_eq!(report.ratio_bound, one());
        assert!(report.pass());
    }

    #[test]
    fn weighted_gasket_lw4_strictly_decreases() {
        let levels = gasket_levels(6);
        let chain = Chain::build(
            levels,
            MassDistribution::new(fixtures::gasket_weighted_masses(3)).unwrap(),
        )
        .unwrap();
        let report = ds_type_check(&chain, 6);
        // From depth 3 on, each deeper level pushes the infimum strictly down.
        let infs = &report.inf_by_depth;
        for win in infs[2..].windows(2) {
            assert!(win[1].1 < win[0].1, "{:?}", infs);
        }
        assert!(report.lw4_decreasing);
        assert!(!report.pass());
    }
}
