//! Cross-module identity checks on the built-in fixtures, with independent
//! oracles where the table recursions could hide a shared mistake.

use std::sync::Arc;

use num_traits::Zero;

use fractal_chain::adjacency::{EquivalenceMode, Levels};
use fractal_chain::chain::{Chain, MassDistribution};
use fractal_chain::fixtures;
use fractal_chain::kernel::{bridge_factor, martin_kernel, KernelPair};
use fractal_chain::rat::{one, zero, Rational};
use fractal_chain::word::Word;

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

fn weighted_chain(depth: usize) -> Chain {
    Chain::build(
        gasket_levels(depth),
        MassDistribution::new(fixtures::gasket_weighted_masses(3)).unwrap(),
    )
    .unwrap()
}

fn carpet_chain(depth: usize) -> Chain {
    let levels = Arc::new(
        Levels::build(
            Arc::new(fixtures::carpet().unwrap()),
            EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
            depth,
        )
        .unwrap(),
    );
    Chain::build(
        levels,
        MassDistribution::new(fixtures::carpet_weighted_masses()).unwrap(),
    )
    .unwrap()
}

/// Green factorisation through every intermediate level, against the stored
/// table, plus spot checks that non-ancestor pairs sum to zero.
fn check_factorisation(chain: &Chain) {
    for n in 0..=chain.depth() {
        for w in &chain.levels.level(n).words {
            let entries = chain.ancestor_entries(w);
            for (v_ref, entry) in entries {
                let v = chain.word_of(*v_ref);
                let gap = n - v.len();
                for k in 1..=gap {
                    let cut = v.len() + k;
                    let mut total = zero();
                    for (u_ref, u_entry) in entries {
                        if u_ref.level as usize == cut {
                            total += chain.green(v, chain.word_of(*u_ref)) * &u_entry.g;
                        }
                    }
                    assert_eq!(total, entry.g, "factorisation failed at ({v},{w},{k})");
                }
            }
        }
    }
    // Pairs with g = 0: every factorisation term vanishes.
    let deep = &chain.levels.level(chain.depth()).words;
    for w in deep.iter().take(8) {
        for v in &chain.levels.level(1).words {
            if chain.green(v, w).is_zero() {
                for k in 1..chain.depth() {
                    let mut total = zero();
                    for (u_ref, u_entry) in chain.ancestor_entries(w) {
                        if u_ref.level as usize == v.len() + k {
                            total += chain.green(v, chain.word_of(*u_ref)) * &u_entry.g;
                        }
                    }
                    assert!(total.is_zero());
                }
            }
        }
    }
}

#[test]
fn green_factorisation_gasket_and_carpet() {
    check_factorisation(&weighted_chain(5));
    check_factorisation(&carpet_chain(3));
}

#[test]
fn neighbour_consistency_of_transitions() {
    let chain = weighted_chain(4);
    for n in 0..chain.depth() {
        let level = chain.levels.level(n);
        for v in &level.words {
            for vt in chain.levels.class_members(v) {
                if &vt == v {
                    continue;
                }
                for w in &chain.levels.level(n + 1).words {
                    assert_eq!(chain.transition(v, w), chain.transition(&vt, w));
                }
            }
        }
    }
}

/// The q-value only depends on the class of the target's parent: equal for
/// siblings, across equivalent parents, and (with equivalent grandparents)
/// across equivalent targets.
#[test]
fn q_class_identities() {
    let chain = weighted_chain(5);
    for lv in 0..=3usize {
        for v in &chain.levels.level(lv).words {
            for lw in lv..chain.depth() {
                for w in &chain.levels.level(lw).words {
                    let base = chain.q(v, &w.child(1));
                    for wt in chain.levels.class_members(w) {
                        for a in 1..=3u8 {
                            assert_eq!(chain.q(v, &wt.child(a)), base);
                        }
                    }
                }
            }
        }
    }
    // Equivalent targets with equivalent parents share their q-value.
    for lw in 1..=chain.depth() {
        for w in &chain.levels.level(lw).words {
            for wt in chain.levels.class_members(w) {
                if &wt == w {
                    continue;
                }
                let parents_equivalent = chain
                    .levels
                    .related(&w.parent().unwrap(), &wt.parent().unwrap());
                if parents_equivalent {
                    for lv in 0..lw {
                        for v in &chain.levels.level(lv).words {
                            assert_eq!(chain.q(v, w), chain.q(v, &wt), "q({v},{w}) vs {wt}");
                        }
                    }
                }
            }
        }
    }
}

/// Kernel identities tied to class masses: `k(w, w̃i) = 1/Σ_{ŵ∼w} m(ŵ)` and
/// the class-mass weighted average recursion.
#[test]
fn kernel_class_mass_identities() {
    let chain = weighted_chain(4);
    for lw in 0..chain.depth() {
        for w in &chain.levels.level(lw).words {
            let expected = one() / chain.class_mass(w);
            for wt in chain.levels.class_members(w) {
                for a in 1..=3u8 {
                    assert_eq!(martin_kernel(&chain, w, &wt.child(a)), expected);
                }
            }
            // Averaging recursion for non-equivalent bases.
            for lv in 0..=lw {
                for v in &chain.levels.level(lv).words {
                    if chain.levels.related(v, w) {
                        continue;
                    }
                    let mut avg = zero();
                    for wt in chain.levels.class_members(w) {
                        avg += martin_kernel(&chain, v, &wt) * chain.mass(&wt);
                    }
                    avg /= chain.class_mass(w);
                    assert_eq!(martin_kernel(&chain, v, &w.child(2)), avg);
                }
            }
        }
    }
}

/// The bridge factor cancels between uniform and weighted chains:
/// `k = k_hom · factor` on every stored pair.
#[test]
fn kernel_bridge_on_all_table_pairs() {
    let levels = gasket_levels(5);
    let pair = KernelPair::build(
        levels,
        MassDistribution::new(fixtures::gasket_weighted_masses(3)).unwrap(),
    )
    .unwrap();
    assert!(pair.bridge_preconditions_ok());
    for n in 0..=pair.chain.depth() {
        for w in &pair.chain.levels.level(n).words {
            for (v_ref, entry) in pair.chain.ancestor_entries(w) {
                let v = pair.chain.word_of(*v_ref);
                if v == w {
                    continue;
                }
                let expected = martin_kernel(&pair.hom, v, w) * bridge_factor(&pair.chain, v);
                assert_eq!(entry.g.clone() / pair.chain.mass(w), expected);
            }
        }
    }
}

/// Exhaustive sampling check at a small scale: empirical occupancy of every
/// depth-2 word over 40 000 paths lands within 5 standard errors of m(w).
#[test]
fn path_occupancy_tracks_masses() {
    let chain = weighted_chain(2);
    let paths = 40_000u64;
    let mut counts = std::collections::BTreeMap::new();
    for i in 0..paths {
        let path = chain.sample_path(fractal_chain::chain::path_stream_seed(11, i), 2);
        *counts.entry(path.last().unwrap().clone()).or_insert(0u64) += 1;
    }
    for w in &chain.levels.level(2).words {
        let m = fractal_chain::rat::to_f64(&chain.mass(w));
        let freq = *counts.get(w).unwrap_or(&0) as f64 / paths as f64;
        let stderr = (m * (1.0 - m) / paths as f64).sqrt();
        assert!(
            (freq - m).abs() <= 5.0 * stderr,
            "word {w}: freq {freq} vs mass {m}"
        );
    }
}

/// R-values stay finite and positive, and single letters are never glued.
#[test]
fn r_value_bounds() {
    for (levels, max_r) in [
        (gasket_levels(5), 2usize),
        (
            Arc::new(
                Levels::build(
                    Arc::new(fixtures::carpet().unwrap()),
                    EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
                    3,
                )
                .unwrap(),
            ),
            4,
        ),
    ] {
        for level in &levels.levels {
            for w in &level.words {
                let r = level.r_value(w);
                assert!(r >= 1 && r <= max_r, "R({w}) = {r}");
                if w.len() == 1 {
                    assert_eq!(r, 1);
                }
            }
        }
    }
}

/// Mass conservation per level: Σ_{|w|=n} m(w) = 1 exactly.
#[test]
fn level_masses_sum_to_one() {
    let chain = weighted_chain(6);
    for n in 0..=6usize {
        let total: Rational = chain
            .levels
            .level(n)
            .words
            .iter()
            .map(|w| chain.mass(w))
            .sum();
        assert_eq!(total, one());
    }
}

/// Composition homomorphism at depth 6 on the gasket: `S_{uv} = S_u ∘ S_v`
/// as exact barycentric affine maps.
#[test]
fn composition_homomorphism_depth_6() {
    use fractal_chain::ifs::ComposedMap;
    let ifs = fixtures::gasket(3).unwrap();
    for lu in 0..=3usize {
        for u in fractal_chain::word::enumerate_level(lu, 3) {
            for lv in 0..=(3 - lu.min(3)) {
                for v in fractal_chain::word::enumerate_level(lv, 3) {
                    let (ComposedMap::Exact(direct), ComposedMap::Exact(a), ComposedMap::Exact(b)) = (
                        ifs.compose_map(&u.concat(&v)).unwrap(),
                        ifs.compose_map(&u).unwrap(),
                        ifs.compose_map(&v).unwrap(),
                    ) else {
                        panic!("exact mode expected");
                    };
                    assert_eq!(direct, a.compose(&b));
                }
            }
        }
    }
}

/// Words validate against their alphabet before any geometry runs.
#[test]
fn invalid_letters_are_rejected() {
    let ifs = fixtures::gasket(3).unwrap();
    let bad = Word::from_letters(&[1, 4]);
    assert!(ifs.compose_map(&bad).is_err());
    assert!(ifs.cell_vertices(&bad).is_err());
}

/// Table entries are probabilities and normalised ratios: g and q in [0,1].
#[test]
fn table_values_within_unit_interval() {
    for chain in [weighted_chain(5), carpet_chain(3)] {
        for (v, w, g, q) in chain.all_entries() {
            assert!(g > zero() && g <= one(), "g({v},{w}) = {g}");
            assert!(q > zero() && q <= one(), "q({v},{w}) = {q}");
        }
    }
}
