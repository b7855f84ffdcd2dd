//! Acceptance suite: every release criterion as one test, each printing a
//! single pass line. Tolerances are pinned here; every equality marked exact
//! is an exact rational comparison.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use num_traits::Zero;

use fractal_chain::adjacency::{EquivalenceMode, Levels};
use fractal_chain::audit::{audit_transitivity, check_b2, ds_type_check};
use fractal_chain::boundary::{homeomorphism_diagnostic, BoundaryVerdict};
use fractal_chain::chain::{path_stream_seed, Chain, MassDistribution};
use fractal_chain::fixtures;
use fractal_chain::kernel::{
    kernel_via_theorem, markov_applied_kernel, martin_kernel, martin_metric,
    separation_witness, KernelPair, MetricWeights,
};
use fractal_chain::rat::{one, ratio, to_f64, zero, Rational};
use fractal_chain::word::{InfiniteWord, Word};

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

fn carpet_levels(mode: EquivalenceMode, depth: usize) -> Arc<Levels> {
    Arc::new(Levels::build(Arc::new(fixtures::carpet().unwrap()), mode, depth).unwrap())
}

fn masses(list: Vec<Rational>) -> MassDistribution {
    MassDistribution::new(list).unwrap()
}

fn weighted_gasket_masses() -> MassDistribution {
    masses(fixtures::gasket_weighted_masses(3))
}

fn passed(line: &str) {
    println!("[PASS] {line}");
}

/// Criterion 1 — Green identity: on the weighted gasket, g(∅,w) = m(w) with
/// exact rational equality for every word to depth 8, within 10 seconds.
#[test]
fn criterion_01_green_identity_depth_8() {
    let start = Instant::now();
    let chain = Chain::build(gasket_levels(8), weighted_gasket_masses()).unwrap();
    let mut checked_at_8 = 0usize;
    for n in 0..=8usize {
        for w in &chain.levels.level(n).words {
            assert_eq!(
                chain.green(&Word::empty(), w),
                chain.mass(w),
                "g(∅,{w}) ≠ m({w})"
            );
            if n == 8 {
                checked_at_8 += 1;
            }
        }
    }
    assert_eq!(checked_at_8, 6561);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    passed(&format!(
        "criterion 1: g(∅,w) = m(w) exactly for all words to depth 8 \
         (6561 at depth 8) in {elapsed:?}"
    ));
}

fn factorisation_exact(chain: &Chain) -> usize {
    let mut checks = 0usize;
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
                    assert_eq!(total, entry.g, "factorisation ({v},{w}) cut {k}");
                    checks += 1;
                }
            }
        }
    }
    checks
}

/// Criterion 2 — Green factorisation holds exactly for every ancestor pair
/// with gap ≤ 5 and every intermediate level, on the weighted gasket and the
/// weighted extended-rules carpet, within 30 seconds.
#[test]
fn criterion_02_green_factorisation_both_fixtures() {
    let start = Instant::now();
    let gasket = Chain::build(gasket_levels(5), weighted_gasket_masses()).unwrap();
    let carpet = Chain::build(
        carpet_levels(
            EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
            5,
        ),
        masses(fixtures::carpet_weighted_masses()),
    )
    .unwrap();
    let checks = factorisation_exact(&gasket) + factorisation_exact(&carpet);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    passed(&format!(
        "criterion 2: Green factorisation exact on gasket and carpet to gap 5 \
         ({checks} identities) in {elapsed:?}"
    ));
}

/// Criterion 3 — q-invariance: the q tables under three mass distributions
/// agree entry for entry to depth 6 on the gasket.
#[test]
fn criterion_03_q_invariance_three_mass_sets() {
    let levels = gasket_levels(6);
    let presets = [
        vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        vec![ratio(1, 2), ratio(1, 4), ratio(1, 4)],
        vec![ratio(3, 5), ratio(1, 5), ratio(1, 5)],
    ];
    let tables: Vec<Vec<(Word, Word, Rational, Rational)>> = presets
        .into_iter()
        .map(|m| {
            Chain::build(levels.clone(), masses(m))
                .unwrap()
                .all_entries()
        })
        .collect();
    let entries = tables[0].len();
    for other in &tables[1..] {
        assert_eq!(tables[0].len(), other.len());
        for ((v, w, _, q1), (v2, w2, _, q2)) in tables[0].iter().zip(other) {
            assert_eq!((v, w), (v2, w2));
            assert_eq!(q1, q2, "q({v},{w}) differs between mass sets");
        }
    }
    passed(&format!(
        "criterion 3: q tables identical across three mass sets to depth 6 \
         ({entries} entries each)"
    ));
}

/// Criterion 4 — kernel bridge: the homogeneous-route kernel equals the
/// direct kernel exactly on every pair to depth 6, diagonal included.
#[test]
fn criterion_04_kernel_bridge_depth_6() {
    let pair = KernelPair::build(gasket_levels(6), weighted_gasket_masses()).unwrap();
    assert!(pair.bridge_preconditions_ok());
    let mut checks = 0usize;
    for n in 0..=6usize {
        for w in &pair.chain.levels.level(n).words {
            for (v_ref, _) in pair.chain.ancestor_entries(w) {
                let v = pair.chain.word_of(*v_ref).clone();
                let bridge = kernel_via_theorem(&pair, &v, w).unwrap();
                assert_eq!(bridge.via_theorem, bridge.direct, "bridge ({v},{w})");
                checks += 1;
            }
            // Diagonal branch k(v,v) = 1/m(v).
            let diag = kernel_via_theorem(&pair, w, w).unwrap();
            assert_eq!(diag.via_theorem, one() / pair.chain.mass(w));
            assert_eq!(diag.via_theorem, diag.direct);
        }
    }
    passed(&format!(
        "criterion 4: bridge kernel = direct kernel exactly on {checks} pairs \
         to depth 6, diagonal included"
    ));
}

/// Criterion 5 — harmonicity: k(v,w) = Σ_u p(v,u) k(u,w) exactly for every
/// pair with gap ≥ 1 to depth 6, and the kernel maps of ten eventually
/// periodic points are fixed by the Markov operator at truncation.
#[test]
fn criterion_05_harmonicity_depth_6() {
    let chain = Chain::build(gasket_levels(6), weighted_gasket_masses()).unwrap();
    let mut checks = 0usize;
    for lv in 0..6usize {
        for v in &chain.levels.level(lv).words {
            for lw in (lv + 1)..=6usize {
                for w in &chain.levels.level(lw).words {
                    assert_eq!(
                        martin_kernel(&chain, v, w),
                        markov_applied_kernel(&chain, v, w),
                        "harmonicity ({v},{w})"
                    );
                    checks += 1;
                }
            }
        }
    }
    let points = [
        "(1)", "(2)", "(3)", "1(2)", "2(1)", "1(3)", "3(1)", "2(3)", "3(2)", "12(3)",
    ];
    assert_eq!(points.len(), 10);
    for text in points {
        let xi = InfiniteWord::parse(text, 3).unwrap();
        let target = xi.prefix(6);
        for lv in 0..=4usize {
            for v in &chain.levels.level(lv).words {
                assert_eq!(
                    markov_applied_kernel(&chain, v, &target),
                    martin_kernel(&chain, v, &target),
                    "(P k_ξ)(v) ≠ k_ξ(v) for ξ = {text}, v = {v}"
                );
            }
        }
    }
    passed(&format!(
        "criterion 5: harmonic identity exact on {checks} pairs and 10 \
         eventually-periodic kernel maps at depth 6"
    ));
}

/// Criterion 6 — metric axioms at D = 6 on both mass presets: symmetry and
/// triangle inequality over all triples of words with length ≤ 3, and
/// positive separation for every distinct pair with length ≤ 6.
#[test]
fn criterion_06_metric_axioms() {
    let levels = gasket_levels(6);
    let weights = MetricWeights::new(6);
    for mass_set in [
        vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        fixtures::gasket_weighted_masses(3),
    ] {
        let chain = Chain::build(levels.clone(), masses(mass_set)).unwrap();
        let short: Vec<Word> = (0..=3usize)
            .flat_map(|n| chain.levels.level(n).words.clone())
            .collect();
        let mut rho = vec![vec![zero(); short.len()]; short.len()];
        for (i, v) in short.iter().enumerate() {
            for (j, w) in short.iter().enumerate() {
                rho[i][j] = martin_metric(&chain, v, w, &weights).value;
            }
        }
        for i in 0..short.len() {
            assert!(rho[i][i].is_zero());
            for j in 0..short.len() {
                assert_eq!(rho[i][j], rho[j][i], "symmetry");
                assert!(!(i != j && rho[i][j].is_zero()), "separation short");
                for k in 0..short.len() {
                    assert!(
                        rho[i][j] <= &rho[i][k] + &rho[k][j],
                        "triangle ({},{},{})",
                        short[i],
                        short[j],
                        short[k]
                    );
                }
            }
        }
        // Separation over every distinct pair to depth 6, through the
        // positive witness term a(u)·|k(u,v) − k(u,w)| ≤ ρ_D(v,w).
        let all: Vec<Word> = (0..=6usize)
            .flat_map(|n| chain.levels.level(n).words.clone())
            .collect();
        for (i, v) in all.iter().enumerate() {
            for w in all.iter().skip(i + 1) {
                let witness = separation_witness(&chain, v, w, &weights)
                    .expect("witness inside truncation");
                assert!(witness > zero(), "separation ({v},{w})");
            }
        }
    }
    passed(
        "criterion 6: metric symmetry/triangle exact on all short triples and \
         ρ_6 > 0 for all distinct words to depth 6, both mass presets",
    );
}

/// Criterion 7 — structure audits: gasket transitivity clean to depth 6 and
/// (B2) clean to depth 8; bare geometric carpet has violations at depth 2
/// (and the CLI exits 1 on it); the shipped extended rules are clean to
/// depth 3 with max R ≤ 4.
#[test]
fn criterion_07_structure_audits() {
    let gasket6 = gasket_levels(6);
    assert!(audit_transitivity(&gasket6, 6).is_empty());
    let gasket8 = gasket_levels(8);
    let b2 = check_b2(&gasket8, &weighted_gasket_masses(), 8);
    assert!(b2.pass(), "first failure: {:?}", b2.first_failure());

    let geometric = carpet_levels(EquivalenceMode::Geometric, 2);
    let violations = audit_transitivity(&geometric, 2);
    assert!(!violations.is_empty());

    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/carpet-geometric-uniform.json");
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_fractal-chain"))
        .args([
            "audit",
            config.to_str().unwrap(),
            "--depth",
            "2",
            "--check",
            "transitivity",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    let extended = carpet_levels(
        EquivalenceMode::Rules(fixtures::carpet_extended_rules().unwrap()),
        3,
    );
    assert!(audit_transitivity(&extended, 3).is_empty());
    let max_r = extended
        .levels
        .iter()
        .map(|l| l.max_r())
        .max()
        .unwrap();
    assert!(max_r <= 4, "max R = {max_r}");
    passed(&format!(
        "criterion 7: gasket audits clean (transitivity d6, B2 d8); carpet \
         geometric breaks transitivity at depth 2 ({} triples, exit 1); \
         extended rules clean to depth 3 with max R = {max_r} ≤ 4",
        violations.len()
    ));
}

/// Criterion 8 — DS-type contrast: the homogeneous gasket passes LW1–LW5 at
/// depth 5 with infimum exactly 1/6; the weighted gasket's LW4 infimum
/// strictly decreases from depth 3 through depth 8.
#[test]
fn criterion_08_ds_type_contrast() {
    let hom = Chain::build(gasket_levels(5), MassDistribution::uniform(3)).unwrap();
    let hom_report = ds_type_check(&hom, 5);
    assert!(hom_report.lw1_ok && hom_report.lw2_ok && hom_report.lw3_ok);
    assert!(!hom_report.lw4_decreasing);
    assert_eq!(hom_report.inf_probability, ratio(1, 6));
    assert_eq!(hom_report.ratio_bound, one());
    assert!(hom_report.pass());

    let weighted = Chain::build(gasket_levels(8), weighted_gasket_masses()).unwrap();
    let report = ds_type_check(&weighted, 8);
    let infs: BTreeMap<usize, Rational> = report.inf_by_depth.iter().cloned().collect();
    for d in 3..8usize {
        assert!(
            infs[&(d + 1)] < infs[&d],
            "inf did not decrease from depth {d}: {:?}",
            report.inf_by_depth
        );
    }
    passed(&format!(
        "criterion 8: homogeneous gasket is DS-type with inf p = 1/6 at depth 5; \
         weighted LW4 infimum strictly decreases {} → {}",
        fractal_chain::rat::format(&infs[&3]),
        fractal_chain::rat::format(&infs[&8])
    ));
}

/// Criterion 9 — Monte-Carlo occupancy: 100 000 sampled paths at depth 3 put
/// every word's frequency within 4 standard errors of m(w), deterministically
/// under a fixed seed, within 5 seconds.
#[test]
fn criterion_09_monte_carlo_occupancy() {
    let start = Instant::now();
    let chain = Chain::build(gasket_levels(3), weighted_gasket_masses()).unwrap();
    let paths = 100_000u64;
    let seed = 1u64;
    let sample = |seed: u64| {
        let mut counts: BTreeMap<Word, u64> = BTreeMap::new();
        for i in 0..paths {
            let path = chain.sample_path(path_stream_seed(seed, i), 3);
            *counts.entry(path.last().unwrap().clone()).or_insert(0) += 1;
        }
        counts
    };
    let counts = sample(seed);
    let mut max_abs_z = 0.0f64;
    for w in &chain.levels.level(3).words {
        let m = to_f64(&chain.mass(w));
        let freq = counts.get(w).copied().unwrap_or(0) as f64 / paths as f64;
        let stderr = (m * (1.0 - m) / paths as f64).sqrt();
        let z = (freq - m) / stderr;
        max_abs_z = max_abs_z.max(z.abs());
        assert!(
            z.abs() <= 4.0,
            "word {w}: frequency {freq} is {z:.2} standard errors from {m}"
        );
    }
    assert_eq!(counts, sample(seed), "same seed must reproduce exactly");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    passed(&format!(
        "criterion 9: 100000 paths at depth 3, max |z| = {max_abs_z:.2} ≤ 4, \
         deterministic under seed {seed}, in {elapsed:?}"
    ));
}

/// Criterion 10 — boundary diagnostics: the identified pair has n₀ = 2,
/// exactly coincident addresses and ρ_D strictly decreasing over D ∈ {4,6,8};
/// the separated pair stays above 3/4 across the same depths; weighted and
/// homogeneous verdicts agree pairwise.
#[test]
fn criterion_10_boundary_diagnostics() {
    let pair = KernelPair::build(gasket_levels(8), weighted_gasket_masses()).unwrap();
    let glued = (
        InfiniteWord::parse("1(2)", 3).unwrap(),
        InfiniteWord::parse("2(1)", 3).unwrap(),
    );
    let apart = (
        InfiniteWord::parse("(1)", 3).unwrap(),
        InfiniteWord::parse("(2)", 3).unwrap(),
    );
    let report =
        homeomorphism_diagnostic(&pair, &[glued, apart], &[4, 6, 8], 2).unwrap();

    let glued = &report.pairs[0];
    assert_eq!(glued.verdict, BoundaryVerdict::EquivalentFrom(2));
    assert_eq!(glued.addresses_equal_exact, Some(true));
    for window in glued.rho_by_depth.windows(2) {
        assert!(window[1].1 < window[0].1, "ρ_D not decreasing: {window:?}");
    }
    for window in glued.hom_rho_by_depth.windows(2) {
        assert!(window[1].1 < window[0].1);
    }

    let apart = &report.pairs[1];
    assert_eq!(apart.verdict, BoundaryVerdict::NotEquivalentUpTo(8));
    assert_eq!(apart.addresses_equal_exact, Some(false));
    let floor = ratio(3, 4);
    for (_, rho) in &apart.rho_by_depth {
        assert!(rho >= &floor, "ρ_D = {} below 3/4", fractal_chain::rat::format(rho));
    }

    for p in &report.pairs {
        assert_eq!(p.kernel_limits_equal, p.hom_kernel_limits_equal);
        assert_eq!(p.kernel_limits_equal, p.verdict.is_equivalent());
    }
    passed(
        "criterion 10: boundary pair (1·2^∞, 2·1^∞) glues with n₀ = 2 and \
         shrinking ρ_D; (1^∞, 2^∞) stays above 3/4; weighted and homogeneous \
         verdicts agree",
    );
}
