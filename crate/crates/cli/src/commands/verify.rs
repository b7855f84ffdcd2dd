//! `verify`: exact identity suites over the chain and kernel tables.
//! Exit 0 iff every checked identity holds; the first counterexample of a
//! failing suite is printed.

use fractal_chain::chain::{Chain, MassDistribution};
use fractal_chain::kernel::{
    kernel_via_theorem, markov_applied_kernel, martin_kernel, martin_metric,
    separation_witness, KernelPair, MetricWeights,
};
use fractal_chain::rat::{self, ratio, zero};
use fractal_chain::word::{InfiniteWord, Word};
use num_traits::Zero;

use crate::args::Invocation;
use crate::commands::{build_chain, EXIT_OK, EXIT_USAGE, EXIT_VIOLATION};
use crate::config::Fixture;

struct SuiteOutcome {
    failures: usize,
    checks: usize,
}

impl SuiteOutcome {
    fn new() -> Self {
        SuiteOutcome {
            failures: 0,
            checks: 0,
        }
    }
}

pub fn run(inv: &Invocation, fixture: &Fixture) -> i32 {
    let depth = inv.depth.unwrap_or(4);
    let suites: Vec<&str> = match inv.suite.as_str() {
        "all" => vec!["green", "q-invariance", "theorem-bridge", "harmonic", "metric"],
        s @ ("green" | "q-invariance" | "theorem-bridge" | "harmonic" | "metric") => vec![s],
        other => {
            eprintln!("unknown suite {other:?}");
            return EXIT_USAGE;
        }
    };

    let chain = match build_chain(fixture, depth) {
        Ok(c) => c,
        Err(code) => return code,
    };

    let mut failed = false;
    for suite in suites {
        let outcome = match suite {
            "green" => green_suite(&chain, inv.corrupt_green),
            "q-invariance" => q_invariance_suite(fixture, &chain, depth),
            "theorem-bridge" => bridge_suite(fixture, &chain),
            "harmonic" => harmonic_suite(&chain),
            "metric" => metric_suite(&chain, depth),
            _ => unreachable!(),
        };
        let verdict = if outcome.failures == 0 { "ok" } else { "FAIL" };
        println!(
            "{verdict}: suite {suite} ({} checks, {} failures) on {} at depth {depth}",
            outcome.checks, outcome.failures, fixture.name
        );
        failed |= outcome.failures > 0;
    }
    if failed {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

/// g(∅,w) = m(w) for every word, and the ancestor factorisation
/// g(v,w) = Σ_{d(v,u)=k} g(v,u)·g(u,w) for every intermediate level.
fn green_suite(chain: &Chain, corrupt: bool) -> SuiteOutcome {
    let mut out = SuiteOutcome::new();
    let alphabet = chain.alphabet();
    let corrupt_target = corrupt.then(|| {
        let level = 2.min(chain.depth());
        chain.levels.level(level).words[0].clone()
    });

    for n in 0..=chain.depth() {
        for w in &chain.levels.level(n).words {
            let mut g = chain.green(&Word::empty(), w);
            if corrupt_target.as_ref() == Some(w) {
                // Test hook: simulate a corrupted table entry.
                g += ratio(1, 1_000_000);
            }
            out.checks += 1;
            if g != chain.mass(w) {
                if out.failures == 0 {
                    println!(
                        "counterexample: g(-,{}) = {} but m = {}",
                        w.render(alphabet),
                        rat::format(&g),
                        rat::format(&chain.mass(w))
                    );
                }
                out.failures += 1;
            }
        }
    }

    // Factorisation over every stored ancestor pair and cut level.
    for n in 0..=chain.depth() {
        for w in &chain.levels.level(n).words {
            for (v_ref, entry) in chain.ancestor_entries(w) {
                let v = chain.word_of(*v_ref);
                let gap = n - v.len();
                if gap < 1 {
                    continue;
                }
                for k in 1..=gap {
                    let cut = v.len() + k;
                    let mut total = zero();
                    for (u_ref, u_entry) in chain.ancestor_entries(w) {
                        if u_ref.level as usize == cut {
                            let u = chain.word_of(*u_ref);
                            total += chain.green(v, u) * &u_entry.g;
                        }
                    }
                    out.checks += 1;
                    if total != entry.g {
                        if out.failures == 0 {
                            println!(
                                "counterexample: factorisation of g({},{}) at cut {} gives {}",
                                v.render(alphabet),
                                w.render(alphabet),
                                k,
                                rat::format(&total)
                            );
                        }
                        out.failures += 1;
                    }
                }
            }
        }
    }
    out
}

/// q tables must agree entry-for-entry across mass distributions (needs B2).
fn q_invariance_suite(fixture: &Fixture, chain: &Chain, depth: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new();
    let b2 = fractal_chain::audit::check_b2(&chain.levels, &chain.masses, depth);
    if let Some(word) = b2.first_failure() {
        println!(
            "note: q-invariance not applicable, (B2) fails at {}; run `audit --check b2`",
            word.render(chain.alphabet())
        );
        return out;
    }
    let n = chain.alphabet();
    let uniform = Chain::build(chain.levels.clone(), MassDistribution::uniform(n))
        .expect("uniform masses are valid");
    // Third preset: rotate the configured masses by one letter.
    let mut rotated = fixture.masses.letters().to_vec();
    rotated.rotate_right(1);
    let rotated = Chain::build(
        chain.levels.clone(),
        MassDistribution::new(rotated).expect("rotation preserves validity"),
    )
    .expect("rotated masses are valid");

    let base = chain.all_entries();
    for other in [&uniform, &rotated] {
        let theirs = other.all_entries();
        out.checks += 1;
        if base.len() != theirs.len() {
            println!(
                "counterexample: table support differs ({} vs {} entries)",
                base.len(),
                theirs.len()
            );
            out.failures += 1;
            continue;
        }
        for ((v, w, _, q1), (_, _, _, q2)) in base.iter().zip(&theirs) {
            out.checks += 1;
            if q1 != q2 {
                if out.failures == 0 {
                    println!(
                        "counterexample: q({},{}) = {} vs {}",
                        v.render(chain.alphabet()),
                        w.render(chain.alphabet()),
                        rat::format(q1),
                        rat::format(q2)
                    );
                }
                out.failures += 1;
            }
        }
    }
    out
}

/// Martin kernel through the homogeneous bridge equals the direct kernel.
fn bridge_suite(fixture: &Fixture, chain: &Chain) -> SuiteOutcome {
    let mut out = SuiteOutcome::new();
    let pair = KernelPair::build(chain.levels.clone(), fixture.masses.clone())
        .expect("chain already built once");
    if !pair.bridge_preconditions_ok() {
        println!("note: theorem-bridge not applicable, (B1)/(B2) evidence fails; run `audit`");
        return out;
    }
    for n in 0..=chain.depth() {
        for w in &chain.levels.level(n).words {
            for (v_ref, _) in pair.chain.ancestor_entries(w) {
                let v = pair.chain.word_of(*v_ref);
                let bridge = kernel_via_theorem(&pair, v, w).expect("preconditions checked");
                out.checks += 1;
                if bridge.via_theorem != bridge.direct {
                    if out.failures == 0 {
                        println!(
                            "counterexample: bridge k({},{}) = {} direct {}",
                            v.render(chain.alphabet()),
                            w.render(chain.alphabet()),
                            rat::format(&bridge.via_theorem),
                            rat::format(&bridge.direct)
                        );
                    }
                    out.failures += 1;
                }
            }
        }
    }
    out
}

/// k(v,w) = Σ_u p(v,u) k(u,w) for every pair with positive gap, and the
/// fixed-point form on eventually-periodic test words.
fn harmonic_suite(chain: &Chain) -> SuiteOutcome {
    let mut out = SuiteOutcome::new();
    let alphabet = chain.alphabet();
    for lv in 0..chain.depth() {
        for v in &chain.levels.level(lv).words {
            for lw in (lv + 1)..=chain.depth() {
                for w in &chain.levels.level(lw).words {
                    let lhs = martin_kernel(chain, v, w);
                    let rhs = markov_applied_kernel(chain, v, w);
                    out.checks += 1;
                    if lhs != rhs {
                        if out.failures == 0 {
                            println!(
                                "counterexample: k({},{}) = {} but (Pk)(v) = {}",
                                v.render(alphabet),
                                w.render(alphabet),
                                rat::format(&lhs),
                                rat::format(&rhs)
                            );
                        }
                        out.failures += 1;
                    }
                }
            }
        }
    }
    // Truncated harmonicity of the kernel maps along periodic test words.
    let mut test_words = Vec::new();
    for a in 1..=alphabet.min(3) as u8 {
        test_words.push(InfiniteWord::periodic(Word::empty(), Word::from_letters(&[a])).unwrap());
        for b in 1..=alphabet.min(3) as u8 {
            if a != b {
                test_words.push(
                    InfiniteWord::periodic(Word::from_letters(&[a]), Word::from_letters(&[b]))
                        .unwrap(),
                );
            }
        }
    }
    for xi in test_words {
        let target = xi.prefix(chain.depth());
        for lv in 0..chain.depth().saturating_sub(1) {
            for v in &chain.levels.level(lv).words {
                out.checks += 1;
                if martin_kernel(chain, v, &target) != markov_applied_kernel(chain, v, &target) {
                    out.failures += 1;
                }
            }
        }
    }
    out
}

/// Metric axioms at truncation D = depth: symmetry and triangle inequality
/// over short triples, separation witnesses over all pairs.
fn metric_suite(chain: &Chain, depth: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome::new();
    let weights = MetricWeights::new(depth);
    let short: Vec<Word> = (0..=3.min(depth))
        .flat_map(|n| chain.levels.level(n).words.clone())
        .collect();
    let mut rho = vec![vec![zero(); short.len()]; short.len()];
    for (i, v) in short.iter().enumerate() {
        for (j, w) in short.iter().enumerate() {
            rho[i][j] = martin_metric(chain, v, w, &weights).value;
        }
    }
    for i in 0..short.len() {
        out.checks += 1;
        if !rho[i][i].is_zero() {
            out.failures += 1;
        }
        for j in 0..short.len() {
            out.checks += 1;
            if rho[i][j] != rho[j][i] {
                if out.failures == 0 {
                    println!(
                        "counterexample: ρ({},{}) not symmetric",
                        short[i].render(chain.alphabet()),
                        short[j].render(chain.alphabet())
                    );
                }
                out.failures += 1;
            }
            for k in 0..short.len() {
                out.checks += 1;
                if rho[i][j] > &rho[i][k] + &rho[k][j] {
                    if out.failures == 0 {
                        println!(
                            "counterexample: triangle fails on ({},{},{})",
                            short[i].render(chain.alphabet()),
                            short[j].render(chain.alphabet()),
                            short[k].render(chain.alphabet())
                        );
                    }
                    out.failures += 1;
                }
            }
        }
    }
    // Separation: the witness term is a positive lower bound for ρ_D.
    let all: Vec<Word> = (0..=depth)
        .flat_map(|n| chain.levels.level(n).words.clone())
        .collect();
    for (i, v) in all.iter().enumerate() {
        for w in all.iter().skip(i + 1) {
            out.checks += 1;
            match separation_witness(chain, v, w, &weights) {
                Some(t) if t > zero() => {}
                _ => {
                    if out.failures == 0 {
                        println!(
                            "counterexample: no separating term for ({},{})",
                            v.render(chain.alphabet()),
                            w.render(chain.alphabet())
                        );
                    }
                    out.failures += 1;
                }
            }
        }
    }
    out
}
