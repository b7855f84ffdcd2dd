//! Martin kernels, the homogeneous bridge and the truncated Martin metric.
//!
//! The kernel is the Green function normalised by the root column,
//! `k(v, w) = g(v, w) / g(∅, w) = g(v, w) / m(w)`. Because the q-function is
//! mass-independent, the weighted kernel factors through the homogeneous one:
//! `k(v, w) = k_hom(v, w) · R(v) N^{−|v|} / Σ_{v̂∼v} m(v̂)` away from the
//! diagonal, with `k(v, v) = 1/m(v)`. Both routes are computed exactly and
//! compared; the bridge is refused when the (B1)/(B2) evidence fails.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;

use crate::adjacency::Levels;
use crate::audit::{check_b2, B2Report};
use crate::chain::{Chain, MassDistribution};
use crate::error::Error;
use crate::rat::{one, pow, zero, Rational};
use crate::word::{InfiniteWord, Word};

/// `k(v, w) = g(v, w) / m(w)`; in particular `k(∅, w) = 1` and
/// `k(v, v) = 1/m(v)`.
pub fn martin_kernel(chain: &Chain, v: &Word, w: &Word) -> Rational {
    chain.green(v, w) / chain.mass(w)
}

/// `R(v)·N^{−|v|} / Σ_{v̂∼v} m(v̂)`, the factor between the two kernels.
pub fn bridge_factor(chain: &Chain, v: &Word) -> Rational {
    let n = chain.alphabet() as i64;
    let r = Rational::from_integer(BigInt::from(chain.levels.r_value(v) as i64));
    let n_pow = pow(&Rational::new(BigInt::from(1), BigInt::from(n)), v.len());
    r * n_pow / chain.class_mass(v)
}

/// Stabilisation evidence for (B1): homogeneous kernel sequences along
/// eventually-periodic test words, with the first index from which each
/// sequence is exactly constant.
#[derive(Clone, Debug)]
pub struct B1Report {
    /// `(test word, base word, first stable prefix length)`;
    /// `None` when the sequence still moves at the table depth.
    pub observations: Vec<(InfiniteWord, Word, Option<usize>)>,
    pub all_stabilized: bool,
}

fn stabilization_index(values: &[(usize, Rational)]) -> Option<usize> {
    // First prefix length from which the sequence is constant to the end,
    // with at least two witnesses.
    if values.len() < 2 {
        return None;
    }
    let last = &values[values.len() - 1].1;
    let mut start = None;
    for (n, value) in values.iter().rev() {
        if value == last {
            start = Some(*n);
        } else {
            break;
        }
    }
    match start {
        Some(s) if s < values[values.len() - 1].0 => Some(s),
        _ => None,
    }
}

/// Observes homogeneous kernel stabilisation along canonical test words:
/// all tails `a^∞` and `a·b^∞`.
pub fn b1_stabilization(hom: &Chain) -> B1Report {
    let n = hom.alphabet();
    let depth = hom.depth();
    let mut tests = Vec::new();
    for a in 1..=n as u8 {
        tests.push(InfiniteWord::periodic(Word::empty(), Word::from_letters(&[a])).unwrap());
        for b in 1..=n as u8 {
            if a != b {
                tests.push(
                    InfiniteWord::periodic(Word::from_letters(&[a]), Word::from_letters(&[b]))
                        .unwrap(),
                );
            }
        }
    }
    let v_max = 2.min(depth.saturating_sub(3));
    let mut observations = Vec::new();
    let mut all = true;
    for xi in &tests {
        for lv in 0..=v_max {
            for v in &hom.levels.level(lv).words {
                let values: Vec<(usize, Rational)> = (lv + 1..=depth)
                    .map(|len| (len, martin_kernel(hom, v, &xi.prefix(len))))
                    .collect();
                let idx = stabilization_index(&values);
                all &= idx.is_some();
                observations.push((xi.clone(), v.clone(), idx));
            }
        }
    }
    B1Report {
        observations,
        all_stabilized: all,
    }
}

/// A weighted chain and its homogeneous counterpart on the same equivalence
/// structure, with the (B1)/(B2) evidence the kernel bridge depends on.
#[derive(Clone, Debug)]
pub struct KernelPair {
    pub chain: Chain,
    pub hom: Chain,
    pub b2: B2Report,
    pub b1: B1Report,
}

impl KernelPair {
    pub fn build(levels: Arc<Levels>, masses: MassDistribution) -> Result<KernelPair, Error> {
        let b2 = check_b2(&levels, &masses, levels.depth());
        let chain = Chain::build(levels.clone(), masses)?;
        let hom = Chain::build(
            levels.clone(),
            MassDistribution::uniform(levels.ifs.alphabet),
        )?;
        let b1 = b1_stabilization(&hom);
        Ok(KernelPair {
            chain,
            hom,
            b2,
            b1,
        })
    }

    pub fn bridge_preconditions_ok(&self) -> bool {
        self.b2.pass() && self.b1.all_stabilized
    }
}

/// Both kernel routes for one pair of words.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeValue {
    /// Through the homogeneous kernel and the class-mass factor.
    pub via_theorem: Rational,
    /// Directly from the weighted Green table.
    pub direct: Rational,
}

/// Computes `k(v, w)` through the homogeneous kernel; refused unless the
/// (B1)/(B2) audits passed on this fixture.
pub fn kernel_via_theorem(pair: &KernelPair, v: &Word, w: &Word) -> Result<BridgeValue, Error> {
    if !pair.b2.pass() {
        let word = pair
            .b2
            .first_failure()
            .map(|w| w.render(pair.chain.alphabet()))
            .unwrap_or_default();
        return Err(Error::BridgeRefused(format!(
            "assumption (B2) fails at word {word}"
        )));
    }
    if !pair.b1.all_stabilized {
        return Err(Error::BridgeRefused(
            "homogeneous kernel sequences did not stabilize at this depth".into(),
        ));
    }
    let direct = martin_kernel(&pair.chain, v, w);
    let via_theorem = if v == w {
        one() / pair.chain.mass(v)
    } else {
        martin_kernel(&pair.hom, v, w) * bridge_factor(&pair.chain, v)
    };
    Ok(BridgeValue {
        via_theorem,
        direct,
    })
}

/// Truncated Martin metric weights `a(u) = m(u)^{|u|+1}` up to depth `D`.
///
/// Every positive weight family qualifies at finite truncation; the default
/// makes `a(u)/g(∅,u) = m(u)^{|u|}` summable level by level.
#[derive(Clone, Copy, Debug)]
pub struct MetricWeights {
    pub truncation: usize,
}

impl MetricWeights {
    pub fn new(truncation: usize) -> MetricWeights {
        MetricWeights { truncation }
    }

    /// The weight `a(u)` of one word under the chain's masses.
    pub fn weight(&self, chain: &Chain, u: &Word) -> Rational {
        pow(&chain.mass(u), u.len() + 1)
    }

    /// Per-level sums `Σ_{|u|=n} a(u)/g(∅,u)`, the summability diagnostic.
    pub fn summability_terms(&self, chain: &Chain) -> Vec<Rational> {
        (0..=self.truncation.min(chain.depth()))
            .map(|n| {
                chain
                    .levels
                    .level(n)
                    .words
                    .iter()
                    .map(|u| pow(&chain.mass(u), u.len()))
                    .fold(zero(), |a, v| a + v)
            })
            .collect()
    }
}

/// A truncated metric value with its truncation warning.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricValue {
    pub value: Rational,
    /// `D < max(|v|, |w|)`: the separating term lies beyond the truncation.
    pub separation_not_guaranteed: bool,
}

/// `ρ_D(v, w) = Σ_{|u| ≤ D} a(u) · |k(u,v) − k(u,w)|`, exactly.
///
/// Only ancestors of `v` or `w` contribute, so the sum is sparse.
pub fn martin_metric(
    chain: &Chain,
    v: &Word,
    w: &Word,
    weights: &MetricWeights,
) -> MetricValue {
    let d = weights.truncation;
    let mut columns: BTreeMap<Word, (Rational, Rational)> = BTreeMap::new();
    for (u_ref, entry) in chain.ancestor_entries(v) {
        let u = chain.word_of(*u_ref);
        if u.len() <= d {
            columns.entry(u.clone()).or_insert_with(|| (zero(), zero())).0 =
                &entry.g / chain.mass(v);
        }
    }
    for (u_ref, entry) in chain.ancestor_entries(w) {
        let u = chain.word_of(*u_ref);
        if u.len() <= d {
            columns.entry(u.clone()).or_insert_with(|| (zero(), zero())).1 =
                &entry.g / chain.mass(w);
        }
    }
    let mut total = zero();
    for (u, (kv, kw)) in &columns {
        total += weights.weight(chain, u) * abs(kv - kw);
    }
    MetricValue {
        value: total,
        separation_not_guaranteed: d < v.len().max(w.len()),
    }
}

/// The one positive metric term that separates distinct words: `u` is the
/// longer word (or `w` on equal lengths), where `k(u, ·)` vanishes on the
/// other word and equals `1/m(u)` on `u` itself. Returns `None` when the
/// witness lies beyond the truncation.
pub fn separation_witness(
    chain: &Chain,
    v: &Word,
    w: &Word,
    weights: &MetricWeights,
) -> Option<Rational> {
    if v == w {
        return None;
    }
    let u = if v.len() > w.len() { v } else { w };
    let other = if v.len() > w.len() { w } else { v };
    if u.len() > weights.truncation {
        return None;
    }
    let term = weights.weight(chain, u) * abs(one() / chain.mass(u) - martin_kernel(chain, u, other));
    Some(term)
}

fn abs(r: Rational) -> Rational {
    if r < zero() {
        -r
    } else {
        r
    }
}

/// Kernel values along the prefixes of an infinite word, with stabilisation
/// evidence and the termwise homogeneous proportionality factor.
#[derive(Clone, Debug)]
pub struct ExtendedKernel {
    pub base: Word,
    /// `(prefix length, k(v, ξ|_n))` for `n = 1..=depth`.
    pub values: Vec<(usize, Rational)>,
    /// First prefix length from which the values are exactly constant.
    pub stabilized_from: Option<usize>,
    /// Consecutive absolute differences, in prefix order.
    pub deltas: Vec<Rational>,
}

/// Evaluates `k(v, ξ|_1), …, k(v, ξ|_n)`.
pub fn extended_kernel(chain: &Chain, v: &Word, xi: &InfiniteWord, n: usize) -> ExtendedKernel {
    let values: Vec<(usize, Rational)> = (1..=n)
        .map(|len| (len, martin_kernel(chain, v, &xi.prefix(len))))
        .collect();
    let deltas = values.windows(2).map(|p| abs(&p[1].1 - &p[0].1)).collect();
    ExtendedKernel {
        base: v.clone(),
        stabilized_from: stabilization_index(&values),
        values,
        deltas,
    }
}

/// `Σ_u p(v, u) k(u, w)` — the Markov operator applied to the kernel column.
pub fn markov_applied_kernel(chain: &Chain, v: &Word, w: &Word) -> Rational {
    chain.apply_markov_operator(|u| martin_kernel(chain, u, w), v)
}
