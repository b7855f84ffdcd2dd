//! Finite-depth boundary diagnostics: the coding map from infinite words to
//! attractor points, boundary equivalence of prefix sequences, and the
//! side-by-side comparison of weighted and homogeneous Martin distances.
//!
//! Test points are eventually periodic, so their addresses solve exactly:
//! the address of `u·(c)^∞` is `S_u` applied to the fixed point of `S_c`.
//! Nothing here asserts the homeomorphism; the reports state truncation
//! depths and leave the reading to the caller.

use std::collections::BTreeMap;

use crate::chain::Chain;
use crate::error::Error;
use crate::ifs::{ComposedMap, IfsSpec, Point};
use crate::kernel::{extended_kernel, martin_metric, KernelPair, MetricWeights};
use crate::rat::{to_f64, Rational};
use crate::word::{InfiniteWord, Word};

/// A coded attractor point.
#[derive(Clone, Debug, PartialEq)]
pub struct AddressPoint {
    /// Exact coordinates, available for eventually-periodic words in exact mode.
    pub exact: Option<Point>,
    /// Cartesian embedding for rendering and Euclidean distances.
    pub cartesian: Vec<f64>,
    /// Approximation radius when only a finite prefix was used.
    pub error_bound: Option<f64>,
}

/// Codes `ξ` to its attractor point.
///
/// Eventually-periodic words solve in closed form; explicit prefix chains
/// return `S_{ξ|n}(centroid)` with the `diam · Π c_i` error bound.
pub fn address_point(ifs: &IfsSpec, xi: &InfiniteWord, n: usize) -> Result<AddressPoint, Error> {
    match xi {
        InfiniteWord::Periodic { head, cycle } => {
            let head_map = ifs.compose_map(head)?;
            let cycle_map = ifs.compose_map(cycle)?;
            match cycle_map {
                ComposedMap::Exact(cycle_affine) => {
                    let fix = if ifs.is_barycentric() {
                        cycle_affine.fixed_point_on_simplex()
                    } else {
                        cycle_affine.fixed_point()
                    }
                    .ok_or_else(|| {
                        Error::InvalidSpec("periodic cycle map has no fixed point".into())
                    })?;
                    let point = ifs.apply_composed(&head_map, &Point::Exact(fix));
                    let cartesian = ifs.embed_f64(&point);
                    Ok(AddressPoint {
                        exact: Some(point),
                        cartesian,
                        error_bound: None,
                    })
                }
                ComposedMap::Float(cycle_float) => {
                    let fix = cycle_float.fixed_point();
                    let point = ifs.apply_composed(&head_map, &Point::Float(fix));
                    let cartesian = ifs.embed_f64(&point);
                    Ok(AddressPoint {
                        exact: None,
                        cartesian,
                        error_bound: None,
                    })
                }
            }
        }
        InfiniteWord::Explicit(_) => {
            let prefix = xi.prefix(n);
            let map = ifs.compose_map(&prefix)?;
            let point = ifs.apply_composed(&map, &ifs.centroid());
            let cartesian = ifs.embed_f64(&point);
            let bound = ifs.diameter_f64() * map.ratio_f64();
            Ok(AddressPoint {
                exact: None,
                cartesian,
                error_bound: Some(bound),
            })
        }
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Outcome of the finite-depth boundary equivalence scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryVerdict {
    /// `ξ|_j ∼ ζ|_j` for all `n₀ ≤ j ≤ n`, with `n₀` minimal.
    EquivalentFrom(usize),
    NotEquivalentUpTo(usize),
}

impl BoundaryVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, BoundaryVerdict::EquivalentFrom(_))
    }
}

/// Finds the least `n₀ ≤ n` with `ξ|_j ∼ ζ|_j` for every `n₀ ≤ j ≤ n`.
pub fn boundary_equivalent(
    levels: &crate::adjacency::Levels,
    xi: &InfiniteWord,
    zeta: &InfiniteWord,
    n: usize,
) -> BoundaryVerdict {
    let n = n.min(levels.depth());
    let mut first = None;
    for j in (1..=n).rev() {
        if levels.related(&xi.prefix(j), &zeta.prefix(j)) {
            first = Some(j);
        } else {
            break;
        }
    }
    match first {
        Some(n0) => BoundaryVerdict::EquivalentFrom(n0),
        None => BoundaryVerdict::NotEquivalentUpTo(n),
    }
}

/// A boundary test point: representative word, coded address and the
/// stabilised kernel fingerprint `u ↦ lim k(u, ξ|_n)`.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub representative: InfiniteWord,
    pub address: AddressPoint,
    /// `None` marks a kernel sequence that still moves at the table depth.
    pub fingerprint: BTreeMap<Word, Option<Rational>>,
}

/// Builds the fingerprint of `ξ` over all base words `|u| ≤ fingerprint_depth`.
pub fn boundary_point(
    chain: &Chain,
    xi: &InfiniteWord,
    fingerprint_depth: usize,
) -> Result<BoundaryPoint, Error> {
    let ifs = &chain.levels.ifs;
    let address = address_point(ifs, xi, chain.depth())?;
    let mut fingerprint = BTreeMap::new();
    for lv in 0..=fingerprint_depth.min(chain.depth().saturating_sub(1)) {
        for u in &chain.levels.level(lv).words {
            let seq = extended_kernel(chain, u, xi, chain.depth());
            let value = seq
                .stabilized_from
                .map(|_| seq.values.last().expect("nonempty").1.clone());
            fingerprint.insert(u.clone(), value);
        }
    }
    Ok(BoundaryPoint {
        representative: xi.clone(),
        address,
        fingerprint,
    })
}

/// Per-pair output of [`homeomorphism_diagnostic`].
#[derive(Clone, Debug)]
pub struct PairDiagnostic {
    pub left: InfiniteWord,
    pub right: InfiniteWord,
    pub verdict: BoundaryVerdict,
    /// Euclidean distance of the coded addresses.
    pub address_distance: f64,
    /// Exact address comparison, when exact coding was possible.
    pub addresses_equal_exact: Option<bool>,
    /// Truncated Martin distance `ρ_D(ξ|_D, ζ|_D)` per requested depth.
    pub rho_by_depth: Vec<(usize, Rational)>,
    /// The same distances for the homogeneous chain.
    pub hom_rho_by_depth: Vec<(usize, Rational)>,
    /// Stabilised kernel fingerprints agree under the configured masses.
    pub kernel_limits_equal: bool,
    /// … and under uniform masses.
    pub hom_kernel_limits_equal: bool,
}

/// Diagnostic report over a pair sample.
#[derive(Clone, Debug)]
pub struct DiagnosticReport {
    pub truncation_depths: Vec<usize>,
    pub fingerprint_depth: usize,
    pub pairs: Vec<PairDiagnostic>,
    /// Spearman rank correlation between `ρ_{D_max}` and address distance.
    pub rank_correlation: Option<f64>,
}

fn fingerprints_equal(
    a: &BTreeMap<Word, Option<Rational>>,
    b: &BTreeMap<Word, Option<Rational>>,
) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|((wa, va), (wb, vb))| {
            wa == wb
                && match (va, vb) {
                    (Some(x), Some(y)) => x == y,
                    _ => false,
                }
        })
}

fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let rank = |vals: &[f64]| -> Vec<f64> {
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap());
        let mut ranks = vec![0.0; vals.len()];
        let mut i = 0;
        while i < order.len() {
            let mut j = i;
            while j + 1 < order.len() && vals[order[j + 1]] == vals[order[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &order[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mean) * (b - mean);
        var_x += (a - mean) * (a - mean);
        var_y += (b - mean) * (b - mean);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some(cov / (var_x * var_y).sqrt())
}

/// Runs the full per-pair diagnostic: boundary equivalence, exact and
/// Euclidean address comparison, and truncated Martin distances under both
/// the configured and the uniform masses.
pub fn homeomorphism_diagnostic(
    pair: &KernelPair,
    test_pairs: &[(InfiniteWord, InfiniteWord)],
    depths: &[usize],
    fingerprint_depth: usize,
) -> Result<DiagnosticReport, Error> {
    if test_pairs.is_empty() {
        return Err(Error::EmptyPairList);
    }
    let levels = &pair.chain.levels;
    let max_depth = levels.depth();
    for &d in depths {
        if d > max_depth {
            return Err(Error::DepthExceeded {
                built: max_depth,
                needed: d,
            });
        }
    }
    let mut out = Vec::with_capacity(test_pairs.len());
    let mut rho_sample = Vec::new();
    let mut dist_sample = Vec::new();
    for (xi, zeta) in test_pairs {
        let verdict = boundary_equivalent(levels, xi, zeta, max_depth);
        let left_point = boundary_point(&pair.chain, xi, fingerprint_depth)?;
        let right_point = boundary_point(&pair.chain, zeta, fingerprint_depth)?;
        let hom_left = boundary_point(&pair.hom, xi, fingerprint_depth)?;
        let hom_right = boundary_point(&pair.hom, zeta, fingerprint_depth)?;
        let address_distance = euclidean_distance(
            &left_point.address.cartesian,
            &right_point.address.cartesian,
        );
        let addresses_equal_exact =
            match (&left_point.address.exact, &right_point.address.exact) {
                (Some(a), Some(b)) => Some(a == b),
                _ => None,
            };
        let mut rho_by_depth = Vec::with_capacity(depths.len());
        let mut hom_rho_by_depth = Vec::with_capacity(depths.len());
        for &d in depths {
            let weights = MetricWeights::new(d);
            rho_by_depth.push((
                d,
                martin_metric(&pair.chain, &xi.prefix(d), &zeta.prefix(d), &weights).value,
            ));
            hom_rho_by_depth.push((
                d,
                martin_metric(&pair.hom, &xi.prefix(d), &zeta.prefix(d), &weights).value,
            ));
        }
        if let Some((_, rho)) = rho_by_depth.last() {
            rho_sample.push(to_f64(rho));
            dist_sample.push(address_distance);
        }
        out.push(PairDiagnostic {
            left: xi.clone(),
            right: zeta.clone(),
            verdict,
            address_distance,
            addresses_equal_exact,
            rho_by_depth,
            hom_rho_by_depth,
            kernel_limits_equal: fingerprints_equal(
                &left_point.fingerprint,
                &right_point.fingerprint,
            ),
            hom_kernel_limits_equal: fingerprints_equal(
                &hom_left.fingerprint,
                &hom_right.fingerprint,
            ),
        });
    }
    Ok(DiagnosticReport {
        truncation_depths: depths.to_vec(),
        fingerprint_depth,
        pairs: out,
        rank_correlation: spearman(&rho_sample, &dist_sample),
    })
}
