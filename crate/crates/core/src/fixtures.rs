//! Built-in schemes used by the test suites and shipped as CLI fixtures.
//!
//! # Carpet numbering
//!
//! The carpet letters follow the 3×3 grid in row-major reading order with the
//! centre removed:
//!
//! ```text
//!   1 2 3
//!   4 . 5
//!   6 7 8
//! ```
//!
//! Row 1 is the top of the unit square. The extended rule set below glues the
//! subcell pairs that share an edge across a parent boundary, plus the four
//! diagonal pairs meeting at the corners of the removed centre square. The
//! diagonal pairs across four-cell corner points (those where two of the four
//! cells share a parent) are deliberately not glued: with them the relation
//! cannot be transitive. The rule list is a fixture choice, not a canonical
//! one, and callers may supply their own.

use crate::adjacency::RuleSet;
use crate::error::Error;
use crate::ifs::{AffineMap, IfsSpec, OpenSet};
use crate::linalg::Vector;
use crate::rat::{one, ratio, zero, Rational};
use crate::word::Word;

/// Cartesian vertices of a regular unit-side simplex on `n` points,
/// for rendering and Euclidean diagnostics.
pub fn regular_simplex_vertices(n: usize) -> Vec<Vec<f64>> {
    let dim = n - 1;
    let mut pts: Vec<Vec<f64>> = vec![vec![0.0; dim]];
    for k in 1..n {
        // Centroid of the simplex built so far, lifted by the height that
        // keeps every pairwise distance at 1.
        let mut centroid = vec![0.0; dim];
        for p in &pts {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v;
            }
        }
        for c in &mut centroid {
            *c /= pts.len() as f64;
        }
        let r2: f64 = pts[0]
            .iter()
            .zip(&centroid)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let mut next = centroid;
        next[k - 1] = (1.0 - r2).sqrt();
        pts.push(next);
    }
    pts
}

/// The `n`-letter gasket: midpoint maps towards the vertices of a regular
/// simplex, in exact barycentric mode.
pub fn gasket(n: usize) -> Result<IfsSpec, Error> {
    let maps = (0..n)
        .map(|i| {
            let mut e = vec![zero(); n];
            e[i] = one();
            (ratio(1, 2), e)
        })
        .collect();
    IfsSpec::barycentric(
        &format!("gasket-{}", n),
        n,
        maps,
        Some(regular_simplex_vertices(n)),
        Some(OpenSet::UnitSimplex),
    )
}

/// Weighted gasket masses `(1/2, 1/4, …, 1/4)` summing to 1.
pub fn gasket_weighted_masses(n: usize) -> Vec<Rational> {
    let mut m = vec![Rational::new(1.into(), (2 * (n as i64 - 1)).into()); n];
    m[0] = ratio(1, 2);
    m
}

/// Uniform masses `1/N`.
pub fn uniform_masses(n: usize) -> Vec<Rational> {
    vec![Rational::new(1.into(), (n as i64).into()); n]
}

fn carpet_fixed_points() -> Vec<(Rational, Rational)> {
    let c = |a: i64, b: i64| (ratio(a, 2), ratio(b, 2));
    vec![
        c(0, 2), // 1: top-left corner
        c(1, 2), // 2: top edge midpoint
        c(2, 2), // 3: top-right corner
        c(0, 1), // 4: left edge midpoint
        c(2, 1), // 5: right edge midpoint
        c(0, 0), // 6: bottom-left corner
        c(1, 0), // 7: bottom edge midpoint
        c(2, 0), // 8: bottom-right corner
    ]
}

/// The 8-map carpet on the unit square, ratio 1/3, exact box mode.
pub fn carpet() -> Result<IfsSpec, Error> {
    let maps: Vec<AffineMap> = carpet_fixed_points()
        .into_iter()
        .map(|(x, y)| AffineMap::homothety(&vec![x, y], &ratio(1, 3)))
        .collect();
    let square: Vec<Vector> = vec![
        vec![zero(), zero()],
        vec![one(), zero()],
        vec![one(), one()],
        vec![zero(), one()],
    ];
    IfsSpec::exact_box("carpet", 2, maps, Some(OpenSet::Polygon(square)))
}

/// Weighted carpet masses: the three upper-left squares carry 1/5 each,
/// the remaining five carry 2/25 each.
pub fn carpet_weighted_masses() -> Vec<Rational> {
    let heavy = ratio(1, 5);
    let light = ratio(2, 25);
    vec![
        heavy.clone(),
        heavy.clone(),
        light.clone(),
        heavy,
        light.clone(),
        light.clone(),
        light.clone(),
        light,
    ]
}

/// The shipped extended equivalence rules for the carpet (see module docs).
pub fn carpet_extended_rules() -> Result<RuleSet, Error> {
    let pairs = [
        // vertical parent edges: right column of the left parent against
        // left column of the right parent, top to bottom
        ("13", "21"),
        ("15", "24"),
        ("18", "26"),
        ("23", "31"),
        ("25", "34"),
        ("28", "36"),
        ("63", "71"),
        ("65", "74"),
        ("68", "76"),
        ("73", "81"),
        ("75", "84"),
        ("78", "86"),
        // horizontal parent edges: bottom row of the upper parent against
        // top row of the lower parent, left to right
        ("16", "41"),
        ("17", "42"),
        ("18", "43"),
        ("36", "51"),
        ("37", "52"),
        ("38", "53"),
        ("46", "61"),
        ("47", "62"),
        ("48", "63"),
        ("56", "81"),
        ("57", "82"),
        ("58", "83"),
        // diagonal pairs at the four corners of the removed centre
        ("26", "43"),
        ("28", "51"),
        ("48", "71"),
        ("56", "73"),
    ];
    let pairs = pairs
        .iter()
        .map(|(a, b)| Ok((Word::parse(a, 8)?, Word::parse(b, 8)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    RuleSet::new(pairs, 8)
}

/// Two maps with separated cells; the 1-cell graph is disconnected.
pub fn disjoint_pair() -> Result<IfsSpec, Error> {
    let maps = vec![
        AffineMap::homothety(&vec![zero(), zero()], &ratio(1, 3)),
        AffineMap::homothety(&vec![one(), one()], &ratio(1, 3)),
    ];
    IfsSpec::exact_box("disjoint-pair", 2, maps, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn simplex_vertices_are_unit_distance() {
        for n in 2..=5 {
            let pts = regular_simplex_vertices(n);
            assert_eq!(pts.len(), n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let d2: f64 = pts[i]
                        .iter()
                        .zip(&pts[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    assert!((d2 - 1.0).abs() < 1e-12, "n={n} i={i} j={j} d2={d2}");
                }
            }
        }
    }

    #[test]
    fn mass_presets_sum_to_one() {
        for n in [3usize, 4, 8] {
            let total: Rational = uniform_masses(n).into_iter().sum();
            assert_eq!(total, one());
        }
        let total: Rational = gasket_weighted_masses(3).into_iter().sum();
        assert_eq!(total, one());
        let total: Rational = carpet_weighted_masses().into_iter().sum();
        assert_eq!(total, one());
        assert!(carpet_weighted_masses().iter().all(|m| !m.is_zero()));
    }

    #[test]
    fn carpet_has_eight_distinct_fixed_points() {
        let c = carpet().unwrap();
        assert_eq!(c.alphabet, 8);
        assert_eq!(c.fixed_points_all().len(), 8);
        // All eight fixed points are essential: grid corners and edge
        // midpoints are shared between neighbouring level-1 cells.
        assert_eq!(c.essential_letters().len(), 8);
    }

    #[test]
    fn extended_rules_close_transitively_on_suffixes() {
        let rules = carpet_extended_rules().unwrap();
        assert_eq!(rules.pairs().len(), 28);
        let w = |s: &str| Word::parse(s, 8).unwrap();
        let partners = rules.partners(&w("36"));
        assert!(partners.contains(&w("28")) && partners.contains(&w("51")));
        assert_eq!(partners.len(), 2);
    }
}
