//! Advisory open-set-condition probe.
//!
//! The open set is declared metadata, never inferred. The probe checks
//! containment of each image on the polytope vertices and pairwise
//! disjointness of image interiors; the result is evidence, not a proof.

use num_traits::Signed;
use serde::Serialize;

use crate::ifs::{IfsSpec, OpenSet};
use crate::linalg::Vector;
use crate::rat::{one, ratio, zero, Rational};
use crate::word::Word;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum OscProbe {
    /// No open set declared on the scheme.
    Undeclared,
    Report(OscReport),
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OscReport {
    /// `S_i(O) ⊆ O` held on every polytope vertex and sample point.
    pub containment_ok: bool,
    /// All pairs of image interiors separated.
    pub images_disjoint: bool,
    /// Pairs `(i, j)` of letters whose image interiors overlap.
    pub overlapping_pairs: Vec<(u8, u8)>,
    /// Letters whose image left the open set.
    pub containment_failures: Vec<u8>,
    /// Interior sample points tested per map.
    pub samples: usize,
}

impl OscProbe {
    pub fn passed(&self) -> bool {
        match self {
            OscProbe::Undeclared => false,
            OscProbe::Report(r) => r.containment_ok && r.images_disjoint,
        }
    }
}

/// Probes the declared open set of `ifs` with `samples` extra interior points.
pub fn osc_probe(ifs: &IfsSpec, samples: usize) -> OscProbe {
    let Some(open_set) = &ifs.open_set else {
        return OscProbe::Undeclared;
    };
    match open_set {
        OpenSet::UnitSimplex => probe_simplex(ifs, samples),
        OpenSet::Polygon(poly) => probe_polygon_exact(ifs, poly, samples),
        OpenSet::FloatPolygon(poly) => probe_polygon_float(ifs, poly, samples),
    }
}

/// Deterministic pseudo-random rational convex weights for interior samples.
fn sample_weights(count: usize, seed: u64) -> Vec<Rational> {
    let mut state = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        raw.push(ratio((state % 97 + 1) as i64, 1));
    }
    let total: Rational = raw.iter().fold(zero(), |a, v| a + v);
    raw.into_iter().map(|v| v / &total).collect()
}

fn probe_simplex(ifs: &IfsSpec, samples: usize) -> OscProbe {
    let n = ifs.alphabet;
    // Image of the open simplex under a barycentric homothety is the corner
    // polytope { λ ≥ t, Σλ = 1 } where t is the map translation.
    let mut lowers: Vec<Vector> = Vec::with_capacity(n);
    let mut containment_failures = Vec::new();
    for letter in 1..=n as u8 {
        let m = ifs
            .compose_map(&Word::from_letters(&[letter]))
            .expect("letter in range");
        let crate::ifs::ComposedMap::Exact(a) = m else {
            unreachable!("unit simplex probe runs in barycentric mode")
        };
        // Containment: vertices e_k map to points with nonnegative coordinates.
        let mut ok = true;
        for k in 0..n {
            let mut e = vec![zero(); n];
            e[k] = one();
            let img = a.apply(&e);
            if img.iter().any(|v| v.is_negative()) {
                ok = false;
            }
        }
        // Extra interior samples.
        for s in 0..samples {
            let w = sample_weights(n, (letter as u64) << 32 | s as u64);
            let img = a.apply(&w);
            if img.iter().any(|v| v.is_negative()) {
                ok = false;
            }
        }
        if !ok {
            containment_failures.push(letter);
        }
        lowers.push(a.translation.clone());
    }
    let mut overlapping = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            // Interiors intersect iff Σ_k max(t_i, t_j) < 1.
            let sum: Rational = lowers[i]
                .iter()
                .zip(&lowers[j])
                .map(|(x, y)| x.max(y).clone())
                .fold(zero(), |a, v| a + v);
            if sum < one() {
                overlapping.push((i as u8 + 1, j as u8 + 1));
            }
        }
    }
    OscProbe::Report(OscReport {
        containment_ok: containment_failures.is_empty(),
        images_disjoint: overlapping.is_empty(),
        overlapping_pairs: overlapping,
        containment_failures,
        samples,
    })
}

/// Exact 2-D half-plane test: is `p` inside (or on) the convex ccw polygon?
fn inside_polygon_exact(poly: &[Vector], p: &Vector) -> bool {
    let k = poly.len();
    (0..k).all(|i| {
        let a = &poly[i];
        let b = &poly[(i + 1) % k];
        let cross =
            (&b[0] - &a[0]) * (&p[1] - &a[1]) - (&b[1] - &a[1]) * (&p[0] - &a[0]);
        !cross.is_negative()
    })
}

/// Exact 2-D separating-axis test on convex polygons (open interiors).
fn interiors_disjoint_exact(p1: &[Vector], p2: &[Vector]) -> bool {
    for (a, b) in [(p1, p2), (p2, p1)] {
        let k = a.len();
        for i in 0..k {
            let e0 = &a[i];
            let e1 = &a[(i + 1) % k];
            let normal = [&e1[1] - &e0[1], &e0[0] - &e1[0]];
            let project = |pts: &[Vector]| {
                let vals: Vec<Rational> = pts
                    .iter()
                    .map(|p| &normal[0] * &p[0] + &normal[1] * &p[1])
                    .collect();
                (
                    vals.iter().min().unwrap().clone(),
                    vals.iter().max().unwrap().clone(),
                )
            };
            let (min_a, max_a) = project(a);
            let (min_b, max_b) = project(b);
            // Open interiors are separated when projections touch at most at a point.
            if max_a <= min_b || max_b <= min_a {
                return true;
            }
        }
    }
    false
}

fn probe_polygon_exact(ifs: &IfsSpec, poly: &[Vector], samples: usize) -> OscProbe {
    let n = ifs.alphabet;
    let mut images: Vec<Vec<Vector>> = Vec::with_capacity(n);
    let mut containment_failures = Vec::new();
    for letter in 1..=n as u8 {
        let m = ifs
            .compose_map(&Word::from_letters(&[letter]))
            .expect("letter in range");
        let crate::ifs::ComposedMap::Exact(a) = m else {
            return OscProbe::Report(OscReport {
                containment_ok: false,
                images_disjoint: false,
                overlapping_pairs: vec![],
                containment_failures: vec![],
                samples,
            });
        };
        let img: Vec<Vector> = poly.iter().map(|v| a.apply(v)).collect();
        let mut ok = img.iter().all(|p| inside_polygon_exact(poly, p));
        for s in 0..samples {
            let w = sample_weights(poly.len(), (letter as u64) << 40 | s as u64);
            let mut point = vec![zero(), zero()];
            for (weight, vert) in w.iter().zip(poly) {
                point[0] += weight * &vert[0];
                point[1] += weight * &vert[1];
            }
            if !inside_polygon_exact(poly, &a.apply(&point)) {
                ok = false;
            }
        }
        if !ok {
            containment_failures.push(letter);
        }
        images.push(img);
    }
    let mut overlapping = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !interiors_disjoint_exact(&images[i], &images[j]) {
                overlapping.push((i as u8 + 1, j as u8 + 1));
            }
        }
    }
    OscProbe::Report(OscReport {
        containment_ok: containment_failures.is_empty(),
        images_disjoint: overlapping.is_empty(),
        overlapping_pairs: overlapping,
        containment_failures,
        samples,
    })
}

fn probe_polygon_float(ifs: &IfsSpec, poly: &[Vec<f64>], samples: usize) -> OscProbe {
    // Scale-free float version of the exact polygon probe.
    let n = ifs.alphabet;
    let inside = |poly: &[Vec<f64>], p: &[f64]| -> bool {
        let k = poly.len();
        (0..k).all(|i| {
            let a = &poly[i];
            let b = &poly[(i + 1) % k];
            (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= -1e-12
        })
    };
    let mut images: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n);
    let mut containment_failures = Vec::new();
    for letter in 1..=n as u8 {
        let m = ifs
            .compose_map(&Word::from_letters(&[letter]))
            .expect("letter in range");
        let crate::ifs::ComposedMap::Float(f) = m else {
            unreachable!("float probe runs in tolerance mode")
        };
        let img: Vec<Vec<f64>> = poly.iter().map(|v| f.apply(v)).collect();
        if !img.iter().all(|p| inside(poly, p)) {
            containment_failures.push(letter);
        }
        images.push(img);
    }
    let disjoint = |p1: &[Vec<f64>], p2: &[Vec<f64>]| -> bool {
        for (a, b) in [(p1, p2), (p2, p1)] {
            let k = a.len();
            for i in 0..k {
                let e0 = &a[i];
                let e1 = &a[(i + 1) % k];
                let normal = [e1[1] - e0[1], e0[0] - e1[0]];
                let proj = |pts: &[Vec<f64>]| {
                    let vals: Vec<f64> =
                        pts.iter().map(|p| normal[0] * p[0] + normal[1] * p[1]).collect();
                    (
                        vals.iter().cloned().fold(f64::INFINITY, f64::min),
                        vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    )
                };
                let (min_a, max_a) = proj(a);
                let (min_b, max_b) = proj(b);
                if max_a <= min_b + 1e-12 || max_b <= min_a + 1e-12 {
                    return true;
                }
            }
        }
        false
    };
    let mut overlapping = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !disjoint(&images[i], &images[j]) {
                overlapping.push((i as u8 + 1, j as u8 + 1));
            }
        }
    }
    OscProbe::Report(OscReport {
        containment_ok: containment_failures.is_empty(),
        images_disjoint: overlapping.is_empty(),
        overlapping_pairs: overlapping,
        containment_failures,
        samples,
    })
}
