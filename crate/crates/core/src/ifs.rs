//! Iterated function schemes: similitudes, fixed points and cell geometry.
//!
//! Three geometric backends share one interface:
//!
//! * **Barycentric** — points are rational coefficient vectors over the
//!   declared simplex vertices. A map halves (or `c`-scales) towards a point
//!   with rational barycentric coordinates, so all cell geometry stays exact
//!   even when the Cartesian vertices are irrational. This is the mode for
//!   the gasket family.
//! * **Box** — exact rational Cartesian coordinates with axis-aligned
//!   homotheties; cells are closed boxes and intersection is exact interval
//!   overlap. This is the mode for the carpet family, whose attractor
//!   contains every cell boundary.
//! * **Float** — `f64` coordinates with an epsilon; two points coincide iff
//!   their Euclidean distance is below epsilon. For similitudes that have no
//!   rational representation.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::error::Error;
use crate::linalg::{identity, invert, mat_mul, mat_vec, solve, vec_add, Matrix, Vector};
use crate::rat::{one, ratio, to_f64, zero, Rational};
use crate::word::Word;

/// Arithmetic mode of a scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arithmetic {
    Exact,
    Tolerance(f64),
}

/// Exact affine map `x ↦ Ax + b` with its contraction ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub translation: Vector,
    pub ratio: Rational,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        AffineMap {
            matrix: identity(dim),
            translation: vec![zero(); dim],
            ratio: one(),
        }
    }

    /// Homothety with ratio `c` about the point `center`: `x ↦ c·x + (1−c)·center`.
    pub fn homothety(center: &Vector, c: &Rational) -> Self {
        let dim = center.len();
        let mut matrix = identity(dim);
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = c.clone();
        }
        let rest = one() - c;
        AffineMap {
            matrix,
            translation: center.iter().map(|q| &rest * q).collect(),
            ratio: c.clone(),
        }
    }

    /// `self ∘ other`, i.e. apply `other` first.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap {
            matrix: mat_mul(&self.matrix, &other.matrix),
            translation: vec_add(&mat_vec(&self.matrix, &other.translation), &self.translation),
            ratio: &self.ratio * &other.ratio,
        }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        vec_add(&mat_vec(&self.matrix, x), &self.translation)
    }

    /// Solves `x = Ax + b` exactly; `None` when `I − A` is singular.
    pub fn fixed_point(&self) -> Option<Vector> {
        let dim = self.translation.len();
        let mut m = identity(dim);
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = &*v - &self.matrix[i][j];
            }
        }
        solve(&m, &self.translation)
    }

    /// Fixed point constrained to the affine hull `Σx = 1` (barycentric charts).
    pub fn fixed_point_on_simplex(&self) -> Option<Vector> {
        let dim = self.translation.len();
        let mut rows: Matrix = Vec::with_capacity(dim + 1);
        let mut rhs: Vector = Vec::with_capacity(dim + 1);
        for i in 0..dim {
            let mut row = Vec::with_capacity(dim);
            for j in 0..dim {
                let delta = if i == j { one() } else { zero() };
                row.push(delta - &self.matrix[i][j]);
            }
            rows.push(row);
            rhs.push(self.translation[i].clone());
        }
        rows.push(vec![one(); dim]);
        rhs.push(one());
        solve(&rows, &rhs)
    }

    /// Exact inverse; exists for every similitude composition.
    pub fn inverse(&self) -> Option<AffineMap> {
        let inv = invert(&self.matrix)?;
        let t = mat_vec(&inv, &self.translation);
        Some(AffineMap {
            translation: t.iter().map(|v| -v).collect(),
            matrix: inv,
            ratio: if self.ratio.is_zero() { zero() } else { one() / &self.ratio },
        })
    }
}

/// Floating-point affine map for tolerance mode.
#[derive(Clone, Debug)]
pub struct FloatMap {
    pub matrix: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
    pub ratio: f64,
}

impl FloatMap {
    pub fn identity(dim: usize) -> Self {
        FloatMap {
            matrix: (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            translation: vec![0.0; dim],
            ratio: 1.0,
        }
    }

    pub fn compose(&self, other: &FloatMap) -> FloatMap {
        let dim = self.translation.len();
        let mut matrix = vec![vec![0.0; dim]; dim];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    matrix[i][j] += self.matrix[i][k] * other.matrix[k][j];
                }
            }
        }
        let mut translation = self.translation.clone();
        for i in 0..dim {
            for k in 0..dim {
                translation[i] += self.matrix[i][k] * other.translation[k];
            }
        }
        FloatMap {
            matrix,
            translation,
            ratio: self.ratio * other.ratio,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let dim = self.translation.len();
        (0..dim)
            .map(|i| {
                let mut acc = self.translation[i];
                for k in 0..dim {
                    acc += self.matrix[i][k] * x[k];
                }
                acc
            })
            .collect()
    }

    /// Fixed point by iteration; contraction guarantees convergence.
    pub fn fixed_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.translation.len()];
        for _ in 0..512 {
            let next = self.apply(&x);
            let moved: f64 = next
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            x = next;
            if moved < 1e-15 {
                break;
            }
        }
        x
    }
}

/// A composed map `S_w`, in whichever representation the scheme uses.
#[derive(Clone, Debug)]
pub enum ComposedMap {
    Exact(AffineMap),
    Float(FloatMap),
}

impl ComposedMap {
    pub fn ratio_exact(&self) -> Option<&Rational> {
        match self {
            ComposedMap::Exact(m) => Some(&m.ratio),
            ComposedMap::Float(_) => None,
        }
    }

    pub fn ratio_f64(&self) -> f64 {
        match self {
            ComposedMap::Exact(m) => to_f64(&m.ratio),
            ComposedMap::Float(m) => m.ratio,
        }
    }
}

/// A point in the active coordinate system.
#[derive(Clone, Debug, PartialEq)]
pub enum Point {
    Exact(Vector),
    Float(Vec<f64>),
}

impl Point {
    pub fn exact(&self) -> Option<&Vector> {
        match self {
            Point::Exact(v) => Some(v),
            Point::Float(_) => None,
        }
    }
}

/// Geometric payload of one cell, used by the adjacency tests.
#[derive(Clone, Debug)]
pub enum CellGeom {
    /// Vertex set `S_w(F_0)` in exact coordinates.
    ExactVertices(BTreeSet<Vector>),
    /// Closed box `S_w(B)` of the attractor bounding box.
    ExactBox { lo: Vector, hi: Vector },
    /// Vertex set in floats, compared with the scheme epsilon.
    FloatVertices(Vec<Vec<f64>>),
}

/// Outcome of a cell intersection test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Touch {
    pub touching: bool,
    /// Tolerance mode only: nearest vertex pair fell in `(ε, 2ε)`.
    pub ambiguous: bool,
}

/// Declared open set for the OSC probe.
#[derive(Clone, Debug)]
pub enum OpenSet {
    /// Interior of the barycentric unit simplex.
    UnitSimplex,
    /// Interior of an exact convex polygon (2-D Cartesian), counter-clockwise.
    Polygon(Vec<Vector>),
    /// Interior of a float convex polygon (2-D), counter-clockwise.
    FloatPolygon(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
enum Backend {
    Barycentric { maps: Vec<AffineMap> },
    Box {
        maps: Vec<AffineMap>,
        attractor_lo: Vector,
        attractor_hi: Vector,
    },
    Float { maps: Vec<FloatMap>, eps: f64 },
}

/// An iterated function scheme with validated similitudes.
#[derive(Clone, Debug)]
pub struct IfsSpec {
    pub name: String,
    /// Alphabet size `N`.
    pub alphabet: usize,
    /// Spatial dimension of the attractor's ambient space.
    pub ambient_dim: usize,
    /// Cartesian positions of the simplex vertices (or reference points),
    /// used only for rendering and Euclidean diagnostics.
    pub cartesian_vertices: Option<Vec<Vec<f64>>>,
    pub open_set: Option<OpenSet>,
    backend: Backend,
    f0_prime: Vec<Point>,
    /// Letters whose fixed points are essential.
    f0_letters: Vec<u8>,
}

fn check_ratio(c: &Rational) -> Result<(), Error> {
    if c <= &zero() || c >= &one() {
        return Err(Error::InvalidSpec(format!(
            "contraction ratio must lie in (0,1), got {}",
            c
        )));
    }
    Ok(())
}

fn float_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

impl IfsSpec {
    /// Barycentric exact scheme: every map is a homothety about a point with
    /// rational barycentric coordinates (coordinates sum to 1).
    pub fn barycentric(
        name: &str,
        alphabet: usize,
        maps: Vec<(Rational, Vector)>,
        cartesian_vertices: Option<Vec<Vec<f64>>>,
        open_set: Option<OpenSet>,
    ) -> Result<IfsSpec, Error> {
        if alphabet < 2 {
            return Err(Error::InvalidSpec("alphabet size must be at least 2".into()));
        }
        if maps.len() != alphabet {
            return Err(Error::InvalidSpec(format!(
                "expected {} maps, got {}",
                alphabet,
                maps.len()
            )));
        }
        let mut affines = Vec::with_capacity(alphabet);
        for (c, center) in &maps {
            check_ratio(c)?;
            if center.len() != alphabet {
                return Err(Error::InvalidSpec(
                    "barycentric center must have one coordinate per letter".into(),
                ));
            }
            let total: Rational = center.iter().fold(zero(), |acc, v| acc + v);
            if total != one() {
                return Err(Error::InvalidSpec(
                    "barycentric coordinates must sum to 1".into(),
                ));
            }
            affines.push(AffineMap::homothety(center, c));
        }
        if let Some(vs) = &cartesian_vertices {
            if vs.len() != alphabet {
                return Err(Error::InvalidSpec(
                    "need one Cartesian vertex per letter in barycentric mode".into(),
                ));
            }
        }
        let ambient_dim = cartesian_vertices
            .as_ref()
            .map(|vs| vs[0].len())
            .unwrap_or(alphabet.saturating_sub(1));
        let mut spec = IfsSpec {
            name: name.to_string(),
            alphabet,
            ambient_dim,
            cartesian_vertices,
            open_set,
            backend: Backend::Barycentric { maps: affines },
            f0_prime: Vec::new(),
            f0_letters: Vec::new(),
        };
        spec.solve_fixed_points()?;
        Ok(spec)
    }

    /// Exact Cartesian scheme with axis-aligned homotheties; cells are boxes.
    pub fn exact_box(
        name: &str,
        dim: usize,
        maps: Vec<AffineMap>,
        open_set: Option<OpenSet>,
    ) -> Result<IfsSpec, Error> {
        let alphabet = maps.len();
        if alphabet < 2 {
            return Err(Error::InvalidSpec("alphabet size must be at least 2".into()));
        }
        for m in &maps {
            check_ratio(&m.ratio)?;
            if m.translation.len() != dim {
                return Err(Error::InvalidSpec("map dimension mismatch".into()));
            }
            for (i, row) in m.matrix.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let expect = if i == j { m.ratio.clone() } else { zero() };
                    if *v != expect {
                        return Err(Error::InvalidSpec(
                            "box mode requires axis-aligned positive homotheties (matrix c·I)"
                                .into(),
                        ));
                    }
                }
            }
        }
        // Per-axis attractor bounds: the extremal fixed-point coordinates
        // t/(1−c) realise the invariant box for positive diagonal maps.
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for axis in 0..dim {
            let coords: Vec<Rational> = maps
                .iter()
                .map(|m| &m.translation[axis] / &(one() - &m.ratio))
                .collect();
            lo.push(coords.iter().min().unwrap().clone());
            hi.push(coords.iter().max().unwrap().clone());
        }
        let mut spec = IfsSpec {
            name: name.to_string(),
            alphabet,
            ambient_dim: dim,
            cartesian_vertices: None,
            open_set,
            backend: Backend::Box {
                maps,
                attractor_lo: lo,
                attractor_hi: hi,
            },
            f0_prime: Vec::new(),
            f0_letters: Vec::new(),
        };
        spec.solve_fixed_points()?;
        Ok(spec)
    }

    /// Tolerance-mode scheme with general float similitudes.
    pub fn tolerance(
        name: &str,
        dim: usize,
        maps: Vec<FloatMap>,
        eps: f64,
        open_set: Option<OpenSet>,
    ) -> Result<IfsSpec, Error> {
        let alphabet = maps.len();
        if alphabet < 2 {
            return Err(Error::InvalidSpec("alphabet size must be at least 2".into()));
        }
        if eps <= 0.0 || eps.is_nan() {
            return Err(Error::InvalidSpec("tolerance must be positive".into()));
        }
        for m in &maps {
            if !(m.ratio > 0.0 && m.ratio < 1.0) {
                return Err(Error::InvalidSpec(format!(
                    "contraction ratio must lie in (0,1), got {}",
                    m.ratio
                )));
            }
            // Similitude check on the coordinate frame: columns have length
            // `ratio` and are pairwise orthogonal.
            for j in 0..dim {
                let len: f64 = (0..dim).map(|i| m.matrix[i][j] * m.matrix[i][j]).sum::<f64>().sqrt();
                if (len - m.ratio).abs() > 1e-6 {
                    return Err(Error::InvalidSpec(
                        "map is not a similitude: column norm differs from ratio".into(),
                    ));
                }
                for j2 in (j + 1)..dim {
                    let dot: f64 = (0..dim).map(|i| m.matrix[i][j] * m.matrix[i][j2]).sum();
                    if dot.abs() > 1e-6 {
                        return Err(Error::InvalidSpec(
                            "map is not a similitude: columns are not orthogonal".into(),
                        ));
                    }
                }
            }
        }
        let mut spec = IfsSpec {
            name: name.to_string(),
            alphabet,
            ambient_dim: dim,
            cartesian_vertices: None,
            open_set,
            backend: Backend::Float { maps, eps },
            f0_prime: Vec::new(),
            f0_letters: Vec::new(),
        };
        spec.solve_fixed_points()?;
        Ok(spec)
    }

    pub fn arithmetic(&self) -> Arithmetic {
        match &self.backend {
            Backend::Float { eps, .. } => Arithmetic::Tolerance(*eps),
            _ => Arithmetic::Exact,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.arithmetic(), Arithmetic::Exact)
    }

    pub fn is_barycentric(&self) -> bool {
        matches!(self.backend, Backend::Barycentric { .. })
    }

    fn letter_index(&self, letter: u8) -> Result<usize, Error> {
        if letter == 0 || letter as usize > self.alphabet {
            return Err(Error::InvalidLetter {
                letter,
                alphabet: self.alphabet,
            });
        }
        Ok(letter as usize - 1)
    }

    /// Solves each map's fixed point and classifies the essential ones; also
    /// enforces pairwise distinctness of the fixed points.
    fn solve_fixed_points(&mut self) -> Result<(), Error> {
        let n = self.alphabet;
        let mut points = Vec::with_capacity(n);
        match &self.backend {
            Backend::Barycentric { maps } => {
                for m in maps {
                    let q = m
                        .fixed_point_on_simplex()
                        .ok_or_else(|| Error::InvalidSpec("map has no fixed point".into()))?;
                    points.push(Point::Exact(q));
                }
            }
            Backend::Box { maps, .. } => {
                for m in maps {
                    let q = m
                        .fixed_point()
                        .ok_or_else(|| Error::InvalidSpec("map has no fixed point".into()))?;
                    points.push(Point::Exact(q));
                }
            }
            Backend::Float { maps, .. } => {
                for m in maps {
                    points.push(Point::Float(m.fixed_point()));
                }
            }
        }
        // Distinctness: coincident fixed points would merge two letters.
        for i in 0..n {
            for j in (i + 1)..n {
                let equal = self.points_coincide(&points[i], &points[j]);
                if equal {
                    return Err(Error::InvalidSpec(format!(
                        "fixed points of maps {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        // Essential fixed points: q_a such that S_i(q_a) = S_j(y) for some
        // other fixed point y and letters i, j.
        let mut essential = Vec::new();
        'outer: for a in 0..n {
            for k in 0..n {
                if k == a {
                    continue;
                }
                for i in 0..n {
                    for j in 0..n {
                        let lhs = self.apply_letter(i, &points[a]);
                        let rhs = self.apply_letter(j, &points[k]);
                        if self.points_coincide(&lhs, &rhs) {
                            essential.push(a as u8 + 1);
                            continue 'outer;
                        }
                    }
                }
            }
        }
        self.f0_prime = points;
        self.f0_letters = essential;
        Ok(())
    }

    fn apply_letter(&self, index: usize, p: &Point) -> Point {
        match (&self.backend, p) {
            (Backend::Barycentric { maps }, Point::Exact(v))
            | (Backend::Box { maps, .. }, Point::Exact(v)) => Point::Exact(maps[index].apply(v)),
            (Backend::Float { maps, .. }, Point::Float(v)) => Point::Float(maps[index].apply(v)),
            _ => unreachable!("point representation matches backend"),
        }
    }

    fn points_coincide(&self, a: &Point, b: &Point) -> bool {
        match (a, b) {
            (Point::Exact(x), Point::Exact(y)) => x == y,
            (Point::Float(x), Point::Float(y)) => {
                let eps = match self.backend {
                    Backend::Float { eps, .. } => eps,
                    _ => 0.0,
                };
                float_dist(x, y) < eps
            }
            _ => false,
        }
    }

    /// All fixed points `F_0'` (index = letter − 1).
    pub fn fixed_points_all(&self) -> &[Point] {
        &self.f0_prime
    }

    /// Letters whose fixed points are essential.
    pub fn essential_letters(&self) -> &[u8] {
        &self.f0_letters
    }

    /// Essential fixed points `F_0`.
    pub fn essential_fixed_points(&self) -> Vec<Point> {
        self.f0_letters
            .iter()
            .map(|&a| self.f0_prime[a as usize - 1].clone())
            .collect()
    }

    /// The composed map `S_w = S_{w_1} ∘ … ∘ S_{w_n}`; `S_∅` is the identity.
    pub fn compose_map(&self, w: &Word) -> Result<ComposedMap, Error> {
        let mut m = self.identity_composed();
        for &letter in w.letters() {
            m = self.extend_composed(&m, letter)?;
        }
        Ok(m)
    }

    pub fn identity_composed(&self) -> ComposedMap {
        match &self.backend {
            Backend::Barycentric { .. } => ComposedMap::Exact(AffineMap::identity(self.alphabet)),
            Backend::Box { .. } => ComposedMap::Exact(AffineMap::identity(self.ambient_dim)),
            Backend::Float { .. } => ComposedMap::Float(FloatMap::identity(self.ambient_dim)),
        }
    }

    /// `m ∘ S_letter` — extends a composed prefix map by one more letter.
    pub fn extend_composed(&self, m: &ComposedMap, letter: u8) -> Result<ComposedMap, Error> {
        let idx = self.letter_index(letter)?;
        Ok(match (&self.backend, m) {
            (Backend::Barycentric { maps }, ComposedMap::Exact(a))
            | (Backend::Box { maps, .. }, ComposedMap::Exact(a)) => {
                ComposedMap::Exact(a.compose(&maps[idx]))
            }
            (Backend::Float { maps, .. }, ComposedMap::Float(a)) => {
                ComposedMap::Float(a.compose(&maps[idx]))
            }
            _ => unreachable!("composed map representation matches backend"),
        })
    }

    /// The vertex set `S_w(F_0)` as points.
    pub fn cell_vertices(&self, w: &Word) -> Result<Vec<Point>, Error> {
        let m = self.compose_map(w)?;
        Ok(self.map_essential_points(&m))
    }

    fn map_essential_points(&self, m: &ComposedMap) -> Vec<Point> {
        self.essential_fixed_points()
            .iter()
            .map(|p| match (m, p) {
                (ComposedMap::Exact(a), Point::Exact(v)) => Point::Exact(a.apply(v)),
                (ComposedMap::Float(f), Point::Float(v)) => Point::Float(f.apply(v)),
                _ => unreachable!(),
            })
            .collect()
    }

    /// Cell payload used by intersection tests.
    pub fn cell_geom(&self, m: &ComposedMap) -> CellGeom {
        match (&self.backend, m) {
            (Backend::Barycentric { .. }, ComposedMap::Exact(a)) => {
                let verts: BTreeSet<Vector> = self
                    .essential_fixed_points()
                    .iter()
                    .map(|p| a.apply(p.exact().unwrap()))
                    .collect();
                CellGeom::ExactVertices(verts)
            }
            (
                Backend::Box {
                    attractor_lo,
                    attractor_hi,
                    ..
                },
                ComposedMap::Exact(a),
            ) => {
                // Positive diagonal maps keep boxes axis-aligned and ordered.
                CellGeom::ExactBox {
                    lo: a.apply(attractor_lo),
                    hi: a.apply(attractor_hi),
                }
            }
            (Backend::Float { .. }, ComposedMap::Float(f)) => {
                let verts = self
                    .essential_fixed_points()
                    .iter()
                    .map(|p| match p {
                        Point::Float(v) => f.apply(v),
                        Point::Exact(_) => unreachable!(),
                    })
                    .collect();
                CellGeom::FloatVertices(verts)
            }
            _ => unreachable!(),
        }
    }

    pub fn cell_geom_of_word(&self, w: &Word) -> Result<CellGeom, Error> {
        Ok(self.cell_geom(&self.compose_map(w)?))
    }

    /// Do two cells intersect? Exact in barycentric/box mode; in tolerance
    /// mode, vertex pairs closer than ε count as coincident and pairs in
    /// `(ε, 2ε)` flag the result ambiguous.
    pub fn cells_touch(&self, a: &CellGeom, b: &CellGeom) -> Touch {
        match (a, b) {
            (CellGeom::ExactVertices(x), CellGeom::ExactVertices(y)) => Touch {
                touching: x.intersection(y).next().is_some(),
                ambiguous: false,
            },
            (CellGeom::ExactBox { lo: lo1, hi: hi1 }, CellGeom::ExactBox { lo: lo2, hi: hi2 }) => {
                let overlap = lo1
                    .iter()
                    .zip(hi1)
                    .zip(lo2.iter().zip(hi2))
                    .all(|((l1, h1), (l2, h2))| l1.max(l2) <= h1.min(h2));
                Touch {
                    touching: overlap,
                    ambiguous: false,
                }
            }
            (CellGeom::FloatVertices(x), CellGeom::FloatVertices(y)) => {
                let eps = match self.backend {
                    Backend::Float { eps, .. } => eps,
                    _ => 1e-9,
                };
                let mut min = f64::INFINITY;
                for p in x {
                    for q in y {
                        min = min.min(float_dist(p, q));
                    }
                }
                Touch {
                    touching: min < eps,
                    ambiguous: min >= eps && min < 2.0 * eps,
                }
            }
            _ => Touch {
                touching: false,
                ambiguous: false,
            },
        }
    }

    /// Exact containment of a point in the (closed) cell of `map`:
    /// barycentric simplex cells or box cells.
    pub fn cell_contains_exact(&self, map: &AffineMap, point: &Vector) -> bool {
        match &self.backend {
            Backend::Barycentric { .. } => {
                let Some(inv) = map.inverse() else {
                    return false;
                };
                let local = inv.apply(point);
                let sum: Rational = local.iter().fold(zero(), |acc, v| acc + v);
                sum == one() && local.iter().all(|v| !v.is_negative())
            }
            Backend::Box {
                attractor_lo,
                attractor_hi,
                ..
            } => {
                let lo = map.apply(attractor_lo);
                let hi = map.apply(attractor_hi);
                lo.iter()
                    .zip(hi.iter())
                    .zip(point)
                    .all(|((l, h), p)| l <= p && p <= h)
            }
            Backend::Float { .. } => false,
        }
    }

    /// Embeds a point into Cartesian `f64` coordinates for rendering and
    /// Euclidean diagnostics.
    pub fn embed_f64(&self, p: &Point) -> Vec<f64> {
        match p {
            Point::Float(v) => v.clone(),
            Point::Exact(v) => match &self.backend {
                Backend::Barycentric { .. } => {
                    let verts = self
                        .cartesian_vertices
                        .as_ref()
                        .expect("barycentric embedding needs Cartesian vertices");
                    let dim = verts[0].len();
                    let mut out = vec![0.0; dim];
                    for (weight, vertex) in v.iter().zip(verts) {
                        let wf = to_f64(weight);
                        for (o, c) in out.iter_mut().zip(vertex) {
                            *o += wf * c;
                        }
                    }
                    out
                }
                _ => v.iter().map(to_f64).collect(),
            },
        }
    }

    /// Float diameter of the attractor hull, for address error bounds.
    pub fn diameter_f64(&self) -> f64 {
        let pts: Vec<Vec<f64>> = match &self.backend {
            Backend::Box {
                attractor_lo,
                attractor_hi,
                ..
            } => vec![
                attractor_lo.iter().map(to_f64).collect(),
                attractor_hi.iter().map(to_f64).collect(),
            ],
            _ => self.f0_prime.iter().map(|p| self.embed_f64(p)).collect(),
        };
        let mut max = 0.0f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                max = max.max(float_dist(&pts[i], &pts[j]));
            }
        }
        max
    }

    /// Centroid of the reference points, in the active representation.
    pub fn centroid(&self) -> Point {
        match &self.backend {
            Backend::Barycentric { .. } => {
                let n = self.alphabet as i64;
                Point::Exact(vec![ratio(1, n); self.alphabet])
            }
            Backend::Box {
                attractor_lo,
                attractor_hi,
                ..
            } => Point::Exact(
                attractor_lo
                    .iter()
                    .zip(attractor_hi)
                    .map(|(l, h)| (l + h) / ratio(2, 1))
                    .collect(),
            ),
            Backend::Float { .. } => {
                let pts: Vec<&Vec<f64>> = self
                    .f0_prime
                    .iter()
                    .map(|p| match p {
                        Point::Float(v) => v,
                        Point::Exact(_) => unreachable!(),
                    })
                    .collect();
                let dim = pts[0].len();
                let mut c = vec![0.0; dim];
                for p in &pts {
                    for (acc, v) in c.iter_mut().zip(p.iter()) {
                        *acc += v;
                    }
                }
                for v in &mut c {
                    *v /= pts.len() as f64;
                }
                Point::Float(c)
            }
        }
    }

    pub fn apply_composed(&self, m: &ComposedMap, p: &Point) -> Point {
        match (m, p) {
            (ComposedMap::Exact(a), Point::Exact(v)) => Point::Exact(a.apply(v)),
            (ComposedMap::Float(f), Point::Float(v)) => Point::Float(f.apply(v)),
            _ => unreachable!("point representation matches backend"),
        }
    }

    /// Vertex polygon of a 2-D cell for rendering, in drawing order.
    pub fn cell_polygon_f64(&self, w: &Word) -> Result<Vec<Vec<f64>>, Error> {
        let m = self.compose_map(w)?;
        match (&self.backend, &m) {
            (Backend::Box { attractor_lo, attractor_hi, .. }, ComposedMap::Exact(a)) => {
                let lo = a.apply(attractor_lo);
                let hi = a.apply(attractor_hi);
                let (lx, ly) = (to_f64(&lo[0]), to_f64(&lo[1]));
                let (hx, hy) = (to_f64(&hi[0]), to_f64(&hi[1]));
                Ok(vec![
                    vec![lx, ly],
                    vec![hx, ly],
                    vec![hx, hy],
                    vec![lx, hy],
                ])
            }
            _ => {
                // Image of the reference simplex corners keeps drawing order.
                let corners: Vec<Point> = match &self.backend {
                    Backend::Barycentric { .. } => (0..self.alphabet)
                        .map(|i| {
                            let mut e = vec![zero(); self.alphabet];
                            e[i] = one();
                            Point::Exact(e)
                        })
                        .collect(),
                    _ => self.f0_prime.clone(),
                };
                Ok(corners
                    .iter()
                    .map(|p| self.embed_f64(&self.apply_composed(&m, p)))
                    .collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::ratio;

    fn gasket3() -> IfsSpec {
        let maps = (0..3)
            .map(|i| {
                let mut e = vec![zero(); 3];
                e[i] = one();
                (ratio(1, 2), e)
            })
            .collect();
        IfsSpec::barycentric(
            "gasket",
            3,
            maps,
            Some(vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 3f64.sqrt() / 2.0],
            ]),
            Some(OpenSet::UnitSimplex),
        )
        .unwrap()
    }

    #[test]
    fn compose_empty_is_identity() {
        let g = gasket3();
        let m = g.compose_map(&Word::empty()).unwrap();
        match m {
            ComposedMap::Exact(a) => {
                assert_eq!(a, AffineMap::identity(3));
            }
            _ => panic!("expected exact map"),
        }
    }

    #[test]
    fn gasket_map_halves_towards_vertex() {
        // S_1(p_2) is the midpoint of p_1 and p_2, i.e. (1/2, 0) in Cartesian.
        let g = gasket3();
        let m = g.compose_map(&Word::parse("1", 3).unwrap()).unwrap();
        let p2 = Point::Exact(vec![zero(), one(), zero()]);
        let img = g.apply_composed(&m, &p2);
        assert_eq!(
            img,
            Point::Exact(vec![ratio(1, 2), ratio(1, 2), zero()])
        );
        let xy = g.embed_f64(&img);
        assert!((xy[0] - 0.5).abs() < 1e-12 && xy[1].abs() < 1e-12);
    }

    #[test]
    fn composition_ratio_multiplies() {
        let g = gasket3();
        let m = g.compose_map(&Word::parse("12", 3).unwrap()).unwrap();
        assert_eq!(m.ratio_exact().unwrap(), &ratio(1, 4));
    }

    #[test]
    fn invalid_letter_rejected() {
        let g = gasket3();
        assert!(g.compose_map(&Word::from_letters(&[4])).is_err());
        assert!(g.compose_map(&Word::from_letters(&[0])).is_err());
    }

    #[test]
    fn gasket_fixed_points_are_vertices_and_essential() {
        let g = gasket3();
        let f0p = g.fixed_points_all();
        assert_eq!(f0p.len(), 3);
        assert_eq!(f0p[0], Point::Exact(vec![one(), zero(), zero()]));
        assert_eq!(g.essential_letters(), &[1, 2, 3]);
    }

    #[test]
    fn coincident_fixed_points_rejected() {
        let e1 = vec![one(), zero(), zero()];
        let maps = vec![
            (ratio(1, 2), e1.clone()),
            (ratio(1, 3), e1),
            (ratio(1, 2), vec![zero(), zero(), one()]),
        ];
        let err = IfsSpec::barycentric("dup", 3, maps, None, None);
        assert!(err.is_err());
    }

    #[test]
    fn cell_vertices_of_first_map() {
        let g = gasket3();
        let verts = g.cell_vertices(&Word::parse("1", 3).unwrap()).unwrap();
        let expect = [
            vec![one(), zero(), zero()],
            vec![ratio(1, 2), ratio(1, 2), zero()],
            vec![ratio(1, 2), zero(), ratio(1, 2)],
        ];
        assert_eq!(verts.len(), 3);
        for e in &expect {
            assert!(verts.iter().any(|p| p.exact() == Some(e)));
        }
        // |cell_vertices(w)| = |F_0| for deeper words as well.
        for w in crate::word::enumerate_level(3, 3) {
            assert_eq!(g.cell_vertices(&w).unwrap().len(), 3);
        }
    }

    #[test]
    fn cell_vertices_of_empty_word_is_f0() {
        let g = gasket3();
        let verts = g.cell_vertices(&Word::empty()).unwrap();
        assert_eq!(verts, g.essential_fixed_points());
    }

    #[test]
    fn composition_homomorphism_and_nesting() {
        let g = gasket3();
        for u in crate::word::enumerate_level(2, 3) {
            for v in crate::word::enumerate_level(2, 3) {
                let uv = u.concat(&v);
                let direct = g.compose_map(&uv).unwrap();
                let (ComposedMap::Exact(d), ComposedMap::Exact(a), ComposedMap::Exact(b)) =
                    (direct, g.compose_map(&u).unwrap(), g.compose_map(&v).unwrap())
                else {
                    panic!("exact mode expected")
                };
                assert_eq!(d, a.compose(&b));
            }
        }
        // cell(wa) lies in the hull of cell(w).
        for w in crate::word::enumerate_level(2, 3) {
            let ComposedMap::Exact(parent) = g.compose_map(&w).unwrap() else {
                panic!()
            };
            for a in 1..=3u8 {
                for p in g.cell_vertices(&w.child(a)).unwrap() {
                    assert!(g.cell_contains_exact(&parent, p.exact().unwrap()));
                }
            }
        }
    }

    #[test]
    fn touch_is_exact_vertex_set_intersection() {
        let g = gasket3();
        let w12 = Word::parse("12", 3).unwrap();
        let w21 = Word::parse("21", 3).unwrap();
        let w11 = Word::parse("11", 3).unwrap();
        let c12 = g.cell_geom_of_word(&w12).unwrap();
        let c21 = g.cell_geom_of_word(&w21).unwrap();
        let c11 = g.cell_geom_of_word(&w11).unwrap();
        assert!(g.cells_touch(&c12, &c21).touching);
        assert!(!g.cells_touch(&c12, &c21).ambiguous);
        assert!(g.cells_touch(&c11, &c12).touching);
        let c22 = g.cell_geom_of_word(&Word::parse("22", 3).unwrap()).unwrap();
        assert!(!g.cells_touch(&c11, &c22).touching);
    }
}
