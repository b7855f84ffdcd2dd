//! Small exact linear algebra over rationals: just enough Gaussian
//! elimination to solve fixed-point systems and invert affine maps.

use num_traits::Zero;

use crate::rat::{one, zero, Rational};

pub type Vector = Vec<Rational>;
pub type Matrix = Vec<Vec<Rational>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { one() } else { zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut acc = zero();
                    for l in 0..k {
                        acc += &a[i][l] * &b[l][j];
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, x: &Vector) -> Vector {
    a.iter()
        .map(|row| {
            let mut acc = zero();
            for (c, v) in row.iter().zip(x) {
                acc += c * v;
            }
            acc
        })
        .collect()
}

pub fn vec_add(a: &Vector, b: &Vector) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &Vector, b: &Vector) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Solves a (possibly overdetermined but consistent) system `A x = b` exactly.
///
/// Returns `None` when the system is singular or inconsistent.
pub fn solve(a: &Matrix, b: &Vector) -> Option<Vector> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivot_of_col = vec![usize::MAX; cols];
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..rows).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, p);
        let inv = aug[row][col].clone();
        for v in aug[row].iter_mut() {
            *v = &*v / &inv;
        }
        for r in 0..rows {
            if r != row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=cols {
                    let delta = &factor * &aug[row][c];
                    aug[r][c] = &aug[r][c] - &delta;
                }
            }
        }
        pivot_of_col[col] = row;
        row += 1;
        if row == rows {
            break;
        }
    }

    // Unique solution needs a pivot in every column.
    if pivot_of_col.contains(&usize::MAX) {
        return None;
    }
    // Remaining rows must be all-zero, otherwise the system is inconsistent.
    for r in row..rows {
        if aug[r].iter().any(|v| !v.is_zero()) {
            return None;
        }
    }
    Some((0..cols).map(|c| aug[pivot_of_col[c]][cols].clone()).collect())
}

/// Exact inverse of a square matrix; `None` when singular.
pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vector = (0..n).map(|i| if i == j { one() } else { zero() }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}
