//! Dense linear algebra over `Q`.
//!
//! Vectors are `Vec<Q>`; a matrix is a list of rows. Subspaces are given by a
//! list of spanning vectors, not necessarily independent unless stated.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::rational::Q;

pub type Vector = Vec<Q>;
pub type Matrix = Vec<Vec<Q>>;

pub fn zeros(n: usize) -> Vector {
    vec![Q::zero(); n]
}

pub fn zero_matrix(rows: usize, cols: usize) -> Matrix {
    vec![zeros(cols); rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zero_matrix(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn is_zero(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale(c: &Q, a: &[Q]) -> Vector {
    a.iter().map(|x| c * x).collect()
}

/// `acc += c * a`
pub fn axpy(acc: &mut [Q], c: &Q, a: &[Q]) {
    if c.is_zero() {
        return;
    }
    for (t, x) in acc.iter_mut().zip(a) {
        if !x.is_zero() {
            *t += c * x;
        }
    }
}

pub fn mat_vec(m: &[Vec<Q>], v: &[Q]) -> Vector {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn mat_mul(a: &[Vec<Q>], b: &[Vec<Q>]) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    let mut out = zero_matrix(a.len(), cols);
    for (i, row) in a.iter().enumerate() {
        for (k, aik) in row.iter().enumerate() {
            if aik.is_zero() {
                continue;
            }
            for (j, bkj) in b[k].iter().enumerate() {
                if !bkj.is_zero() {
                    out[i][j] += aik * bkj;
                }
            }
        }
    }
    out
}

pub fn transpose(m: &[Vec<Q>]) -> Matrix {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Reduces `m` in place to reduced row echelon form and returns the pivot
/// columns. Zero rows are dropped.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    pivots
}

pub fn rank(m: &[Vec<Q>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}` for a matrix with `cols` columns.
pub fn kernel(m: &[Vec<Q>], cols: usize) -> Vec<Vector> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|&c| !is_pivot[c]) {
        let mut v = zeros(cols);
        v[free] = Q::one();
        for (row, &p) in a.iter().zip(&pivots) {
            if !row[free].is_zero() {
                v[p] = -row[free].clone();
            }
        }
        basis.push(v);
    }
    basis
}

/// One solution of `a x = b`, if the system is consistent.
pub fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vector> {
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = zeros(cols);
    for (row, &p) in aug.iter().zip(&pivots) {
        x[p] = row[cols].clone();
    }
    Some(x)
}

pub fn inverse(m: &[Vec<Q>]) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .zip(identity(n))
        .map(|(row, e)| row.iter().cloned().chain(e).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// An independent subset spanning the same space.
pub fn independent(vectors: &[Vector]) -> Vec<Vector> {
    let mut a = vectors.to_vec();
    rref(&mut a);
    a
}

/// Coordinates of `v` in terms of `basis` (assumed independent), or `None`
/// when `v` is outside the span.
pub fn coordinates(basis: &[Vector], v: &[Q]) -> Option<Vector> {
    if basis.is_empty() {
        return is_zero(v).then(Vec::new);
    }
    let cols = transpose(basis);
    solve(&cols, v)
}

pub fn in_span(basis: &[Vector], v: &[Q]) -> bool {
    coordinates(basis, v).is_some()
}

pub fn span_dim(vectors: &[Vector]) -> usize {
    rank(vectors)
}

/// Basis of `span(u) ∩ span(w)`.
pub fn intersection(u: &[Vector], w: &[Vector]) -> Vec<Vector> {
    let u = independent(u);
    let w = independent(w);
    if u.is_empty() || w.is_empty() {
        return Vec::new();
    }
    // Solve Σ a_i u_i − Σ b_j w_j = 0 and map a back.
    let dim = u[0].len();
    let m: Matrix = (0..dim)
        .map(|r| {
            u.iter()
                .map(|x| x[r].clone())
                .chain(w.iter().map(|x| -x[r].clone()))
                .collect()
        })
        .collect();
    let ker = kernel(&m, u.len() + w.len());
    let vecs: Vec<Vector> = ker
        .iter()
        .map(|k| {
            let mut v = zeros(dim);
            for (a, x) in k.iter().zip(&u) {
                axpy(&mut v, a, x);
            }
            v
        })
        .collect();
    independent(&vecs)
}

/// `{x ∈ span(u) : gram(x, w) = 0 for all w ∈ span(ws)}` where `gram` is a
/// bilinear form given by its matrix.
pub fn orthogonal_within(u: &[Vector], ws: &[Vector], gram: &[Vec<Q>]) -> Vec<Vector> {
    let u = independent(u);
    if ws.is_empty() {
        return u;
    }
    let gw: Vec<Vector> = ws.iter().map(|w| mat_vec(gram, w)).collect();
    let m: Matrix = gw
        .iter()
        .map(|g| u.iter().map(|x| dot(x, g)).collect())
        .collect();
    let ker = kernel(&m, u.len());
    let vecs: Vec<Vector> = ker
        .iter()
        .map(|k| {
            let mut v = zeros(u.first().map_or(0, Vec::len));
            for (a, x) in k.iter().zip(&u) {
                axpy(&mut v, a, x);
            }
            v
        })
        .collect();
    independent(&vecs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| r.iter().map(|&x| q(x)).collect())
            .collect()
    }

    #[test]
    fn kernel_of_rank_one() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(is_zero(&mat_vec(&a, v)));
        }
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn inverse_and_solve() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        let x = solve(&a, &[q(3), q(2)]).unwrap();
        assert_eq!(x, vec![q(1), q(1)]);
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
        assert!(solve(&m(&[&[1, 2], &[2, 4]]), &[q(1), q(1)]).is_none());
    }

    #[test]
    fn intersections() {
        let u = m(&[&[1, 0, 0], &[0, 1, 0]]);
        let w = m(&[&[0, 1, 0], &[0, 0, 1]]);
        let i = intersection(&u, &w);
        assert_eq!(i.len(), 1);
        assert_eq!(i[0], vec![q(0), q(1), q(0)]);
        let c = coordinates(&u, &[qr(1, 2), q(3), q(0)]).unwrap();
        assert_eq!(c, vec![qr(1, 2), q(3)]);
        assert!(coordinates(&u, &[q(0), q(0), q(1)]).is_none());
    }

    #[test]
    fn orthogonal_complement() {
        let g = identity(3);
        let all = identity(3);
        let w = m(&[&[1, 1, 0]]);
        let perp = orthogonal_within(&all, &w, &g);
        assert_eq!(perp.len(), 2);
        for v in &perp {
            assert!(dot(v, &w[0]).is_zero());
        }
    }
}
