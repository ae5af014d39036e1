//! Small dense linear algebra over `Q` and over prime fields `F_p`.
//!
//! Matrices are row-major `Vec<Vec<_>>`. Everything here is sized for desk-scale
//! problems (dimensions in the tens).

use num_traits::{One, Zero};

use super::Q;

pub type QMatrix = Vec<Vec<Q>>;

/// Reduced row echelon form in place; returns pivot columns.
pub fn q_rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel `{v : m v = 0}`.
pub fn q_kernel(m: &QMatrix, cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = q_rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![Q::zero(); cols];
            v[fc] = Q::one();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[ri][fc].clone();
            }
            v
        })
        .collect()
}

/// Solves `m x = b` for square invertible `m`.
pub fn q_solve(m: &QMatrix, b: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = q_rref(&mut aug);
    if pivots.len() < n || pivots.contains(&n) {
        return None;
    }
    Some(aug.iter().map(|r| r[n].clone()).collect())
}

pub fn q_inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = q_rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// `v * m` for a row vector `v`.
pub fn q_row_times(v: &[Q], m: &QMatrix) -> Vec<Q> {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![Q::zero(); cols];
    for (vi, row) in v.iter().zip(m) {
        if vi.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += vi * x;
        }
    }
    out
}

// ---- prime fields ----

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

/// Reduced row echelon form over `F_p`; returns pivot columns.
pub fn fp_rref(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_multiple_of(p)) else {
            continue;
        };
        m.swap(r, pr);
        let inv = inv_mod(m[r][c], p);
        for x in m[r].iter_mut() {
            *x = ((*x as u128 * inv as u128) % p as u128) as u64;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    let t = ((f as u128 * m[r][j] as u128) % p as u128) as u64;
                    m[i][j] = (m[i][j] + p - t) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Right kernel over `F_p`.
pub fn fp_kernel(m: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut a = m.to_vec();
    let pivots = fp_rref(&mut a, p);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u64; cols];
            v[fc] = 1;
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[ri][fc] % p) % p;
            }
            v
        })
        .collect()
}

/// Canonical basis (nonzero rows of the RREF) of the span of `vectors`.
pub fn fp_span_basis(vectors: &[Vec<u64>], dim: usize, p: u64) -> Vec<Vec<u64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mut a: Vec<Vec<u64>> = vectors.iter().map(|v| v.iter().map(|x| x % p).collect()).collect();
    let pivots = fp_rref(&mut a, p);
    a.truncate(pivots.len());
    debug_assert!(a.iter().all(|r| r.len() == dim));
    a
}

/// Whether `v` lies in the row span of an RREF basis.
pub fn fp_in_span(basis: &[Vec<u64>], v: &[u64], p: u64) -> bool {
    let mut rows = basis.to_vec();
    rows.push(v.iter().map(|x| x % p).collect());
    fp_rref(&mut rows, p).len() == basis.len()
}

/// Solves `sum_i c_i * basis_i ≡ target` modulo the subspace spanned by `modulo`.
/// Returns the coefficients `c_i` when a solution exists.
pub fn fp_solve_modulo(
    basis: &[Vec<u64>],
    modulo: &[Vec<u64>],
    target: &[u64],
    p: u64,
) -> Option<Vec<u64>> {
    // unknowns: c (basis.len()) then d (modulo.len()); columns are vectors.
    let dim = target.len();
    let k = basis.len();
    let n = k + modulo.len();
    let mut aug: Vec<Vec<u64>> = (0..dim)
        .map(|row| {
            let mut r: Vec<u64> = basis.iter().map(|b| b[row] % p).collect();
            r.extend(modulo.iter().map(|b| b[row] % p));
            r.push(target[row] % p);
            r
        })
        .collect();
    let pivots = fp_rref(&mut aug, p);
    if pivots.contains(&n) {
        return None;
    }
    let mut sol = vec![0u64; n];
    for (ri, &pc) in pivots.iter().enumerate() {
        sol[pc] = aug[ri][n];
    }
    Some(sol[..k].to_vec())
}
