//! Unpacked reference implementations used as test oracles. Nothing here
//! touches the packed elimination code paths.
#![allow(dead_code)]

use rand::Rng;
use rankguard_core::BitMatrix;

pub type Dense = Vec<Vec<u8>>;

pub fn to_dense(m: &BitMatrix) -> Dense {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m.get(r, c) as u8).collect())
        .collect()
}

pub fn from_dense(d: &Dense, cols: usize) -> BitMatrix {
    BitMatrix::from_fn(d.len(), cols, |r, c| d[r][c] == 1)
}

pub fn random_dense<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Dense {
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(0..2u8)).collect())
        .collect()
}

/// Per-entry Gaussian elimination.
pub fn naive_rank(d: &Dense, cols: usize) -> usize {
    let mut m = d.clone();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] == 1) else {
            continue;
        };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] == 1 {
                let pivot = m[rank].clone();
                for (a, b) in m[r].iter_mut().zip(&pivot) {
                    *a ^= b;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Schoolbook product.
pub fn naive_mul(a: &Dense, b: &Dense, inner: usize, cols: usize) -> Dense {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| (0..inner).fold(0u8, |acc, k| acc ^ (row[k] & b[k][c])))
                .collect()
        })
        .collect()
}

pub fn naive_transpose(d: &Dense, cols: usize) -> Dense {
    (0..cols).map(|c| d.iter().map(|row| row[c]).collect()).collect()
}

/// `G[j][i] = 1` iff the bits of `i` are a subset of the bits of `j`.
pub fn generator_entry(j: usize, i: usize) -> bool {
    i & j == i
}

/// `x = u G_N` straight from the subset rule.
pub fn naive_encode(u: &[bool]) -> Vec<bool> {
    let n = u.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| generator_entry(j, i)).fold(false, |acc, j| acc ^ u[j]))
        .collect()
}
