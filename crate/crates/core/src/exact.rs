//! Exact integer linear algebra at desk scale: boundary matrices in integer
//! form and fraction-free rank computation. Keeping this path free of
//! floating point removes any rank ambiguity from the Betti numbers.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

/// Integer coordinate triplets `(row, col, value)` of the boundary operator
/// from k-chains to (k-1)-chains. The entry for the face obtained by
/// deleting the i-th vertex of a k-simplex is `(-1)^i`.
pub fn boundary_triplets(complex: &SimplicialComplex, k: usize) -> Result<Vec<(usize, usize, i64)>> {
    if k < 1 || k > complex.dim() {
        return Err(Error::Degree(format!(
            "boundary degree {k} outside 1..={}",
            complex.dim()
        )));
    }
    let mut triplets = Vec::with_capacity(complex.n_simplices(k) * (k + 1));
    for (col, simplex) in complex.simplices(k).iter().enumerate() {
        for i in 0..=k {
            let face = simplex.face(i);
            let row = complex
                .index_of(&face)
                .expect("closure guarantees every face is stored");
            let sign = if i % 2 == 0 { 1 } else { -1 };
            triplets.push((row, col, sign));
        }
    }
    Ok(triplets)
}

/// Sparse integer matrix product, returned as sorted deduplicated triplets.
pub fn matmul_triplets(
    a: &[(usize, usize, i64)],
    b: &[(usize, usize, i64)],
    inner: usize,
) -> Vec<(usize, usize, i64)> {
    let mut b_by_row: Vec<Vec<(usize, i64)>> = vec![Vec::new(); inner];
    for &(r, c, v) in b {
        b_by_row[r].push((c, v));
    }
    let mut acc: std::collections::BTreeMap<(usize, usize), i64> = std::collections::BTreeMap::new();
    for &(r, k, v) in a {
        for &(c, w) in &b_by_row[k] {
            *acc.entry((r, c)).or_insert(0) += v * w;
        }
    }
    acc.into_iter()
        .filter(|&(_, v)| v != 0)
        .map(|((r, c), v)| (r, c, v))
        .collect()
}

/// Exact rank of an integer matrix given as triplets, by fraction-free
/// (Bareiss) Gaussian elimination over arbitrary-precision integers.
pub fn rank_exact(rows: usize, cols: usize, triplets: &[(usize, usize, i64)]) -> usize {
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); cols]; rows];
    for &(r, c, v) in triplets {
        m[r][c] += BigInt::from(v);
    }

    let mut rank = 0;
    let mut pivot_row = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        // partial pivot: smallest nonzero magnitude keeps the integers short
        let pivot = (pivot_row..rows)
            .filter(|&r| !m[r][col].is_zero())
            .min_by_key(|&r| m[r][col].magnitude().bits());
        let Some(p) = pivot else { continue };
        m.swap(pivot_row, p);
        for r in pivot_row + 1..rows {
            // rows with a zero multiplier still need the Bareiss rescale,
            // otherwise the exact-division invariant breaks
            for j in col + 1..cols {
                let num = &m[r][j] * &m[pivot_row][col] - &m[r][col] * &m[pivot_row][j];
                m[r][j] = num / &prev; // exact by Sylvester's identity
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[pivot_row][col].clone();
        rank += 1;
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    rank
}
