//! Sparse Cholesky factorization `P A Pᵀ = L Lᵀ` with a reusable factor.
//!
//! Symbolic analysis walks the elimination tree, merging children's column
//! structures; the numeric phase is a left-looking column factorization that
//! keeps one linked list of pending updates per row.

use super::ordering::minimum_degree;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Lower Cholesky factor in compressed columns (diagonal stored first) plus the
/// fill-reducing permutation. Immutable after construction.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

/// Factorizes a symmetric positive definite matrix. Only the pattern's symmetric
/// structure and the lower triangle (after permutation) are read.
pub fn factorize_spd(m: &CsrMatrix) -> Result<CholeskyFactor> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let perm = minimum_degree(m);
    factorize_with_ordering(m, perm)
}

/// Factorizes with a caller-supplied ordering (`perm[new] = old`).
pub fn factorize_with_ordering(m: &CsrMatrix, perm: Vec<usize>) -> Result<CholeskyFactor> {
    let n = m.nrows();
    if perm.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: perm.len() });
    }
    let mut inv = vec![NONE; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }

    // Lower triangle of the permuted matrix, by column.
    let mut ccount = vec![0usize; n + 1];
    for r in 0..n {
        let nr = inv[r];
        for &c in m.row(r).0 {
            let nc = inv[c as usize];
            if nr >= nc {
                ccount[nc + 1] += 1;
            }
        }
    }
    for j in 0..n {
        ccount[j + 1] += ccount[j];
    }
    let cptr = ccount.clone();
    let mut fill = ccount;
    let mut crow = vec![0u32; cptr[n]];
    let mut cval = vec![0.0; cptr[n]];
    for r in 0..n {
        let nr = inv[r];
        let (cols, vals) = m.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            let nc = inv[c as usize];
            if nr >= nc {
                crow[fill[nc]] = nr as u32;
                cval[fill[nc]] = v;
                fill[nc] += 1;
            }
        }
    }

    // Symbolic: column structures of L via the elimination tree.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut col_ptr = Vec::with_capacity(n + 1);
    col_ptr.push(0);
    let mut row_idx: Vec<u32> = Vec::new();
    let mut mark = vec![NONE; n];
    let mut scratch: Vec<u32> = Vec::new();
    for j in 0..n {
        scratch.clear();
        mark[j] = j;
        for &r in &crow[cptr[j]..cptr[j + 1]] {
            let r = r as usize;
            if r > j && mark[r] != j {
                mark[r] = j;
                scratch.push(r as u32);
            }
        }
        for &child in &children[j] {
            for &r in &row_idx[col_ptr[child]..col_ptr[child + 1]] {
                let r = r as usize;
                if r > j && mark[r] != j {
                    mark[r] = j;
                    scratch.push(r as u32);
                }
            }
        }
        scratch.sort_unstable();
        row_idx.push(j as u32);
        row_idx.extend_from_slice(&scratch);
        col_ptr.push(row_idx.len());
        if let Some(&parent) = scratch.first() {
            children[parent as usize].push(j);
        }
    }
    drop(children);

    // Numeric: left-looking.
    let nnz = row_idx.len();
    let mut values = vec![0.0; nnz];
    let mut work = vec![0.0; n];
    // head[row] → first column waiting to update `row`; link[col] → next column in that list
    let mut head = vec![NONE; n];
    let mut link = vec![NONE; n];
    // next[col] → position in column `col` of its next pending row
    let mut next = vec![0usize; n];
    for j in 0..n {
        for p in cptr[j]..cptr[j + 1] {
            work[crow[p] as usize] += cval[p];
        }
        let mut k = head[j];
        while k != NONE {
            let following = link[k];
            let pos = next[k];
            let ljk = values[pos];
            for p in pos..col_ptr[k + 1] {
                work[row_idx[p] as usize] -= values[p] * ljk;
            }
            next[k] = pos + 1;
            if pos + 1 < col_ptr[k + 1] {
                let row = row_idx[pos + 1] as usize;
                link[k] = head[row];
                head[row] = k;
            }
            k = following;
        }
        head[j] = NONE;
        let pivot = work[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { column: perm[j], pivot });
        }
        let ljj = pivot.sqrt();
        work[j] = 0.0;
        values[col_ptr[j]] = ljj;
        for p in col_ptr[j] + 1..col_ptr[j + 1] {
            let r = row_idx[p] as usize;
            values[p] = work[r] / ljj;
            work[r] = 0.0;
        }
        if col_ptr[j] + 1 < col_ptr[j + 1] {
            next[j] = col_ptr[j] + 1;
            let row = row_idx[col_ptr[j] + 1] as usize;
            link[j] = head[row];
            head[row] = j;
        }
    }
    Ok(CholeskyFactor { n, perm, col_ptr, row_idx, values })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros of `L`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.solve_permuted(&mut y);
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = y[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    fn solve_permuted(&self, y: &mut [f64]) {
        for j in 0..self.n {
            let (start, end) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let yj = y[j] / self.values[start];
            y[j] = yj;
            if yj != 0.0 {
                for (&r, &l) in self.row_idx[start + 1..end].iter().zip(&self.values[start + 1..end]) {
                    y[r as usize] -= l * yj;
                }
            }
        }
        for j in (0..self.n).rev() {
            let (start, end) = (self.col_ptr[j], self.col_ptr[j + 1]);
            let acc = self.row_idx[start + 1..end]
                .iter()
                .zip(&self.values[start + 1..end])
                .fold(y[j], |acc, (&r, &l)| acc - l * y[r as usize]);
            y[j] = acc / self.values[start];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_is_unchanged() {
        let f = factorize_spd(&CsrMatrix::identity(5)).unwrap();
        assert_eq!(f.solve(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn two_by_two() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let x = factorize_spd(&m).unwrap().solve(&[1.0, 1.0]);
        assert!((x[0] - 1.0 / 3.0).abs() < 1e-15 && (x[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn detects_indefinite() {
        let m = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(factorize_spd(&m), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn random_spd_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        // sparse random SPD: diagonally dominant with random symmetric pattern
        let mut t = Vec::new();
        for i in 0..n {
            for _ in 0..3 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v = rng.gen::<f64>() - 0.5;
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
            t.push((i, i, 4.0));
        }
        let m = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let x = factorize_spd(&m).unwrap().solve(&b);
        let r = m.mul_vec(&x);
        let err: f64 = r.iter().zip(&b).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-12);
        let dense = m.to_dense().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b));
        for i in 0..n {
            assert!((dense[i] - x[i]).abs() < 1e-12);
        }
    }
}
