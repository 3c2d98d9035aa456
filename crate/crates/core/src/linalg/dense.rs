//! Dense generalized symmetric eigensolver used to cross-check the power method
//! on small problems.

use nalgebra::{DMatrix, SymmetricEigen};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Largest problem the dense routines accept.
pub const DENSE_LIMIT: usize = 2000;

/// Eigenpairs of `B v = λ A v` restricted to a subspace, eigenvalues ascending.
/// Eigenvectors are expressed in the full space and normalized so `vᵀ A v = 1`.
#[derive(Debug, Clone)]
pub struct DenseEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

fn check_size(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dofs: n, limit: DENSE_LIMIT });
    }
    Ok(())
}

/// Solves the pencil `(B, A)` on the column span of `subspace`.
pub fn dense_generalized_eig(b: &CsrMatrix, a: &CsrMatrix, subspace: &DMatrix<f64>) -> Result<DenseEig> {
    let n = a.nrows();
    check_size(n)?;
    if subspace.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: subspace.nrows() });
    }
    let ad = a.to_dense();
    let bd = b.to_dense();
    let a_s = subspace.transpose() * &ad * subspace;
    let b_s = subspace.transpose() * &bd * subspace;
    let m = subspace.ncols();
    if m == 0 {
        return Ok(DenseEig { eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(n, 0) });
    }
    let chol = a_s.clone().cholesky().ok_or(Error::RankDeficient)?;
    let l = chol.l();
    // the smallest diagonal of L relative to the largest flags near dependence
    let diag_max = l.diagonal().iter().fold(0.0f64, |x, &y| x.max(y));
    let diag_min = l.diagonal().iter().fold(f64::INFINITY, |x, &y| x.min(y));
    if diag_min <= 1e-10 * diag_max {
        return Err(Error::RankDeficient);
    }
    let linv = l.clone().try_inverse().ok_or(Error::RankDeficient)?;
    let mut c = &linv * b_s * linv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let back = subspace * linv.transpose();
    let mut vecs = DMatrix::zeros(n, m);
    let mut vals = Vec::with_capacity(m);
    for (dst, &src) in order.iter().enumerate() {
        vals.push(eig.eigenvalues[src]);
        vecs.set_column(dst, &(&back * eig.eigenvectors.column(src)));
    }
    Ok(DenseEig { eigenvalues: vals, eigenvectors: vecs })
}

/// Explicit bases for `Z = ker B` and its `A`-orthogonal complement.
#[derive(Debug, Clone)]
pub struct KernelSplit {
    /// Orthonormal (Euclidean) columns spanning `ker B`.
    pub kernel: DMatrix<f64>,
    /// Columns spanning `{v : vᵀ A z = 0 ∀ z ∈ ker B}`.
    pub complement: DMatrix<f64>,
}

/// Computes `ker B` from the eigen-decomposition of `B`, treating eigenvalues below
/// `rel_tol · λ_max(B)` as zero, and `Z^⊥ = A⁻¹ range(B)`.
pub fn kernel_split(b: &CsrMatrix, a: &CsrMatrix, rel_tol: f64) -> Result<KernelSplit> {
    let n = b.nrows();
    check_size(n)?;
    let bd = b.to_dense();
    let bd = (&bd + bd.transpose()) * 0.5;
    let eig = SymmetricEigen::new(bd);
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let threshold = rel_tol * max;
    let kernel_cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() <= threshold).collect();
    let range_cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() > threshold).collect();
    let kernel = eig.eigenvectors.select_columns(&kernel_cols);
    let range = eig.eigenvectors.select_columns(&range_cols);
    let ad = a.to_dense();
    let chol = ad.cholesky().ok_or(Error::NotPositiveDefinite { column: 0, pivot: 0.0 })?;
    let complement = chol.solve(&range);
    Ok(KernelSplit { kernel, complement })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0 + i as f64));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn equal_pencil_gives_ones() {
        let a = spd(8);
        let eig = dense_generalized_eig(&a, &a, &DMatrix::identity(8, 8)).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_b_gives_zeros() {
        let a = spd(6);
        let eig = dense_generalized_eig(&CsrMatrix::zeros(6, 6), &a, &DMatrix::identity(6, 6)).unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l.abs() < 1e-14));
    }

    #[test]
    fn residuals_are_small() {
        let a = spd(10);
        let b = CsrMatrix::from_diagonal(&(0..10).map(|i| (i % 3) as f64).collect::<Vec<_>>());
        let eig = dense_generalized_eig(&b, &a, &DMatrix::identity(10, 10)).unwrap();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvectors.column(i);
            let r = &bd * v - l * (&ad * v);
            assert!(r.norm() <= 1e-8 * v.norm());
        }
        assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rank_deficient_subspace() {
        let a = spd(4);
        let mut s = DMatrix::zeros(4, 2);
        s[(0, 0)] = 1.0;
        s[(0, 1)] = 2.0;
        assert!(matches!(dense_generalized_eig(&a, &a, &s), Err(Error::RankDeficient)));
    }

    #[test]
    fn kernel_split_dimensions() {
        let a = spd(7);
        let b = CsrMatrix::from_diagonal(&[1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 3.0]);
        let split = kernel_split(&b, &a, 1e-10).unwrap();
        assert_eq!(split.kernel.ncols(), 3);
        assert_eq!(split.kernel.ncols() + split.complement.ncols(), 7);
        let cross = split.kernel.transpose() * a.to_dense() * &split.complement;
        assert!(cross.amax() < 1e-12);
    }

    #[test]
    fn refuses_large_problems() {
        let a = CsrMatrix::identity(DENSE_LIMIT + 1);
        assert!(matches!(kernel_split(&a, &a, 1e-10), Err(Error::TooLarge { .. })));
    }
}
