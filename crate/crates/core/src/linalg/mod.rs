//! Sparse storage, sparse Cholesky, conjugate gradients and dense eigen oracles.

mod cholesky;
mod dense;
mod ordering;
mod pcg;
mod sparse;

pub use cholesky::{factorize_spd, factorize_with_ordering, CholeskyFactor};
pub use dense::{dense_generalized_eig, kernel_split, DenseEig, KernelSplit, DENSE_LIMIT};
pub use ordering::minimum_degree;
pub use pcg::{pcg, PcgOutcome};
pub use sparse::{axpy, dot, norm2, CsrMatrix};
