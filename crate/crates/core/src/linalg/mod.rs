//! Eigensolvers used by the spectral analysis and the Bethe cluster solves.

mod dense;
mod lanczos;

pub use dense::{symmetric_eigen, tridiagonal_eigenvalues, tridiagonal_lowest, SymmetricEigen};
pub use lanczos::{lanczos_lowest, lanczos_lowest_from, LanczosOptions};

pub(crate) use lanczos::residual_norm;
