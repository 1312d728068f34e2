//! Eigendata of AᵀA at desk scale.

use crate::error::{Result, SolverError};
use crate::problem::{Matrix, SpectralData};

/// Eigenvalues below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub lambda_max: f64,
    pub lambda_min_plus: f64,
    pub rank: usize,
    /// Orthonormal columns spanning {v : Av = 0}; zero columns when A is injective.
    pub kernel_basis: Matrix,
}

impl Spectrum {
    pub fn data(&self) -> SpectralData {
        SpectralData {
            lambda_max: self.lambda_max,
            lambda_min_plus: self.lambda_min_plus,
            rank: self.rank,
        }
    }
}

/// λmax(AᵀA), λmin⁺(AᵀA) and a kernel basis of A by a symmetric
/// eigendecomposition of AᵀA.
pub fn spectral(a: &Matrix) -> Result<Spectrum> {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Err(SolverError::InvalidArgument("empty matrix".into()));
    }
    let ata = a.transpose() * a;
    let eig = ata.symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    if !(lambda_max > 0.0) {
        return Err(SolverError::Degenerate(
            "zero matrix: smallest positive eigenvalue undefined".into(),
        ));
    }
    let tol = RANK_TOLERANCE * lambda_max;
    let mut lambda_min_plus = f64::INFINITY;
    let mut kernel = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > tol {
            lambda_min_plus = lambda_min_plus.min(l);
        } else {
            kernel.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    let kernel_basis = if kernel.is_empty() {
        Matrix::zeros(n, 0)
    } else {
        Matrix::from_columns(&kernel)
    };
    Ok(Spectrum {
        lambda_max,
        lambda_min_plus,
        rank: n - kernel.len(),
        kernel_basis,
    })
}

/// Largest singular value of A, 0 for the zero matrix.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.max()
}
