//! Wigner-functional states: Gaussian states and their transport, linear
//! processes, and fixed-spectrum Fock states.
//!
//! Kernels over grid² are dense matrices indexed by lattice site. The
//! contraction α*⋄K⋄α is `Σ α*(a) K(a,a′) α(a′)·Δa^(2D)`.

mod fock;
mod gaussian;
mod linear;

pub use fock::{fock_generating, fock_wigner, laguerre, FockSpec, DEFAULT_N0};
pub use gaussian::{
    characteristic_of_gaussian, free_space_gaussian, gaussian_drift, probe_fields, shift_decay,
    CharacteristicGaussian, DriftReport, GaussianState, N_PROBES,
};
pub use linear::{wigner_linear_process, LinearProcess, LinearWigner};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::grid::FrequencyGrid;

/// Kernel c·δ(a − a′) as a matrix: `c/Δa^D` on the diagonal.
pub fn delta_matrix(grid: &FrequencyGrid, c: f64) -> DMatrix<Complex64> {
    DMatrix::from_diagonal_element(grid.sites(), grid.sites(), Complex64::new(c * grid.delta_weight(), 0.0))
}

/// Converts a row-major n×n value vector into a matrix.
pub fn matrix_from_row_major(n: usize, values: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(n, n, values)
}

/// Row-major values of a square matrix.
pub fn row_major(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    m.transpose().as_slice().to_vec()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// max |K − K†| / max |K|.
pub fn hermiticity_residual(m: &DMatrix<Complex64>) -> f64 {
    let s = max_abs(m);
    if s == 0.0 {
        return 0.0;
    }
    max_abs(&(m - m.adjoint())) / s
}
