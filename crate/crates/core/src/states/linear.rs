use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, Spectrum};

/// Condition number above which (𝟙 + T) is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// A linear process with kernel T(a, a′).
#[derive(Debug, Clone)]
pub struct LinearProcess {
    pub grid: FrequencyGrid,
    pub t: DMatrix<Complex64>,
}

/// W[α] = exp(log_norm − α*⋄B_lin⋄α).
#[derive(Debug, Clone)]
pub struct LinearWigner {
    pub grid: FrequencyGrid,
    pub log_norm: Complex64,
    pub b_lin: DMatrix<Complex64>,
    /// 2-norm condition number of (𝟙 + T).
    pub condition: f64,
}

impl LinearProcess {
    pub fn new(grid: FrequencyGrid, t: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.sites();
        if t.shape() != (n, n) {
            return Err(Error::Shape(format!("T must be {n}x{n}, got {:?}", t.shape())));
        }
        Ok(LinearProcess { grid, t })
    }

    /// T as an operator on site vectors: kernel products carry Δa^D.
    pub fn operator(&self) -> DMatrix<Complex64> {
        &self.t * Complex64::new(self.grid.weight(), 0.0)
    }
}

/// log_norm = −ln det(𝟙+T), B_lin = 2(𝟙−T)(𝟙+T)^(−1).
pub fn wigner_linear_process(p: &LinearProcess) -> Result<LinearWigner> {
    let n = p.grid.sites();
    let id = DMatrix::<Complex64>::identity(n, n);
    let top = p.operator();
    let plus = &id + &top;
    let minus = &id - &top;
    let sv = plus.clone().singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
    let condition = if smin == 0.0 { f64::INFINITY } else { smax / smin };
    if !(condition < MAX_CONDITION) {
        return Err(Error::Linalg(format!(
            "(1 + T) is singular: condition number {condition:e}"
        )));
    }
    let lu = plus.lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Linalg(format!("(1 + T) is singular: condition number {condition:e}")))?;
    let det = (&id + &top).lu().determinant();
    let b_op = (minus * inv) * Complex64::new(2.0, 0.0);
    Ok(LinearWigner {
        grid: p.grid,
        log_norm: -det.ln(),
        b_lin: b_op * Complex64::new(p.grid.delta_weight(), 0.0),
        condition,
    })
}

impl LinearWigner {
    pub fn evaluate(&self, alpha: &Spectrum) -> Result<Complex64> {
        self.grid.check_same(&alpha.grid)?;
        let w = self.grid.weight();
        let a = DVector::from_column_slice(&alpha.values);
        let q = (a.adjoint() * &self.b_lin * &a)[(0, 0)] * (w * w);
        Ok((self.log_norm - q).exp())
    }
}
