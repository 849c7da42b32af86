use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{contract, FrequencyGrid, Spectrum};

/// Normalisation constant N0 used unless one is given explicitly.
pub const DEFAULT_N0: f64 = 1.0;

/// A fixed-spectrum Fock state |n_F⟩.
#[derive(Debug, Clone)]
pub struct FockSpec {
    pub f: Spectrum,
    pub n: usize,
    pub n0: f64,
}

impl FockSpec {
    /// Requires contract(F*, F) = 1 to 1e−12.
    pub fn new(f: Spectrum, n: usize) -> Result<Self> {
        let norm = f.norm_sq();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "Fock spectrum must be normalised: contract(F*, F) = {norm}"
            )));
        }
        Ok(FockSpec { f, n, n0: DEFAULT_N0 })
    }

    /// Normalises `f` first.
    pub fn normalized(f: &Spectrum, n: usize) -> Result<Self> {
        Self::new(f.normalized()?, n)
    }

    pub fn with_n0(mut self, n0: f64) -> Self {
        self.n0 = n0;
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.f.grid
    }

    /// |⟨α, F⟩|² with ⟨α, F⟩ = contract(α*, F).
    pub fn overlap_sq(&self, alpha: &Spectrum) -> Result<f64> {
        Ok(contract(&alpha.conj(), &self.f)?.norm_sqr())
    }
}

/// L_n(x) by the three-term recurrence.
pub fn laguerre(n: usize, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 - x);
    if n == 0 {
        return l0;
    }
    for k in 1..n {
        let kf = k as f64;
        let l2 = ((2.0 * kf + 1.0 - x) * l1 - kf * l0) / (kf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// 𝒲(η) = N0/(1+η)·exp(−2‖α‖² + 4η/(1+η)·|⟨α,F⟩|²).
pub fn fock_generating(eta: f64, f: &FockSpec, alpha: &Spectrum) -> Result<Complex64> {
    if !(eta > -1.0) {
        return Err(Error::Domain(format!(
            "generating parameter must lie in (-1, inf), got {eta}"
        )));
    }
    let x = f.overlap_sq(alpha)?;
    let v = f.n0 / (1.0 + eta) * (-2.0 * alpha.norm_sq() + 4.0 * eta / (1.0 + eta) * x).exp();
    Ok(Complex64::new(v, 0.0))
}

/// W_n[α] = N0·(−1)^n·L_n(4|⟨α,F⟩|²)·exp(−2‖α‖²).
pub fn fock_wigner(n: usize, f: &FockSpec, alpha: &Spectrum) -> Result<Complex64> {
    let x = f.overlap_sq(alpha)?;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let v = f.n0 * sign * laguerre(n, 4.0 * x) * (-2.0 * alpha.norm_sq()).exp();
    Ok(Complex64::new(v, 0.0))
}
