//! Refractive-index power spectral densities and the integrated strength Λ.
//!
//! PSD arguments are angular wave vectors `k` in rad/m. Transverse
//! frequencies `a` elsewhere in the crate are in cycles/m, and
//! [`TurbulenceModel::psd_transverse`] applies `|k| = 2π|a|` internally.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::quad;

/// Prefactor of the Kolmogorov spectrum, including the `(2π)³` from the
/// Fourier convention with `exp(−i2π a·x)` transforms.
pub const KOLMOGOROV_PREFACTOR: f64 = 0.033 * (2.0 * PI) * (2.0 * PI) * (2.0 * PI);

/// Tatarskii inner-scale constant: the rolloff is `exp(−|k|² l0² / 35.0)`.
pub const DEFAULT_INNER_SCALE_CONSTANT: f64 = 35.0;

const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Kolmogorov,
    VonKarman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurbulenceModel {
    pub kind: SpectrumKind,
    /// Structure constant C_n², m^(−2/3).
    pub cn2: f64,
    /// Outer scale L0 in meters; only used by von Kármán.
    #[serde(default = "default_outer_scale")]
    pub outer_scale: f64,
    /// Inner scale l0 in meters; zero disables the rolloff.
    #[serde(default)]
    pub inner_scale: f64,
    #[serde(default = "default_inner_constant")]
    pub inner_scale_constant: f64,
}

fn default_outer_scale() -> f64 {
    f64::INFINITY
}

fn default_inner_constant() -> f64 {
    DEFAULT_INNER_SCALE_CONSTANT
}

impl TurbulenceModel {
    pub fn kolmogorov(cn2: f64) -> Result<Self> {
        let m = TurbulenceModel {
            kind: SpectrumKind::Kolmogorov,
            cn2,
            outer_scale: f64::INFINITY,
            inner_scale: 0.0,
            inner_scale_constant: DEFAULT_INNER_SCALE_CONSTANT,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn von_karman(cn2: f64, outer_scale: f64, inner_scale: f64) -> Result<Self> {
        let m = TurbulenceModel {
            kind: SpectrumKind::VonKarman,
            cn2,
            outer_scale,
            inner_scale,
            inner_scale_constant: DEFAULT_INNER_SCALE_CONSTANT,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_cn2(&self, cn2: f64) -> Self {
        TurbulenceModel { cn2, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cn2 >= 0.0) || !self.cn2.is_finite() {
            return Err(Error::Config(format!("cn2 must be finite and >= 0, got {}", self.cn2)));
        }
        if !(self.inner_scale >= 0.0) || !self.inner_scale.is_finite() {
            return Err(Error::Config(format!(
                "inner_scale must be finite and >= 0, got {}",
                self.inner_scale
            )));
        }
        if !(self.inner_scale_constant > 0.0) {
            return Err(Error::Config(format!(
                "inner_scale_constant must be > 0, got {}",
                self.inner_scale_constant
            )));
        }
        if self.kind == SpectrumKind::VonKarman
            && !(self.outer_scale > 0.0 && self.outer_scale.is_finite())
        {
            return Err(Error::Config(format!(
                "outer_scale must be finite and > 0 for von Karman, got {}",
                self.outer_scale
            )));
        }
        Ok(())
    }

    /// `κ0 = 2π/L0` for von Kármán, zero for Kolmogorov.
    pub fn outer_wavenumber(&self) -> f64 {
        match self.kind {
            SpectrumKind::Kolmogorov => 0.0,
            SpectrumKind::VonKarman => 2.0 * PI / self.outer_scale,
        }
    }

    pub fn has_finite_lambda(&self) -> bool {
        self.kind == SpectrumKind::VonKarman || self.cn2 == 0.0
    }

    pub(crate) fn require_finite_lambda(&self) -> Result<()> {
        if self.kind == SpectrumKind::Kolmogorov {
            return Err(Error::Divergent("Λ divergent for pure Kolmogorov".into()));
        }
        Ok(())
    }

    /// Φ_n as a function of the squared angular wavenumber |k|².
    pub fn psd_k2(&self, k2: f64) -> Result<f64> {
        if self.kind == SpectrumKind::Kolmogorov && k2 == 0.0 {
            return Err(Error::Domain("PSD singular at zero frequency".into()));
        }
        if self.cn2 == 0.0 {
            return Ok(0.0);
        }
        let kappa0 = self.outer_wavenumber();
        let mut v = KOLMOGOROV_PREFACTOR * self.cn2 * (k2 + kappa0 * kappa0).powf(-11.0 / 6.0);
        if self.inner_scale > 0.0 {
            v *= (-k2 * self.inner_scale * self.inner_scale / self.inner_scale_constant).exp();
        }
        Ok(v)
    }

    /// Φ_n(k) for a 3-D angular wave vector (rad/m). Units: m³.
    pub fn psd_3d(&self, k: [f64; 3]) -> Result<f64> {
        self.psd_k2(k[0] * k[0] + k[1] * k[1] + k[2] * k[2])
    }

    /// The Markov slice Φ_n(a, 0) for a transverse frequency `a` in cycles/m
    /// (one or two components).
    pub fn psd_transverse(&self, a: &[f64]) -> Result<f64> {
        if a.is_empty() || a.len() > 2 {
            return Err(Error::Shape(format!(
                "transverse frequency must have 1 or 2 components, got {}",
                a.len()
            )));
        }
        let mut k = [0.0; 3];
        for (kc, ac) in k.iter_mut().zip(a) {
            *kc = 2.0 * PI * ac;
        }
        self.psd_3d(k)
    }

    /// Λ = ∫ Φ_n(a, 0) d²a over the full transverse plane, in meters.
    pub fn lambda_total(&self) -> Result<f64> {
        self.require_finite_lambda()?;
        if self.cn2 == 0.0 {
            return Ok(0.0);
        }
        // d²a = κ dκ / (2π) with κ = 2π|a|.
        let radial = self.radial_integral(|kappa, psd| kappa * psd)?;
        Ok(radial / (2.0 * PI))
    }

    /// One-dimensional counterpart of [`Self::lambda_total`]: ∫ Φ_n(a, 0) da.
    pub fn lambda_total_1d(&self) -> Result<f64> {
        self.require_finite_lambda()?;
        if self.cn2 == 0.0 {
            return Ok(0.0);
        }
        // Even integrand; da = dκ / (2π).
        let half_line = self.radial_integral(|_, psd| psd)?;
        Ok(2.0 * half_line / (2.0 * PI))
    }

    /// Λ for transverse dimension `dim` (1 or 2).
    pub fn lambda_for_dim(&self, dim: usize) -> Result<f64> {
        match dim {
            1 => self.lambda_total_1d(),
            2 => self.lambda_total(),
            _ => Err(Error::Shape(format!("dimension must be 1 or 2, got {dim}"))),
        }
    }

    /// ∫_0^∞ w(κ, Φ(κ)) dκ, split at κ0 with the tail mapped onto (0, 1].
    fn radial_integral<W: Fn(f64, f64) -> f64>(&self, weight: W) -> Result<f64> {
        let kappa0 = self.outer_wavenumber();
        let integrand = |kappa: f64| {
            let psd = self.psd_k2(kappa * kappa).unwrap_or(0.0);
            weight(kappa, psd)
        };
        let head = quad::integrate(&integrand, 0.0, kappa0, QUAD_REL_TOL * 0.5, 0.0)?;
        let tail = quad::integrate(
            |u: f64| {
                let kappa = kappa0 / u;
                integrand(kappa) * kappa0 / (u * u)
            },
            0.0,
            1.0,
            QUAD_REL_TOL * 0.5,
            0.0,
        )?;
        let total = head.value + tail.value;
        let err = head.abs_error + tail.abs_error;
        if !(total > 0.0) || err > QUAD_REL_TOL * total {
            return Err(Error::Numerical(format!(
                "radial Λ quadrature failed: head {:e}±{:e} ({} intervals), tail {:e}±{:e} ({} intervals)",
                head.value, head.abs_error, head.intervals, tail.value, tail.abs_error, tail.intervals
            )));
        }
        Ok(total)
    }
}

/// Φ_n(a,0)·Δa^D at every lattice site: the discrete diffusion weights.
pub fn lattice_weights(model: &TurbulenceModel, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    let w = grid.weight();
    (0..grid.sites())
        .map(|s| {
            let a = grid.frequency(s);
            model.psd_transverse(&a[..grid.dim]).map(|p| p * w)
        })
        .collect()
}

/// Lattice Λ = Σ_a Φ_n(a,0)·Δa^D, the strength the discrete screens and
/// kernel equations actually carry (truncated to the grid).
pub fn lattice_lambda(model: &TurbulenceModel, grid: &FrequencyGrid) -> Result<f64> {
    model.require_finite_lambda()?;
    Ok(lattice_weights(model, grid)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vk() -> TurbulenceModel {
        TurbulenceModel::von_karman(1e-14, 10.0, 0.0).unwrap()
    }

    #[test]
    fn kolmogorov_exponent() {
        let m = TurbulenceModel::kolmogorov(1e-14).unwrap();
        let r = m.psd_3d([2.0, 0.0, 0.0]).unwrap() / m.psd_3d([1.0, 0.0, 0.0]).unwrap();
        assert!((r - 2f64.powf(-11.0 / 3.0)).abs() < 1e-15);
        assert!((r - 0.078745).abs() < 1e-6);
        let rt = m.psd_transverse(&[2.0]).unwrap() / m.psd_transverse(&[1.0]).unwrap();
        assert!((rt - 2f64.powf(-11.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn kolmogorov_singular_at_origin() {
        let m = TurbulenceModel::kolmogorov(1e-14).unwrap();
        let e = m.psd_3d([0.0; 3]).unwrap_err();
        assert_eq!(e, Error::Domain("PSD singular at zero frequency".into()));
        assert!(m.psd_transverse(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn zero_cn2_is_zero() {
        let m = TurbulenceModel::von_karman(0.0, 5.0, 0.01).unwrap();
        assert_eq!(m.psd_3d([1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(m.lambda_total().unwrap(), 0.0);
        assert_eq!(m.lambda_total_1d().unwrap(), 0.0);
        let k = TurbulenceModel::kolmogorov(0.0).unwrap();
        assert_eq!(k.psd_3d([1.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn transverse_slice_is_definitional() {
        let m = TurbulenceModel::kolmogorov(3e-15).unwrap();
        for a in [0.1, 1.0, 7.5, 123.0] {
            let t = m.psd_transverse(&[a, -0.5 * a]).unwrap();
            let d = m.psd_3d([2.0 * PI * a, -PI * a, 0.0]).unwrap();
            assert_eq!(t / d, 1.0);
        }
    }

    #[test]
    fn von_karman_finite_at_origin() {
        let m = vk();
        let v = m.psd_transverse(&[0.0]).unwrap();
        let expect = KOLMOGOROV_PREFACTOR * 1e-14 * (2.0 * PI / 10.0f64).powf(-11.0 / 3.0);
        assert!((v / expect - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lambda_rejects_kolmogorov() {
        let m = TurbulenceModel::kolmogorov(1e-14).unwrap();
        assert_eq!(
            m.lambda_total().unwrap_err(),
            Error::Divergent("Λ divergent for pure Kolmogorov".into())
        );
    }

    #[test]
    fn lambda_matches_closed_form() {
        let m = vk();
        let kappa0 = 2.0 * PI / 10.0;
        let closed = 0.033 * (2.0 * PI).powi(2) * 0.6 * 1e-14 * kappa0.powf(-5.0 / 3.0);
        let q = m.lambda_total().unwrap();
        assert!((q / closed - 1.0).abs() < 1e-8, "{q} vs {closed}");
    }

    #[test]
    fn lambda_1d_matches_beta_function_form() {
        // ∫_{-∞}^{∞} (κ²+κ0²)^(-11/6) dκ = κ0^(-8/3) √π Γ(4/3)/Γ(11/6)
        use statrs::function::gamma::gamma;
        let m = TurbulenceModel::von_karman(2e-13, 0.3, 0.0).unwrap();
        let kappa0 = 2.0 * PI / 0.3;
        let line = kappa0.powf(-8.0 / 3.0) * PI.sqrt() * gamma(4.0 / 3.0) / gamma(11.0 / 6.0);
        let closed = KOLMOGOROV_PREFACTOR * 2e-13 * line / (2.0 * PI);
        let q = m.lambda_total_1d().unwrap();
        assert!((q / closed - 1.0).abs() < 1e-8, "{q} vs {closed}");
    }

    #[test]
    fn inner_scale_reduces_lambda() {
        let a = TurbulenceModel::von_karman(1e-14, 10.0, 0.0).unwrap();
        let b = TurbulenceModel::von_karman(1e-14, 10.0, 0.01).unwrap();
        assert!(b.lambda_total().unwrap() < a.lambda_total().unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TurbulenceModel::von_karman(-1.0, 10.0, 0.0).is_err());
        assert!(TurbulenceModel::von_karman(1e-14, 0.0, 0.0).is_err());
        assert!(TurbulenceModel::von_karman(1e-14, 10.0, -0.1).is_err());
    }
}
