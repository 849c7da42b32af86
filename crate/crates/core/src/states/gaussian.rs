use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, Spectrum};
use crate::moments::{h11_rhs, Medium, MomentKernel};
use crate::spectrum::{SpectrumKind, TurbulenceModel};

use super::{delta_matrix, hermiticity_residual, matrix_from_row_major, row_major};

/// Number of probe fields in the fourth-order residual.
pub const N_PROBES: usize = 16;
const PROBE_SEED: u64 = 0x1bfe_2024_0001;

/// W[α] = exp(−α*⋄A⋄α − α⋄B⋄α − α*⋄C⋄α* + α*⋄β + η*⋄α).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub grid: FrequencyGrid,
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
    pub c: DMatrix<Complex64>,
    pub beta: Spectrum,
    pub eta: Spectrum,
    pub z: f64,
}

impl GaussianState {
    /// Centred state with only the A kernel.
    pub fn from_a(grid: FrequencyGrid, a: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.sites();
        if a.shape() != (n, n) {
            return Err(Error::Shape(format!("A must be {n}x{n}, got {:?}", a.shape())));
        }
        let zero = DMatrix::zeros(n, n);
        Ok(GaussianState {
            grid,
            a,
            b: zero.clone(),
            c: zero,
            beta: Spectrum::zeros(grid),
            eta: Spectrum::zeros(grid),
            z: 0.0,
        })
    }

    /// A = 2δ: W = exp(−2‖α‖²).
    pub fn vacuum(grid: FrequencyGrid) -> Self {
        Self::from_a(grid, delta_matrix(&grid, 2.0)).expect("square by construction")
    }

    /// A = c·δ.
    pub fn thermal(grid: FrequencyGrid, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Domain(format!("thermal width must be > 0, got {c}")));
        }
        Self::from_a(grid, delta_matrix(&grid, c))
    }

    pub fn is_centred(&self) -> bool {
        let zero = |m: &DMatrix<Complex64>| m.iter().all(|v| *v == Complex64::new(0.0, 0.0));
        zero(&self.b)
            && zero(&self.c)
            && self.beta.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
            && self.eta.values.iter().all(|v| *v == Complex64::new(0.0, 0.0))
    }

    /// Evaluates W[α].
    pub fn evaluate(&self, alpha: &Spectrum) -> Result<Complex64> {
        self.grid.check_same(&alpha.grid)?;
        let w = self.grid.weight();
        let al = nalgebra::DVector::from_column_slice(&alpha.values);
        let alc = al.conjugate();
        let quad = |lhs: &nalgebra::DVector<Complex64>, k: &DMatrix<Complex64>, rhs: &nalgebra::DVector<Complex64>| {
            (lhs.transpose() * k * rhs)[(0, 0)] * (w * w)
        };
        let lin = |f: &[Complex64], g: &[Complex64]| -> Complex64 {
            f.iter().zip(g).map(|(x, y)| x * y).sum::<Complex64>() * w
        };
        let eta_c: Vec<Complex64> = self.eta.values.iter().map(|v| v.conj()).collect();
        let expo = -quad(&alc, &self.a, &al) - quad(&al, &self.b, &al) - quad(&alc, &self.c, &alc)
            + lin(alc.as_slice(), &self.beta.values)
            + lin(&eta_c, &alpha.values);
        Ok(expo.exp())
    }
}

fn phase(c: f64) -> Complex64 {
    if c == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, c)
    }
}

/// Free-space transport over distance `z` (closed form).
pub fn free_space_gaussian(s: &GaussianState, z: f64) -> GaussianState {
    let g = &s.grid;
    let n = g.sites();
    let c = PI * g.wavelength * z;
    let a2 = g.freq_sq_table();
    let mut out = s.clone();
    for i in 0..n {
        for j in 0..n {
            out.a[(i, j)] = s.a[(i, j)] * phase(c * (a2[i] - a2[j]));
            out.b[(i, j)] = s.b[(i, j)] * phase(-c * (a2[i] + a2[j]));
            out.c[(i, j)] = s.c[(i, j)] * phase(c * (a2[i] + a2[j]));
        }
        out.beta.values[i] = s.beta.values[i] * phase(c * a2[i]);
        out.eta.values[i] = s.eta.values[i] * phase(c * a2[i]);
    }
    out.z = s.z + z;
    out
}

/// β(z) = β0·exp(iπλz|a|² − k²Λz), η*(z) = η0*·exp(−iπλz|a|² − k²Λz).
/// For a pure Kolmogorov model Λ is infinite and both vanish for z > 0.
pub fn shift_decay(
    beta0: &Spectrum,
    eta0: &Spectrum,
    model: &TurbulenceModel,
    z: f64,
) -> Result<(Spectrum, Spectrum)> {
    beta0.grid.check_same(&eta0.grid)?;
    let g = beta0.grid;
    if z == 0.0 {
        return Ok((beta0.clone(), eta0.clone()));
    }
    if model.kind == SpectrumKind::Kolmogorov && model.cn2 > 0.0 {
        return Ok((Spectrum::zeros(g), Spectrum::zeros(g)));
    }
    let rate = if model.cn2 == 0.0 {
        0.0
    } else {
        Medium::new(model, g)?.scattering_rate()
    };
    let decay = (-rate * z).exp();
    let c = PI * g.wavelength * z;
    let apply = |s: &Spectrum| Spectrum {
        grid: g,
        values: s
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * phase(c * g.freq_sq(i)) * decay)
            .collect(),
    };
    Ok((apply(beta0), apply(eta0)))
}

/// Output of [`gaussian_drift`].
#[derive(Debug, Clone)]
pub struct DriftReport {
    /// ∂zA from the second-order equation.
    pub second_order_rhs: DMatrix<Complex64>,
    /// ‖scattering part of ∂zA‖ / (k²Λ‖A‖), Frobenius norms.
    pub second_order_residual: f64,
    /// Relative probe norm of the fourth-order bracket.
    pub fourth_order_residual: f64,
}

/// Fixed set of random unit-norm probe fields.
pub fn probe_fields(grid: &FrequencyGrid) -> Vec<Spectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..N_PROBES)
        .map(|_| {
            let values = (0..grid.sites())
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
                .collect();
            Spectrum { grid: *grid, values }
                .normalized()
                .expect("nonzero probe")
        })
        .collect()
}

/// Splits the Gaussian-ansatz equation for a centred state W = exp(−α*⋄A⋄α)
/// into its second-order and fourth-order parts.
///
/// The fourth-order bracket, contracted with a probe α, is
/// `Σ_o w(o)[P(o)P(−o) + Q(o)Q(−o) − 2Q(o)P(o)]` with
/// `P(s) = α*⋄A(·,·+s)⋄α` and `Q(s) = α*⋄A(·+s,·)⋄α`. The reported residual
/// is `‖r‖ / ‖|t1| + |t2| + 2|t3|‖` over the probe set.
pub fn gaussian_drift(s: &GaussianState, medium: &Medium) -> Result<DriftReport> {
    if !s.is_centred() {
        return Err(Error::Config(
            "gaussian_drift needs a centred state (B = C = β = η = 0)".into(),
        ));
    }
    s.grid.check_same(&medium.grid)?;
    let herm = hermiticity_residual(&s.a);
    if herm > 1e-10 {
        return Err(Error::Consistency(format!(
            "A must be Hermitian (residual {herm:e})"
        )));
    }
    let g = s.grid;
    let n = g.sites();
    let h = MomentKernel::from_values(1, 1, g, row_major(&s.a))?;
    let rhs = h11_rhs(&h, medium)?;
    let rhs_m = matrix_from_row_major(n, &rhs.values);

    let rate = medium.scattering_rate();
    let a_norm = s.a.norm();
    let second_order_residual = if rate == 0.0 || a_norm == 0.0 {
        0.0
    } else {
        let pl = PI * g.wavelength;
        let mut scat = 0.0;
        for i in 0..n {
            for j in 0..n {
                let drift = s.a[(i, j)] * Complex64::new(0.0, pl * (g.freq_sq(i) - g.freq_sq(j)));
                scat += (rhs_m[(i, j)] - drift).norm_sqr();
            }
        }
        scat.sqrt() / (rate * a_norm)
    };

    let w2 = g.weight() * g.weight();
    let mut num = 0.0;
    let mut den = 0.0;
    for probe in probe_fields(&g) {
        let al = &probe.values;
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        for sft in 0..n {
            let mut ps = Complex64::new(0.0, 0.0);
            let mut qs = Complex64::new(0.0, 0.0);
            for a1 in 0..n {
                let c1 = al[a1].conj();
                let a1s = g.shifted(a1, sft, 1);
                for a2 in 0..n {
                    ps += c1 * s.a[(a1, g.shifted(a2, sft, 1))] * al[a2];
                    qs += c1 * s.a[(a1s, a2)] * al[a2];
                }
            }
            p[sft] = ps * w2;
            q[sft] = qs * w2;
        }
        let (mut t1, mut t2, mut t3) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for (o, &w) in medium.weights.iter().enumerate() {
            let m = g.mirror(o);
            t1 += p[o] * p[m] * w;
            t2 += q[o] * q[m] * w;
            t3 += q[o] * p[o] * w;
        }
        num += (t1 + t2 - 2.0 * t3).norm_sqr();
        den += (t1.norm() + t2.norm() + 2.0 * t3.norm()).powi(2);
    }
    let fourth_order_residual = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
    Ok(DriftReport {
        second_order_rhs: rhs_m,
        second_order_residual,
        fourth_order_residual,
    })
}

/// Centred Gaussian characteristic functional χ[ξ] = exp(N − ξ*⋄Ã⋄ξ).
#[derive(Debug, Clone)]
pub struct CharacteristicGaussian {
    pub grid: FrequencyGrid,
    pub a_tilde: DMatrix<Complex64>,
    /// Natural log of the normalisation factor.
    pub log_norm: f64,
}

/// Transform of a centred Gaussian W = exp(−α*⋄A⋄α) under
/// χ[ξ] = ∫ W[α] exp(2ξ*⋄α − 2α*⋄ξ) dα.
///
/// With K = Δa^(2D)·A the Gaussian integral gives `Ã = 4·K^(−1)` and
/// log N = N_sites·ln π − ln det K. The factor 2 in the exponent makes the
/// map an involution on Ã with the vacuum as fixed point.
pub fn characteristic_of_gaussian(s: &GaussianState) -> Result<CharacteristicGaussian> {
    if !s.b.iter().chain(s.c.iter()).all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Err(Error::Config("characteristic transform needs B = C = 0".into()));
    }
    let g = s.grid;
    let n = g.sites();
    let w2 = g.weight() * g.weight();
    let k = &s.a * Complex64::new(w2, 0.0);
    let herm = hermiticity_residual(&k);
    if herm > 1e-10 {
        return Err(Error::Linalg(format!("A is not Hermitian (residual {herm:e})")));
    }
    // Complex Cholesky takes square roots of negative pivots without failing.
    let min_eig = k.clone().symmetric_eigenvalues().min();
    if !(min_eig > 0.0) {
        return Err(Error::Linalg(format!(
            "A is not positive definite (smallest eigenvalue {min_eig:e})"
        )));
    }
    let chol = nalgebra::Cholesky::new(k.clone()).ok_or_else(|| {
        Error::Linalg("A is not positive definite".into())
    })?;
    let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.re.ln()).sum();
    let inv = chol.inverse();
    let a_tilde = inv * Complex64::new(4.0, 0.0);
    Ok(CharacteristicGaussian {
        grid: g,
        a_tilde,
        log_norm: n as f64 * PI.ln() - log_det,
    })
}

impl CharacteristicGaussian {
    /// Reads the transformed kernel back as a centred Gaussian state.
    pub fn as_state(&self) -> GaussianState {
        GaussianState::from_a(self.grid, self.a_tilde.clone()).expect("square by construction")
    }
}
