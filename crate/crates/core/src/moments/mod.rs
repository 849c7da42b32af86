//! Moment kernels H_{m,n} and their evolution equations.
//!
//! A kernel of order (m, n) is stored as a dense rank-(m+n) tensor over
//! lattice sites, row-major, with the m "α*" indices first and the n "α"
//! indices after them. The equations, for every order,
//!
//! ```text
//! ∂z H = iπλ(Σ_p |a_p|² − Σ_q |a′_q|²) H − ½k²Λ(m+n) H
//!        − k² Σ_{p<p′} Σ_o w(o) H(.., a_p+o, .., a_p′−o, ..)
//!        − k² Σ_{q<q′} Σ_o w(o) H(.., a′_q+o, .., a′_q′−o, ..)
//!        + k² Σ_{p,q}   Σ_o w(o) H(.., a_p+o, .., a′_q+o, ..)
//! ```
//!
//! with `w(o) = Φ_n(a_o,0)·Δa^D` and Λ = Σ_o w(o) on the lattice. Index
//! shifts wrap periodically, which makes the diagonal-uniform kernel an
//! exact stationary point and the trace an exact invariant.

pub mod reference;
mod shift;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{FrequencyGrid, Spectrum};
use crate::spectrum::{lattice_weights, TurbulenceModel};

pub use shift::{pair_shift_naive, ShiftEngine};

/// Largest total order accepted by [`hierarchy_rhs`].
pub const MAX_HIERARCHY_RANK: usize = 4;
/// Largest axis length accepted by [`biphoton_rhs`].
pub const MAX_BIPHOTON_N: usize = 16;
/// Per-step bound on max(πλ·dz·|a|²_max, k²Λ·dz) for the RK4 integrator.
pub const MAX_STEP_PHASE: f64 = 0.1;
/// Boundary-mass fraction above which a warning is logged.
pub const BOUNDARY_MASS_WARN: f64 = 1e-6;

/// Propagation medium on a lattice: wavelength, diffusion weights and Λ.
#[derive(Debug, Clone)]
pub struct Medium {
    pub grid: FrequencyGrid,
    pub model: TurbulenceModel,
    /// w(o) = Φ_n(a_o,0)·Δa^D per offset site (centred layout).
    pub weights: Vec<f64>,
    /// Lattice Λ = Σ w.
    pub lambda: f64,
    engine: ShiftEngine,
}

impl Medium {
    pub fn new(model: &TurbulenceModel, grid: FrequencyGrid) -> Result<Self> {
        grid.validate()?;
        model.validate()?;
        model.require_finite_lambda()?;
        if model.outer_scale.is_finite() && model.outer_scale < 1.0 / (grid.n as f64 * grid.delta_a) {
            log::warn!(
                "outer scale {} m is below 1/(n·delta_a); Φ_n is not resolved by the lattice",
                model.outer_scale
            );
        }
        let weights = lattice_weights(model, &grid)?;
        let lambda = weights.iter().sum();
        let engine = ShiftEngine::new(grid, &weights);
        Ok(Medium {
            grid,
            model: *model,
            weights,
            lambda,
            engine,
        })
    }

    pub fn wavenumber(&self) -> f64 {
        self.grid.wavenumber()
    }

    /// k²Λ, the scintillation rate, 1/m.
    pub fn scattering_rate(&self) -> f64 {
        let k = self.wavenumber();
        k * k * self.lambda
    }

    pub fn engine(&self) -> &ShiftEngine {
        &self.engine
    }

    /// max(πλ·dz·|a|²_max, k²Λ·dz).
    pub fn step_phase(&self, dz: f64) -> f64 {
        let diff = PI * self.grid.wavelength * dz.abs() * self.grid.max_freq_sq();
        diff.max(self.scattering_rate() * dz.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentKernel {
    /// Number of α* indices.
    pub m: usize,
    /// Number of α indices.
    pub n: usize,
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
    /// Propagation distance, m.
    pub z: f64,
}

impl MomentKernel {
    pub fn zeros(m: usize, n: usize, grid: FrequencyGrid) -> Self {
        let len = grid.sites().pow((m + n) as u32);
        MomentKernel {
            m,
            n,
            grid,
            values: vec![Complex64::new(0.0, 0.0); len],
            z: 0.0,
        }
    }

    pub fn from_values(m: usize, n: usize, grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        let len = grid.sites().pow((m + n) as u32);
        if values.len() != len {
            return Err(Error::Shape(format!(
                "order ({m},{n}) kernel needs {len} values, got {}",
                values.len()
            )));
        }
        Ok(MomentKernel {
            m,
            n,
            grid,
            values,
            z: 0.0,
        })
    }

    pub fn rank(&self) -> usize {
        self.m + self.n
    }

    pub fn sites(&self) -> usize {
        self.grid.sites()
    }

    /// Order (1,0) kernel from a spectrum.
    pub fn from_spectrum(s: &Spectrum) -> Self {
        MomentKernel {
            m: 1,
            n: 0,
            grid: s.grid,
            values: s.values.clone(),
            z: 0.0,
        }
    }

    /// H(a, a′) = G(a)·G*(a′).
    pub fn outer(g: &Spectrum) -> Self {
        let n = g.grid.sites();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(g.values[i] * g.values[j].conj());
            }
        }
        MomentKernel {
            m: 1,
            n: 1,
            grid: g.grid,
            values,
            z: 0.0,
        }
    }

    /// H(a, a′) = c·δ(a − a′), i.e. `c/Δa^D` on the diagonal.
    pub fn delta_diagonal(grid: FrequencyGrid, c: f64) -> Self {
        let n = grid.sites();
        let mut k = Self::zeros(1, 1, grid);
        let d = Complex64::new(c * grid.delta_weight(), 0.0);
        for i in 0..n {
            k.values[i * n + i] = d;
        }
        k
    }

    /// Order (2,2) product F = H⊗H, F(a1,a2,a3,a4) = H(a1,a2)·H(a3,a4),
    /// stored with α* indices (a1, a3) first.
    pub fn product_pair(h: &MomentKernel) -> Result<Self> {
        if (h.m, h.n) != (1, 1) {
            return Err(Error::Shape("product_pair needs an order (1,1) kernel".into()));
        }
        let n = h.sites();
        let mut f = Self::zeros(2, 2, h.grid);
        for a1 in 0..n {
            for a3 in 0..n {
                for a2 in 0..n {
                    for a4 in 0..n {
                        f.values[((a1 * n + a3) * n + a2) * n + a4] =
                            h.values[a1 * n + a2] * h.values[a3 * n + a4];
                    }
                }
            }
        }
        Ok(f)
    }

    fn check_like(&self, other: &MomentKernel) -> Result<()> {
        self.grid.check_same(&other.grid)?;
        if (self.m, self.n) != (other.m, other.n) {
            return Err(Error::Shape(format!(
                "kernel order mismatch: ({},{}) vs ({},{})",
                self.m, self.n, other.m, other.n
            )));
        }
        Ok(())
    }

    /// self + c·other.
    pub fn axpy(&self, c: Complex64, other: &MomentKernel) -> Result<Self> {
        self.check_like(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Ok(MomentKernel { values, ..self.clone() })
    }

    /// H_{n,m}: swap the index groups and conjugate.
    pub fn conj_transpose(&self) -> Self {
        let sites = self.sites();
        let left = sites.pow(self.m as u32);
        let right = sites.pow(self.n as u32);
        let mut values = vec![Complex64::new(0.0, 0.0); self.values.len()];
        for i in 0..left {
            for j in 0..right {
                values[j * left + i] = self.values[i * right + j].conj();
            }
        }
        MomentKernel {
            m: self.n,
            n: self.m,
            grid: self.grid,
            values,
            z: self.z,
        }
    }

    /// max |H − H^†| / max |H| (zero for a zero kernel).
    pub fn hermiticity_residual(&self) -> Result<f64> {
        if self.m != self.n {
            return Err(Error::Shape(format!(
                "hermiticity needs m = n, got ({},{})",
                self.m, self.n
            )));
        }
        let ct = self.conj_transpose();
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(0.0);
        }
        let d = self
            .values
            .iter()
            .zip(&ct.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        Ok(d / scale)
    }

    /// Permutation-symmetry residual within each index group.
    pub fn symmetry_residual(&self) -> f64 {
        let sites = self.sites();
        let rank = self.rank();
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        let mut idx = vec![0usize; rank];
        for (flat, v) in self.values.iter().enumerate() {
            let mut k = flat;
            for ax in (0..rank).rev() {
                idx[ax] = k % sites;
                k /= sites;
            }
            for (lo, hi) in [(0, self.m), (self.m, rank)] {
                for a in lo..hi {
                    for b in a + 1..hi {
                        let mut sw = idx.clone();
                        sw.swap(a, b);
                        let j = sw.iter().fold(0, |acc, &x| acc * sites + x);
                        worst = worst.max((v - self.values[j]).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// Fraction of the diagonal weight on sites within the outer eighth of
    /// any axis (periodic-wrap monitor). For m ≠ n there is no diagonal and
    /// the fraction of Σ|H|² with any index in that band is used instead.
    pub fn boundary_mass(&self) -> Result<f64> {
        let sites = self.sites();
        let n = self.grid.n;
        let band = (n / 8).max(1);
        let in_band = |s: usize| {
            let [i, j] = self.grid.axis_indices(s);
            let edge = |x: usize| x < band || x >= n - band;
            edge(i) || (self.grid.dim == 2 && edge(j))
        };
        if self.m != self.n {
            let rank = self.rank();
            let (mut edge, mut total) = (0.0, 0.0);
            for (flat, v) in self.values.iter().enumerate() {
                let p = v.norm_sqr();
                total += p;
                let mut k = flat;
                if (0..rank).any(|_| {
                    let s = k % sites;
                    k /= sites;
                    in_band(s)
                }) {
                    edge += p;
                }
            }
            return Ok(if total == 0.0 { 0.0 } else { edge / total });
        }
        let trace = kernel_trace(self)?;
        let w = self.grid.weight().powi(self.m as i32);
        let mut edge = 0.0;
        let mut idx = vec![0usize; self.m];
        for flat in 0..sites.pow(self.m as u32) {
            let mut k = flat;
            for ax in (0..self.m).rev() {
                idx[ax] = k % sites;
                k /= sites;
            }
            if idx.iter().any(|&s| in_band(s)) {
                edge += self.values[flat * sites.pow(self.m as u32) + flat].norm();
            }
        }
        let total = trace.abs();
        if total == 0.0 {
            return Ok(0.0);
        }
        Ok(edge * w / total)
    }
}

/// Full diagonal contraction Σ H(A; A)·Δa^(D·n) for an (n,n) kernel.
pub fn kernel_trace(h: &MomentKernel) -> Result<f64> {
    Ok(kernel_trace_complex(h)?.re)
}

/// Complex-valued trace (imaginary part is zero for Hermitian input).
pub fn kernel_trace_complex(h: &MomentKernel) -> Result<Complex64> {
    if h.m != h.n {
        return Err(Error::Shape(format!(
            "trace needs m = n, got ({},{})",
            h.m, h.n
        )));
    }
    let block = h.sites().pow(h.m as u32);
    let s: Complex64 = (0..block).map(|i| h.values[i * block + i]).sum();
    Ok(s * h.grid.weight().powi(h.m as i32))
}

/// Closed-form H_{1,0}(a,z) = B(a)·exp(iπλz|a|² − k²Λz/2).
pub fn evolve_h10(b10: &Spectrum, medium: &Medium, z: f64) -> Result<Spectrum> {
    b10.grid.check_same(&medium.grid)?;
    let decay = (-0.5 * medium.scattering_rate() * z).exp();
    let c = PI * medium.grid.wavelength * z;
    let values = b10
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let a2 = medium.grid.freq_sq(i);
            let ph = if a2 == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::from_polar(1.0, c * a2)
            };
            v * ph * decay
        })
        .collect();
    Ok(Spectrum {
        grid: b10.grid,
        values,
    })
}

/// Drift and decay part: iπλ(Σ|a_p|² − Σ|a′_q|²)H − ½k²Λ(m+n)H.
fn local_terms(h: &MomentKernel, medium: &Medium) -> Vec<Complex64> {
    let sites = h.sites();
    let rank = h.rank();
    let a2 = medium.grid.freq_sq_table();
    let pl = PI * medium.grid.wavelength;
    let decay = -0.5 * medium.scattering_rate() * rank as f64;
    let mut idx = vec![0usize; rank];
    h.values
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            let mut k = flat;
            for ax in (0..rank).rev() {
                idx[ax] = k % sites;
                k /= sites;
            }
            let mut drift = 0.0;
            for (ax, &s) in idx.iter().enumerate() {
                if ax < h.m {
                    drift += a2[s];
                } else {
                    drift -= a2[s];
                }
            }
            v * Complex64::new(decay, pl * drift)
        })
        .collect()
}

fn add_scaled(acc: &mut [Complex64], term: &[Complex64], c: f64) {
    for (a, t) in acc.iter_mut().zip(term) {
        *a += t * c;
    }
}

/// RHS of the order-(m,n) kernel equation, any rank, D = 1 or 2.
fn kernel_rhs(h: &MomentKernel, medium: &Medium, exec: Execution) -> Result<MomentKernel> {
    h.grid.check_same(&medium.grid)?;
    let rank = h.rank();
    let k2 = medium.wavenumber().powi(2);
    let mut out = local_terms(h, medium);
    if medium.lambda != 0.0 {
        let eng = medium.engine();
        for p in 0..h.m {
            for q in p + 1..h.m {
                let s = eng.pair_shift(&h.values, rank, (p, 1), (q, -1), exec);
                add_scaled(&mut out, &s, -k2);
            }
        }
        for p in h.m..rank {
            for q in p + 1..rank {
                let s = eng.pair_shift(&h.values, rank, (p, 1), (q, -1), exec);
                add_scaled(&mut out, &s, -k2);
            }
        }
        for p in 0..h.m {
            for q in h.m..rank {
                let s = eng.pair_shift(&h.values, rank, (p, 1), (q, 1), exec);
                add_scaled(&mut out, &s, k2);
            }
        }
    }
    Ok(MomentKernel {
        values: out,
        ..h.clone()
    })
}

/// RHS of the single-photon (1,1) equation:
/// `iπλ(|a|²−|a′|²)H − k²ΛH + k²Σ_o w(o)H(a+o, a′+o)`.
pub fn h11_rhs(h: &MomentKernel, medium: &Medium) -> Result<MomentKernel> {
    h11_rhs_with(h, medium, Execution::default())
}

pub fn h11_rhs_with(h: &MomentKernel, medium: &Medium, exec: Execution) -> Result<MomentKernel> {
    if (h.m, h.n) != (1, 1) {
        return Err(Error::Shape(format!(
            "h11_rhs needs an order (1,1) kernel, got ({},{})",
            h.m, h.n
        )));
    }
    kernel_rhs(h, medium, exec)
}

/// RHS of the general order-(m,n) equation. Limited to m+n ≤ 4, and to
/// D = 1 above rank 2.
pub fn hierarchy_rhs(h: &MomentKernel, medium: &Medium) -> Result<MomentKernel> {
    hierarchy_rhs_with(h, medium, Execution::default())
}

pub fn hierarchy_rhs_with(h: &MomentKernel, medium: &Medium, exec: Execution) -> Result<MomentKernel> {
    if h.rank() > MAX_HIERARCHY_RANK {
        return Err(Error::Config(format!(
            "order bound exceeded: m+n = {} > {MAX_HIERARCHY_RANK}",
            h.rank()
        )));
    }
    if h.rank() > 2 && h.grid.dim != 1 {
        return Err(Error::Config(
            "order bound exceeded: kernels above rank 2 are limited to D = 1 grids".into(),
        ));
    }
    kernel_rhs(h, medium, exec)
}

/// RHS of the bi-photon equation, with F(a1,a2,a3,a4) read from an order
/// (2,2) kernel stored as [a1, a3 | a2, a4]:
///
/// ```text
/// ∂z F = iπλ(|a1|²−|a2|²+|a3|²−|a4|²)F
///        − k² Σ_u w(u)[2F − F(a1−u,a2−u,·,·) − F(·,·,a3−u,a4−u)
///                       − F(a1−u,·,·,a4−u) − F(·,a2−u,a3−u,·)
///                       + F(a1−u,·,a3+u,·) + F(·,a2−u,·,a4+u)]
/// ```
pub fn biphoton_rhs(f: &MomentKernel, medium: &Medium) -> Result<MomentKernel> {
    biphoton_rhs_with(f, medium, Execution::default())
}

pub fn biphoton_rhs_with(f: &MomentKernel, medium: &Medium, exec: Execution) -> Result<MomentKernel> {
    if (f.m, f.n) != (2, 2) {
        return Err(Error::Shape(format!(
            "biphoton_rhs needs an order (2,2) kernel, got ({},{})",
            f.m, f.n
        )));
    }
    if f.grid.dim != 1 || f.grid.n > MAX_BIPHOTON_N {
        return Err(Error::Config(format!(
            "bi-photon kernels are limited to D = 1 and n <= {MAX_BIPHOTON_N} (got D = {}, n = {})",
            f.grid.dim, f.grid.n
        )));
    }
    f.grid.check_same(&medium.grid)?;
    let n = f.sites();
    // Storage axis of each printed argument: a1→0, a3→1, a2→2, a4→3.
    const AXIS: [usize; 5] = [usize::MAX, 0, 2, 1, 3];
    let a2 = medium.grid.freq_sq_table();
    let pl = PI * medium.grid.wavelength;
    let k2 = medium.wavenumber().powi(2);
    let mut out: Vec<Complex64> = Vec::with_capacity(f.values.len());
    for a1 in 0..n {
        for a3 in 0..n {
            for b2 in 0..n {
                for b4 in 0..n {
                    let v = f.values[((a1 * n + a3) * n + b2) * n + b4];
                    let drift = a2[a1] - a2[b2] + a2[a3] - a2[b4];
                    out.push(v * Complex64::new(-2.0 * k2 * medium.lambda, pl * drift));
                }
            }
        }
    }
    if medium.lambda != 0.0 {
        let eng = medium.engine();
        // (printed argument pair, signs, weight inside the bracket)
        let terms: [((usize, i8), (usize, i8), f64); 6] = [
            ((1, -1), (2, -1), -1.0),
            ((3, -1), (4, -1), -1.0),
            ((1, -1), (4, -1), -1.0),
            ((2, -1), (3, -1), -1.0),
            ((1, -1), (3, 1), 1.0),
            ((2, -1), (4, 1), 1.0),
        ];
        for ((p, sp), (q, sq), c) in terms {
            let s = eng.pair_shift(&f.values, 4, (AXIS[p], sp), (AXIS[q], sq), exec);
            add_scaled(&mut out, &s, -k2 * c);
        }
    }
    Ok(MomentKernel {
        values: out,
        ..f.clone()
    })
}

/// Fixed-step classic RK4 for a linear kernel equation.
pub fn rk4<F>(h0: &MomentKernel, z_total: f64, n_steps: usize, rhs: F) -> Result<MomentKernel>
where
    F: Fn(&MomentKernel) -> Result<MomentKernel>,
{
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be >= 1".into()));
    }
    let dz = z_total / n_steps as f64;
    let half = Complex64::new(0.5 * dz, 0.0);
    let full = Complex64::new(dz, 0.0);
    let sixth = dz / 6.0;
    let mut h = h0.clone();
    for _ in 0..n_steps {
        let k1 = rhs(&h)?;
        let k2 = rhs(&h.axpy(half, &k1)?)?;
        let k3 = rhs(&h.axpy(half, &k2)?)?;
        let k4 = rhs(&h.axpy(full, &k3)?)?;
        for i in 0..h.values.len() {
            h.values[i] += (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]) * sixth;
        }
        h.z += dz;
    }
    Ok(h)
}

fn check_step_guard(medium: &Medium, z_total: f64, n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(Error::Config("n_steps must be >= 1".into()));
    }
    let dz = z_total / n_steps as f64;
    let g = medium.step_phase(dz);
    if g >= MAX_STEP_PHASE {
        return Err(Error::Config(format!(
            "step guard violated: max(π·λ·dz·|a|²_max, k²·Λ·dz) = {g:.4} must be < {MAX_STEP_PHASE} (dz = {dz} m)"
        )));
    }
    Ok(())
}

/// Smallest step count satisfying the RK4 step guard over `z_total`.
pub fn min_steps(medium: &Medium, z_total: f64) -> usize {
    let per_meter = medium.step_phase(1.0);
    ((per_meter * z_total.abs() / (0.5 * MAX_STEP_PHASE)).ceil() as usize).max(1)
}

fn warn_boundary(h: &MomentKernel) {
    if let Ok(b) = h.boundary_mass() {
        if b > BOUNDARY_MASS_WARN {
            log::warn!("kernel boundary mass {b:e} exceeds {BOUNDARY_MASS_WARN:e}");
        }
    }
}

/// Integrates the (1,1) equation with RK4 over `z_total` in `n_steps` steps.
pub fn evolve_h11(h0: &MomentKernel, medium: &Medium, z_total: f64, n_steps: usize) -> Result<MomentKernel> {
    evolve_h11_with(h0, medium, z_total, n_steps, Execution::default())
}

pub fn evolve_h11_with(
    h0: &MomentKernel,
    medium: &Medium,
    z_total: f64,
    n_steps: usize,
    exec: Execution,
) -> Result<MomentKernel> {
    if (h0.m, h0.n) != (1, 1) {
        return Err(Error::Shape("evolve_h11 needs an order (1,1) kernel".into()));
    }
    check_step_guard(medium, z_total, n_steps)?;
    let out = rk4(h0, z_total, n_steps, |h| h11_rhs_with(h, medium, exec))?;
    warn_boundary(&out);
    Ok(out)
}

/// Integrates the bi-photon equation with RK4.
pub fn evolve_biphoton(f0: &MomentKernel, medium: &Medium, z_total: f64, n_steps: usize) -> Result<MomentKernel> {
    check_step_guard(medium, z_total, n_steps)?;
    biphoton_rhs(f0, medium)?;
    let out = rk4(f0, z_total, n_steps, |f| biphoton_rhs(f, medium))?;
    warn_boundary(&out);
    Ok(out)
}

/// Integrates the general order-(m,n) equation with RK4.
pub fn evolve_kernel(h0: &MomentKernel, medium: &Medium, z_total: f64, n_steps: usize) -> Result<MomentKernel> {
    check_step_guard(medium, z_total, n_steps)?;
    hierarchy_rhs(h0, medium)?;
    let out = rk4(h0, z_total, n_steps, |h| hierarchy_rhs(h, medium))?;
    warn_boundary(&out);
    Ok(out)
}

/// Per-snapshot kernel diagnostics; trace and hermiticity are NaN when m ≠ n.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDiagnostics {
    pub z: f64,
    pub trace: f64,
    pub hermiticity_residual: f64,
    pub boundary_mass: f64,
}

pub fn diagnostics(h: &MomentKernel) -> Result<KernelDiagnostics> {
    Ok(KernelDiagnostics {
        z: h.z,
        trace: if h.m == h.n { kernel_trace(h)? } else { f64::NAN },
        hermiticity_residual: if h.m == h.n { h.hermiticity_residual()? } else { f64::NAN },
        boundary_mass: h.boundary_mass()?,
    })
}

/// Evolves `h0` and records the kernel at each requested distance
/// (ascending). `max_dz` bounds the step size; each segment uses the
/// smallest uniform step count within that bound.
pub fn evolve_snapshots(
    h0: &MomentKernel,
    medium: &Medium,
    z_points: &[f64],
    max_dz: f64,
) -> Result<Vec<MomentKernel>> {
    if !(max_dz > 0.0) {
        return Err(Error::Config(format!("max_dz must be > 0, got {max_dz}")));
    }
    let mut out = Vec::with_capacity(z_points.len());
    let mut h = h0.clone();
    for &z in z_points {
        if z < h.z {
            return Err(Error::Config(format!(
                "snapshot distances must be ascending: {z} after {}",
                h.z
            )));
        }
        let seg = z - h.z;
        if seg > 0.0 {
            let steps = ((seg / max_dz).ceil() as usize).max(1);
            let start = h.z;
            h = if (h.m, h.n) == (1, 1) {
                evolve_h11(&h, medium, seg, steps)?
            } else {
                evolve_kernel(&h, medium, seg, steps)?
            };
            h.z = start + seg;
        }
        out.push(h.clone());
    }
    Ok(out)
}
