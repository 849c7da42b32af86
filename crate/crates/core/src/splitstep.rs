//! Classical split-step propagation of angular spectra through random
//! phase screens, and Monte-Carlo ensemble moments.
//!
//! Each slab is a Strang step: half a free-space step, the slab screen
//! `exp(−iφ(x))` applied in the position domain, then the other half.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{contract, FrequencyGrid, Fourier, Spectrum};
use crate::phase_screen::{
    check_outer_scale, pairwise_reduce, phase_screen_position_with, ScreenGenerator,
    ScreenRealization,
};
use crate::rng;
use crate::spectrum::{lattice_lambda, TurbulenceModel};

/// Per-slab diffraction phase bound πλ·dz·|a|²_max.
pub const MAX_SLAB_DIFFRACTION_PHASE: f64 = PI / 4.0;
/// Per-slab scattering bound k²Λ·dz.
pub const MAX_SLAB_SCATTERING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub grid: FrequencyGrid,
    pub model: TurbulenceModel,
    pub z_total: f64,
    pub n_slabs: usize,
    pub n_realizations: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanGuards {
    pub slab_thickness: f64,
    pub diffraction_phase: f64,
    pub scattering: f64,
    pub lattice_lambda: f64,
}

impl PropagationPlan {
    pub fn slab_thickness(&self) -> f64 {
        self.z_total / self.n_slabs as f64
    }

    pub fn guards(&self) -> Result<PlanGuards> {
        let dz = self.slab_thickness();
        let lambda = lattice_lambda(&self.model, &self.grid)?;
        let k = self.grid.wavenumber();
        Ok(PlanGuards {
            slab_thickness: dz,
            diffraction_phase: PI * self.grid.wavelength * dz * self.grid.max_freq_sq(),
            scattering: k * k * lambda * dz,
            lattice_lambda: lambda,
        })
    }

    /// Checks the plan invariants; the error lists every violated bound.
    pub fn validate(&self) -> Result<PlanGuards> {
        self.grid.validate()?;
        self.model.validate()?;
        if self.n_slabs < 1 {
            return Err(Error::Config("n_slabs must be >= 1".into()));
        }
        if !(self.z_total >= 0.0 && self.z_total.is_finite()) {
            return Err(Error::Config(format!("z_total must be >= 0, got {}", self.z_total)));
        }
        let g = self.guards()?;
        let mut violated = Vec::new();
        if g.diffraction_phase >= MAX_SLAB_DIFFRACTION_PHASE {
            violated.push(format!(
                "π·λ·dz·|a|²_max = {:.4} must be < π/4",
                g.diffraction_phase
            ));
        }
        if g.scattering >= MAX_SLAB_SCATTERING {
            violated.push(format!("k²·Λ·dz = {:.4} must be < 0.1", g.scattering));
        }
        if !violated.is_empty() {
            return Err(Error::Config(format!("plan guard violated: {}", violated.join("; "))));
        }
        check_outer_scale(&self.model, &self.grid);
        Ok(g)
    }
}

/// Multiplies by exp(iπλ·dz·|a|²).
pub fn free_space_step(s: &Spectrum, dz: f64) -> Spectrum {
    let mut out = s.clone();
    free_space_inplace(&mut out, dz);
    out
}

fn free_space_inplace(s: &mut Spectrum, dz: f64) {
    let c = PI * s.grid.wavelength * dz;
    for (i, v) in s.values.iter_mut().enumerate() {
        let a2 = s.grid.freq_sq(i);
        if a2 != 0.0 {
            *v *= Complex64::from_polar(1.0, c * a2);
        }
    }
}

/// Applies one slab: g(x) ← g(x)·exp(−iφ(x)).
pub fn apply_screen(s: &Spectrum, screen: &ScreenRealization) -> Result<Spectrum> {
    apply_screen_with(&Fourier::new(s.grid), s, screen)
}

pub fn apply_screen_with(fourier: &Fourier, s: &Spectrum, screen: &ScreenRealization) -> Result<Spectrum> {
    s.grid.check_same(&screen.grid)?;
    let phi = phase_screen_position_with(fourier, screen, s.grid.wavenumber())?;
    let mut buf = s.values.clone();
    fourier.frequency_to_position_inplace(&mut buf);
    for (v, p) in buf.iter_mut().zip(&phi) {
        *v *= Complex64::from_polar(1.0, -p);
    }
    fourier.position_to_frequency_inplace(&mut buf);
    Ok(Spectrum {
        grid: s.grid,
        values: buf,
    })
}

/// Strang propagation over `z_total` through the given slab screens (one
/// per slab, equal thickness).
pub fn propagate_with_screens(
    s0: &Spectrum,
    z_total: f64,
    screens: &[ScreenRealization],
) -> Result<Spectrum> {
    if screens.is_empty() {
        return Err(Error::Config("at least one slab screen is required".into()));
    }
    let fourier = Fourier::new(s0.grid);
    let dz = z_total / screens.len() as f64;
    let mut s = s0.clone();
    for scr in screens {
        free_space_inplace(&mut s, 0.5 * dz);
        s = apply_screen_with(&fourier, &s, scr)?;
        free_space_inplace(&mut s, 0.5 * dz);
    }
    Ok(s)
}

/// Reusable propagation state for one plan.
pub struct Propagator {
    plan: PropagationPlan,
    fourier: Fourier,
    generator: Option<ScreenGenerator>,
}

impl Propagator {
    pub fn new(plan: PropagationPlan) -> Result<Self> {
        plan.validate()?;
        let generator = if plan.model.cn2 == 0.0 || plan.z_total == 0.0 {
            None
        } else {
            Some(ScreenGenerator::new(&plan.model, plan.grid)?)
        };
        Ok(Propagator {
            plan,
            fourier: Fourier::new(plan.grid),
            generator,
        })
    }

    pub fn plan(&self) -> &PropagationPlan {
        &self.plan
    }

    /// Propagates one realization; deterministic in (master_seed, index).
    pub fn propagate(&self, s0: &Spectrum, realization: u64) -> Result<Spectrum> {
        self.plan.grid.check_same(&s0.grid)?;
        let Some(gen) = &self.generator else {
            return Ok(free_space_step(s0, self.plan.z_total));
        };
        let dz = self.plan.slab_thickness();
        let mut s = s0.clone();
        for slab in 0..self.plan.n_slabs {
            let seed = rng::derive_seed(self.plan.master_seed, realization, slab as u64);
            let scr = gen.draw(dz, seed)?;
            free_space_inplace(&mut s, 0.5 * dz);
            s = apply_screen_with(&self.fourier, &s, &scr)?;
            free_space_inplace(&mut s, 0.5 * dz);
        }
        Ok(s)
    }
}

pub fn propagate(s0: &Spectrum, plan: &PropagationPlan, realization: u64) -> Result<Spectrum> {
    Propagator::new(*plan)?.propagate(s0, realization)
}

/// Monte-Carlo moments of the output spectrum. Dense matrices are stored
/// row-major over sites: entry `[i * sites + j]` pairs a_i with a_j.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub grid: FrequencyGrid,
    pub n_samples: usize,
    /// ⟨G(a)⟩.
    pub mean_field: Spectrum,
    /// Standard error of ⟨G(a)⟩ (complex: sqrt(E|G − ⟨G⟩|²/N)).
    pub mean_field_se: Vec<f64>,
    /// ⟨G(a)G*(a′)⟩.
    pub coherence: Vec<Complex64>,
    pub coherence_se_re: Vec<f64>,
    pub coherence_se_im: Vec<f64>,
    /// ⟨G(a)G(a′)⟩.
    pub pair: Vec<Complex64>,
    /// Free-space output used for the coherent projection.
    pub free_space: Spectrum,
    /// Mean of ⟨G_fs, G⟩/‖G_fs‖² over realizations, and its standard error.
    pub coherent_fraction: Complex64,
    pub coherent_fraction_se: f64,
    /// Largest relative change of ‖G‖² over any realization.
    pub max_norm_drift: f64,
}

struct Partial {
    s1: Vec<Complex64>,
    s1sq: Vec<f64>,
    c1: Vec<Complex64>,
    c_re2: Vec<f64>,
    c_im2: Vec<f64>,
    p1: Vec<Complex64>,
    f1: Complex64,
    f2: f64,
    drift: f64,
}

impl Partial {
    fn new(sites: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Partial {
            s1: vec![z; sites],
            s1sq: vec![0.0; sites],
            c1: vec![z; sites * sites],
            c_re2: vec![0.0; sites * sites],
            c_im2: vec![0.0; sites * sites],
            p1: vec![z; sites * sites],
            f1: z,
            f2: 0.0,
            drift: 0.0,
        }
    }

    fn merge(mut self, o: Partial) -> Partial {
        fn add<T: Copy + std::ops::AddAssign>(a: &mut [T], b: &[T]) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
        add(&mut self.s1, &o.s1);
        add(&mut self.s1sq, &o.s1sq);
        add(&mut self.c1, &o.c1);
        add(&mut self.c_re2, &o.c_re2);
        add(&mut self.c_im2, &o.c_im2);
        add(&mut self.p1, &o.p1);
        self.f1 += o.f1;
        self.f2 += o.f2;
        self.drift = self.drift.max(o.drift);
        self
    }
}

fn block_size(n: usize) -> usize {
    n.div_ceil(32).max(8)
}

/// Ensemble moments over `plan.n_realizations` independent realizations.
///
/// Realizations are grouped in fixed blocks; each block is accumulated in
/// index order and the block partials are reduced pairwise in index order,
/// so the result is bit-identical for any execution strategy.
pub fn ensemble_moments(s0: &Spectrum, plan: &PropagationPlan, exec: Execution) -> Result<EnsembleStats> {
    if plan.n_realizations < 2 {
        return Err(Error::Config(format!(
            "n_realizations must be >= 2, got {}",
            plan.n_realizations
        )));
    }
    let prop = Propagator::new(*plan)?;
    let grid = plan.grid;
    let sites = grid.sites();
    let fs = free_space_step(s0, plan.z_total);
    let fs_norm = fs.norm_sq();
    let fs_conj = fs.conj();
    let norm0 = s0.norm_sq();
    let fv = &fs.values;

    let n = plan.n_realizations;
    let bs = block_size(n);
    let n_blocks = n.div_ceil(bs);
    let partials: Vec<Result<Partial>> = exec.map(n_blocks, |b| {
        let mut p = Partial::new(sites);
        for r in b * bs..((b + 1) * bs).min(n) {
            let g = prop.propagate(s0, r as u64)?;
            let v = &g.values;
            if norm0 > 0.0 {
                p.drift = p.drift.max((g.norm_sq() / norm0 - 1.0).abs());
            }
            // Sums of deviations from the free-space values keep the
            // variance estimates free of cancellation.
            for i in 0..sites {
                let d = v[i] - fv[i];
                p.s1[i] += d;
                p.s1sq[i] += d.norm_sqr();
                let row = i * sites;
                for j in i..sites {
                    let x = v[i] * v[j].conj() - fv[i] * fv[j].conj();
                    p.c1[row + j] += x;
                    p.c_re2[row + j] += x.re * x.re;
                    p.c_im2[row + j] += x.im * x.im;
                    p.p1[row + j] += v[i] * v[j];
                }
            }
            if fs_norm > 0.0 {
                let f = contract(&fs_conj, &g)? / fs_norm - 1.0;
                p.f1 += f;
                p.f2 += f.norm_sqr();
            }
        }
        Ok(p)
    });
    let partials = partials.into_iter().collect::<Result<Vec<_>>>()?;
    let t = pairwise_reduce(partials, Partial::merge).expect("n_realizations >= 2");

    let nf = n as f64;
    let se = |sum: f64, sumsq: f64| -> f64 {
        let m = sum / nf;
        (((sumsq / nf - m * m) * nf / (nf - 1.0)).max(0.0) / nf).sqrt()
    };
    let dev: Vec<Complex64> = t.s1.iter().map(|s| s / nf).collect();
    let mean_field_se = (0..sites)
        .map(|i| {
            let spread = ((t.s1sq[i] / nf - dev[i].norm_sqr()) * nf / (nf - 1.0)).max(0.0);
            (spread / nf).sqrt()
        })
        .collect();
    let mean_field: Vec<Complex64> = dev.iter().zip(fv).map(|(d, f)| f + d).collect();
    let mut coherence = vec![Complex64::new(0.0, 0.0); sites * sites];
    let mut se_re = vec![0.0; sites * sites];
    let mut se_im = vec![0.0; sites * sites];
    let mut pair = vec![Complex64::new(0.0, 0.0); sites * sites];
    for i in 0..sites {
        for j in i..sites {
            let u = i * sites + j;
            let l = j * sites + i;
            let c = fv[i] * fv[j].conj() + t.c1[u] / nf;
            coherence[u] = c;
            coherence[l] = c.conj();
            se_re[u] = se(t.c1[u].re, t.c_re2[u]);
            se_im[u] = se(t.c1[u].im, t.c_im2[u]);
            se_re[l] = se_re[u];
            se_im[l] = se_im[u];
            pair[u] = t.p1[u] / nf;
            pair[l] = pair[u];
        }
        coherence[i * sites + i].im = 0.0;
    }
    let f_dev = t.f1 / nf;
    let f_se = (((t.f2 / nf - f_dev.norm_sqr()) * nf / (nf - 1.0)).max(0.0) / nf).sqrt();
    let f_mean = if fs_norm > 0.0 { f_dev + 1.0 } else { Complex64::new(0.0, 0.0) };
    Ok(EnsembleStats {
        grid,
        n_samples: n,
        mean_field: Spectrum {
            grid,
            values: mean_field,
        },
        mean_field_se,
        coherence,
        coherence_se_re: se_re,
        coherence_se_im: se_im,
        pair,
        free_space: fs,
        coherent_fraction: f_mean,
        coherent_fraction_se: f_se,
        max_norm_drift: t.drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::new(1, 64, 5.0, 1e-6).unwrap()
    }

    fn gaussian(grid: FrequencyGrid, width: f64, centre: f64) -> Spectrum {
        Spectrum::from_fn(grid, |a| {
            Complex64::new((-((a[0] - centre) / width).powi(2)).exp(), 0.0)
        })
    }

    fn plan(cn2: f64, z: f64, slabs: usize, n: usize) -> PropagationPlan {
        PropagationPlan {
            grid: grid(),
            model: TurbulenceModel::von_karman(cn2, 0.05, 0.0).unwrap(),
            z_total: z,
            n_slabs: slabs,
            n_realizations: n,
            master_seed: 17,
        }
    }

    #[test]
    fn free_space_multiplier_values() {
        let g = FrequencyGrid::new(1, 8, 1.0, 1.0).unwrap();
        let s = Spectrum::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let out = free_space_step(&s, 1.0);
        assert_eq!(out.values[g.dc_site()], Complex64::new(1.0, 0.0));
        // a = 1, λ·dz·|a|² = 1 → e^{iπ}
        assert!((out.values[g.dc_site() + 1] + 1.0).norm() < 1e-15);
    }

    #[test]
    fn free_space_is_additive_and_unitary() {
        let s = gaussian(grid(), 40.0, 10.0);
        let a = free_space_step(&free_space_step(&s, 0.3), 0.9);
        let b = free_space_step(&s, 1.2);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() < 1e-14);
        }
        for (x, y) in a.values.iter().zip(&s.values) {
            assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_screen_is_identity_and_constant_phase_is_global() {
        let g = grid();
        let s = gaussian(g, 30.0, 0.0);
        let z = ScreenRealization::zero(g, 1.0);
        let out = apply_screen(&s, &z).unwrap();
        for (x, y) in out.values.iter().zip(&s.values) {
            assert!((x - y).norm() < 1e-13);
        }
        // Constant ñ: only the DC coefficient, ñ(x) = c·Δa.
        let mut coeffs = vec![Complex64::new(0.0, 0.0); g.sites()];
        let phi0 = 0.7;
        coeffs[g.dc_site()] = Complex64::new(phi0 / (g.wavenumber() * g.delta_a), 0.0);
        let scr = ScreenRealization::from_coefficients(g, coeffs, 1.0).unwrap();
        let out = apply_screen(&s, &scr).unwrap();
        let ph = Complex64::from_polar(1.0, -phi0);
        for (x, y) in out.values.iter().zip(&s.values) {
            assert!((x - y * ph).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_screen_rejects_grid_mismatch() {
        let s = Spectrum::zeros(grid());
        let other = FrequencyGrid::new(1, 32, 5.0, 1e-6).unwrap();
        assert!(apply_screen(&s, &ScreenRealization::zero(other, 1.0)).is_err());
    }

    #[test]
    fn turbulence_free_plan_is_free_space() {
        let p = plan(0.0, 50.0, 8, 4);
        let s = gaussian(grid(), 30.0, 5.0);
        assert_eq!(propagate(&s, &p, 3).unwrap(), free_space_step(&s, 50.0));
        let z = plan(1e-12, 0.0, 8, 4);
        assert_eq!(propagate(&s, &z, 3).unwrap(), s);
    }

    #[test]
    fn propagation_is_unitary_and_deterministic() {
        let p = plan(2e-12, 100.0, 32, 4);
        let s = gaussian(grid(), 30.0, 0.0);
        let a = propagate(&s, &p, 1).unwrap();
        let b = propagate(&s, &p, 1).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_sq() / s.norm_sq() - 1.0).abs() < 1e-10);
        assert_ne!(a, propagate(&s, &p, 2).unwrap());
    }

    #[test]
    fn guard_violation_lists_bounds() {
        let mut p = plan(1e-12, 1e4, 1, 4);
        p.n_slabs = 1;
        let e = p.validate().unwrap_err();
        let Error::Config(msg) = e else { panic!() };
        assert!(msg.contains("π/4"), "{msg}");
        assert!(msg.contains("0.1"), "{msg}");
    }

    #[test]
    fn ensemble_without_turbulence_is_deterministic_outer_product() {
        let p = plan(0.0, 20.0, 4, 3);
        let s = gaussian(grid(), 30.0, 0.0);
        let st = ensemble_moments(&s, &p, Execution::default()).unwrap();
        let fs = free_space_step(&s, 20.0);
        let n = grid().sites();
        for i in 0..n {
            for j in 0..n {
                let want = fs.values[i] * fs.values[j].conj();
                assert!((st.coherence[i * n + j] - want).norm() < 1e-15);
                assert!(st.coherence_se_re[i * n + j] < 1e-15);
            }
        }
    }

    #[test]
    fn ensemble_is_execution_independent() {
        let p = plan(2e-12, 100.0, 16, 40);
        let s = gaussian(grid(), 30.0, 0.0);
        let a = ensemble_moments(&s, &p, Execution::Sequential).unwrap();
        let b = ensemble_moments(&s, &p, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let n = grid().sites();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(a.coherence[i * n + j], a.coherence[j * n + i].conj());
            }
            assert!(a.coherence[i * n + i].re >= 0.0);
        }
    }

    #[test]
    fn ensemble_rejects_single_realization() {
        let p = plan(1e-12, 10.0, 4, 1);
        assert!(ensemble_moments(&Spectrum::zeros(grid()), &p, Execution::Sequential).is_err());
    }
}
