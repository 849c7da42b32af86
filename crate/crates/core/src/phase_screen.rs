//! Slab-integrated refractive-index screens.
//!
//! A screen holds the Fourier coefficients Ñ(a) of ∫ñ(x,z)dz over one slab.
//! Coefficients are Gaussian with `E[Ñ(a)Ñ*(a′)] = Φ_n(a,0)·dz·δ_{aa′}/Δa^D`
//! and satisfy `Ñ(−a) = Ñ*(a)`, so the position-domain screen is real.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grid::{FrequencyGrid, Fourier, Spectrum};
use crate::rng;
use crate::spectrum::TurbulenceModel;

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenRealization {
    pub grid: FrequencyGrid,
    /// Ñ(a) per site, m·(cycles/m)^(−D).
    pub coeffs: Vec<Complex64>,
    /// Slab thickness, m.
    pub dz: f64,
    pub seed: u64,
}

/// Precomputed per-mode standard deviations for repeated draws on one grid.
#[derive(Debug, Clone)]
pub struct ScreenGenerator {
    grid: FrequencyGrid,
    /// sqrt(Φ_n(a,0)/Δa^D) per site, i.e. the deviation per unit slab thickness.
    unit_std: Vec<f64>,
}

/// Warns when the outer scale exceeds the lattice support 1/Δa.
pub fn check_outer_scale(model: &TurbulenceModel, grid: &FrequencyGrid) -> bool {
    let support = 1.0 / grid.delta_a;
    if model.outer_scale.is_finite() && model.outer_scale > support {
        log::warn!(
            "outer scale exceeds grid support: L0 = {} m > 1/delta_a = {} m",
            model.outer_scale,
            support
        );
        return false;
    }
    true
}

impl ScreenGenerator {
    pub fn new(model: &TurbulenceModel, grid: FrequencyGrid) -> Result<Self> {
        model.validate()?;
        if model.kind == crate::spectrum::SpectrumKind::Kolmogorov {
            return Err(Error::Divergent(
                "Λ divergent for pure Kolmogorov: phase screens need a finite DC variance".into(),
            ));
        }
        check_outer_scale(model, &grid);
        let inv_w = grid.delta_weight();
        let unit_std = (0..grid.sites())
            .map(|s| {
                let a = grid.frequency(s);
                model
                    .psd_transverse(&a[..grid.dim])
                    .map(|p| (p * inv_w).sqrt())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScreenGenerator { grid, unit_std })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Target variance E|Ñ(a)|² for slab thickness `dz`, per site.
    pub fn target_variance(&self, dz: f64) -> Vec<f64> {
        self.unit_std.iter().map(|s| s * s * dz).collect()
    }

    /// Unit-variance Hermitian white noise: complex on paired modes
    /// (E|w|² = 1), real on self-mirrored modes.
    pub fn white_noise(&self, seed: u64) -> Vec<Complex64> {
        let g = &self.grid;
        let mut rng = rng::stream(seed);
        let mut w = vec![Complex64::new(0.0, 0.0); g.sites()];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for s in 0..g.sites() {
            let m = g.mirror(s);
            if m == s {
                let x: f64 = StandardNormal.sample(&mut rng);
                w[s] = Complex64::new(x, 0.0);
            } else if s < m {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                w[s] = Complex64::new(re * h, im * h);
                w[m] = w[s].conj();
            }
        }
        w
    }

    /// Screen from given white noise for slab thickness `dz`.
    pub fn from_white_noise(&self, noise: &[Complex64], dz: f64, seed: u64) -> ScreenRealization {
        let scale = dz.sqrt();
        let coeffs = noise
            .iter()
            .zip(&self.unit_std)
            .map(|(w, s)| w * (s * scale))
            .collect();
        ScreenRealization {
            grid: self.grid,
            coeffs,
            dz,
            seed,
        }
    }

    pub fn draw(&self, dz: f64, seed: u64) -> Result<ScreenRealization> {
        if !(dz > 0.0 && dz.is_finite()) {
            return Err(Error::Config(format!("slab thickness dz must be > 0, got {dz}")));
        }
        Ok(self.from_white_noise(&self.white_noise(seed), dz, seed))
    }
}

/// Draws one slab screen. Deterministic in `(model, grid, dz, seed)`.
pub fn draw_screen(
    model: &TurbulenceModel,
    grid: FrequencyGrid,
    dz: f64,
    seed: u64,
) -> Result<ScreenRealization> {
    ScreenGenerator::new(model, grid)?.draw(dz, seed)
}

impl ScreenRealization {
    pub fn zero(grid: FrequencyGrid, dz: f64) -> Self {
        ScreenRealization {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.sites()],
            dz,
            seed: 0,
        }
    }

    /// Builds a screen from explicit coefficients, checking Hermitian symmetry.
    pub fn from_coefficients(grid: FrequencyGrid, coeffs: Vec<Complex64>, dz: f64) -> Result<Self> {
        if coeffs.len() != grid.sites() {
            return Err(Error::Shape(format!(
                "screen has {} coefficients, grid has {} sites",
                coeffs.len(),
                grid.sites()
            )));
        }
        let s = ScreenRealization {
            grid,
            coeffs,
            dz,
            seed: 0,
        };
        s.check_hermitian()?;
        Ok(s)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for s in 0..self.grid.sites() {
            let m = self.grid.mirror(s);
            let d = (self.coeffs[m] - self.coeffs[s].conj()).norm();
            if d > 1e-12 * scale {
                return Err(Error::Consistency(format!(
                    "screen violates Ñ(−a) = Ñ*(a) at site {s} (mirror {m}): |Δ| = {d:e}"
                )));
            }
        }
        Ok(())
    }

    pub fn as_spectrum(&self) -> Spectrum {
        Spectrum {
            grid: self.grid,
            values: self.coeffs.clone(),
        }
    }

    /// Returns the same screen with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        ScreenRealization {
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Real phase φ(x) = k·ñ_slab(x) in radians, per position site.
pub fn phase_screen_position(s: &ScreenRealization, k: f64) -> Result<Vec<f64>> {
    phase_screen_position_with(&Fourier::new(s.grid), s, k)
}

pub fn phase_screen_position_with(fourier: &Fourier, s: &ScreenRealization, k: f64) -> Result<Vec<f64>> {
    s.check_hermitian()?;
    let mut buf = s.coeffs.clone();
    fourier.frequency_to_position_inplace(&mut buf);
    let n = buf.len() as f64;
    let rms = (buf.iter().map(|v| v.re * v.re).sum::<f64>() / n).sqrt();
    let max_im = buf.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if max_im > 1e-12 * rms.max(f64::MIN_POSITIVE) && max_im > 0.0 {
        return Err(Error::Consistency(format!(
            "position-domain screen not real: max |Im| = {max_im:e}, RMS = {rms:e}"
        )));
    }
    Ok(buf.iter().map(|v| k * v.re).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeStat {
    pub site: usize,
    /// Frequency vector, cycles/m.
    pub frequency: [f64; 2],
    pub target: f64,
    pub sample_variance: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossStat {
    pub site1: usize,
    pub site2: usize,
    /// Sample ⟨Ñ(a1)Ñ*(a2)⟩.
    pub covariance: Complex64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenStatistics {
    pub n_samples: usize,
    pub modes: Vec<ModeStat>,
    pub cross: Vec<CrossStat>,
    /// max |sample var / target − 1| over modes with non-zero target.
    pub max_relative_deviation: f64,
    /// max |cross covariance| / standard error.
    pub max_cross_z: f64,
}

/// Maximum number of sites included in the cross-covariance table.
const CROSS_SITES: usize = 64;
const BLOCK: usize = 256;

/// Empirical per-mode variances and cross-mode covariances over
/// `n_samples` independent screens (seeds derived from `seed`).
pub fn screen_statistics(
    model: &TurbulenceModel,
    grid: FrequencyGrid,
    dz: f64,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ScreenStatistics> {
    if n_samples < 100 {
        return Err(Error::Config(format!("n_samples must be >= 100, got {n_samples}")));
    }
    let gen = ScreenGenerator::new(model, grid)?;
    let target = gen.target_variance(dz);
    let sites = grid.sites();

    // Cross-covariance sites: the strongest modes, excluding mirror pairs.
    let mut order: Vec<usize> = (0..sites).collect();
    order.sort_by(|a, b| target[*b].total_cmp(&target[*a]).then(a.cmp(b)));
    let chosen: Vec<usize> = order.into_iter().take(CROSS_SITES.min(sites)).collect();
    let mut pairs = Vec::new();
    for (i, &s1) in chosen.iter().enumerate() {
        for &s2 in &chosen[i + 1..] {
            if s2 != grid.mirror(s1) {
                pairs.push((s1, s2));
            }
        }
    }

    // Per block: Σ|Ñ|², Σ|Ñ|⁴ per mode; Σ X, Σ|X|² per pair.
    struct Partial {
        p1: Vec<f64>,
        p2: Vec<f64>,
        c1: Vec<Complex64>,
        c2: Vec<f64>,
    }
    let n_blocks = n_samples.div_ceil(BLOCK);
    let partials = exec.map(n_blocks, |b| {
        let mut p = Partial {
            p1: vec![0.0; sites],
            p2: vec![0.0; sites],
            c1: vec![Complex64::new(0.0, 0.0); pairs.len()],
            c2: vec![0.0; pairs.len()],
        };
        let lo = b * BLOCK;
        let hi = (lo + BLOCK).min(n_samples);
        for i in lo..hi {
            let scr = gen.from_white_noise(
                &gen.white_noise(rng::derive_seed(seed, i as u64, 0)),
                dz,
                0,
            );
            for (s, c) in scr.coeffs.iter().enumerate() {
                let q = c.norm_sqr();
                p.p1[s] += q;
                p.p2[s] += q * q;
            }
            for (j, &(s1, s2)) in pairs.iter().enumerate() {
                let x = scr.coeffs[s1] * scr.coeffs[s2].conj();
                p.c1[j] += x;
                p.c2[j] += x.norm_sqr();
            }
        }
        p
    });
    let total = pairwise_reduce(partials, |mut a, b| {
        for (x, y) in a.p1.iter_mut().zip(&b.p1) {
            *x += y;
        }
        for (x, y) in a.p2.iter_mut().zip(&b.p2) {
            *x += y;
        }
        for (x, y) in a.c1.iter_mut().zip(&b.c1) {
            *x += y;
        }
        for (x, y) in a.c2.iter_mut().zip(&b.c2) {
            *x += y;
        }
        a
    })
    .expect("at least one block");

    let nf = n_samples as f64;
    let mut modes = Vec::with_capacity(sites);
    let mut max_rel: f64 = 0.0;
    for s in 0..sites {
        let mean = total.p1[s] / nf;
        let var_of_q = ((total.p2[s] / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
        if target[s] > 0.0 {
            max_rel = max_rel.max((mean / target[s] - 1.0).abs());
        }
        modes.push(ModeStat {
            site: s,
            frequency: grid.frequency(s),
            target: target[s],
            sample_variance: mean,
            std_error: (var_of_q / nf).sqrt(),
        });
    }
    let mut cross = Vec::with_capacity(pairs.len());
    let mut max_z: f64 = 0.0;
    for (j, &(s1, s2)) in pairs.iter().enumerate() {
        let mean = total.c1[j] / nf;
        let spread = ((total.c2[j] / nf - mean.norm_sqr()) * nf / (nf - 1.0)).max(0.0);
        let se = (spread / nf).sqrt();
        if se > 0.0 {
            max_z = max_z.max(mean.norm() / se);
        }
        cross.push(CrossStat {
            site1: s1,
            site2: s2,
            covariance: mean,
            std_error: se,
        });
    }
    Ok(ScreenStatistics {
        n_samples,
        modes,
        cross,
        max_relative_deviation: max_rel,
        max_cross_z: max_z,
    })
}

/// Fixed-shape pairwise tree reduction in index order.
pub(crate) fn pairwise_reduce<T, F: Fn(T, T) -> T>(mut items: Vec<T>, f: F) -> Option<T> {
    if items.is_empty() {
        return None;
    }
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(f(a, b)),
                None => next.push(a),
            }
        }
        items = next;
    }
    items.pop()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn setup() -> (TurbulenceModel, FrequencyGrid) {
        let g = FrequencyGrid::new(1, 32, 5.0, 1e-6).unwrap();
        let m = TurbulenceModel::von_karman(1e-12, 0.05, 0.0).unwrap();
        (m, g)
    }

    #[test]
    fn zero_cn2_gives_zero_screen() {
        let (m, g) = setup();
        let s = draw_screen(&m.with_cn2(0.0), g, 1.0, 5).unwrap();
        assert!(s.coeffs.iter().all(|c| c.norm() == 0.0));
        let phi = phase_screen_position(&s, g.wavenumber()).unwrap();
        assert!(phi.iter().all(|p| *p == 0.0));
    }

    #[test]
    fn deterministic_and_hermitian() {
        let (m, g) = setup();
        let a = draw_screen(&m, g, 0.5, 99).unwrap();
        let b = draw_screen(&m, g, 0.5, 99).unwrap();
        assert_eq!(a, b);
        let c = draw_screen(&m, g, 0.5, 100).unwrap();
        assert_ne!(a, c);
        for s in 0..g.sites() {
            assert_eq!(a.coeffs[g.mirror(s)], a.coeffs[s].conj());
        }
        let g2 = FrequencyGrid::new(2, 8, 5.0, 1e-6).unwrap();
        let d = draw_screen(&m, g2, 0.5, 1).unwrap();
        d.check_hermitian().unwrap();
        phase_screen_position(&d, g2.wavenumber()).unwrap();
    }

    #[test]
    fn rejects_kolmogorov_and_bad_dz() {
        let (_, g) = setup();
        let k = TurbulenceModel::kolmogorov(1e-14).unwrap();
        assert!(matches!(draw_screen(&k, g, 1.0, 0), Err(Error::Divergent(_))));
        let (m, _) = setup();
        assert!(draw_screen(&m, g, 0.0, 0).is_err());
    }

    #[test]
    fn single_pair_matches_cosine() {
        let g = FrequencyGrid::new(1, 16, 2.0, 1e-6).unwrap();
        let site = g.dc_site() + 3;
        let c = Complex64::new(0.4, -0.7);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 16];
        coeffs[site] = c;
        coeffs[g.mirror(site)] = c.conj();
        let scr = ScreenRealization::from_coefficients(g, coeffs, 1.0).unwrap();
        let k = 3.0;
        let phi = phase_screen_position(&scr, k).unwrap();
        let a0 = g.frequency(site)[0];
        for (x, p) in phi.iter().enumerate() {
            let xv = g.position(x)[0];
            // Direct two-term sum: Δa [c e^{−i2πa0x} + c* e^{+i2πa0x}].
            let direct = (c * Complex64::from_polar(1.0, -2.0 * PI * a0 * xv)
                + c.conj() * Complex64::from_polar(1.0, 2.0 * PI * a0 * xv))
                * g.delta_a
                * k;
            assert!((p - direct.re).abs() < 1e-13);
            let cosine = 2.0 * k * c.norm() * g.delta_a * (2.0 * PI * a0 * xv - c.arg()).cos();
            assert!((p - cosine).abs() < 1e-13);
        }
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let g = FrequencyGrid::new(1, 8, 1.0, 1e-6).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
        coeffs[5] = Complex64::new(1.0, 1.0);
        assert!(matches!(
            ScreenRealization::from_coefficients(g, coeffs.clone(), 1.0),
            Err(Error::Consistency(_))
        ));
        let bad = ScreenRealization {
            grid: g,
            coeffs,
            dz: 1.0,
            seed: 0,
        };
        assert!(phase_screen_position(&bad, 1.0).is_err());
    }

    #[test]
    fn statistics_small_run() {
        let (m, g) = setup();
        let st = screen_statistics(&m, g, 0.2, 4000, 3, Execution::default()).unwrap();
        assert!(st.max_relative_deviation < 0.1, "{}", st.max_relative_deviation);
        assert!(st.max_cross_z < 5.0, "{}", st.max_cross_z);
        let z = screen_statistics(&m.with_cn2(0.0), g, 0.2, 100, 3, Execution::Sequential).unwrap();
        assert!(z.modes.iter().all(|s| s.sample_variance == 0.0));
        assert!(screen_statistics(&m, g, 0.2, 50, 3, Execution::Sequential).is_err());
    }

    #[test]
    fn statistics_independent_of_execution() {
        let (m, g) = setup();
        let a = screen_statistics(&m, g, 0.2, 600, 8, Execution::Sequential).unwrap();
        let b = screen_statistics(&m, g, 0.2, 600, 8, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pairwise_reduce_order() {
        let v: Vec<String> = (0..5).map(|i| i.to_string()).collect();
        let r = pairwise_reduce(v, |a, b| format!("({a}{b})")).unwrap();
        assert_eq!(r, "(((01)(23))4)");
    }
}
