//! Transverse frequency lattices, angular spectra and the discrete
//! contraction / transform conventions used throughout the crate.
//!
//! Frequencies `a` are in cycles/m on a DC-centred lattice
//! `a_j = (j − n/2)·Δa`. The lattice is treated as periodic: index
//! arithmetic wraps modulo `n`, which is what the discrete transform pair
//! implies. A Dirac delta δ(a − a′) becomes `1/Δa^D` on coinciding sites.
//!
//! Transform pair (exact on the lattice, `Δx = 1/(n·Δa)`):
//!
//! ```text
//! g(x) = Σ_a G(a) exp(−i2π a·x) Δa^D
//! G(a) = Σ_x g(x) exp(+i2π a·x) Δx^D
//! ```

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyGrid {
    /// Transverse dimension D, 1 or 2.
    pub dim: usize,
    /// Samples per axis, a power of two.
    pub n: usize,
    /// Frequency spacing Δa, cycles/m.
    pub delta_a: f64,
    /// Wavelength λ, m.
    pub wavelength: f64,
}

impl FrequencyGrid {
    pub fn new(dim: usize, n: usize, delta_a: f64, wavelength: f64) -> Result<Self> {
        let g = FrequencyGrid {
            dim,
            n,
            delta_a,
            wavelength,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::Config(format!("grid dim must be 1 or 2, got {}", self.dim)));
        }
        if self.n < 2 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid n must be a power of two >= 2, got {}",
                self.n
            )));
        }
        if !(self.delta_a > 0.0 && self.delta_a.is_finite()) {
            return Err(Error::Config(format!("delta_a must be > 0, got {}", self.delta_a)));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::Config(format!(
                "wavelength must be > 0, got {}",
                self.wavelength
            )));
        }
        Ok(())
    }

    /// k = 2π/λ, rad/m.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Total number of lattice sites, n^D.
    pub fn sites(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Position spacing Δx = 1/(n·Δa), m.
    pub fn delta_x(&self) -> f64 {
        1.0 / (self.n as f64 * self.delta_a)
    }

    /// Integration weight of one site, Δa^D.
    pub fn weight(&self) -> f64 {
        self.delta_a.powi(self.dim as i32)
    }

    /// Discrete delta value, 1/Δa^D.
    pub fn delta_weight(&self) -> f64 {
        1.0 / self.weight()
    }

    /// Per-axis indices of a flat site index (x fastest).
    pub fn axis_indices(&self, site: usize) -> [usize; 2] {
        if self.dim == 1 {
            [site, 0]
        } else {
            [site % self.n, site / self.n]
        }
    }

    pub fn site_of(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[1] * self.n + idx[0]
        }
    }

    fn axis_freq(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.delta_a
    }

    fn axis_pos(&self, j: usize) -> f64 {
        (j as f64 - (self.n / 2) as f64) * self.delta_x()
    }

    /// Frequency vector of a site, cycles/m (unused components are zero).
    pub fn frequency(&self, site: usize) -> [f64; 2] {
        let [i, j] = self.axis_indices(site);
        if self.dim == 1 {
            [self.axis_freq(i), 0.0]
        } else {
            [self.axis_freq(i), self.axis_freq(j)]
        }
    }

    /// Position vector of a site in the conjugate lattice, m.
    pub fn position(&self, site: usize) -> [f64; 2] {
        let [i, j] = self.axis_indices(site);
        if self.dim == 1 {
            [self.axis_pos(i), 0.0]
        } else {
            [self.axis_pos(i), self.axis_pos(j)]
        }
    }

    /// |a|² of a site.
    pub fn freq_sq(&self, site: usize) -> f64 {
        let a = self.frequency(site);
        a[0] * a[0] + a[1] * a[1]
    }

    /// All |a|² values in site order.
    pub fn freq_sq_table(&self) -> Vec<f64> {
        (0..self.sites()).map(|s| self.freq_sq(s)).collect()
    }

    /// Largest |a|² on the lattice (attained at the Nyquist corner).
    pub fn max_freq_sq(&self) -> f64 {
        let a = (self.n / 2) as f64 * self.delta_a;
        self.dim as f64 * a * a
    }

    /// Site holding −a on the periodic lattice.
    pub fn mirror(&self, site: usize) -> usize {
        let [i, j] = self.axis_indices(site);
        self.site_of([(self.n - i) % self.n, (self.n - j) % self.n])
    }

    /// Site reached from `site` by adding the lattice offset `offset`
    /// (offset given as a site of the centred lattice, i.e. the offset
    /// vector is `frequency(offset)`), with periodic wrap.
    pub fn shifted(&self, site: usize, offset: usize, sign: i8) -> usize {
        let [i, j] = self.axis_indices(site);
        let [oi, oj] = self.axis_indices(offset);
        let h = self.n / 2;
        let step = |base: usize, o: usize| {
            let o = (o + self.n - h) % self.n;
            if sign >= 0 {
                (base + o) % self.n
            } else {
                (base + self.n - o) % self.n
            }
        };
        if self.dim == 1 {
            step(i, oi)
        } else {
            self.site_of([step(i, oi), step(j, oj)])
        }
    }

    /// The site with zero frequency.
    pub fn dc_site(&self) -> usize {
        let h = self.n / 2;
        self.site_of([h, h])
    }

    pub fn same_as(&self, other: &FrequencyGrid) -> bool {
        self == other
    }

    pub(crate) fn check_same(&self, other: &FrequencyGrid) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Angular spectrum G(a) sampled on a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

/// Transverse field g(x) on the conjugate position lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionField {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        Spectrum {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.sites()],
        }
    }

    pub fn from_values(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::Shape(format!(
                "spectrum has {} values, grid has {} sites",
                values.len(),
                grid.sites()
            )));
        }
        Ok(Spectrum { grid, values })
    }

    /// Samples `f(a)` at every site.
    pub fn from_fn<F: Fn([f64; 2]) -> Complex64>(grid: FrequencyGrid, f: F) -> Self {
        let values = (0..grid.sites()).map(|s| f(grid.frequency(s))).collect();
        Spectrum { grid, values }
    }

    /// Discrete δ(a − a_site): `1/Δa^D` at one site.
    pub fn delta(grid: FrequencyGrid, site: usize) -> Self {
        let mut s = Self::zeros(grid);
        s.values[site] = Complex64::new(grid.delta_weight(), 0.0);
        s
    }

    /// ‖G‖² = Σ |G|² Δa^D.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.weight()
    }

    pub fn conj(&self) -> Self {
        Spectrum {
            grid: self.grid,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Returns `self` scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if !(n > 0.0) {
            return Err(Error::Numerical("cannot normalise a zero spectrum".into()));
        }
        let mut s = self.clone();
        s.scale(Complex64::new(1.0 / n.sqrt(), 0.0));
        Ok(s)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// The ⋄ contraction of two spectra: Σ f·g Δa^D (bilinear, no conjugation).
pub fn contract(f: &Spectrum, g: &Spectrum) -> Result<Complex64> {
    f.grid.check_same(&g.grid)?;
    let s: Complex64 = f.values.iter().zip(&g.values).map(|(a, b)| a * b).sum();
    Ok(s * f.grid.weight())
}

/// Cached FFT plans for one lattice size.
#[derive(Clone)]
pub struct Fourier {
    grid: FrequencyGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: FrequencyGrid) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Centred DFT along every axis: `out_m = Σ_j in_j exp(∓i2π j′m′/n)` with
    /// centred indices `j′ = j − n/2`. Unnormalised.
    fn centered(&self, buf: &mut [Complex64], exp_sign_negative: bool) {
        let n = self.grid.n;
        let plan = if exp_sign_negative {
            &self.forward
        } else {
            &self.inverse
        };
        let h = n / 2;
        if self.grid.dim == 1 {
            buf.rotate_left(h);
            plan.process(buf);
            buf.rotate_left(h);
        } else {
            for row in buf.chunks_exact_mut(n) {
                row.rotate_left(h);
                plan.process(row);
                row.rotate_left(h);
            }
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            for c in 0..n {
                for r in 0..n {
                    col[r] = buf[r * n + c];
                }
                col.rotate_left(h);
                plan.process(&mut col);
                col.rotate_left(h);
                for r in 0..n {
                    buf[r * n + c] = col[r];
                }
            }
        }
    }

    /// In-place g(x) ← Σ_a G(a) exp(−i2π a·x) Δa^D.
    pub fn frequency_to_position_inplace(&self, buf: &mut [Complex64]) {
        self.centered(buf, true);
        let w = self.grid.weight();
        for v in buf.iter_mut() {
            *v *= w;
        }
    }

    /// In-place G(a) ← Σ_x g(x) exp(+i2π a·x) Δx^D.
    pub fn position_to_frequency_inplace(&self, buf: &mut [Complex64]) {
        self.centered(buf, false);
        let w = self.grid.delta_x().powi(self.grid.dim as i32);
        for v in buf.iter_mut() {
            *v *= w;
        }
    }

    pub fn to_position(&self, s: &Spectrum) -> Result<PositionField> {
        self.grid.check_same(&s.grid)?;
        let mut values = s.values.clone();
        self.frequency_to_position_inplace(&mut values);
        Ok(PositionField {
            grid: self.grid,
            values,
        })
    }

    pub fn to_frequency(&self, g: &PositionField) -> Result<Spectrum> {
        self.grid.check_same(&g.grid)?;
        let mut values = g.values.clone();
        self.position_to_frequency_inplace(&mut values);
        Ok(Spectrum {
            grid: self.grid,
            values,
        })
    }
}

pub fn to_position(s: &Spectrum) -> Result<PositionField> {
    Fourier::new(s.grid).to_position(s)
}

pub fn to_frequency(g: &PositionField) -> Result<Spectrum> {
    Fourier::new(g.grid).to_frequency(g)
}

impl PositionField {
    /// ‖g‖² = Σ |g|² Δx^D.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
            * self.grid.delta_x().powi(self.grid.dim as i32)
    }
}
