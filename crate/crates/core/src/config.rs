//! Run configuration (strict JSON).
//!
//! ```json
//! {
//!   "model": { "kind": "von_karman", "cn2": 2e-11, "outer_scale": 0.05 },
//!   "grid":  { "dim": 1, "n": 64, "delta_a": 5.0, "wavelength": 1e-6 },
//!   "plan":  { "z_total": 100.0, "n_slabs": 32, "n_realizations": 2000, "master_seed": 7 }
//! }
//! ```
//!
//! Unknown keys are rejected at every level. Omitted plan fields default to
//! `n_slabs = 64`, `n_realizations = 500`, `master_seed = 1`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, Spectrum};
use crate::phase_screen::check_outer_scale;
use crate::splitstep::{PlanGuards, PropagationPlan};
use crate::spectrum::TurbulenceModel;
use crate::Complex64;

pub const DEFAULT_N_SLABS: usize = 64;
pub const DEFAULT_N_REALIZATIONS: usize = 500;
pub const DEFAULT_MASTER_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    /// Propagation distance, m.
    pub z_total: f64,
    #[serde(default = "default_slabs")]
    pub n_slabs: usize,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

fn default_slabs() -> usize {
    DEFAULT_N_SLABS
}
fn default_realizations() -> usize {
    DEFAULT_N_REALIZATIONS
}
fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

/// Initial angular spectrum: a Gaussian G(a) = exp(−|a − a_c|²/w²)·exp(−i2π a·x_c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// 1/e half-width of |G|, cycles/m.
    #[serde(default = "default_beam_width")]
    pub width: f64,
    /// Spectral centre a_c, cycles/m.
    #[serde(default)]
    pub center: [f64; 2],
    /// Transverse displacement x_c of the beam, m.
    #[serde(default)]
    pub offset: [f64; 2],
}

fn default_beam_width() -> f64 {
    20.0
}

impl Default for BeamConfig {
    fn default() -> Self {
        BeamConfig {
            width: default_beam_width(),
            center: [0.0; 2],
            offset: [0.0; 2],
        }
    }
}

impl BeamConfig {
    pub fn spectrum(&self, grid: FrequencyGrid) -> Spectrum {
        let d = grid.dim;
        let b = *self;
        Spectrum::from_fn(grid, move |a| {
            let mut r2 = 0.0;
            let mut ph = 0.0;
            for i in 0..d {
                let u = (a[i] - b.center[i]) / b.width;
                r2 += u * u;
                ph -= 2.0 * std::f64::consts::PI * a[i] * b.offset[i];
            }
            Complex64::from_polar((-r2).exp(), ph)
        })
    }
}

/// Pass/fail thresholds of the validation report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Max abs error of deterministic closed-form comparisons.
    pub closed_form: f64,
    /// Standard errors allowed for Monte-Carlo agreement (single statistics,
    /// and the RMS z-score of elementwise comparisons).
    pub sigma: f64,
    /// Relative RMS discrepancy allowed in the coherence comparison.
    pub relative_rms: f64,
    /// Trace mass defining the compared support.
    pub support_mass: f64,
    pub trace_drift: f64,
    pub hermiticity: f64,
    pub stationarity: f64,
    pub perturbed_min: f64,
    pub perturbed_max: f64,
    pub oracle: f64,
    pub finite_difference: f64,
    pub screen_variance: f64,
    pub screen_cross_z: f64,
    pub duality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            closed_form: 1e-10,
            sigma: 3.0,
            relative_rms: 0.05,
            support_mass: 0.99,
            trace_drift: 1e-8,
            hermiticity: 1e-10,
            stationarity: 1e-12,
            perturbed_min: 1e-4,
            perturbed_max: 1e-2,
            oracle: 1e-12,
            finite_difference: 1e-6,
            screen_variance: 0.05,
            screen_cross_z: 4.0,
            duality: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Simulate,
    EvolveKernel,
    States,
    Screens,
    SpectrumTable,
    Validate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: TurbulenceModel,
    pub grid: FrequencyGrid,
    pub plan: PlanConfig,
    #[serde(default)]
    pub beam: BeamConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn propagation_plan(&self) -> PropagationPlan {
        PropagationPlan {
            grid: self.grid,
            model: self.model,
            z_total: self.plan.z_total,
            n_slabs: self.plan.n_slabs,
            n_realizations: self.plan.n_realizations,
            master_seed: self.plan.master_seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.plan.master_seed = seed;
        self
    }

    /// Field-level checks, then the plan guards. Returns the guard values.
    pub fn validate(&self) -> Result<PlanGuards> {
        let field = |path: &str, e: Error| Error::Config(format!("schema error at {path}: {e}"));
        if self.model.cn2 < 0.0 || !self.model.cn2.is_finite() {
            return Err(Error::Config(format!(
                "schema error at model.cn2: must be a finite value >= 0, got {}",
                self.model.cn2
            )));
        }
        self.model.validate().map_err(|e| field("model", e))?;
        self.grid.validate().map_err(|e| field("grid", e))?;
        if !(self.plan.z_total >= 0.0) || !self.plan.z_total.is_finite() {
            return Err(Error::Config(format!(
                "schema error at plan.z_total: must be finite and >= 0, got {}",
                self.plan.z_total
            )));
        }
        if self.plan.n_slabs == 0 {
            return Err(Error::Config("schema error at plan.n_slabs: must be >= 1".into()));
        }
        if self.plan.n_realizations == 0 {
            return Err(Error::Config("schema error at plan.n_realizations: must be >= 1".into()));
        }
        if !(self.beam.width > 0.0) {
            return Err(Error::Config(format!(
                "schema error at beam.width: must be > 0, got {}",
                self.beam.width
            )));
        }
        check_outer_scale(&self.model, &self.grid);
        self.propagation_plan().validate()
    }
}

/// Parses and validates a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Config(format!("schema error at {path}: {}", e.into_inner()))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}
