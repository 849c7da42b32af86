//! Moment-kernel evolution of multi-photon optical states through
//! atmospheric turbulence, with an independent split-step Monte-Carlo
//! propagator for cross-validation.
//!
//! Module map:
//!
//! - [`spectrum`]: turbulence PSDs and the integrated strength Λ
//! - [`grid`]: frequency lattices, the ⋄ contraction, transforms
//! - [`phase_screen`]: slab-integrated random screens and their statistics
//! - [`splitstep`]: classical Strang split-step propagation and ensembles
//! - [`moments`]: H_{m,n} kernel equations and their integration
//! - [`states`]: Gaussian Wigner functionals, linear processes, Fock states
//! - [`config`], [`array_io`], [`validate`]: run configuration, the binary
//!   tensor format and the cross-validation report

pub mod array_io;
pub mod config;
pub mod error;
pub mod exec;
pub mod grid;
pub mod moments;
pub mod phase_screen;
mod quad;
pub mod rng;
pub mod spectrum;
pub mod splitstep;
pub mod states;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{contract, FrequencyGrid, PositionField, Spectrum};
pub use spectrum::{SpectrumKind, TurbulenceModel};

pub use num_complex::Complex64;
