//! Numerical toolkit for collapsing hyper-Kähler metrics on the 3-torus.
//!
//! Modules, from the bottom up:
//!
//! - [`forms4`]: exterior algebra on ℝ⁴, SU(2)-structures and definite triples.
//! - [`calibration`]: the calibration functional on linear maps ℝ⁴ → ℝ³.
//! - [`torus_green`]: Ewald-summed Green's functions and harmonic functions with poles.
//! - [`gibbons_hawking`]: pointwise Gibbons–Hawking triples, metrics and densities.
//! - [`collapse_sweep`]: region quadrature, energy/invariant/volume sweeps and fits.
//! - [`config`]: JSON run configurations.

pub mod calibration;
pub mod collapse_sweep;
pub mod config;
pub mod error;
pub mod forms4;
pub mod gibbons_hawking;
pub mod quadrature;
pub mod torus_green;

pub use error::{Error, Result};
