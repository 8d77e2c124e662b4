//! Radiation, frictional torque and heating of a small neutral particle
//! spinning close to a transparent dielectric plate, from fluctuation
//! electrodynamics.
//!
//! All internal quantities are Gaussian/CGS: lengths in cm, frequencies in
//! s⁻¹, powers in erg/s and torques in erg. Temperatures are kelvin at the
//! API surface and are converted to thermal frequencies `θ = 2πk_BT/ħ`
//! internally.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constants;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod kernels;
pub mod material;
pub mod quadrature;
pub mod rates;

pub use error::{Error, Result};
pub use kernels::{KernelValue, PlateOptics};
pub use material::{Channel, Material, ThermalState};
pub use rates::{RateReport, SystemConfig};
