//! Physical constants (Gaussian/CGS) and the conversions used at the I/O
//! boundary.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant, erg·s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Boltzmann constant, erg/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-16;
/// Speed of light in vacuum, cm/s.
pub const C_LIGHT: f64 = 2.997_924_58e10;
/// Avogadro constant, 1/mol.
pub const AVOGADRO: f64 = 6.022_140_76e23;

/// erg/s in one watt.
pub const ERG_PER_S_PER_WATT: f64 = 1e7;

/// The fixed constant set. There is exactly one instance, [`PhysicalConstants::CGS`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_boltzmann: f64,
    pub c_light: f64,
}

impl PhysicalConstants {
    pub const CGS: PhysicalConstants = PhysicalConstants {
        hbar: HBAR,
        k_boltzmann: K_BOLTZMANN,
        c_light: C_LIGHT,
    };
}

/// Temperature expressed as an angular frequency, `2π k_B T / ħ` (s⁻¹).
pub fn thermal_frequency(temperature: f64) -> Result<f64> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be finite and non-negative, got {temperature}"
        )));
    }
    Ok(2.0 * PI * K_BOLTZMANN * temperature / HBAR)
}

/// Inverse of [`thermal_frequency`].
pub fn temperature_from_frequency(theta: f64) -> f64 {
    theta * HBAR / (2.0 * PI * K_BOLTZMANN)
}

pub fn erg_per_s_to_watts(power: f64) -> f64 {
    power / ERG_PER_S_PER_WATT
}

pub fn watts_to_erg_per_s(power: f64) -> f64 {
    power * ERG_PER_S_PER_WATT
}
