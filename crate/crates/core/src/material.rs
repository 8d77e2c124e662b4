//! Particle response models and the point-dipole validity check.
//!
//! A particle is described by its radius and by the low-frequency slope of
//! the imaginary part of its polarizability, `α''(ω) = R³ A ω`. This is the
//! leading (dipole) Mie term without radiative corrections, valid for a
//! Drude conductor (`A = 3 / 4πσ₀`) or for a dielectric below its lowest
//! phonon resonance.

use std::f64::consts::PI;

use crate::constants::{C_LIGHT, HBAR, K_BOLTZMANN};
use crate::error::{Error, Result};

/// Polarization channel of the fluctuating dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Electric,
    Magnetic,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Electric, Channel::Magnetic];
}

/// Spherical particle with linear low-frequency absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    name: String,
    /// cm
    radius: f64,
    /// s
    slope_e: f64,
    /// s
    slope_m: Option<f64>,
    /// s⁻¹, when the electric slope was derived from a Drude conductivity.
    conductivity: Option<f64>,
}

/// Slope of the Drude response `ε = 1 + 4πiσ₀/ω` in the dipole factor
/// `Im[(ε − 1)/(ε + 2)] ≈ 3ω / 4πσ₀`.
pub fn drude_slope(conductivity: f64) -> f64 {
    3.0 / (4.0 * PI * conductivity)
}

fn positive(name: &str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {value}")))
    }
}

impl Material {
    pub fn new(name: impl Into<String>, radius: f64, slope_e: f64) -> Result<Self> {
        Ok(Material {
            name: name.into(),
            radius: positive("radius", radius)?,
            slope_e: positive("electric slope", slope_e)?,
            slope_m: None,
            conductivity: None,
        })
    }

    /// Metallic particle with static conductivity `σ₀` (s⁻¹).
    pub fn from_conductivity(name: impl Into<String>, radius: f64, conductivity: f64) -> Result<Self> {
        let sigma = positive("conductivity", conductivity)?;
        let mut m = Material::new(name, radius, drude_slope(sigma))?;
        m.conductivity = Some(sigma);
        Ok(m)
    }

    pub fn with_magnetic_slope(mut self, slope_m: f64) -> Result<Self> {
        self.slope_m = Some(positive("magnetic slope", slope_m)?);
        Ok(self)
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        self.radius = positive("radius", radius)?;
        Ok(self)
    }

    /// Amorphous silica, `A = 3.6e-15 s`.
    pub fn sio2(radius: f64) -> Result<Self> {
        Material::new("SiO2", radius, 3.6e-15)
    }

    /// Graphite with the tabulated slope `A = 1.15e-15 s`
    /// (Drude value for σ₀ = 2.07e14 s⁻¹, rounded).
    pub fn graphite(radius: f64) -> Result<Self> {
        Material::new("graphite", radius, 1.15e-15)
    }

    /// Looks up a preset by name (case-insensitive).
    pub fn preset(name: &str, radius: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sio2" | "silica" => Material::sio2(radius),
            "graphite" => Material::graphite(radius),
            other => Err(Error::Config(format!("unknown material preset '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn slope_e(&self) -> f64 {
        self.slope_e
    }

    pub fn slope_m(&self) -> Option<f64> {
        self.slope_m
    }

    pub fn conductivity(&self) -> Option<f64> {
        self.conductivity
    }

    pub fn slope(&self, channel: Channel) -> Option<f64> {
        match channel {
            Channel::Electric => Some(self.slope_e),
            Channel::Magnetic => self.slope_m,
        }
    }

    /// Channels with a non-zero response, electric first.
    pub fn channels(&self) -> impl Iterator<Item = (Channel, f64)> + '_ {
        Channel::ALL
            .into_iter()
            .filter_map(move |c| self.slope(c).map(|a| (c, a)))
    }

    /// `R³ A_channel`, the coefficient of ω in `α''`.
    pub fn strength(&self, channel: Channel) -> Result<f64> {
        let slope = self.slope(channel).ok_or_else(|| {
            Error::Config(format!(
                "material '{}' has no magnetic polarizability slope",
                self.name
            ))
        })?;
        Ok(self.radius.powi(3) * slope)
    }
}

/// `α''(ω) = R³ A ω` in cm³. Odd in ω.
pub fn alpha_im(material: &Material, omega: f64, channel: Channel) -> Result<f64> {
    Ok(material.strength(channel)? * omega)
}

/// Local temperatures of the particle (`T₁`) and of the plate together with
/// the vacuum background (`T₂`), in kelvin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState {
    pub t_particle: f64,
    pub t_environment: f64,
}

impl ThermalState {
    pub fn new(t_particle: f64, t_environment: f64) -> Result<Self> {
        for (name, t) in [("particle", t_particle), ("environment", t_environment)] {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::Domain(format!(
                    "{name} temperature must be non-negative, got {t}"
                )));
            }
        }
        Ok(ThermalState {
            t_particle,
            t_environment,
        })
    }

    pub fn uniform(t: f64) -> Result<Self> {
        ThermalState::new(t, t)
    }
}

/// Ratio below which a "much less than" condition is considered satisfied.
pub const MUCH_LESS_THAN: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub ratio: f64,
    pub passed: bool,
}

impl Condition {
    fn from_ratio(ratio: f64) -> Self {
        Condition {
            ratio,
            passed: ratio < MUCH_LESS_THAN,
        }
    }
}

/// Point-dipole regime: `R ≪ z₀`, `ΩR/c ≪ 1`, and `R` small against the
/// thermal wavelength `2πħc / k_B T` of both bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityReport {
    pub size_vs_distance: Condition,
    pub rim_speed: Condition,
    /// The worse of the two temperatures.
    pub thermal_wavelength: Condition,
}

impl ValidityReport {
    pub fn all_passed(&self) -> bool {
        self.size_vs_distance.passed && self.rim_speed.passed && self.thermal_wavelength.passed
    }
}

pub fn validity_check(
    material: &Material,
    z0: f64,
    omega_rot: f64,
    thermal: ThermalState,
) -> ValidityReport {
    let r = material.radius();
    let t_max = thermal.t_particle.max(thermal.t_environment);
    // R / (2πħc / k_B T); zero temperature means an infinite wavelength.
    let thermal_ratio = r * K_BOLTZMANN * t_max / (2.0 * PI * HBAR * C_LIGHT);
    ValidityReport {
        size_vs_distance: Condition::from_ratio(r / z0),
        rim_speed: Condition::from_ratio(omega_rot.abs() * r / C_LIGHT),
        thermal_wavelength: Condition::from_ratio(thermal_ratio),
    }
}
