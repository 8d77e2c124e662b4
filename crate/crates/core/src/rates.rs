//! Radiated intensity `I`, frictional torque `M_z` and internal heating
//! `dQ'/dt` of the spinning particle.
//!
//! The normative path is the closed form for a linear `α''(ω) = R³Aω` at
//! small `x = ωz₀/c`, where all plate dependence collapses into the prefactor
//! `P = ħR³ Σ_s A_s ψ_s(n, 0) / 2πc³` (negative):
//!
//! ```text
//! I      = −P [ (θ₁⁶ − θ₂⁶)/126 + Ω²θ₁⁴/10 + Ω⁴θ₁²/6 + Ω⁶/15 ]
//! M_z    =  P [ (3θ₁⁴ + θ₂⁴)Ω/30 + θ₁²Ω³/3 + Ω⁵/5 ]
//! dQ'/dt = −P [ (θ₂⁶ − θ₁⁶)/126 + Ω²θ₂⁴/30 + Ω⁴θ₁²/6 + 2Ω⁶/15 ]
//! ```
//!
//! with `θ = 2πk_BT/ħ`. The brackets satisfy `−M_zΩ = I + dQ'/dt`
//! identically. The numerical evaluators (zero-temperature moments and the
//! full spectral integral over ω) integrate the `ψ` kernels at the actual
//! `x` and serve as independent checks of the closed forms.

use std::cell::Cell;
use std::f64::consts::PI;

use crate::constants::{erg_per_s_to_watts, thermal_frequency, C_LIGHT, HBAR};
use crate::error::{Error, Result};
use crate::kernels::{self, KernelKind, PlateOptics, DEFAULT_REL_TOL};
use crate::material::{Channel, Material, ThermalState};
use crate::quadrature::Quadrature;

/// Above this value of `n·z₀·max(Ω, θ₁, θ₂)/c` the approximation
/// `exp(−2q₀z₀) ≈ 1` behind the closed forms breaks down.
pub const RETARDATION_WARNING: f64 = 0.1;

/// The ω-integrals are cut at this multiple of `max(θ₁, θ₂, Ω)`.
pub const OMEGA_CUTOFF_FACTOR: f64 = 40.0;

/// A complete physical scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub material: Material,
    pub plate: PlateOptics,
    /// Particle–surface distance, cm.
    pub z0: f64,
    /// Angular velocity Ω, s⁻¹.
    pub omega_rot: f64,
    pub thermal: ThermalState,
}

impl SystemConfig {
    pub fn new(
        material: Material,
        plate: PlateOptics,
        z0: f64,
        omega_rot: f64,
        thermal: ThermalState,
    ) -> Result<Self> {
        if !(z0 > 0.0) || !z0.is_finite() {
            return Err(Error::Domain(format!("distance z0 must be positive, got {z0}")));
        }
        if !(omega_rot >= 0.0) || !omega_rot.is_finite() {
            return Err(Error::Domain(format!(
                "angular velocity must be non-negative, got {omega_rot}"
            )));
        }
        Ok(SystemConfig {
            material,
            plate,
            z0,
            omega_rot,
            thermal,
        })
    }

    pub fn n(&self) -> f64 {
        self.plate.refractive_index()
    }

    /// Thermal frequency of the particle.
    pub fn theta1(&self) -> f64 {
        thermal_frequency(self.thermal.t_particle).expect("validated temperature")
    }

    /// Thermal frequency of the plate and background.
    pub fn theta2(&self) -> f64 {
        thermal_frequency(self.thermal.t_environment).expect("validated temperature")
    }

    pub fn with_omega(&self, omega_rot: f64) -> Result<Self> {
        SystemConfig::new(
            self.material.clone(),
            self.plate,
            self.z0,
            omega_rot,
            self.thermal,
        )
    }

    pub fn with_thermal(&self, thermal: ThermalState) -> Self {
        SystemConfig {
            thermal,
            ..self.clone()
        }
    }
}

/// `n·z₀·max(Ω, θ₁, θ₂)/c`, the largest `n·x` reached by the relevant
/// frequencies.
pub fn retardation_parameter(config: &SystemConfig) -> f64 {
    let w = config.omega_rot.max(config.theta1()).max(config.theta2());
    config.n() * config.z0 * w / C_LIGHT
}

fn warn_if_retarded(config: &SystemConfig) {
    let r = retardation_parameter(config);
    if r > RETARDATION_WARNING {
        log::warn!(
            "n·z0·max(Ω, θ1, θ2)/c = {r:.3e} exceeds {RETARDATION_WARNING}; \
             the small-distance closed forms are outside their range"
        );
    }
}

/// `a⁶ − b⁶` without cancellation when `a ≈ b`.
fn sixth_power_difference(a: f64, b: f64) -> f64 {
    let (a2, b2) = (a * a, b * b);
    (a - b) * (a + b) * (a2 * a2 + a2 * b2 + b2 * b2)
}

/// Bracket of the intensity closed form, s⁻⁶.
pub fn intensity_bracket(theta1: f64, theta2: f64, omega: f64) -> f64 {
    let (t2, w2) = (theta1 * theta1, omega * omega);
    sixth_power_difference(theta1, theta2) / 126.0
        + w2 * t2 * t2 / 10.0
        + w2 * w2 * t2 / 6.0
        + w2 * w2 * w2 / 15.0
}

/// Bracket of the torque closed form, s⁻⁵.
pub fn torque_bracket(theta1: f64, theta2: f64, omega: f64) -> f64 {
    let t1sq = theta1 * theta1;
    let t2sq = theta2 * theta2;
    let w2 = omega * omega;
    (3.0 * t1sq * t1sq + t2sq * t2sq) * omega / 30.0 + t1sq * w2 * omega / 3.0 + w2 * w2 * omega / 5.0
}

/// Bracket of the heating closed form, s⁻⁶. Its positive root in `θ₁` is
/// the equilibrium particle temperature.
pub fn heating_bracket(theta1: f64, theta2: f64, omega: f64) -> f64 {
    let (t1sq, t2sq, w2) = (theta1 * theta1, theta2 * theta2, omega * omega);
    sixth_power_difference(theta2, theta1) / 126.0
        + w2 * t2sq * t2sq / 30.0
        + w2 * w2 * t1sq / 6.0
        + 2.0 * w2 * w2 * w2 / 15.0
}

/// Rates and the relative residual of `−M_zΩ = I + dQ'/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// erg/s
    pub intensity: f64,
    /// erg
    pub torque: f64,
    /// erg/s
    pub heating: f64,
    pub balance_residual: f64,
}

impl RateReport {
    pub fn new(intensity: f64, torque: f64, heating: f64, omega: f64) -> Self {
        let work = -torque * omega;
        let scale = work.abs().max(intensity.abs()).max(heating.abs());
        let balance_residual = if scale == 0.0 {
            0.0
        } else {
            (work - intensity - heating).abs() / scale
        };
        RateReport {
            intensity,
            torque,
            heating,
            balance_residual,
        }
    }

    pub fn intensity_watts(&self) -> f64 {
        erg_per_s_to_watts(self.intensity)
    }

    pub fn heating_watts(&self) -> f64 {
        erg_per_s_to_watts(self.heating)
    }
}

/// Closed-form rates for one material and plate, with the kernel
/// evaluation done once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    prefactor: f64,
}

impl ClosedForm {
    pub fn new(material: &Material, plate: &PlateOptics, rel_tol: f64) -> Result<Self> {
        let r3 = material.radius().powi(3);
        let mut weight = 0.0;
        for (channel, slope) in material.channels() {
            let psi = kernels::psi(channel, plate.refractive_index(), 0.0, rel_tol)?;
            weight += slope * psi.value;
        }
        Ok(ClosedForm::from_prefactor(HBAR * r3 * weight / (2.0 * PI * C_LIGHT.powi(3))))
    }

    pub fn for_config(config: &SystemConfig) -> Result<Self> {
        ClosedForm::new(&config.material, &config.plate, DEFAULT_REL_TOL)
    }

    /// `P` in erg·s⁶ (negative for any `n > 1`).
    pub fn from_prefactor(prefactor: f64) -> Self {
        ClosedForm { prefactor }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn intensity(&self, theta1: f64, theta2: f64, omega: f64) -> f64 {
        -self.prefactor * intensity_bracket(theta1, theta2, omega)
    }

    pub fn torque(&self, theta1: f64, theta2: f64, omega: f64) -> f64 {
        self.prefactor * torque_bracket(theta1, theta2, omega)
    }

    pub fn heating(&self, theta1: f64, theta2: f64, omega: f64) -> f64 {
        -self.prefactor * heating_bracket(theta1, theta2, omega)
    }

    pub fn report(&self, theta1: f64, theta2: f64, omega: f64) -> RateReport {
        RateReport::new(
            self.intensity(theta1, theta2, omega),
            self.torque(theta1, theta2, omega),
            self.heating(theta1, theta2, omega),
            omega,
        )
    }
}

/// Closed-form intensity, erg/s.
pub fn intensity_closed(config: &SystemConfig) -> Result<f64> {
    warn_if_retarded(config);
    Ok(ClosedForm::for_config(config)?.intensity(config.theta1(), config.theta2(), config.omega_rot))
}

/// Closed-form torque, erg.
pub fn torque_closed(config: &SystemConfig) -> Result<f64> {
    warn_if_retarded(config);
    Ok(ClosedForm::for_config(config)?.torque(config.theta1(), config.theta2(), config.omega_rot))
}

/// Closed-form heating rate in the particle frame, erg/s.
pub fn heating_closed(config: &SystemConfig) -> Result<f64> {
    warn_if_retarded(config);
    Ok(ClosedForm::for_config(config)?.heating(config.theta1(), config.theta2(), config.omega_rot))
}

pub fn rate_report(config: &SystemConfig) -> Result<RateReport> {
    warn_if_retarded(config);
    Ok(ClosedForm::for_config(config)?.report(config.theta1(), config.theta2(), config.omega_rot))
}

fn inner_tolerance(rel_tol: f64) -> f64 {
    (0.1 * rel_tol).clamp(1e-13, 1e-4)
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("relative tolerance must lie in (0, 1), got {rel_tol}")))
    }
}

/// Runs an adaptive integration of a fallible integrand. The first error
/// raised inside the integrand aborts the result.
fn integrate_fallible<F>(quad: &Quadrature, mut f: F, points: &[f64], what: &str) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let failure: Cell<Option<Error>> = Cell::new(None);
    let outcome = quad.integrate(
        |w| match f(w) {
            Ok(v) => v,
            Err(e) => {
                let prev = failure.take();
                failure.set(Some(prev.unwrap_or(e)));
                f64::NAN
            }
        },
        points,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    match outcome {
        Ok(est) => Ok(est.value),
        Err(nc) => Err(Error::numerical(format!("{what} did not converge"), nc.best.value)),
    }
}

/// `Σ_s R³A_s ψ_s(n, |ω|z₀/c)`, or the χ analogue.
fn weighted_kernel(config: &SystemConfig, omega: f64, kind: fn(Channel) -> KernelKind, tol: f64) -> Result<f64> {
    let x = omega.abs() * config.z0 / C_LIGHT;
    let n = config.n();
    let mut sum = 0.0;
    for (channel, _) in config.material.channels() {
        let k = kernels::kernel(kind(channel), n, x, tol)?;
        sum += config.material.strength(channel)? * k.value;
    }
    Ok(sum)
}

/// Zero-temperature moment `∫₀^Ω dω ω^power Σ_s α''_s(Ω−ω) ψ_s(n, ωz₀/c)`.
fn zero_t_moment(config: &SystemConfig, power: i32, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let omega = config.omega_rot;
    if omega == 0.0 {
        return Ok(0.0);
    }
    let tol = inner_tolerance(rel_tol);
    let quad = Quadrature::new(rel_tol);
    integrate_fallible(
        &quad,
        |w| Ok(w.powi(power) * (omega - w) * weighted_kernel(config, w, KernelKind::Psi, tol)?),
        &[0.0, omega],
        "zero-temperature moment",
    )
}

/// Intensity at `T₁ = T₂ = 0` by direct quadrature over `ω ∈ [0, Ω]`, erg/s.
pub fn intensity_zero_t(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(-HBAR / (PI * C_LIGHT.powi(3)) * zero_t_moment(config, 4, rel_tol)?)
}

/// Torque at `T₁ = T₂ = 0` by direct quadrature, erg.
pub fn torque_zero_t(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(2.0 * HBAR / (PI * C_LIGHT.powi(3)) * zero_t_moment(config, 3, rel_tol)?)
}

/// `ω·[coth(πω/θ) − sgn ω] = 2|ω| / (e^{2π|ω|/θ} − 1)`; `θ/π` at ω = 0 and
/// zero at θ = 0.
pub fn thermal_excess(omega: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let w = omega.abs();
    if w == 0.0 {
        return theta / PI;
    }
    2.0 * w / (2.0 * PI * w / theta).exp_m1()
}

/// Frequency structure of the folded spectral integrand, without the
/// kernel weight: `ω^p (ω+Ω) [coth(ħω/2k_BT₂) − coth(ħ(ω+Ω)/2k_BT₁)]` with
/// `p = 4` for the intensity and `p = 3` for the torque, rearranged so that
/// no large terms cancel.
fn spectral_factor(omega: f64, omega_rot: f64, theta1: f64, theta2: f64, power: i32) -> f64 {
    let shifted = omega + omega_rot;
    let step = if omega < 0.0 && shifted > 0.0 { -2.0 } else { 0.0 };
    let wp1 = omega.powi(power - 1);
    wp1 * omega * shifted * step + wp1 * shifted * thermal_excess(omega, theta2)
        - wp1 * omega * thermal_excess(shifted, theta1)
}

fn spectral_points(omega_rot: f64, theta1: f64, theta2: f64) -> Vec<f64> {
    let top = OMEGA_CUTOFF_FACTOR * omega_rot.max(theta1).max(theta2);
    let mut pts = vec![-top, -omega_rot, 0.0, top];
    for p in [-omega_rot - 10.0 * theta1, -omega_rot + 10.0 * theta1, -10.0 * theta2, 10.0 * theta2] {
        if p > -top && p < top {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn spectral_integral(config: &SystemConfig, power: i32, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let (om, th1, th2) = (config.omega_rot, config.theta1(), config.theta2());
    if om == 0.0 && th1 == th2 {
        return Ok(0.0);
    }
    let tol = inner_tolerance(rel_tol);
    let integrand = |w: f64| -> Result<f64> {
        let f = spectral_factor(w, om, th1, th2, power);
        if f == 0.0 {
            return Ok(0.0);
        }
        Ok(f * weighted_kernel(config, w, KernelKind::Psi, tol)?)
    };
    let pts = spectral_points(om, th1, th2);
    let quad = Quadrature::new(rel_tol).max_intervals(8000);
    let value = integrate_fallible(&quad, integrand, &pts, "spectral integral")?;

    let top = *pts.last().expect("non-empty");
    let tail = top * (integrand(top)?.abs() + integrand(-top)?.abs());
    if tail > rel_tol * value.abs() {
        return Err(Error::numerical(
            format!("spectral tail at ω = {top:e} is not negligible"),
            value,
        ));
    }
    Ok(value)
}

/// Net radiated intensity from the full spectral integral over ω of the
/// rotating-dipole channel, erg/s. Reduces to [`intensity_zero_t`] at zero
/// temperatures and to the closed form for small `x`.
pub fn spectral_rate_rotational(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(HBAR / (2.0 * PI * C_LIGHT.powi(3)) * spectral_integral(config, 4, rel_tol)?)
}

/// Frictional torque from the full spectral integral, erg.
pub fn spectral_torque_rotational(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    Ok(HBAR / (PI * C_LIGHT.powi(3)) * spectral_integral(config, 3, rel_tol)?)
}

/// Spectral density of the net radiated intensity at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSample {
    /// s⁻¹
    pub omega: f64,
    /// erg (erg/s per unit ω)
    pub integrand_value: f64,
}

/// Samples the intensity integrand of [`spectral_rate_rotational`].
pub fn spectral_samples(config: &SystemConfig, omegas: &[f64], rel_tol: f64) -> Result<Vec<SpectralSample>> {
    let tol = inner_tolerance(rel_tol);
    let (om, th1, th2) = (config.omega_rot, config.theta1(), config.theta2());
    omegas
        .iter()
        .map(|&w| {
            let f = spectral_factor(w, om, th1, th2, 4);
            let k = if f == 0.0 { 0.0 } else { weighted_kernel(config, w, KernelKind::Psi, tol)? };
            let value = HBAR / (2.0 * PI * C_LIGHT.powi(3)) * f * k;
            if value.is_finite() {
                Ok(SpectralSample { omega: w, integrand_value: value })
            } else {
                Err(Error::numerical(format!("non-finite spectral density at ω = {w:e}"), value))
            }
        })
        .collect()
}

/// Experimental: heating of the particle through the dipole component
/// normal to the plate (the Ω-independent term, kernel `χ_s`), erg/s.
/// Negative when the particle is hotter than the plate.
pub fn heat_exchange_z(config: &SystemConfig, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let (th1, th2) = (config.theta1(), config.theta2());
    if th1 == th2 {
        return Ok(0.0);
    }
    let tol = inner_tolerance(rel_tol);
    let top = OMEGA_CUTOFF_FACTOR * th1.max(th2);
    let mut pts = vec![0.0, top];
    for p in [10.0 * th1, 10.0 * th2] {
        if p > 0.0 && p < top {
            pts.push(p);
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let quad = Quadrature::new(rel_tol);
    // The integrand is even in ω, so the full line is twice the half line.
    let half = integrate_fallible(
        &quad,
        |w| {
            let f = w.powi(4) * (thermal_excess(w, th2) - thermal_excess(w, th1));
            if f == 0.0 {
                return Ok(0.0);
            }
            Ok(f * weighted_kernel(config, w, KernelKind::Chi, tol)?)
        },
        &pts,
        "normal-dipole exchange",
    )?;
    Ok(-HBAR / (PI * C_LIGHT.powi(3)) * half)
}
