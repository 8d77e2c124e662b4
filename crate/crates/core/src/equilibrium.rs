//! Effective particle temperature at which internal heating vanishes, the
//! intensity normalization `I₀`, normalized intensity curves and the
//! intensity-factor table.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::constants::{erg_per_s_to_watts, temperature_from_frequency, thermal_frequency, C_LIGHT, HBAR};
use crate::error::{Error, Result};
use crate::kernels::{self, PlateOptics};
use crate::material::Material;
use crate::rates::{heating_bracket, ClosedForm};

/// Equilibrium thermal frequency of the particle, `θ₁*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumRoot {
    /// s⁻¹
    pub theta1_star: f64,
    pub iterations: usize,
    /// `|heating bracket|` at the root over its largest term.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumResult {
    /// s⁻¹
    pub theta1_star: f64,
    /// K
    pub t1_star: f64,
    /// erg/s; equals `−M_zΩ` at the root.
    pub intensity_eq: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn heating_terms_max(y: f64, y2: f64, w: f64) -> f64 {
    let (y2sq, ysq, wsq) = (y2 * y2, y * y, w * w);
    [
        y2sq * y2sq * y2sq / 126.0,
        ysq * ysq * ysq / 126.0,
        wsq * y2sq * y2sq / 30.0,
        wsq * wsq * ysq / 6.0,
        2.0 * wsq * wsq * wsq / 15.0,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// Solves `dQ'/dt = 0` for `θ₁` given the environment `θ₂` and Ω.
///
/// The heating bracket is positive at `θ₁ = θ₂` and falls as `−θ₁⁶`, so a
/// single positive root lies above `θ₂`. It is bracketed by doubling and
/// refined by Newton steps that fall back to bisection whenever a step
/// leaves the bracket.
pub fn equilibrium_theta(theta2: f64, omega_rot: f64) -> Result<EquilibriumRoot> {
    for (name, v) in [("theta2", theta2), ("omega", omega_rot)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    if theta2 == 0.0 && omega_rot == 0.0 {
        return Err(Error::Degenerate(
            "no rotation and zero environment temperature: equilibrium undefined".into(),
        ));
    }
    if omega_rot == 0.0 {
        return Ok(EquilibriumRoot {
            theta1_star: theta2,
            iterations: 0,
            residual: 0.0,
        });
    }

    let scale = theta2.max(omega_rot);
    let (y2, w) = (theta2 / scale, omega_rot / scale);
    let f = |y: f64| heating_bracket(y, y2, w);
    let df = |y: f64| -y.powi(5) / 21.0 + w.powi(4) * y / 3.0;

    let mut lo = y2;
    let mut hi = y2.max(3.0 * w);
    let mut iterations = 0;
    while f(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations > 200 {
            return Err(Error::numerical("could not bracket the equilibrium root", hi * scale));
        }
    }

    let mut y = 0.5 * (lo + hi);
    for _ in 0..200 {
        iterations += 1;
        let fy = f(y);
        if fy == 0.0 {
            lo = y;
            hi = y;
            break;
        }
        if fy > 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let d = df(y);
        let newton = y - fy / d;
        y = if d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }

    let best = [lo, hi, y]
        .into_iter()
        .min_by(|a, b| f(*a).abs().total_cmp(&f(*b).abs()))
        .expect("three candidates");
    let residual = f(best).abs() / heating_terms_max(best, y2, w);
    Ok(EquilibriumRoot {
        theta1_star: best * scale,
        iterations,
        residual,
    })
}

/// Equilibrium state including the radiated intensity for given rates.
pub fn equilibrium_state(rates: &ClosedForm, theta2: f64, omega_rot: f64) -> Result<EquilibriumResult> {
    let root = equilibrium_theta(theta2, omega_rot)?;
    Ok(EquilibriumResult {
        theta1_star: root.theta1_star,
        t1_star: temperature_from_frequency(root.theta1_star),
        intensity_eq: rates.intensity(root.theta1_star, theta2, omega_rot),
        iterations: root.iterations,
        residual: root.residual,
    })
}

/// `I₀ = ħAR³|ψ_e(n, 0)|θ₂⁶ / 2πc³` in watts.
pub fn i0_factor(material: &Material, n: f64, t2: f64, rel_tol: f64) -> Result<f64> {
    if !(t2 > 0.0) {
        return Err(Error::Domain(format!("T2 must be positive, got {t2}")));
    }
    if !(n > 1.0) {
        return Err(Error::Domain(format!("refractive index must exceed 1, got {n}")));
    }
    let psi = kernels::psi_e(n, 0.0, rel_tol)?.value;
    Ok(i0_from_psi(material, psi, thermal_frequency(t2)?))
}

fn i0_from_psi(material: &Material, psi_e: f64, theta2: f64) -> f64 {
    let erg = HBAR * material.slope_e() * material.radius().powi(3) * psi_e.abs() * theta2.powi(6)
        / (2.0 * PI * C_LIGHT.powi(3));
    erg_per_s_to_watts(erg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveMode {
    /// Particle at its equilibrium temperature.
    Equilibrium,
    /// Particle held at the environment temperature.
    FixedT1EqualsT2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub omega_over_theta2: f64,
    pub intensity_over_i0: f64,
    pub t1_over_t2: f64,
}

/// `points` log-spaced values from `from` to `to` inclusive.
pub fn log_grid(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![from],
        _ => {
            let (a, b) = (from.ln(), to.ln());
            let last = points - 1;
            (0..points)
                .map(|i| match i {
                    0 => from,
                    _ if i == last => to,
                    _ => (a + (b - a) * i as f64 / last as f64).exp(),
                })
                .collect()
        }
    }
}

/// Default abscissae for normalized curves: 200 points over `Ω/θ₂ ∈ [1e-2, 1e2]`.
pub fn default_curve_grid() -> Vec<f64> {
    log_grid(1e-2, 1e2, 200)
}

/// Normalized intensity `I/I₀` and temperature ratio `T₁/T₂` along a grid
/// of `Ω/θ₂`.
pub fn normalized_curve(
    n: f64,
    material: &Material,
    t2: f64,
    omega_grid: &[f64],
    mode: CurveMode,
    rel_tol: f64,
) -> Result<Vec<CurvePoint>> {
    if let Some(bad) = omega_grid.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("grid values must be positive, got {bad}")));
    }
    let plate = PlateOptics::new(n)?;
    let rates = ClosedForm::new(material, &plate, rel_tol)?;
    let theta2 = thermal_frequency(t2)?;
    if theta2 == 0.0 {
        return Err(Error::Domain("T2 must be positive for a normalized curve".into()));
    }
    let i0 = i0_factor(material, n, t2, rel_tol)?;

    omega_grid
        .iter()
        .map(|&ratio| {
            let omega = ratio * theta2;
            let theta1 = match mode {
                CurveMode::Equilibrium => equilibrium_theta(theta2, omega)?.theta1_star,
                CurveMode::FixedT1EqualsT2 => theta2,
            };
            let intensity = erg_per_s_to_watts(rates.intensity(theta1, theta2, omega));
            Ok(CurvePoint {
                omega_over_theta2: ratio,
                intensity_over_i0: intensity / i0,
                t1_over_t2: theta1 / theta2,
            })
        })
        .collect()
}

/// Refractive indices of the published intensity-factor table.
pub const TABLE_N: [f64; 4] = [3.0, 10.0, 30.0, 50.0];
/// Plate temperatures (K) of the published table.
pub const TABLE_T2: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
/// Published `I₀` in watts for a 50 nm SiO₂ sphere; rows follow
/// [`TABLE_T2`], columns [`TABLE_N`].
pub const TABULATED_I0_SIO2_50NM: [[f64; 4]; 4] = [
    [1.3e-32, 5.9e-32, 1.9e-31, 6.4e-31],
    [1.3e-26, 5.9e-26, 1.9e-25, 6.4e-25],
    [1.3e-20, 5.9e-20, 1.9e-19, 6.4e-19],
    [1.3e-14, 5.9e-14, 1.9e-13, 6.4e-13],
];

/// `I₀` (W) on the grid `t2_list × n_list`; rows follow `t2_list`.
pub fn table_repro(material: &Material, n_list: &[f64], t2_list: &[f64], rel_tol: f64) -> Result<Vec<Vec<f64>>> {
    if n_list.is_empty() || t2_list.is_empty() {
        return Err(Error::Domain("table needs at least one n and one T2".into()));
    }
    if let Some(t) = t2_list.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::Domain(format!("T2 must be positive, got {t}")));
    }
    if let Some(n) = n_list.iter().find(|n| !(**n > 1.0)) {
        return Err(Error::Domain(format!("refractive index must exceed 1, got {n}")));
    }
    let psi: Vec<f64> = n_list
        .par_iter()
        .map(|&n| kernels::psi_e(n, 0.0, rel_tol).map(|k| k.value))
        .collect::<Result<_>>()?;
    t2_list
        .iter()
        .map(|&t2| {
            let theta2 = thermal_frequency(t2)?;
            Ok(psi.iter().map(|&p| i0_from_psi(material, p, theta2)).collect())
        })
        .collect()
}
