//! Spin-down and heating of the particle over time.
//!
//! The closed-form torque and heating rate are used as instantaneous force
//! laws: thermal relaxation is fast against deceleration, so the rates at
//! the current `(Ω, T₁)` apply. The state obeys
//!
//! ```text
//! I_mom dΩ/dt = M_z(Ω, T₁, T₂)
//! C(T₁) dT₁/dt = dQ'/dt(Ω, T₁, T₂)
//! ```
//!
//! and is advanced with an adaptive Dormand–Prince 5(4) pair. Output is
//! sampled on a fixed stride; internal steps are clipped to land on it.

use std::f64::consts::PI;

use crate::constants::{AVOGADRO, HBAR, K_BOLTZMANN};
use crate::equilibrium::equilibrium_theta;
use crate::error::{Error, Result};
use crate::material::Material;
use crate::rates::{retardation_parameter, ClosedForm, SystemConfig, RETARDATION_WARNING};

/// Local relative error allowed per step.
pub const DEFAULT_STEP_REL_TOL: f64 = 1e-8;

/// `dθ/dT = 2πk_B/ħ`.
const THETA_PER_KELVIN: f64 = 2.0 * PI * K_BOLTZMANN / HBAR;

#[derive(Debug, Clone, PartialEq)]
pub enum HeatCapacity {
    /// erg/K
    Constant(f64),
    /// `(T in K, C in erg/K)` pairs with increasing T; linear between
    /// nodes and constant beyond the ends.
    Tabulated(Vec<(f64, f64)>),
}

impl HeatCapacity {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            HeatCapacity::Constant(c) => *c,
            HeatCapacity::Tabulated(table) => {
                let (first, last) = (table[0], table[table.len() - 1]);
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = table.partition_point(|p| p.0 <= t);
                let (a, b) = (table[i - 1], table[i]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyProperties {
    /// g·cm²
    pub moment_of_inertia: f64,
    pub heat_capacity: HeatCapacity,
}

/// Density (g/cm³), molar mass (g/mol) and atoms per formula unit for the
/// material presets.
fn preset_composition(name: &str) -> Option<(f64, f64, f64)> {
    match name.to_ascii_lowercase().as_str() {
        "sio2" | "silica" => Some((2.2, 60.08, 3.0)),
        "graphite" => Some((2.26, 12.011, 1.0)),
        _ => None,
    }
}

impl BodyProperties {
    pub fn new(moment_of_inertia: f64, heat_capacity: HeatCapacity) -> Result<Self> {
        if !(moment_of_inertia > 0.0) || !moment_of_inertia.is_finite() {
            return Err(Error::Domain(format!(
                "moment of inertia must be positive, got {moment_of_inertia}"
            )));
        }
        match &heat_capacity {
            HeatCapacity::Constant(c) => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::Domain(format!("heat capacity must be positive, got {c}")));
                }
            }
            HeatCapacity::Tabulated(t) => {
                if t.is_empty() {
                    return Err(Error::Domain("heat capacity table is empty".into()));
                }
                if t.iter().any(|p| !(p.1 > 0.0) || !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(Error::Domain("heat capacity table values must be positive".into()));
                }
                if t.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::Domain("heat capacity table temperatures must increase".into()));
                }
            }
        }
        Ok(BodyProperties {
            moment_of_inertia,
            heat_capacity,
        })
    }

    /// Homogeneous sphere of the given density with Dulong–Petit heat
    /// capacity `3k_B` per atom.
    pub fn sphere(radius: f64, density: f64, molar_mass: f64, atoms_per_unit: f64) -> Result<Self> {
        let mass = density * 4.0 / 3.0 * PI * radius.powi(3);
        let atoms = mass / molar_mass * AVOGADRO * atoms_per_unit;
        BodyProperties::new(
            0.4 * mass * radius * radius,
            HeatCapacity::Constant(3.0 * K_BOLTZMANN * atoms),
        )
    }

    /// Sphere properties for a preset material (SiO₂ or graphite).
    pub fn for_material(material: &Material) -> Result<Self> {
        let (rho, molar, atoms) = preset_composition(material.name()).ok_or_else(|| {
            Error::Config(format!(
                "no density or heat capacity known for material '{}'",
                material.name()
            ))
        })?;
        BodyProperties::sphere(material.radius(), rho, molar, atoms)
    }
}

/// Integrator state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// s
    pub time: f64,
    /// s⁻¹
    pub omega: f64,
    /// K
    pub t_particle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// s
    pub time: f64,
    /// s⁻¹
    pub omega: f64,
    /// K
    pub t_particle: f64,
    /// erg/s
    pub intensity: f64,
    /// erg
    pub kinetic_energy: f64,
}

/// Result of one embedded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: State,
    /// Per-component difference between the 5th and 4th order solutions,
    /// `(ΔΩ, ΔT₁)`.
    pub error: [f64; 2],
}

/// Right-hand side of the spin and heat equations for one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinSystem {
    rates: ClosedForm,
    theta2: f64,
    body: BodyProperties,
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th minus 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec2 = [f64; 2];

fn axpy(y: Vec2, terms: &[(f64, Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

impl SpinSystem {
    pub fn new(config: &SystemConfig, body: BodyProperties) -> Result<Self> {
        Ok(SpinSystem {
            rates: ClosedForm::for_config(config)?,
            theta2: config.theta2(),
            body,
        })
    }

    pub fn from_parts(rates: ClosedForm, theta2: f64, body: BodyProperties) -> Self {
        SpinSystem { rates, theta2, body }
    }

    pub fn rates(&self) -> &ClosedForm {
        &self.rates
    }

    pub fn body(&self) -> &BodyProperties {
        &self.body
    }

    fn theta(t: f64) -> f64 {
        THETA_PER_KELVIN * t.max(0.0)
    }

    /// `(dΩ/dt, dT₁/dt)`.
    pub fn derivatives(&self, omega: f64, t_particle: f64) -> Vec2 {
        let (th1, w) = (Self::theta(t_particle), omega.max(0.0));
        [
            self.rates.torque(th1, self.theta2, w) / self.body.moment_of_inertia,
            self.rates.heating(th1, self.theta2, w) / self.body.heat_capacity.at(t_particle),
        ]
    }

    fn derivatives_of(&self, y: Vec2) -> Vec2 {
        self.derivatives(y[0], y[1])
    }

    pub fn point(&self, state: State) -> TrajectoryPoint {
        let th1 = Self::theta(state.t_particle);
        TrajectoryPoint {
            time: state.time,
            omega: state.omega,
            t_particle: state.t_particle,
            intensity: self.rates.intensity(th1, self.theta2, state.omega),
            kinetic_energy: 0.5 * self.body.moment_of_inertia * state.omega * state.omega,
        }
    }

    fn dp_step(&self, y: Vec2, k1: Vec2, h: f64) -> (Vec2, Vec2, Vec2) {
        let k2 = self.derivatives_of(axpy(y, &[(A21, k1)], h));
        let k3 = self.derivatives_of(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = self.derivatives_of(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = self.derivatives_of(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = self.derivatives_of(axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h));
        let y5 = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
        let k7 = self.derivatives_of(y5);
        let err = axpy(
            [0.0, 0.0],
            &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
            h,
        );
        (y5, err, k7)
    }

    /// One Dormand–Prince step of size `dt` without error control.
    pub fn step(&self, state: State, dt: f64) -> Result<StepOutcome> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("step size must be positive, got {dt}")));
        }
        let y = [state.omega, state.t_particle];
        let (y5, error, _) = self.dp_step(y, self.derivatives_of(y), dt);
        if !y5.iter().chain(error.iter()).all(|v| v.is_finite()) {
            return Err(Error::numerical("non-finite state in step", y5[0]));
        }
        Ok(StepOutcome {
            state: State {
                time: state.time + dt,
                omega: y5[0].max(0.0),
                t_particle: y5[1],
            },
            error,
        })
    }
}

/// Options for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub rel_tol: f64,
    /// Allows configurations where the small-distance rates are outside
    /// their range. Results there are exploratory.
    pub experimental_large_x: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rel_tol: DEFAULT_STEP_REL_TOL,
            experimental_large_x: false,
        }
    }
}

/// Characteristic scales of a state used for absolute error floors:
/// the initial values and the equilibrium temperature.
fn state_scales(config: &SystemConfig) -> Vec2 {
    let t_star = equilibrium_theta(config.theta2(), config.omega_rot)
        .map(|r| r.theta1_star / THETA_PER_KELVIN)
        .unwrap_or(0.0);
    let t_scale = config
        .thermal
        .t_particle
        .max(config.thermal.t_environment)
        .max(t_star);
    [config.omega_rot, t_scale]
}

/// Integrates from the state in `config` to `t_end`, sampling every
/// `output_stride` seconds (and at `t_end`).
pub fn evolve(config: &SystemConfig, body: &BodyProperties, t_end: f64, output_stride: f64) -> Result<Vec<TrajectoryPoint>> {
    evolve_with(config, body, t_end, output_stride, EvolveOptions::default())
}

pub fn evolve_with(
    config: &SystemConfig,
    body: &BodyProperties,
    t_end: f64,
    output_stride: f64,
    options: EvolveOptions,
) -> Result<Vec<TrajectoryPoint>> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!("t_end must be positive, got {t_end}")));
    }
    if !(output_stride > 0.0) || !output_stride.is_finite() {
        return Err(Error::Domain(format!("output stride must be positive, got {output_stride}")));
    }
    if !(options.rel_tol > 0.0 && options.rel_tol < 1.0) {
        return Err(Error::Domain(format!("step tolerance must lie in (0, 1), got {}", options.rel_tol)));
    }
    let samples = (t_end / output_stride).ceil();
    if samples > 1e7 {
        return Err(Error::Domain(format!("{samples} output samples requested; limit is 1e7")));
    }
    let retardation = retardation_parameter(config);
    if retardation > RETARDATION_WARNING && !options.experimental_large_x {
        return Err(Error::Domain(format!(
            "retardation parameter {retardation:.3e} exceeds {RETARDATION_WARNING}; \
             enable the experimental large-x mode to integrate anyway"
        )));
    }

    let system = SpinSystem::new(config, body.clone())?;
    let rtol = options.rel_tol;
    let scales = state_scales(config);
    let atol = [rtol * 1e-3 * scales[0], rtol * 1e-3 * scales[1]];

    let mut state = State {
        time: 0.0,
        omega: config.omega_rot,
        t_particle: config.thermal.t_particle,
    };
    let mut y = [state.omega, state.t_particle];
    let mut k1 = system.derivatives_of(y);
    let mut out = vec![system.point(state)];

    let norm = |v: Vec2, y0: Vec2, y1: Vec2| -> f64 {
        let mut s = 0.0f64;
        for i in 0..2 {
            let sc = atol[i] + rtol * y0[i].abs().max(y1[i].abs());
            if sc > 0.0 {
                s = s.max(v[i].abs() / sc);
            } else if v[i] != 0.0 {
                return f64::INFINITY;
            }
        }
        s
    };

    // Initial step from the ratio of state to rate magnitudes.
    let mut h = {
        let d0 = norm(y, y, y);
        let d1 = norm(k1, y, y);
        if d0 > 1e-5 && d1 > 1e-5 && d1.is_finite() {
            0.01 * d0 / d1
        } else {
            output_stride
        }
    }
    .min(output_stride);

    let mut index = 1u64;
    loop {
        let target = (index as f64 * output_stride).min(t_end);
        while state.time < target {
            let remaining = target - state.time;
            let last = h >= remaining;
            let dt = if last { remaining } else { h };
            if dt <= f64::EPSILON * state.time.abs().max(f64::MIN_POSITIVE) * 4.0 || dt < f64::MIN_POSITIVE {
                return Err(Error::numerical(
                    format!("step size underflow at t = {:e}", state.time),
                    state.omega,
                ));
            }
            let (y5, err, k7) = system.dp_step(y, k1, dt);
            if !y5.iter().chain(err.iter()).all(|v| v.is_finite()) {
                return Err(Error::numerical(
                    format!("non-finite state at t = {:e}", state.time),
                    state.omega,
                ));
            }
            let e = norm(err, y, y5);
            if e <= 1.0 {
                state.time = if last { target } else { state.time + dt };
                y = [y5[0].max(0.0), y5[1]];
                k1 = if y[0] == y5[0] { k7 } else { system.derivatives_of(y) };
                state.omega = y[0];
                state.t_particle = y[1];
                let grow = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                // A step shortened to hit the output time does not shrink
                // the next proposal.
                h = if last { h.max(dt * grow) } else { dt * grow };
            } else {
                h = dt * (0.9 * e.powf(-0.2)).clamp(0.1, 1.0);
            }
        }
        out.push(system.point(state));
        if target >= t_end {
            break;
        }
        index += 1;
    }
    Ok(out)
}

/// Thermal relaxation and spin-down times at the equilibrium temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timescales {
    /// `C / |∂(dQ'/dt)/∂T₁|`, s
    pub thermal: f64,
    /// `I_mom Ω / |M_z|`, s
    pub spin_down: f64,
}

pub fn timescales(config: &SystemConfig, body: &BodyProperties) -> Result<Timescales> {
    let omega = config.omega_rot;
    if omega == 0.0 {
        return Err(Error::Degenerate("timescales need a rotating particle".into()));
    }
    let rates = ClosedForm::for_config(config)?;
    let th2 = config.theta2();
    let th1 = equilibrium_theta(th2, omega)?.theta1_star;
    let dbracket = -th1.powi(5) / 21.0 + omega.powi(4) * th1 / 3.0;
    let dheat_dt = -rates.prefactor() * dbracket * THETA_PER_KELVIN;
    let t1 = th1 / THETA_PER_KELVIN;
    Ok(Timescales {
        thermal: body.heat_capacity.at(t1) / dheat_dt.abs(),
        spin_down: body.moment_of_inertia * omega / rates.torque(th1, th2, omega).abs(),
    })
}

/// SiO₂ sphere of 50 nm radius, 1 μm above an n = 3 plate, spinning at
/// 10⁹ s⁻¹ with everything initially at zero temperature.
pub fn default_scenario() -> (SystemConfig, BodyProperties) {
    use crate::kernels::PlateOptics;
    use crate::material::ThermalState;
    let material = Material::sio2(5e-6).expect("valid preset");
    let body = BodyProperties::for_material(&material).expect("preset composition");
    let config = SystemConfig::new(
        material,
        PlateOptics::new(3.0).expect("valid index"),
        1e-4,
        1e9,
        ThermalState::uniform(0.0).expect("valid temperature"),
    )
    .expect("valid scenario");
    (config, body)
}
